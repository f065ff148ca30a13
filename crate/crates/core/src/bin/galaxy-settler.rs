use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use galaxy_settler::campaign::{merit_of_events, run_campaign};
use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, StarCatalog, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::error::{Error, Result};
use galaxy_settler::figures::{write_bundle, write_generation_snapshots};
use galaxy_settler::tree::{read_events, validate, write_events};

#[derive(Parser)]
#[command(name = "galaxy-settler", version, about = "Galaxy settlement campaign driver")]
struct Cli {
    /// Worker threads (default: hardware count).
    #[arg(long, global = true, env = "GALAXY_SETTLER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic catalog.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Synthetic profile JSON (radial density, inclinations, Sol).
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Strategy config supplying the rotation curve.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "catalog.csv")]
        out: PathBuf,
    },
    /// Run the full campaign and write its outputs.
    Run {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Stop after this many generations (1 keeps only the seeds).
        #[arg(long)]
        max_generation: Option<usize>,
        /// Also write solver_debug.json with per-transfer solver traces.
        #[arg(long)]
        debug_solver: bool,
    },
    /// Check an event log against every budget and trajectory rule.
    Validate {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "validation.json")]
        out: PathBuf,
    },
    /// Score an event log.
    Merit {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "merit_report.json")]
        out: PathBuf,
    },
    /// Write the figure CSV bundle.
    Figures {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<StrategyConfig> {
    match path {
        Some(p) => StrategyConfig::load(p),
        None => Ok(StrategyConfig::default()),
    }
}

fn load_catalog(path: &Path, cfg: &StrategyConfig) -> Result<StarCatalog> {
    StarCatalog::load(path, Arc::new(cfg.curve()?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Exit status for a run whose outputs were written but failed checks.
struct Invalid(String);

fn execute(cmd: Command) -> Result<std::result::Result<(), Invalid>> {
    match cmd {
        Command::Generate {
            n,
            seed,
            profile,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let profile: SyntheticProfile = match profile {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => SyntheticProfile::default(),
            };
            let catalog = generate_synthetic(n, seed, &profile, Arc::new(cfg.curve()?))?;
            catalog.write_csv(&out)?;
            println!("wrote {} stars to {}", catalog.len(), out.display());
        }
        Command::Run {
            catalog,
            config,
            out_dir,
            max_generation,
            debug_solver,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(g) = max_generation {
                if g == 0 {
                    return Err(Error::InvalidArgument("--max-generation must be at least 1".into()));
                }
                cfg.settler.max_generation = g;
            }
            let catalog = load_catalog(&catalog, &cfg)?;
            create_dir(&out_dir)?;
            let ephemeris = EphemerisGrid::load_or_build(&out_dir.join("ephemeris.bin"), &catalog)?;
            catalog.write_csv(&out_dir.join("catalog.csv"))?;
            write_json(&out_dir.join("rotation_curve.json"), &cfg.rotation_curve)?;
            cfg.save(&out_dir.join("strategy_config.json"))?;

            let result = run_campaign(&catalog, Some(&ephemeris), &cfg)?;
            write_events(&out_dir.join("events.csv"), &result.events)?;
            write_json(&out_dir.join("merit_report.json"), &result.merit)?;
            write_json(&out_dir.join("validation.json"), &result.validation)?;
            write_generation_snapshots(&out_dir, &result.tree, &catalog)?;
            if debug_solver {
                #[derive(Serialize)]
                struct Debug<'a> {
                    seeds: &'a [galaxy_settler::campaign::SeedReport],
                    fast_ship_evaluations: &'a [Vec<galaxy_settler::strategies::FastShipEvaluation>],
                    failed_settlers: usize,
                    settler_traces: &'a [galaxy_settler::campaign::SolverTrace],
                }
                write_json(
                    &out_dir.join("solver_debug.json"),
                    &Debug {
                        seeds: &result.seeds,
                        fast_ship_evaluations: &result.fast_ship_evaluations,
                        failed_settlers: result.failed_settlers,
                        settler_traces: &result.solver_traces,
                    },
                )?;
            }
            let m = &result.merit;
            println!(
                "N={} generations={} J={:.6} dv_used={:.3} dv_max={:.3} valid={}",
                m.n,
                result.tree.max_generation(),
                m.j,
                m.dv_used,
                m.dv_max,
                result.validation.valid
            );
            if !result.validation.valid {
                return Ok(Err(Invalid(format!("failed rules {:?}", result.validation.failed_rules()))));
            }
        }
        Command::Validate {
            events,
            catalog,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let catalog = load_catalog(&catalog, &cfg)?;
            let events = read_events(&events)?;
            let report = validate(&events, &catalog, &cfg.validation_config());
            write_json(&out, &report)?;
            for r in report.rules.iter().filter(|r| !r.passed) {
                for v in &r.violations {
                    println!("{:?}: event {:?} vehicle {:?}: {}", r.rule, v.event_id, v.vehicle_id, v.message);
                }
            }
            println!("valid={} N={}", report.valid, report.totals.n);
            if !report.valid {
                return Ok(Err(Invalid(format!("failed rules {:?}", report.failed_rules()))));
            }
        }
        Command::Merit {
            events,
            catalog,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let catalog = load_catalog(&catalog, &cfg)?;
            let events = read_events(&events)?;
            let report = merit_of_events(&catalog, &events, &cfg)?;
            write_json(&out, &report)?;
            println!("N={} E_r={:.6} E_theta={:.6} J={:.6}", report.n, report.e_r, report.e_theta, report.j);
        }
        Command::Figures {
            catalog,
            events,
            config,
            out_dir,
        } => {
            let cfg = load_config(config.as_deref())?;
            let catalog = load_catalog(&catalog, &cfg)?;
            let events = events.map(|p| read_events(&p)).transpose()?;
            let files = write_bundle(&out_dir, &catalog, &cfg, events.as_deref())?;
            println!("wrote {} files to {}", files.len(), out_dir.display());
        }
    }
    Ok(Ok(()))
}

fn error_line(kind: &str, code: u8, message: &str) {
    eprintln!("error: kind={kind} code={code} message={}", message.replace('\n', " "));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            error_line("usage", 2, e.kind().as_str().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error_line("threads", 2, &e.to_string());
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Invalid(msg))) => {
            error_line("validation", 2, &msg);
            ExitCode::from(2)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            error_line(e.kind(), code, &e.to_string());
            ExitCode::from(code)
        }
    }
}
