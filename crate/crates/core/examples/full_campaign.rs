//! The whole pipeline on a small catalog, with the figure bundle written
//! to a temporary directory.
//!
//!     cargo run --release --example full_campaign -- 5000 6

use std::sync::Arc;

use galaxy_settler::campaign::run_campaign;
use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::figures::write_bundle;

fn main() -> galaxy_settler::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5_000, |s| s.parse().expect("star count"));
    let mut cfg = StrategyConfig::default();
    cfg.settler.max_generation = args.next().map_or(6, |s| s.parse().expect("generation cap"));
    let catalog = generate_synthetic(n, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let ephemeris = EphemerisGrid::build(&catalog)?;
    let run = run_campaign(&catalog, Some(&ephemeris), &cfg)?;

    for s in &run.seeds {
        println!("{} #{}: settled {:?}", s.kind, s.index + 1, s.settled);
    }
    for g in &run.generation_stats {
        println!("generation {:2}: {:5} new {:6} cumulative", g.generation, g.new, g.cumulative);
    }
    let m = &run.merit;
    println!(
        "N = {}, E_r = {:.2}, E_theta = {:.2}, ΔV {:.0}/{:.0} km/s, J = {:.2}",
        m.n, m.e_r, m.e_theta, m.dv_used, m.dv_max, m.j
    );
    println!("validation: {}", if run.validation.valid { "VALID" } else { "INVALID" });

    let dir = std::env::temp_dir().join("galaxy-settler-campaign-example");
    let files = write_bundle(&dir, &catalog, &cfg, Some(&run.events))?;
    println!("{} figure files in {}", files.len(), dir.display());
    Ok(())
}
