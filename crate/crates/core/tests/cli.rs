use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use galaxy_settler::tree::{events_from_str, events_to_string, EventNote};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_galaxy-settler"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .find(|l| l.starts_with("error: kind="))
        .unwrap_or_default()
        .to_string()
}

fn generate(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let p = dir.join(format!("catalog_{n}_{seed}.csv"));
    let out = run(&["generate", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", s(&p)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

fn campaign(dir: &Path, catalog: &Path, max_generation: usize) -> PathBuf {
    let out_dir = dir.join(format!("run_{max_generation}"));
    let out = run(&[
        "run",
        "--catalog",
        s(catalog),
        "--out-dir",
        s(&out_dir),
        "--max-generation",
        &max_generation.to_string(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out_dir
}

#[test]
fn generate_writes_header_and_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), 10_000, 1);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "id,r_kpc,incl_deg,node_deg,phase0_deg");
    assert_eq!(text.lines().count(), 10_001);
    let b = dir.path().join("again.csv");
    assert!(run(&["generate", "--n", "10000", "--seed", "1", "--out", s(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn zero_stars_is_a_coded_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "--n", "0", "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).contains("code=2"));
}

#[test]
fn usage_and_missing_files_are_coded_errors() {
    let out = run(&["run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("error: kind=usage code=2"));
    let out = run(&["validate", "--events", "/nonexistent/e.csv", "--catalog", "/nonexistent/c.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).contains("code=2"));
}

#[test]
fn loosened_mothership_budget_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cat = generate(dir.path(), 200, 1);
    let mut cfg: serde_json::Value = serde_json::from_str(include_str!("../config/default.json")).unwrap();
    cfg["budgets"]["mothership"]["cumulative_kms"] = 600.0.into();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = run(&["run", "--catalog", s(&cat), "--config", s(&cfg_path), "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).contains("kind=config"), "{}", error_line(&out));
}

#[test]
fn seed_only_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cat = generate(dir.path(), 3000, 1);
    let out_dir = campaign(dir.path(), &cat, 1);
    for name in [
        "ephemeris.bin",
        "catalog.csv",
        "rotation_curve.json",
        "strategy_config.json",
        "events.csv",
        "merit_report.json",
        "validation.json",
        "generation_snapshots/gen_01.csv",
    ] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let events = events_from_str(&std::fs::read_to_string(out_dir.join("events.csv")).unwrap()).unwrap();
    let settles: Vec<_> = events.iter().filter(|e| e.note == EventNote::Rendezvous).collect();
    assert!(!settles.is_empty());
    assert!(settles.iter().all(|e| e.parent_star == 0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["valid"], true);

    // Rerun against the cached ephemeris reproduces the log byte for byte.
    let again = run(&[
        "--threads",
        "1",
        "run",
        "--catalog",
        s(&cat),
        "--out-dir",
        s(&out_dir),
        "--max-generation",
        "1",
    ]);
    assert!(again.status.success());
    let rerun = std::fs::read_to_string(out_dir.join("events.csv")).unwrap();
    assert_eq!(events_to_string(&events).unwrap(), rerun);
}

#[test]
fn validate_merit_and_figures_on_a_short_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let cat = generate(dir.path(), 3000, 7);
    let out_dir = campaign(dir.path(), &cat, 3);
    let events = out_dir.join("events.csv");

    let report = dir.path().join("v.json");
    let out = run(&["validate", "--events", s(&events), "--catalog", s(&cat), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let mut log = events_from_str(&std::fs::read_to_string(&events).unwrap()).unwrap();
    let last = log.iter().rposition(|e| e.note == EventNote::Rendezvous).unwrap();
    log[last].dvx += 5.0;
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, events_to_string(&log).unwrap()).unwrap();
    let out = run(&["validate", "--events", s(&bad), "--catalog", s(&cat), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("error: kind=validation code=2"));

    let merit = dir.path().join("m.json");
    assert!(run(&["merit", "--events", s(&events), "--catalog", s(&cat), "--out", s(&merit)]).status.success());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&merit).unwrap()).unwrap();
    let from_run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("merit_report.json")).unwrap()).unwrap();
    assert_eq!(m, from_run);
    for key in ["N", "E_r", "E_theta", "dv_used", "dv_max", "J"] {
        assert!(m.get(key).is_some(), "{key}");
    }
    assert!(m["J"].as_f64().unwrap() > 0.0);

    let fig = dir.path().join("fig");
    let out = run(&["figures", "--catalog", s(&cat), "--events", s(&events), "--out-dir", s(&fig)]);
    assert!(out.status.success());
    for name in [
        "radial_histogram.csv",
        "angular_histogram.csv",
        "speed_vs_r.csv",
        "merit_curve.csv",
        "high_value_stars.csv",
        "cumulative_by_generation.csv",
        "generation_snapshots/gen_01.csv",
        "generation_snapshots/gen_03.csv",
    ] {
        assert!(fig.join(name).exists(), "{name}");
    }
    let cumulative: Vec<usize> = std::fs::read_to_string(fig.join("cumulative_by_generation.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(cumulative.windows(2).all(|w| w[1] >= w[0]));
    let snapshot_rows = |g: &str| std::fs::read_to_string(fig.join("generation_snapshots").join(g)).unwrap().lines().count();
    assert!(snapshot_rows("gen_03.csv") >= snapshot_rows("gen_01.csv"));
}

#[test]
fn single_settlement_at_full_budget_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("c.csv");
    std::fs::write(&cat, "id,r_kpc,incl_deg,node_deg,phase0_deg\n0,8,0,0,0\n1,9,0,0,10\n").unwrap();
    // One fast ship spending exactly its 1500 km/s allowance.
    let events = dir.path().join("e.csv");
    std::fs::write(
        &events,
        "event_id,vehicle_id,vehicle_kind,parent_star,target_star,t_myr,dvx,dvy,dvz,note\n\
         0,0,fast_ship,0,1,0,900,0,0,depart\n\
         1,0,fast_ship,0,1,10,600,0,0,rendezvous\n",
    )
    .unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(include_str!("../config/default.json")).unwrap();
    cfg["grid"]["radial_bins"] = 1.into();
    cfg["grid"]["angular_bins"] = 1.into();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let merit = dir.path().join("m.json");
    let out = run(&["merit", "--events", s(&events), "--catalog", s(&cat), "--config", s(&cfg_path), "--out", s(&merit)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&merit).unwrap()).unwrap();
    assert_eq!(m["N"], 1);
    assert_eq!(m["dv_used"], m["dv_max"]);
    assert!((m["J"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{m}");
}
