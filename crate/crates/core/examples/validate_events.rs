//! Run a short campaign, then check its event log and a tampered copy.

use std::sync::Arc;

use galaxy_settler::campaign::run_campaign;
use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::tree::{events_from_str, events_to_string, validate, EventNote};
use galaxy_settler::strategies::ShipKind;

fn main() -> galaxy_settler::error::Result<()> {
    let mut cfg = StrategyConfig::default();
    cfg.settler.max_generation = 3;
    let catalog = generate_synthetic(3_000, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let ephemeris = EphemerisGrid::build(&catalog)?;
    let run = run_campaign(&catalog, Some(&ephemeris), &cfg)?;
    let events = events_from_str(&events_to_string(&run.events)?)?;
    let report = validate(&events, &catalog, &cfg.validation_config());
    println!("{} events, valid = {}, N = {}", events.len(), report.valid, report.totals.n);

    let mut tampered = events.clone();
    let e = tampered
        .iter_mut()
        .find(|e| e.vehicle_kind == ShipKind::Settler && e.note == EventNote::Depart)
        .expect("a settler departure");
    let dv = e.dv().normalize() * 176.0;
    e.set_dv(&dv);
    let id = e.event_id;
    let report = validate(&tampered, &catalog, &cfg.validation_config());
    println!("settler event {id} raised to 176 km/s: valid = {}", report.valid);
    for r in report.rules.iter().filter(|r| !r.passed) {
        println!("  {:?}: {}", r.rule, r.violations[0].message);
    }
    Ok(())
}
