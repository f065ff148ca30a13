//! The three default mothership chains and their pod releases.

use std::collections::HashSet;
use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::strategies::{mothership_run, MomentumSearch};

fn main() -> galaxy_settler::error::Result<()> {
    let cfg = StrategyConfig::default();
    let catalog = generate_synthetic(10_000, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let ephemeris = EphemerisGrid::build(&catalog)?;
    let search = MomentumSearch::new(&catalog, Some(&ephemeris), cfg.search);
    let mut settled = HashSet::new();
    for (i, p) in cfg.motherships.iter().enumerate() {
        let legs = mothership_run(&catalog, p, &settled, &search, &cfg.budgets, &cfg.mothership_options())?;
        println!("mothership {}:", i + 1);
        for leg in &legs {
            let f = &leg.flyby;
            println!(
                "  burn {:.1} km/s at {:4.1} Myr, flyby star {:5} at {:4.1} Myr, pod {:.1} km/s ({} retries)",
                f.total_dv(),
                f.departure_t,
                f.target,
                f.arrival_t,
                leg.pod.magnitude(),
                leg.violations
            );
            settled.insert(f.target);
        }
    }
    Ok(())
}
