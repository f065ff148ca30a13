//! Fast-ship target choice for both default sectors.

use std::collections::HashSet;
use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::strategies::fast_ship_select;

fn main() -> galaxy_settler::error::Result<()> {
    let cfg = StrategyConfig::default();
    let catalog = generate_synthetic(10_000, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let mut settled = HashSet::new();
    for p in &cfg.fast_ships {
        let (sol, log) = fast_ship_select(&catalog, p, &settled, &cfg.budgets.fast_ship, &cfg.fast_ship_options())?;
        let feasible = log.iter().filter(|e| e.tof.is_some()).count();
        println!(
            "sector [{}, {}]: {} rim candidates, {} feasible, star {} after {} Myr using {:.1} km/s",
            p.theta_min,
            p.theta_max,
            log.len(),
            feasible,
            sol.target,
            sol.tof(),
            sol.total_dv()
        );
        settled.insert(sol.target);
    }
    Ok(())
}
