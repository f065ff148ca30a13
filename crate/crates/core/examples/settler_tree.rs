//! Grow a settlement tree from a couple of seeds and print the per
//! generation counts.

use std::collections::HashSet;
use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::strategies::{settler_campaign, MomentumSearch, Seed};

fn main() -> galaxy_settler::error::Result<()> {
    let mut cfg = StrategyConfig::default();
    cfg.settler.max_generation = 5;
    let catalog = generate_synthetic(5_000, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let ephemeris = EphemerisGrid::build(&catalog)?;
    let search = MomentumSearch::new(&catalog, Some(&ephemeris), cfg.search);
    let seeds = [Seed { star: 100, arrival_t: 10.0 }, Seed { star: 200, arrival_t: 15.0 }];
    let out = settler_campaign(&catalog, &seeds, &HashSet::new(), &search, &cfg.budgets.settler, &cfg.settler_options());
    let mut per_gen = vec![seeds.len()];
    for s in &out.settlements {
        if per_gen.len() < s.generation {
            per_gen.resize(s.generation, 0);
        }
        per_gen[s.generation - 1] += 1;
    }
    let mut cumulative = 0;
    for (g, n) in per_gen.iter().enumerate() {
        cumulative += n;
        println!("generation {:2}: {n:4} new, {cumulative:5} total", g + 1);
    }
    let worst = out.settlements.iter().map(|s| s.solution.total_dv()).fold(0.0, f64::max);
    println!("{} ships failed; largest settler ΔV {:.1} km/s", out.failed_ships, worst);
    Ok(())
}
