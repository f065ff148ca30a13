//! Uniformity errors, the merit value, the closest-N curve and the
//! high-value star grid.

use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, SyntheticProfile};
use galaxy_settler::config::StrategyConfig;
use galaxy_settler::figures::{high_value_rows, merit_curve};
use galaxy_settler::merit::{merit_j, reference_positions, BinnedSquaredError, UniformityError};

fn main() -> galaxy_settler::error::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(20_000, |s| s.parse().expect("star count"));
    let cfg = StrategyConfig::default();
    let catalog = generate_synthetic(n, 1, &SyntheticProfile::default(), Arc::new(cfg.curve()?))?;
    let functional = BinnedSquaredError::new(cfg.grid.grid_spec()?, cfg.grid.radial_target, Some(&catalog))?;

    let every_tenth: Vec<u32> = catalog.stars().iter().map(|s| s.id).step_by(10).collect();
    let pos = reference_positions(&catalog, &every_tenth)?;
    let (er, et) = (functional.error_r(&pos), functional.error_theta(&pos));
    println!("every tenth star: N = {}, E_r = {er:.2}, E_theta = {et:.2}", pos.len());
    println!("J at ΔV used = ΔV max: {:.2}", merit_j(pos.len(), er, et, 1.0, 1.0)?);

    let curve = merit_curve(&catalog, &cfg, 40)?;
    let best = curve.iter().max_by(|a, b| a.j_no_dv.total_cmp(&b.j_no_dv)).expect("non-empty");
    println!("closest-N curve peaks at N = {} (J without ΔV = {:.1})", best.n, best.j_no_dv);
    for row in curve.iter().step_by(8) {
        println!("  N = {:6}: {:8.1}", row.n, row.j_no_dv);
    }
    let hv = high_value_rows(&catalog, &cfg)?;
    println!("{} high-value stars (one per occupied cell, inclination < 10°)", hv.len());
    Ok(())
}
