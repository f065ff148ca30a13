//! Two-point boundary value problem: leave Sol, arrive at a star's
//! position after a fixed time of flight.

use std::sync::Arc;

use galaxy_settler::bvp::{shooting_solve, ShootingOptions};
use galaxy_settler::catalog::{generate_synthetic, SyntheticProfile, SOL_ID};
use galaxy_settler::dynamics::RotationCurve;

fn main() -> galaxy_settler::error::Result<()> {
    let curve = Arc::new(RotationCurve::default_curve());
    let catalog = generate_synthetic(200, 4, &SyntheticProfile::default(), curve)?;
    let sol = catalog.ship_state(SOL_ID, 0.0)?;
    let target = catalog.stars().iter().find(|s| (8.5..9.5).contains(&s.r_kpc)).expect("a star near 9 kpc").id;
    let tof = 10.0;
    let (rt, vt) = catalog.star_state(target, tof)?;
    let opts = ShootingOptions::default();
    let arc = shooting_solve(catalog.curve(), &sol.pos, &rt, tof, &sol.vel, &opts)?;
    println!("star {target}: {} iterations, miss {:.2e} kpc", arc.iterations, arc.residual);
    println!("residual trace: {:?}", arc.trace.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());
    println!("departure ΔV {:.2} km/s, rendezvous ΔV {:.2} km/s", (arc.v0 - sol.vel).norm(), (vt - arc.vf).norm());
    Ok(())
}
