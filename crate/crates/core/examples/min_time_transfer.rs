//! Three-impulse minimum-time rendezvous under the settler budget.

use std::sync::Arc;

use galaxy_settler::catalog::{StarCatalog, StarRecord};
use galaxy_settler::dynamics::RotationCurve;
use galaxy_settler::strategies::{min_time_transfer, replay, Budgets, MinTimeOptions};

fn main() -> galaxy_settler::error::Result<()> {
    let curve = Arc::new(RotationCurve::default_curve());
    let catalog = StarCatalog::new(
        vec![
            StarRecord::new(0, 8.0, 0.0, 0.0, 0.0),
            StarRecord::new(1, 12.0, 2.0, 40.0, 10.0),
            StarRecord::new(2, 12.3, 3.0, 40.0, 12.0),
        ],
        curve,
    )?;
    let budget = Budgets::default().settler;
    let start = catalog.ship_state(1, 20.0)?;
    let target = |t: f64| catalog.star_state(2, t);
    // Step the starting guess up until the budget admits a transfer.
    let opts = MinTimeOptions::default();
    let (guess, sol) = [2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5]
        .into_iter()
        .find_map(|g| min_time_transfer(catalog.curve(), &start, &target, g, &budget, &opts).ok().map(|s| (g, s)))
        .expect("reachable within 8.5 Myr");
    println!("first feasible guess {guess} Myr");
    println!("time of flight {:.3} Myr (split {:.3} + {:.3})", sol.tof, sol.tof1, sol.tof2);
    println!(
        "impulses {:.2}, {:.2}, {:.2} km/s (total {:.2} of {})",
        sol.dv1.norm(),
        sol.dv2.norm(),
        sol.dv3.norm(),
        sol.total_dv(),
        budget.cumulative_kms
    );
    println!("accepted times: {:?}", sol.trace);

    let impulses = [
        galaxy_settler::dynamics::Impulse::new(start.t, sol.dv1),
        galaxy_settler::dynamics::Impulse::new(start.t + sol.tof1, sol.dv2),
        galaxy_settler::dynamics::Impulse::new(start.t + sol.tof, sol.dv3),
    ];
    let end = replay(catalog.curve(), &start, &impulses, start.t + sol.tof, &Default::default())?;
    let (p, v) = catalog.star_state(2, end.t)?;
    println!("replay: position miss {:.2e} kpc, velocity miss {:.2e} km/s", (end.pos - p).norm(), (end.vel - v).norm());
    Ok(())
}
