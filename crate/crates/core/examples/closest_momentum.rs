//! The closest-momentum neighbour of a ship: radius/angle shells first,
//! then the smallest angular-momentum difference.

use std::collections::HashSet;
use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::dynamics::RotationCurve;
use galaxy_settler::strategies::{MomentumSearch, SearchOptions};

fn main() -> galaxy_settler::error::Result<()> {
    let curve = Arc::new(RotationCurve::default_curve());
    let catalog = generate_synthetic(10_000, 1, &SyntheticProfile::default(), curve)?;
    let ephemeris = EphemerisGrid::build(&catalog)?;
    let search = MomentumSearch::new(&catalog, Some(&ephemeris), SearchOptions::default());

    let mut ship = catalog.ship_state(1234, 30.0)?;
    let mut settled: HashSet<u32> = [1234].into();
    println!("ship at star 1234, r = {:.3} kpc, t = 30 Myr", ship.pos.norm());
    for _ in 0..5 {
        let id = search.closest(&ship, &settled).expect("unsettled stars remain");
        let (p, v) = catalog.star_state(id, ship.t)?;
        let dh = (p.cross(&v) - ship.angular_momentum()).norm();
        println!("  star {id:5}: |Δr| = {:.3} kpc, |Δh| = {dh:.2} kpc·km/s", (p - ship.pos).norm());
        settled.insert(id);
        ship = catalog.ship_state(id, ship.t)?;
    }
    Ok(())
}
