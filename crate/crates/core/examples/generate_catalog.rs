//! Synthetic catalog: radial and angular histograms, CSV round trip.
//!
//!     cargo run --example generate_catalog -- 10000 1

use std::sync::Arc;

use galaxy_settler::catalog::{generate_synthetic, StarCatalog, SyntheticProfile};
use galaxy_settler::dynamics::RotationCurve;
use galaxy_settler::figures::{angular_histogram, radial_histogram};

fn main() -> galaxy_settler::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10_000, |s| s.parse().expect("star count"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let curve = Arc::new(RotationCurve::default_curve());
    let catalog = generate_synthetic(n, seed, &SyntheticProfile::default(), curve.clone())?;

    println!("{} stars (Sol is id 0 at r = {} kpc)", catalog.len(), catalog.stars()[0].r_kpc);
    println!("radial histogram:");
    for row in radial_histogram(&catalog).iter().step_by(3) {
        println!("  [{:4.1}, {:4.1}) {:6}", row.r_lo_kpc, row.r_hi_kpc, row.count);
    }
    let ang = angular_histogram(&catalog)?;
    let (lo, hi) = ang.iter().fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.count), hi.max(r.count)));
    println!("angular bins at t = 90 Myr: min {lo}, max {hi}");

    let text = catalog.to_csv_string();
    let back = StarCatalog::from_csv_str(&text, curve)?;
    assert_eq!(back.content_hash(), catalog.content_hash());
    println!("csv round trip ok ({} bytes)", text.len());
    Ok(())
}
