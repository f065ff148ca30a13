//! Default rotation curve: speed and potential samples, and the speed
//! extrema.

use galaxy_settler::dynamics::RotationCurve;

fn main() -> galaxy_settler::error::Result<()> {
    let curve = RotationCurve::default_curve();
    let [lo, hi] = curve.domain();
    println!("domain [{lo}, {hi}] kpc");
    println!("{:>6} {:>10} {:>14}", "r", "v (km/s)", "Φ (km²/s²)");
    for k in 0..=15 {
        let r = lo + (hi - lo) * k as f64 / 15.0;
        println!("{r:6.1} {:10.2} {:14.1}", curve.circular_speed(r)?, curve.potential(r)?);
    }
    let samples: Vec<(f64, f64)> = (0..=3000)
        .map(|k| lo + (hi - lo) * k as f64 / 3000.0)
        .map(|r| (r, curve.circular_speed(r).unwrap()))
        .collect();
    let peak = samples.iter().cloned().fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    println!("fastest at r = {:.2} kpc ({:.1} km/s)", peak.0, peak.1);
    let dip = samples
        .iter()
        .filter(|(r, _)| (5.0..11.0).contains(r))
        .cloned()
        .fold((0.0, f64::MAX), |a, b| if b.1 < a.1 { b } else { a });
    println!("local minimum near Sol at r = {:.2} kpc ({:.1} km/s)", dip.0, dip.1);
    Ok(())
}
