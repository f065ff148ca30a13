//! Coast an inclined, eccentric orbit and watch the conserved quantities.

use galaxy_settler::dynamics::{propagate, RotationCurve, ShipState};
use galaxy_settler::units::Vec3;

fn main() -> galaxy_settler::error::Result<()> {
    let curve = RotationCurve::default_curve();
    let v = curve.circular_speed(10.0)?;
    let s0 = ShipState::new(Vec3::new(10.0, 0.0, 0.0), Vec3::new(20.0, 0.9 * v, 15.0), 0.0);
    let (h0, e0) = (s0.angular_momentum(), s0.energy(&curve)?);
    println!("{:>6} {:>9} {:>12} {:>12}", "t", "r", "|Δh|/|h|", "|ΔE|/|E|");
    let mut s = s0;
    for _ in 0..9 {
        s = propagate(&curve, &s, 10.0)?;
        let dh = (s.angular_momentum() - h0).norm() / h0.norm();
        let de = ((s.energy(&curve)? - e0) / e0).abs();
        println!("{:6.1} {:9.4} {:12.3e} {:12.3e}", s.t, s.pos.norm(), dh, de);
    }
    let back = propagate(&curve, &s, -s.t)?;
    println!("backwards to t = 0 misses the start by {:.3e} kpc", (back.pos - s0.pos).norm());
    Ok(())
}
