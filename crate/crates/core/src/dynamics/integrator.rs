//! Embedded Dormand–Prince 5(4) integrator for coast arcs in the central
//! field. State layout is `[x, y, z, vx, vy, vz]` in kpc and kpc/Myr.

use serde::{Deserialize, Serialize};

use super::curve::RotationCurve;
use crate::error::{Error, Result};
use crate::units::KMS_PER_KPC_MYR;

pub type State6 = [f64; 6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    /// Absolute tolerance, kpc (and kpc/Myr for velocity components).
    pub atol: f64,
    /// Largest step, Myr.
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-12,
            atol: 1e-12,
            max_step: 5.0,
            min_step: 1e-9,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side of the coast equations. Fails when the position leaves
/// the rotation-curve domain.
#[inline]
pub fn derivative(curve: &RotationCurve, y: &State6, t: f64) -> Result<State6> {
    let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    let r = r2.sqrt();
    if !curve.contains(r) {
        return Err(Error::DomainExit { t, r_kpc: r });
    }
    let v = curve.speed_unchecked(r) / KMS_PER_KPC_MYR;
    let k = -v * v / r2;
    Ok([y[3], y[4], y[5], k * y[0], k * y[1], k * y[2]])
}

#[inline]
fn combine(y: &State6, h: f64, terms: &[(f64, &State6)]) -> State6 {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..6 {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Integrate from `t0` over signed duration `dt`. Accepted step end points
/// are pushed onto `samples` when provided (the initial point included).
pub fn integrate(
    curve: &RotationCurve,
    y0: State6,
    t0: f64,
    dt: f64,
    opts: &IntegratorOptions,
    mut samples: Option<&mut Vec<(f64, State6)>>,
) -> Result<State6> {
    if let Some(s) = samples.as_deref_mut() {
        s.push((t0, y0));
    }
    if dt == 0.0 {
        return Ok(y0);
    }
    let dir = dt.signum();
    let t_end = t0 + dt;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = derivative(curve, &y, t)?;
    let mut h = dir * dt.abs().min(opts.max_step).min(1.0);
    let mut steps = 0usize;

    loop {
        let remaining = t_end - t;
        if remaining * dir <= 0.0 {
            break;
        }
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }

        let y2 = combine(&y, h, &[(A21, &k1)]);
        let k2 = derivative(curve, &y2, t + C2 * h)?;
        let y3 = combine(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = derivative(curve, &y3, t + C3 * h)?;
        let y4 = combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = derivative(curve, &y4, t + C4 * h)?;
        let y5 = combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = derivative(curve, &y5, t + C5 * h)?;
        let y6 = combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let k6 = derivative(curve, &y6, t + h)?;
        let y_new = combine(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = derivative(curve, &y_new, t + h)?;

        let mut err = 0.0;
        for i in 0..6 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / 6.0).sqrt();

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            if let Some(s) = samples.as_deref_mut() {
                s.push((t, y));
            }
            if last {
                break;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = dir * (h.abs() * fac).min(opts.max_step);
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
            if h.abs() < opts.min_step {
                return Err(Error::StepUnderflow { t });
            }
        }
    }
    Ok(y)
}
