//! Minimum-time three-impulse rendezvous.
//!
//! The transfer is two coast segments: departure impulse, coast `tof₁` to a
//! midpoint, mid-course impulse, coast `tof₂` to the target, rendezvous
//! impulse. For a fixed total time `T` the free variables are the midpoint
//! position and the split `σ = tof₁/T`; both segments are closed with the
//! shooting solver, which fixes all three impulses. Feasibility at `T` is a
//! penalty minimization (Nelder–Mead) over those four variables that stops
//! as soon as every budget is met. The outer loop shortens `T` from the
//! caller's guess in fixed steps and then bisects the last gap, accepting
//! only feasible points, so the incumbent time never increases.

use serde::{Deserialize, Serialize};

use crate::bvp::{shooting_solve, ShootingOptions};
use crate::dynamics::{propagate_with, RotationCurve, ShipState};
use crate::error::{Error, Result};
use crate::units::{Vec3, KMS_PER_KPC_MYR};

use super::BudgetSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinTimeOptions {
    /// Coarse decrement applied to the incumbent time, Myr.
    pub tof_step: f64,
    /// Bisection stops when the feasible/infeasible gap is below this, Myr.
    pub tof_resolution: f64,
    /// Shortest total time considered, Myr.
    pub tof_floor: f64,
    /// Penalty evaluations per feasibility check.
    pub max_evaluations: usize,
    /// Safety margin kept below every ΔV limit, km/s.
    pub dv_margin_kms: f64,
    /// Set from the shared solver tolerances; not serialized.
    #[serde(skip)]
    pub shooting: ShootingOptions,
}

impl Default for MinTimeOptions {
    fn default() -> Self {
        MinTimeOptions {
            tof_step: 0.5,
            tof_resolution: 0.05,
            tof_floor: 0.1,
            max_evaluations: 80,
            dv_margin_kms: 1e-6,
            shooting: ShootingOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinTimeSolution {
    /// Total time of flight, Myr.
    pub tof: f64,
    pub tof1: f64,
    pub tof2: f64,
    /// Departure, mid-course and rendezvous impulses, km/s.
    pub dv1: Vec3,
    pub dv2: Vec3,
    pub dv3: Vec3,
    pub mid_pos: Vec3,
    /// Ship state after the rendezvous impulse.
    pub arrival: ShipState,
    /// Incumbent total time after each accepted improvement.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

impl MinTimeSolution {
    pub fn total_dv(&self) -> f64 {
        self.dv1.norm() + self.dv2.norm() + self.dv3.norm()
    }
}

/// Target position (kpc) and velocity (km/s) at an absolute epoch.
pub type TargetFn<'a> = dyn Fn(f64) -> Result<(Vec3, Vec3)> + Sync + 'a;

#[derive(Debug, Clone)]
struct Candidate {
    t_total: f64,
    sigma: f64,
    mid: Vec3,
    dv: [Vec3; 3],
    v0: [Vec3; 2],
    arrival: ShipState,
}

struct Problem<'a> {
    curve: &'a RotationCurve,
    s0: ShipState,
    target: &'a TargetFn<'a>,
    cap: f64,
    cumulative: f64,
    min_segment: f64,
    opts: &'a MinTimeOptions,
    evaluations: usize,
}

const FAILED: f64 = 1e12;

impl Problem<'_> {
    fn penalty(&self, dv: &[Vec3; 3]) -> f64 {
        let m: Vec<f64> = dv.iter().map(|d| d.norm()).collect();
        let per: f64 = m.iter().map(|&x| (x - self.cap).max(0.0).powi(2)).sum();
        let total = (m.iter().sum::<f64>() - self.cumulative).max(0.0);
        per + total * total
    }

    fn split_bounds(&self, t_total: f64) -> (f64, f64) {
        let s = (self.min_segment / t_total).min(0.5);
        (s, 1.0 - s)
    }

    /// Close both segments for a given midpoint and split.
    fn evaluate(&mut self, t_total: f64, x: &[f64; 4], warm: Option<&[Vec3; 2]>) -> Result<Candidate> {
        self.evaluations += 1;
        let (smin, smax) = self.split_bounds(t_total);
        let sigma = x[3].clamp(smin, smax);
        let mid = Vec3::new(x[0], x[1], x[2]);
        let tof1 = sigma * t_total;
        let tof2 = t_total - tof1;
        let (rt, vt) = (self.target)(self.s0.t + t_total)?;

        let g1 = match warm {
            Some(w) => w[0],
            None => self.drift_guess(&self.s0, &mid, tof1)?,
        };
        let seg1 = shooting_solve(self.curve, &self.s0.pos, &mid, tof1, &g1, &self.opts.shooting)?;
        let s1 = ShipState::new(seg1.rf, seg1.vf, self.s0.t + tof1);
        let g2 = match warm {
            Some(w) => w[1],
            None => self.drift_guess(&s1, &rt, tof2)?,
        };
        let seg2 = shooting_solve(self.curve, &seg1.rf, &rt, tof2, &g2, &self.opts.shooting)?;
        let dv = [seg1.v0 - self.s0.vel, seg2.v0 - seg1.vf, vt - seg2.vf];
        Ok(Candidate {
            t_total,
            sigma,
            mid,
            dv,
            v0: [seg1.v0, seg2.v0],
            arrival: ShipState::new(seg2.rf, vt, self.s0.t + t_total),
        })
    }

    /// Coasting velocity corrected by the straight-line miss of the coast.
    fn drift_guess(&self, from: &ShipState, to: &Vec3, tof: f64) -> Result<Vec3> {
        let drift = propagate_with(self.curve, from, tof, &self.opts.shooting.integrator)?;
        Ok(from.vel + (to - drift.pos) / tof * KMS_PER_KPC_MYR)
    }

    /// Starting point at `t_total`: midpoint of the two-impulse arc, or of
    /// the chord when that arc cannot be solved.
    fn initial_point(&mut self, t_total: f64) -> Result<[f64; 4]> {
        let (rt, _) = (self.target)(self.s0.t + t_total)?;
        let guess = self.drift_guess(&self.s0, &rt, t_total)?;
        let mid = match shooting_solve(self.curve, &self.s0.pos, &rt, t_total, &guess, &self.opts.shooting) {
            Ok(arc) => {
                let start = ShipState::new(self.s0.pos, arc.v0, self.s0.t);
                propagate_with(self.curve, &start, 0.5 * t_total, &self.opts.shooting.integrator)?.pos
            }
            Err(_) => 0.5 * (self.s0.pos + rt),
        };
        Ok([mid.x, mid.y, mid.z, 0.5])
    }

    /// Feasible candidate at `t_total`, searching from `x0`.
    fn feasible_at(&mut self, t_total: f64, x0: [f64; 4]) -> Option<Candidate> {
        let mut warm: Option<[Vec3; 2]> = None;
        let mut found: Option<Candidate> = None;
        let scale = {
            let (rt, _) = match (self.target)(self.s0.t + t_total) {
                Ok(s) => s,
                Err(_) => return None,
            };
            0.05 * (rt - self.s0.pos).norm() + 0.02
        };
        let budget = self.opts.max_evaluations;
        let mut f = |x: &[f64; 4], me: &mut Self| -> f64 {
            if found.is_some() {
                return 0.0;
            }
            match me.evaluate(t_total, x, warm.as_ref()) {
                Ok(c) => {
                    let p = me.penalty(&c.dv);
                    warm = Some(c.v0);
                    if p == 0.0 {
                        found = Some(c);
                    }
                    p
                }
                Err(_) => {
                    warm = None;
                    FAILED
                }
            }
        };
        nelder_mead(&mut f, self, x0, [scale, scale, scale, 0.1], budget);
        found
    }
}

/// Minimal Nelder–Mead with early exit when `f` reaches zero.
fn nelder_mead<P>(
    f: &mut impl FnMut(&[f64; 4], &mut P) -> f64,
    ctx: &mut P,
    x0: [f64; 4],
    step: [f64; 4],
    max_eval: usize,
) -> ([f64; 4], f64) {
    const N: usize = 4;
    let mut pts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let mut evals = 0;
    let mut eval = |x: [f64; N], ctx: &mut P, evals: &mut usize| {
        *evals += 1;
        (x, f(&x, ctx))
    };
    let first = eval(x0, ctx, &mut evals);
    if first.1 == 0.0 {
        return first;
    }
    pts.push(first);
    for i in 0..N {
        let mut x = x0;
        x[i] += step[i];
        let p = eval(x, ctx, &mut evals);
        if p.1 == 0.0 {
            return p;
        }
        pts.push(p);
    }
    while evals < max_eval {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if pts[0].1 == 0.0 {
            break;
        }
        let spread = pts[N].1 - pts[0].1;
        if spread.abs() <= 1e-14 * pts[0].1.abs().max(1.0) && evals > 2 * N + 1 {
            break;
        }
        let mut c = [0.0; N];
        for p in &pts[..N] {
            for j in 0..N {
                c[j] += p.0[j] / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            let mut x = [0.0; N];
            for j in 0..N {
                x[j] = c[j] + t * (pts[N].0[j] - c[j]);
            }
            x
        };
        let r = eval(along(-1.0), ctx, &mut evals);
        if r.1 < pts[0].1 {
            let e = eval(along(-2.0), ctx, &mut evals);
            pts[N] = if e.1 < r.1 { e } else { r };
        } else if r.1 < pts[N - 1].1 {
            pts[N] = r;
        } else {
            let contracted = if r.1 < pts[N].1 { along(-0.5) } else { along(0.5) };
            let k = eval(contracted, ctx, &mut evals);
            if k.1 < pts[N].1.min(r.1) {
                pts[N] = k;
            } else {
                let best = pts[0].0;
                for p in pts.iter_mut().skip(1) {
                    let mut x = best;
                    for j in 0..N {
                        x[j] = best[j] + 0.5 * (p.0[j] - best[j]);
                    }
                    *p = eval(x, ctx, &mut evals);
                    if p.1 == 0.0 {
                        return *p;
                    }
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts[0]
}

/// Shortest-time three-impulse rendezvous from `s0` with the body whose
/// state is given by `target`, starting from `tof_guess`. Fails with
/// [`Error::Infeasible`] when no budget-respecting transfer is found at
/// `tof_guess` itself.
pub fn min_time_transfer(
    curve: &RotationCurve,
    s0: &ShipState,
    target: &TargetFn<'_>,
    tof_guess: f64,
    budget: &BudgetSpec,
    opts: &MinTimeOptions,
) -> Result<MinTimeSolution> {
    if !(tof_guess > 0.0 && tof_guess.is_finite()) {
        return Err(Error::InvalidArgument(format!("tof guess must be positive, got {tof_guess}")));
    }
    if !s0.is_finite() {
        return Err(Error::InvalidArgument("non-finite departure state".into()));
    }
    let floor = opts.tof_floor.max(2.0 * budget.min_impulse_spacing_myr);
    let guess = tof_guess.max(floor);
    let mut pb = Problem {
        curve,
        s0: *s0,
        target,
        cap: budget.per_impulse_kms - opts.dv_margin_kms,
        cumulative: budget.cumulative_kms - opts.dv_margin_kms,
        min_segment: budget.min_impulse_spacing_myr,
        opts,
        evaluations: 0,
    };

    let x0 = pb.initial_point(guess)?;
    let mut best = pb
        .feasible_at(guess, x0)
        .ok_or_else(|| Error::Infeasible(format!("no transfer within budget at tof {guess} Myr")))?;
    let mut trace = vec![best.t_total];

    let mut infeasible: Option<f64> = None;
    loop {
        let next = if best.t_total - opts.tof_step >= floor {
            best.t_total - opts.tof_step
        } else if best.t_total - floor > 1e-12 {
            floor
        } else {
            break;
        };
        let x0 = pb.initial_point(next)?;
        match pb.feasible_at(next, x0) {
            Some(c) => {
                best = c;
                trace.push(best.t_total);
            }
            None => {
                infeasible = Some(next);
                break;
            }
        }
    }
    if let Some(mut bad) = infeasible {
        while best.t_total - bad > opts.tof_resolution {
            let t = 0.5 * (bad + best.t_total);
            let x0 = pb.initial_point(t)?;
            match pb.feasible_at(t, x0) {
                Some(c) => {
                    best = c;
                    trace.push(best.t_total);
                }
                None => bad = t,
            }
        }
    }

    let tof1 = best.sigma * best.t_total;
    Ok(MinTimeSolution {
        tof: best.t_total,
        tof1,
        tof2: best.t_total - tof1,
        dv1: best.dv[0],
        dv2: best.dv[1],
        dv3: best.dv[2],
        mid_pos: best.mid,
        arrival: best.arrival,
        trace,
        evaluations: pb.evaluations,
    })
}
