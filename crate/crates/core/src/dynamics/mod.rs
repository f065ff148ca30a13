//! Central force field, coast propagation and impulses.
//!
//! The field is the unique central acceleration `a(r) = -(v(r)²/r) r̂` that
//! makes every circular star orbit of the catalog an exact solution. Ships
//! and stars therefore share one dynamics model.

pub mod curve;
pub mod integrator;

use serde::{Deserialize, Serialize};

pub use curve::{CurveSpec, RotationCurve};
pub use integrator::IntegratorOptions;

use crate::error::{Error, Result};
use crate::units::{vec_internal_to_kms, vec_kms_to_internal, Vec3, KMS_PER_KPC_MYR};

/// A vehicle coasting in the galactic field: position in kpc, velocity in
/// km/s, epoch in Myr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipState {
    pub pos: Vec3,
    pub vel: Vec3,
    pub t: f64,
}

impl ShipState {
    pub fn new(pos: Vec3, vel: Vec3, t: f64) -> Self {
        ShipState { pos, vel, t }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.iter().chain(self.vel.iter()).all(|x| x.is_finite()) && self.t.is_finite()
    }

    /// Specific angular momentum `pos × vel`, kpc·km/s.
    pub fn angular_momentum(&self) -> Vec3 {
        self.pos.cross(&self.vel)
    }

    /// Specific orbital energy ½|v|² + Φ(r), (km/s)².
    pub fn energy(&self, curve: &RotationCurve) -> Result<f64> {
        Ok(0.5 * self.vel.norm_squared() + curve.potential(self.pos.norm())?)
    }

    fn to_internal(self) -> integrator::State6 {
        let v = vec_kms_to_internal(&self.vel);
        [self.pos.x, self.pos.y, self.pos.z, v.x, v.y, v.z]
    }

    fn from_internal(y: &integrator::State6, t: f64) -> Self {
        ShipState {
            pos: Vec3::new(y[0], y[1], y[2]),
            vel: vec_internal_to_kms(&Vec3::new(y[3], y[4], y[5])),
            t,
        }
    }
}

/// An instantaneous velocity change at epoch `t` (Myr), km/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub t: f64,
    pub dv: Vec3,
}

impl Impulse {
    pub fn new(t: f64, dv: Vec3) -> Self {
        Impulse { t, dv }
    }

    pub fn magnitude(&self) -> f64 {
        self.dv.norm()
    }
}

pub fn circular_speed(curve: &RotationCurve, r: f64) -> Result<f64> {
    curve.circular_speed(r)
}

/// Field acceleration at `pos` (kpc), in kpc/Myr².
pub fn acceleration(curve: &RotationCurve, pos: &Vec3) -> Result<Vec3> {
    let r = pos.norm();
    if r == 0.0 {
        return Err(Error::InvalidArgument("acceleration is singular at the origin".into()));
    }
    let v = curve.circular_speed(r)? / KMS_PER_KPC_MYR;
    Ok(-pos * (v * v / (r * r)))
}

/// Coast for `dt` Myr (negative values integrate backwards).
pub fn propagate(curve: &RotationCurve, state: &ShipState, dt: f64) -> Result<ShipState> {
    propagate_with(curve, state, dt, &IntegratorOptions::default())
}

pub fn propagate_with(
    curve: &RotationCurve,
    state: &ShipState,
    dt: f64,
    opts: &IntegratorOptions,
) -> Result<ShipState> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite duration {dt}")));
    }
    let y = integrator::integrate(curve, state.to_internal(), state.t, dt, opts, None)?;
    Ok(ShipState::from_internal(&y, state.t + dt))
}

/// Coast and also return the accepted integrator steps as trajectory samples.
pub fn propagate_dense(
    curve: &RotationCurve,
    state: &ShipState,
    dt: f64,
    opts: &IntegratorOptions,
) -> Result<(ShipState, Vec<ShipState>)> {
    let mut raw = Vec::new();
    let y = integrator::integrate(curve, state.to_internal(), state.t, dt, opts, Some(&mut raw))?;
    let samples = raw
        .iter()
        .map(|(t, y)| ShipState::from_internal(y, *t))
        .collect();
    Ok((ShipState::from_internal(&y, state.t + dt), samples))
}

pub fn apply_impulse(state: &ShipState, dv: &Vec3) -> ShipState {
    ShipState {
        vel: state.vel + dv,
        ..*state
    }
}

/// Impulse of magnitude `mag` (km/s) rotated `dtheta_deg` counter-clockwise
/// (seen from +z) from the in-plane direction of `vel`.
pub fn in_plane_direction_offset(vel: &Vec3, dtheta_deg: f64, mag: f64) -> Result<Vec3> {
    let planar = (vel.x * vel.x + vel.y * vel.y).sqrt();
    if planar <= 1e-12 * vel.norm().max(1.0) {
        return Err(Error::InvalidArgument(
            "velocity is perpendicular to the galactic plane".into(),
        ));
    }
    let (s, c) = dtheta_deg.to_radians().sin_cos();
    let ux = vel.x / planar;
    let uy = vel.y / planar;
    Ok(Vec3::new(mag * (c * ux - s * uy), mag * (s * ux + c * uy), 0.0))
}
