//! Unit bookkeeping.
//!
//! Public interfaces use kpc for positions, km/s for velocities and Myr for
//! epochs. Internally the integrator works in kpc and kpc/Myr; conversions
//! happen at module boundaries through [`UnitConstants`].

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// One kiloparsec in kilometres (IAU 2012 astronomical unit based).
pub const KPC_KM: f64 = 3.085_677_581_491_367_3e16;
/// One megayear (Julian) in seconds.
pub const MYR_S: f64 = 1.0e6 * 365.25 * 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConstants {
    /// Speed of 1 kpc/Myr expressed in km/s (≈ 977.79).
    pub kpc_per_myr_in_kms: f64,
}

impl UnitConstants {
    pub const STANDARD: UnitConstants = UnitConstants {
        kpc_per_myr_in_kms: KPC_KM / MYR_S,
    };
}

impl Default for UnitConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

pub const KMS_PER_KPC_MYR: f64 = KPC_KM / MYR_S;

#[inline]
pub fn kms_to_kpc_myr(v: f64) -> f64 {
    v / KMS_PER_KPC_MYR
}

#[inline]
pub fn kpc_myr_to_kms(v: f64) -> f64 {
    v * KMS_PER_KPC_MYR
}

#[inline]
pub fn vec_kms_to_internal(v: &Vec3) -> Vec3 {
    v / KMS_PER_KPC_MYR
}

#[inline]
pub fn vec_internal_to_kms(v: &Vec3) -> Vec3 {
    v * KMS_PER_KPC_MYR
}

/// Wrap an angle in degrees into (-180, 180].
pub fn wrap_deg(mut a: f64) -> f64 {
    a %= 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Polar angle of the planar projection, degrees in (-180, 180].
pub fn polar_angle_deg(pos: &Vec3) -> f64 {
    wrap_deg(pos.y.atan2(pos.x).to_degrees())
}
