//! Deterministic synthetic catalogs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{StarCatalog, StarRecord, CATALOG_R_MAX, CATALOG_R_MIN, SOL_ID};
use crate::dynamics::RotationCurve;
use crate::error::{Error, Result};

/// Radial number density (stars per kpc of radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialDensity {
    /// Linearly decreasing from 1 at the inner edge to `outer_to_inner` at
    /// the outer edge.
    Linear { outer_to_inner: f64 },
}

impl Default for RadialDensity {
    fn default() -> Self {
        RadialDensity::Linear { outer_to_inner: 0.1 }
    }
}

impl RadialDensity {
    /// Inverse CDF on [lo, hi] for a uniform deviate `u` in [0, 1).
    fn sample(&self, lo: f64, hi: f64, u: f64) -> f64 {
        match *self {
            RadialDensity::Linear { outer_to_inner } => {
                let span = hi - lo;
                let k = (1.0 - outer_to_inner) / span;
                if k.abs() < 1e-15 {
                    return lo + u * span;
                }
                let total = span - 0.5 * k * span * span;
                let x = u * total;
                lo + (1.0 - (1.0 - 2.0 * k * x).max(0.0).sqrt()) / k
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RadialDensity::Linear { outer_to_inner } => {
                if !(outer_to_inner > 0.0 && outer_to_inner <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "outer_to_inner must lie in (0, 1], got {outer_to_inner}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticProfile {
    pub density: RadialDensity,
    pub max_incl_deg: f64,
    pub sol_r_kpc: f64,
    pub sol_phase0_deg: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        SyntheticProfile {
            density: RadialDensity::default(),
            max_incl_deg: 15.0,
            sol_r_kpc: 8.0,
            sol_phase0_deg: 0.0,
        }
    }
}

/// `n` stars (Sol included as id 0) drawn from `profile` with a ChaCha8
/// stream seeded by `seed`. Inclinations are uniform on [0, max_incl],
/// nodes and phases uniform on [0, 360).
pub fn generate_synthetic(
    n: usize,
    seed: u64,
    profile: &SyntheticProfile,
    curve: Arc<RotationCurve>,
) -> Result<StarCatalog> {
    if n == 0 {
        return Err(Error::InvalidArgument("star count must be at least 1".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::Capacity(format!("{n} stars exceed the id space")));
    }
    profile.density.validate()?;
    if !(0.0..90.0).contains(&profile.max_incl_deg) {
        return Err(Error::InvalidArgument("max_incl_deg must lie in [0, 90)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stars = Vec::with_capacity(n);
    stars.push(StarRecord::new(SOL_ID, profile.sol_r_kpc, 0.0, 0.0, profile.sol_phase0_deg));
    for id in 1..n as u32 {
        let r = profile
            .density
            .sample(CATALOG_R_MIN, CATALOG_R_MAX, rng.gen::<f64>())
            .clamp(CATALOG_R_MIN, CATALOG_R_MAX);
        let incl = profile.max_incl_deg * rng.gen::<f64>();
        let node = 360.0 * rng.gen::<f64>();
        let phase = 360.0 * rng.gen::<f64>();
        stars.push(StarRecord::new(id, r, incl, node, phase));
    }
    StarCatalog::new(stars, curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::polar_angle_deg;

    fn curve() -> Arc<RotationCurve> {
        Arc::new(RotationCurve::default_curve())
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = SyntheticProfile::default();
        let a = generate_synthetic(100, 7, &p, curve()).unwrap();
        let b = generate_synthetic(100, 7, &p, curve()).unwrap();
        assert_eq!(a.stars(), b.stars());
        assert_eq!(a.content_hash(), b.content_hash());
        let c = generate_synthetic(100, 8, &p, curve()).unwrap();
        assert_ne!(a.stars(), c.stars());
    }

    #[test]
    fn zero_stars_rejected() {
        assert!(generate_synthetic(0, 1, &SyntheticProfile::default(), curve()).is_err());
    }

    #[test]
    fn sol_is_star_zero() {
        let c = generate_synthetic(10, 3, &SyntheticProfile::default(), curve()).unwrap();
        let sol = c.get(SOL_ID).unwrap();
        assert_eq!(sol.r_kpc, 8.0);
        assert_eq!(sol.incl_deg, 0.0);
    }

    #[test]
    fn radial_density_decreases() {
        let c = generate_synthetic(10_000, 1, &SyntheticProfile::default(), curve()).unwrap();
        let mut bins = [0usize; 3];
        for s in c.stars() {
            let b = (((s.r_kpc - 2.0) / 10.0) as usize).min(2);
            bins[b] += 1;
        }
        assert!(bins[0] > bins[1] && bins[1] > bins[2], "{bins:?}");
        assert!(c.stars().iter().all(|s| (2.0..=32.0).contains(&s.r_kpc)));
        assert!(c.stars().iter().all(|s| s.incl_deg < 15.0));
    }

    #[test]
    fn angular_distribution_at_end_is_uniform() {
        let c = generate_synthetic(10_000, 1, &SyntheticProfile::default(), curve()).unwrap();
        let mut counts = [0usize; 36];
        for i in 0..c.len() {
            let (p, _) = c.state_at_index(i, 90.0);
            let a = polar_angle_deg(&p) + 180.0;
            counts[((a / 10.0) as usize).min(35)] += 1;
        }
        let expected = c.len() as f64 / 36.0;
        let chi2: f64 = counts
            .iter()
            .map(|&k| (k as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9th percentile of chi-square with 35 degrees of freedom
        assert!(chi2 < 66.62, "chi2 = {chi2}");
    }

    #[test]
    fn inverse_cdf_is_monotone() {
        let d = RadialDensity::default();
        let mut prev = 0.0;
        for k in 0..=100 {
            let r = d.sample(2.0, 32.0, k as f64 / 100.0);
            assert!(r >= prev);
            prev = r;
        }
        assert!((d.sample(2.0, 32.0, 0.0) - 2.0).abs() < 1e-12);
        assert!((d.sample(2.0, 32.0, 1.0) - 32.0).abs() < 1e-9);
    }
}
