//! Momentum-matched target search.
//!
//! Candidates are grouped into shells around the reference ship. A star's
//! shell index is `max(⌊|Δρ|/w⌋, ⌊|Δφ|/Δθ⌋)`, with `Δρ` the difference
//! between the star's orbit radius and `|s.pos|`, `Δφ` the wrapped
//! difference in polar angle at the query epoch, `w` the shell width and
//! `Δθ` the angular step. Shell 0 is the cell straddling the ship, shell k
//! adds the next radius band on both sides and the next ±Δθ angular slice.
//! The search returns the best star of the first nonempty shell, scored by
//! the distance between angular-momentum vectors `pos × vel`; ties go to
//! the lowest id.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{EphemerisGrid, EpochFrame, StarCatalog, SOL_ID};
use crate::dynamics::ShipState;
use crate::units::{polar_angle_deg, wrap_deg, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub shell_width_kpc: f64,
    pub angle_step_deg: f64,
    /// Give up after this shell index.
    pub max_shell: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            shell_width_kpc: 0.5,
            angle_step_deg: 5.0,
            max_shell: None,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> crate::error::Result<()> {
        if !(self.shell_width_kpc > 0.0) || !(self.angle_step_deg > 0.0) {
            return Err(crate::error::Error::Config(
                "search shell width and angle step must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Shell index of a star at radius offset `dr` and angular offset
    /// `dphi` (degrees, already wrapped).
    #[inline]
    pub fn shell_of(&self, dr: f64, dphi: f64) -> usize {
        let a = (dr.abs() / self.shell_width_kpc).floor();
        let b = (dphi.abs() / self.angle_step_deg).floor();
        a.max(b) as usize
    }
}

/// Radius-sorted view of a catalog for repeated searches.
pub struct MomentumSearch<'a> {
    catalog: &'a StarCatalog,
    ephemeris: Option<&'a EphemerisGrid>,
    /// (orbit radius, catalog index), ascending.
    by_radius: Vec<(f64, usize)>,
    opts: SearchOptions,
}

impl<'a> MomentumSearch<'a> {
    pub fn new(catalog: &'a StarCatalog, ephemeris: Option<&'a EphemerisGrid>, opts: SearchOptions) -> Self {
        let mut by_radius: Vec<(f64, usize)> = catalog.stars().iter().enumerate().map(|(i, s)| (s.r_kpc, i)).collect();
        by_radius.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        MomentumSearch {
            catalog,
            ephemeris: ephemeris.filter(|g| g.n_stars() == catalog.len()),
            by_radius,
            opts,
        }
    }

    pub fn options(&self) -> &SearchOptions {
        &self.opts
    }

    /// Unsettled star (never Sol) whose angular momentum best matches
    /// `s.pos × s.vel` within the first nonempty shell, evaluated at `s.t`.
    pub fn closest(&self, s: &ShipState, settled: &HashSet<u32>) -> Option<u32> {
        let frame = self.ephemeris.and_then(|g| g.frame_at(s.t));
        let state = |idx: usize| -> (Vec3, Vec3) {
            match frame {
                Some(f) => star_from_frame(f, idx),
                None => self.catalog.state_at_index(idx, s.t),
            }
        };
        let h_ref = s.angular_momentum();
        let rho = s.pos.norm();
        let phi = polar_angle_deg(&s.pos);
        let w = self.opts.shell_width_kpc;

        // Band [lo, hi) of by_radius already scored.
        let centre = self.by_radius.partition_point(|&(r, _)| r < rho);
        let (mut lo, mut hi) = (centre, centre);
        let mut best: BTreeMap<usize, (f64, u32)> = BTreeMap::new();
        let consider = |idx: usize, best: &mut BTreeMap<usize, (f64, u32)>| {
            let star = &self.catalog.stars()[idx];
            if star.id == SOL_ID || settled.contains(&star.id) {
                return;
            }
            let (p, v) = state(idx);
            let shell = self.opts.shell_of(star.r_kpc - rho, wrap_deg(polar_angle_deg(&p) - phi));
            let d = (p.cross(&v) - h_ref).norm();
            let e = best.entry(shell).or_insert((d, star.id));
            if d < e.0 || (d == e.0 && star.id < e.1) {
                *e = (d, star.id);
            }
        };

        let mut k = 0usize;
        loop {
            if self.opts.max_shell.is_some_and(|m| k > m) {
                return None;
            }
            // Every star of shell ≤ k has |Δρ| < (k+1)·w; widen slightly so
            // rounding never leaves one out.
            let reach = (k as f64 + 1.0) * w * (1.0 + 1e-9) + 1e-12;
            while lo > 0 && rho - self.by_radius[lo - 1].0 < reach {
                lo -= 1;
                consider(self.by_radius[lo].1, &mut best);
            }
            while hi < self.by_radius.len() && self.by_radius[hi].0 - rho < reach {
                consider(self.by_radius[hi].1, &mut best);
                hi += 1;
            }
            if let Some(&(_, id)) = best.get(&k) {
                return Some(id);
            }
            let all_scored = lo == 0 && hi == self.by_radius.len();
            if all_scored && best.range(k..).next().is_none() {
                return None;
            }
            k += 1;
        }
    }
}

#[inline]
fn star_from_frame(f: &EpochFrame, idx: usize) -> (Vec3, Vec3) {
    (f.position(idx), f.velocity(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_synthetic, StarRecord, SyntheticProfile};
    use crate::dynamics::RotationCurve;
    use std::sync::Arc;

    // Exhaustive: shell of every star, minimum shell, argmin within it.
    fn brute(c: &StarCatalog, s: &ShipState, settled: &HashSet<u32>, o: &SearchOptions) -> Option<u32> {
        let h = s.pos.cross(&s.vel);
        let rho = s.pos.norm();
        let phi = s.pos.y.atan2(s.pos.x).to_degrees();
        let mut rows = Vec::new();
        for st in c.stars() {
            if st.id == 0 || settled.contains(&st.id) {
                continue;
            }
            let (p, v) = c.star_state(st.id, s.t).unwrap();
            let mut dphi = p.y.atan2(p.x).to_degrees() - phi;
            while dphi > 180.0 {
                dphi -= 360.0;
            }
            while dphi <= -180.0 {
                dphi += 360.0;
            }
            let shell = ((st.r_kpc - rho).abs() / o.shell_width_kpc)
                .floor()
                .max((dphi.abs() / o.angle_step_deg).floor()) as usize;
            rows.push((shell, (p.cross(&v) - h).norm(), st.id));
        }
        let first = rows.iter().map(|r| r.0).min()?;
        rows.into_iter()
            .filter(|r| r.0 == first)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)))
            .map(|r| r.2)
    }

    #[test]
    fn all_settled_gives_none() {
        let c = generate_synthetic(20, 1, &SyntheticProfile::default(), Arc::new(RotationCurve::default_curve())).unwrap();
        let settled: HashSet<u32> = c.stars().iter().map(|s| s.id).collect();
        let m = MomentumSearch::new(&c, None, SearchOptions::default());
        let s = c.ship_state(0, 3.0).unwrap();
        assert_eq!(m.closest(&s, &settled), None);
    }

    #[test]
    fn co_orbital_singleton() {
        let curve = Arc::new(RotationCurve::default_curve());
        let c = StarCatalog::new(
            vec![
                StarRecord::new(0, 8.0, 0.0, 0.0, 0.0),
                StarRecord::new(7, 8.0, 0.0, 0.0, 2.0),
            ],
            curve,
        )
        .unwrap();
        let m = MomentumSearch::new(&c, None, SearchOptions::default());
        let s = c.ship_state(0, 0.0).unwrap();
        assert_eq!(m.closest(&s, &HashSet::new()), Some(7));
    }

    #[test]
    fn matches_exhaustive_scan() {
        let curve = Arc::new(RotationCurve::default_curve());
        for seed in 0..5 {
            let c = generate_synthetic(1000, seed, &SyntheticProfile::default(), curve.clone()).unwrap();
            let g = EphemerisGrid::build(&c).unwrap();
            let o = SearchOptions::default();
            let m = MomentumSearch::new(&c, Some(&g), o);
            let settled: HashSet<u32> = (0..1000).filter(|i| i % 7 == 3).collect();
            for (k, id) in [5u32, 77, 400, 901].into_iter().enumerate() {
                let t = 10.0 * k as f64 + 0.5 * seed as f64;
                let s = c.ship_state(id, t).unwrap();
                assert_eq!(m.closest(&s, &settled), brute(&c, &s, &settled, &o), "seed {seed} star {id}");
            }
            // off-grid epoch
            let s = c.ship_state(12, 33.3).unwrap();
            assert_eq!(m.closest(&s, &settled), brute(&c, &s, &settled, &o));
        }
    }

    #[test]
    fn shell_limit_truncates() {
        let curve = Arc::new(RotationCurve::default_curve());
        let c = StarCatalog::new(
            vec![
                StarRecord::new(0, 8.0, 0.0, 0.0, 0.0),
                StarRecord::new(1, 20.0, 0.0, 0.0, 0.0),
            ],
            curve,
        )
        .unwrap();
        let s = c.ship_state(0, 0.0).unwrap();
        let near = SearchOptions {
            max_shell: Some(5),
            ..SearchOptions::default()
        };
        assert_eq!(MomentumSearch::new(&c, None, near).closest(&s, &HashSet::new()), None);
        assert_eq!(
            MomentumSearch::new(&c, None, SearchOptions::default()).closest(&s, &HashSet::new()),
            Some(1)
        );
    }
}
