//! Settlement scoring.
//!
//! `J = N / (1 + 1e-4·N·(E_r + E_θ)) · ΔV_max / ΔV_used`.
//!
//! The official uniformity errors are not reproduced here. The default
//! functional bins settled stars on an r–θ grid at the reference epoch and
//! sums squared relative deviations from target bin shares:
//!
//! `E = Σ_b ((n_b − N p_b) / max(1, N p_b))²`
//!
//! Angular targets are uniform. The radial target is selectable
//! ([`RadialTarget`]); the default is an exponential disc. Anything
//! implementing [`UniformityError`] can replace the functional.

use serde::{Deserialize, Serialize};

use crate::catalog::{bin_index, uniform_edges, StarCatalog, MISSION_END_MYR};
use crate::error::{Error, Result};
use crate::units::{polar_angle_deg, Vec3};

/// Epoch at which settled positions are binned.
pub const REFERENCE_EPOCH_MYR: f64 = MISSION_END_MYR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial_edges: Vec<f64>,
    pub angular_edges: Vec<f64>,
}

impl GridSpec {
    pub fn new(radial_edges: Vec<f64>, angular_edges: Vec<f64>) -> Result<Self> {
        let g = GridSpec {
            radial_edges,
            angular_edges,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(r_min: f64, r_max: f64, radial_bins: usize, angular_bins: usize) -> Result<Self> {
        if radial_bins == 0 || angular_bins == 0 {
            return Err(Error::InvalidArgument("grid needs at least one bin per axis".into()));
        }
        Self::new(
            uniform_edges(r_min, r_max, radial_bins),
            uniform_edges(-180.0, 180.0, angular_bins),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let inc = |e: &[f64]| e.len() >= 2 && e.windows(2).all(|w| w[1] > w[0]);
        if !inc(&self.radial_edges) || !inc(&self.angular_edges) {
            return Err(Error::InvalidArgument("grid edges must be strictly increasing".into()));
        }
        let (r0, r1) = (self.radial_edges[0], *self.radial_edges.last().unwrap());
        if r0 < 2.0 || r1 > 32.0 {
            return Err(Error::InvalidArgument(format!("radial grid [{r0}, {r1}] exceeds [2, 32]")));
        }
        let (a0, a1) = (self.angular_edges[0], *self.angular_edges.last().unwrap());
        if a0 > -180.0 || a1 < 180.0 {
            return Err(Error::InvalidArgument("angular grid must cover (-180, 180]".into()));
        }
        Ok(())
    }

    pub fn radial_bins(&self) -> usize {
        self.radial_edges.len() - 1
    }

    pub fn angular_bins(&self) -> usize {
        self.angular_edges.len() - 1
    }

    pub fn cells(&self) -> usize {
        self.radial_bins() * self.angular_bins()
    }

    pub fn radial_bin(&self, pos: &Vec3) -> Option<usize> {
        bin_index(&self.radial_edges, pos.norm())
    }

    pub fn angular_bin(&self, pos: &Vec3) -> Option<usize> {
        bin_index(&self.angular_edges, polar_angle_deg(pos))
    }

    /// Flattened cell index `radial * angular_bins + angular`.
    pub fn cell(&self, pos: &Vec3) -> Option<usize> {
        Some(self.radial_bin(pos)? * self.angular_bins() + self.angular_bin(pos)?)
    }

    /// Planar center of a flattened cell, kpc.
    pub fn cell_center(&self, cell: usize) -> Vec3 {
        let (ir, ia) = (cell / self.angular_bins(), cell % self.angular_bins());
        let r = 0.5 * (self.radial_edges[ir] + self.radial_edges[ir + 1]);
        let a = (0.5 * (self.angular_edges[ia] + self.angular_edges[ia + 1])).to_radians();
        Vec3::new(r * a.cos(), r * a.sin(), 0.0)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::uniform(2.0, 32.0, 30, 36).expect("default grid is valid")
    }
}

/// Target radial distribution for the default error functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialTarget {
    /// Bin shares equal to the catalog's own radial shares.
    CatalogShare,
    /// Surface density ∝ exp(−r/h): per-radius weight ∝ r·exp(−r/h).
    ExponentialDisc { scale_length_kpc: f64 },
    /// Equal share per unit radius.
    UniformRadius,
}

impl Default for RadialTarget {
    fn default() -> Self {
        RadialTarget::ExponentialDisc {
            scale_length_kpc: 5.0,
        }
    }
}

/// Pluggable radial/angular asymmetry measures over settled positions at
/// the reference epoch.
pub trait UniformityError {
    fn error_r(&self, settled: &[Vec3]) -> f64;
    fn error_theta(&self, settled: &[Vec3]) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSquaredError {
    grid: GridSpec,
    radial_weights: Vec<f64>,
    angular_weights: Vec<f64>,
}

impl BinnedSquaredError {
    pub fn new(grid: GridSpec, target: RadialTarget, catalog: Option<&StarCatalog>) -> Result<Self> {
        grid.validate()?;
        let e = &grid.radial_edges;
        let mut radial: Vec<f64> = match target {
            RadialTarget::CatalogShare => {
                let catalog = catalog.ok_or_else(|| {
                    Error::InvalidArgument("catalog-share target needs a catalog".into())
                })?;
                let mut w = vec![0.0; grid.radial_bins()];
                for s in catalog.stars() {
                    if let Some(b) = bin_index(e, s.r_kpc) {
                        w[b] += 1.0;
                    }
                }
                w
            }
            RadialTarget::ExponentialDisc { scale_length_kpc: h } => {
                if !(h > 0.0) {
                    return Err(Error::InvalidArgument("scale length must be positive".into()));
                }
                let prim = |r: f64| -h * (-r / h).exp() * (r + h);
                e.windows(2).map(|w| prim(w[1]) - prim(w[0])).collect()
            }
            RadialTarget::UniformRadius => e.windows(2).map(|w| w[1] - w[0]).collect(),
        };
        normalize(&mut radial)?;
        let mut angular: Vec<f64> = grid.angular_edges.windows(2).map(|w| w[1] - w[0]).collect();
        normalize(&mut angular)?;
        Ok(BinnedSquaredError {
            grid,
            radial_weights: radial,
            angular_weights: angular,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    fn radial_counts(&self, settled: &[Vec3]) -> Vec<usize> {
        let mut c = vec![0; self.grid.radial_bins()];
        for p in settled {
            if let Some(b) = self.grid.radial_bin(p) {
                c[b] += 1;
            }
        }
        c
    }

    fn angular_counts(&self, settled: &[Vec3]) -> Vec<usize> {
        let mut c = vec![0; self.grid.angular_bins()];
        for p in settled {
            if let Some(b) = self.grid.angular_bin(p) {
                c[b] += 1;
            }
        }
        c
    }

    pub fn radial_error_from_counts(&self, counts: &[usize], n: usize) -> f64 {
        binned_error(counts, &self.radial_weights, n)
    }

    pub fn angular_error_from_counts(&self, counts: &[usize], n: usize) -> f64 {
        binned_error(counts, &self.angular_weights, n)
    }
}

impl UniformityError for BinnedSquaredError {
    fn error_r(&self, settled: &[Vec3]) -> f64 {
        self.radial_error_from_counts(&self.radial_counts(settled), settled.len())
    }

    fn error_theta(&self, settled: &[Vec3]) -> f64 {
        self.angular_error_from_counts(&self.angular_counts(settled), settled.len())
    }
}

fn normalize(w: &mut [f64]) -> Result<()> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("target weights sum to zero".into()));
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(())
}

fn binned_error(counts: &[usize], weights: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .zip(weights)
        .map(|(&c, &p)| {
            let expected = n * p;
            let d = (c as f64 - expected) / expected.max(1.0);
            d * d
        })
        .sum()
}

/// Merit value. `N = 0` scores 0 regardless of ΔV.
pub fn merit_j(n: usize, e_r: f64, e_theta: f64, dv_used: f64, dv_max: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if !(dv_used > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ΔV used must be positive when stars are settled (got {dv_used})"
        )));
    }
    if e_r < 0.0 || e_theta < 0.0 || dv_max < 0.0 {
        return Err(Error::InvalidArgument("error terms and ΔV max must be non-negative".into()));
    }
    let n = n as f64;
    Ok(n / (1.0 + 1e-4 * n * (e_r + e_theta)) * (dv_max / dv_used))
}

/// J without the ΔV factor.
pub fn merit_without_dv(n: usize, e_r: f64, e_theta: f64) -> f64 {
    let n = n as f64;
    n / (1.0 + 1e-4 * n * (e_r + e_theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "E_r")]
    pub e_r: f64,
    #[serde(rename = "E_theta")]
    pub e_theta: f64,
    pub dv_used: f64,
    pub dv_max: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl MeritReport {
    pub fn compute(
        functional: &dyn UniformityError,
        settled_at_reference: &[Vec3],
        dv_used: f64,
        dv_max: f64,
    ) -> Result<Self> {
        let n = settled_at_reference.len();
        let e_r = functional.error_r(settled_at_reference);
        let e_theta = functional.error_theta(settled_at_reference);
        let j = merit_j(n, e_r, e_theta, dv_used, dv_max)?;
        Ok(MeritReport {
            n,
            e_r,
            e_theta,
            dv_used,
            dv_max,
            j,
        })
    }
}

/// Positions at the reference epoch for the given star ids.
pub fn reference_positions(catalog: &StarCatalog, ids: &[u32]) -> Result<Vec<Vec3>> {
    ids.iter()
        .map(|&id| catalog.star_state(id, REFERENCE_EPOCH_MYR).map(|(p, _)| p))
        .collect()
}

/// Merit (without ΔV factor) when the `N` stars closest to the galactic
/// center are settled, for each `N` in `n_list`.
pub fn merit_curve_closest_n(
    catalog: &StarCatalog,
    functional: &BinnedSquaredError,
    n_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if n_list.iter().any(|&n| n == 0 || n > catalog.len()) {
        return Err(Error::InvalidArgument(format!(
            "N values must lie in [1, {}]",
            catalog.len()
        )));
    }
    let mut order: Vec<usize> = (0..catalog.len()).collect();
    let stars = catalog.stars();
    order.sort_by(|&a, &b| {
        stars[a]
            .r_kpc
            .total_cmp(&stars[b].r_kpc)
            .then(stars[a].id.cmp(&stars[b].id))
    });
    let grid = functional.grid();
    let mut rc = vec![0usize; grid.radial_bins()];
    let mut ac = vec![0usize; grid.angular_bins()];
    let mut sorted: Vec<usize> = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut values = std::collections::HashMap::new();
    let mut added = 0;
    for &n in &sorted {
        while added < n {
            let (p, _) = catalog.state_at_index(order[added], REFERENCE_EPOCH_MYR);
            if let Some(b) = grid.radial_bin(&p) {
                rc[b] += 1;
            }
            if let Some(b) = grid.angular_bin(&p) {
                ac[b] += 1;
            }
            added += 1;
        }
        let e_r = functional.radial_error_from_counts(&rc, n);
        let e_t = functional.angular_error_from_counts(&ac, n);
        values.insert(n, merit_without_dv(n, e_r, e_t));
    }
    Ok(n_list.iter().map(|&n| (n, values[&n])).collect())
}

/// Per grid cell, the star with inclination below `incl_limit_deg` closest
/// (in the plane) to the cell center at the reference epoch; ties go to the
/// lowest id. Empty cells are omitted; output is ordered by cell.
pub fn high_value_stars(catalog: &StarCatalog, grid: &GridSpec, incl_limit_deg: f64) -> Result<Vec<u32>> {
    grid.validate()?;
    let mut best: Vec<Option<(f64, u32)>> = vec![None; grid.cells()];
    for (i, s) in catalog.stars().iter().enumerate() {
        if s.incl_deg >= incl_limit_deg {
            continue;
        }
        let (p, _) = catalog.state_at_index(i, REFERENCE_EPOCH_MYR);
        let Some(cell) = grid.cell(&p) else { continue };
        let c = grid.cell_center(cell);
        let d = ((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt();
        let slot = &mut best[cell];
        let better = match slot {
            None => true,
            Some((bd, bid)) => d < *bd || (d == *bd && s.id < *bid),
        };
        if better {
            *slot = Some((d, s.id));
        }
    }
    Ok(best.into_iter().flatten().map(|(_, id)| id).collect())
}
