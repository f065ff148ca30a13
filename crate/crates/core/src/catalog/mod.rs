//! Star catalog: circular-orbit elements for every star, star states at
//! arbitrary epochs, and bulk statistics.
//!
//! Orientation convention: a star's in-plane angle is `θ(t) = phase0 + ω t`
//! with `ω = v(r)/r`. The in-plane point `r (cos θ, sin θ, 0)` is tilted by
//! `incl` about the x axis and then rotated by `node` about z, i.e.
//! `R = Rz(node) · Rx(incl)`. With `incl = 0` the star moves counter-clockwise
//! seen from +z.

pub mod ephemeris;
pub mod synthetic;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ephemeris::{EphemerisGrid, EpochFrame};
pub use synthetic::{generate_synthetic, RadialDensity, SyntheticProfile};

use crate::dynamics::{RotationCurve, ShipState};
use crate::error::{Error, Result};
use crate::units::{Vec3, KMS_PER_KPC_MYR};

pub const SOL_ID: u32 = 0;
pub const MISSION_START_MYR: f64 = 0.0;
pub const MISSION_END_MYR: f64 = 90.0;
pub const CATALOG_R_MIN: f64 = 2.0;
pub const CATALOG_R_MAX: f64 = 32.0;
pub const CATALOG_HEADER: [&str; 5] = ["id", "r_kpc", "incl_deg", "node_deg", "phase0_deg"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarRecord {
    pub id: u32,
    pub r_kpc: f64,
    pub incl_deg: f64,
    pub node_deg: f64,
    pub phase0_deg: f64,
}

impl StarRecord {
    pub fn new(id: u32, r_kpc: f64, incl_deg: f64, node_deg: f64, phase0_deg: f64) -> Self {
        StarRecord {
            id,
            r_kpc,
            incl_deg,
            node_deg,
            phase0_deg,
        }
    }
}

#[derive(Debug, Clone)]
struct Kinematics {
    omega: f64, // rad/Myr
    speed_kms: f64,
    rot: Rotation3<f64>,
}

/// Immutable, id-ordered set of stars sharing one rotation curve.
#[derive(Debug, Clone)]
pub struct StarCatalog {
    stars: Vec<StarRecord>,
    kin: Vec<Kinematics>,
    curve: Arc<RotationCurve>,
    dense_ids: bool,
}

impl StarCatalog {
    /// Build from records; sorts by id and rejects duplicates and radii
    /// outside [2, 32] kpc or outside the curve domain.
    pub fn new(mut stars: Vec<StarRecord>, curve: Arc<RotationCurve>) -> Result<Self> {
        stars.sort_by_key(|s| s.id);
        for w in stars.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::DuplicateId { id: w[1].id, line: 0 });
            }
        }
        let [dmin, dmax] = curve.domain();
        let mut kin = Vec::with_capacity(stars.len());
        for s in &stars {
            validate_record(s, 0)?;
            if s.r_kpc < dmin || s.r_kpc > dmax {
                return Err(Error::RadiusOutOfRange {
                    id: s.id,
                    r_kpc: s.r_kpc,
                    min: dmin,
                    max: dmax,
                });
            }
            let v = curve.circular_speed(s.r_kpc)?;
            let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), s.node_deg.to_radians())
                * Rotation3::from_axis_angle(&Vec3::x_axis(), s.incl_deg.to_radians());
            kin.push(Kinematics {
                omega: v / KMS_PER_KPC_MYR / s.r_kpc,
                speed_kms: v,
                rot,
            });
        }
        let dense_ids = stars.iter().enumerate().all(|(i, s)| s.id as usize == i);
        Ok(StarCatalog {
            stars,
            kin,
            curve,
            dense_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    pub fn stars(&self) -> &[StarRecord] {
        &self.stars
    }

    pub fn curve(&self) -> &RotationCurve {
        &self.curve
    }

    pub fn curve_arc(&self) -> Arc<RotationCurve> {
        Arc::clone(&self.curve)
    }

    pub fn has_sol(&self) -> bool {
        self.index_of(SOL_ID).is_some()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        if self.dense_ids {
            ((id as usize) < self.stars.len()).then_some(id as usize)
        } else {
            self.stars.binary_search_by_key(&id, |s| s.id).ok()
        }
    }

    pub fn get(&self, id: u32) -> Option<&StarRecord> {
        self.index_of(id).map(|i| &self.stars[i])
    }

    /// Circular speed of the star at catalog index `idx`, km/s.
    pub fn speed_at_index(&self, idx: usize) -> f64 {
        self.kin[idx].speed_kms
    }

    /// State of the star at catalog index `idx`; no range checks.
    pub fn state_at_index(&self, idx: usize, t: f64) -> (Vec3, Vec3) {
        let s = &self.stars[idx];
        let k = &self.kin[idx];
        let theta = s.phase0_deg.to_radians() + k.omega * t;
        let (sn, cs) = theta.sin_cos();
        let p = Vec3::new(s.r_kpc * cs, s.r_kpc * sn, 0.0);
        let v = Vec3::new(-k.speed_kms * sn, k.speed_kms * cs, 0.0);
        (k.rot * p, k.rot * v)
    }

    /// Position (kpc) and velocity (km/s) of star `id` at epoch `t` Myr.
    pub fn star_state(&self, id: u32, t: f64) -> Result<(Vec3, Vec3)> {
        check_epoch(t)?;
        let idx = self.index_of(id).ok_or(Error::UnknownStar(id))?;
        Ok(self.state_at_index(idx, t))
    }

    /// [`star_state`](Self::star_state) packaged as a [`ShipState`].
    pub fn ship_state(&self, id: u32, t: f64) -> Result<ShipState> {
        let (pos, vel) = self.star_state(id, t)?;
        Ok(ShipState::new(pos, vel, t))
    }

    /// SHA-256 over the canonical CSV serialization.
    pub fn content_hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_csv_string().as_bytes()).into()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = CATALOG_HEADER.join(",");
        out.push('\n');
        for s in &self.stars {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.id, s.r_kpc, s.incl_deg, s.node_deg, s.phase0_deg
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_str(text: &str, curve: Arc<RotationCurve>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = rdr.records();
        let header = records.next().ok_or(Error::MalformedRow {
            line: 1,
            reason: "missing header".into(),
        })??;
        if header.iter().collect::<Vec<_>>() != CATALOG_HEADER {
            return Err(Error::MalformedRow {
                line: 1,
                reason: format!("expected header `{}`", CATALOG_HEADER.join(",")),
            });
        }
        let mut stars = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for rec in records {
            let rec = rec.map_err(|e| Error::MalformedRow {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                reason: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != 5 {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("expected 5 fields, found {}", rec.len()),
                });
            }
            let id: u32 = rec[0].parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("bad id `{}`", &rec[0]),
            })?;
            let mut vals = [0.0; 4];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = rec[k + 1].parse().map_err(|_| Error::MalformedRow {
                    line,
                    reason: format!("bad {} `{}`", CATALOG_HEADER[k + 1], &rec[k + 1]),
                })?;
            }
            let star = StarRecord::new(id, vals[0], vals[1], vals[2], vals[3]);
            validate_record(&star, line)?;
            if !seen.insert(id) {
                return Err(Error::DuplicateId { id, line });
            }
            stars.push(star);
        }
        Self::new(stars, curve)
    }

    pub fn load(path: &Path, curve: Arc<RotationCurve>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, curve)
    }
}

fn validate_record(s: &StarRecord, line: usize) -> Result<()> {
    let finite = [s.r_kpc, s.incl_deg, s.node_deg, s.phase0_deg]
        .iter()
        .all(|x| x.is_finite());
    if !finite {
        return Err(Error::MalformedRow {
            line,
            reason: format!("star {} has non-finite elements", s.id),
        });
    }
    if !(CATALOG_R_MIN..=CATALOG_R_MAX).contains(&s.r_kpc) {
        return Err(Error::RadiusOutOfRange {
            id: s.id,
            r_kpc: s.r_kpc,
            min: CATALOG_R_MIN,
            max: CATALOG_R_MAX,
        });
    }
    Ok(())
}

pub fn check_epoch(t: f64) -> Result<()> {
    if !(MISSION_START_MYR..=MISSION_END_MYR).contains(&t) {
        return Err(Error::EpochOutOfRange {
            t,
            min: MISSION_START_MYR,
            max: MISSION_END_MYR,
        });
    }
    Ok(())
}

/// One row of the speed-versus-radius table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: usize,
    pub mean_speed_kms: f64,
}

/// Mean circular speed per radial bin; empty bins are omitted. `edges` must
/// be strictly increasing; the last bin is closed on the right.
pub fn speed_histogram(catalog: &StarCatalog, edges: &[f64]) -> Result<Vec<SpeedBin>> {
    if catalog.is_empty() {
        return Err(Error::InvalidArgument("empty catalog".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("bin edges must be strictly increasing".into()));
    }
    let nb = edges.len() - 1;
    let mut sum = vec![0.0; nb];
    let mut count = vec![0usize; nb];
    for (i, s) in catalog.stars().iter().enumerate() {
        if let Some(b) = bin_index(edges, s.r_kpc) {
            sum[b] += catalog.speed_at_index(i);
            count[b] += 1;
        }
    }
    Ok((0..nb)
        .filter(|&b| count[b] > 0)
        .map(|b| SpeedBin {
            r_lo: edges[b],
            r_hi: edges[b + 1],
            count: count[b],
            mean_speed_kms: sum[b] / count[b] as f64,
        })
        .collect())
}

/// Bin lookup with half-open bins `[e_k, e_{k+1})`, the last one closed.
pub fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len();
    if n < 2 || x < edges[0] || x > edges[n - 1] {
        return None;
    }
    let p = edges.partition_point(|&e| e <= x);
    Some((p - 1).min(n - 2))
}

pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|k| lo + (hi - lo) * k as f64 / bins as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> Arc<RotationCurve> {
        Arc::new(RotationCurve::default_curve())
    }

    #[test]
    fn minimal_catalog_loads() {
        let c = StarCatalog::from_csv_str("id,r_kpc,incl_deg,node_deg,phase0_deg\n0,8.0,0,0,0\n", curve()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.has_sol());
    }

    #[test]
    fn radius_out_of_range_rejected() {
        let err = StarCatalog::from_csv_str("id,r_kpc,incl_deg,node_deg,phase0_deg\n5,1.0,0,0,0\n", curve()).unwrap_err();
        assert!(matches!(err, Error::RadiusOutOfRange { id: 5, .. }), "{err}");
    }

    #[test]
    fn duplicate_id_rejected_with_line() {
        let text = "id,r_kpc,incl_deg,node_deg,phase0_deg\n0,8,0,0,0\n0,8,0,0,0\n";
        match StarCatalog::from_csv_str(text, curve()).unwrap_err() {
            Error::DuplicateId { id: 0, line } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "id,r_kpc,incl_deg,node_deg,phase0_deg\n0,8,0,0,0\n1,abc,0,0,0\n";
        match StarCatalog::from_csv_str(text, curve()).unwrap_err() {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let bad_header = "id,r,incl,node,phase\n0,8,0,0,0\n";
        assert!(StarCatalog::from_csv_str(bad_header, curve()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = StarCatalog::load(Path::new("/nonexistent/catalog.csv"), curve()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn sol_state_at_epoch_zero() {
        let c = StarCatalog::new(vec![StarRecord::new(0, 8.0, 0.0, 0.0, 30.0)], curve()).unwrap();
        let (p, v) = c.star_state(0, 0.0).unwrap();
        let expect = Vec3::new(8.0 * 30f64.to_radians().cos(), 8.0 * 30f64.to_radians().sin(), 0.0);
        assert!((p - expect).norm() < 1e-12);
        assert!((v.norm() - c.curve().circular_speed(8.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn() {
        let c = StarCatalog::new(vec![StarRecord::new(0, 10.0, 0.0, 0.0, 0.0)], curve()).unwrap();
        let omega = c.curve().circular_speed(10.0).unwrap() / KMS_PER_KPC_MYR / 10.0;
        let t = std::f64::consts::FRAC_PI_2 / omega;
        let (p, _) = c.star_state(0, t).unwrap();
        assert!((p - Vec3::new(0.0, 10.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn state_invariants_hold_for_inclined_stars() {
        let c = StarCatalog::new(vec![StarRecord::new(3, 17.0, 12.0, 77.0, -40.0)], curve()).unwrap();
        let v_r = c.curve().circular_speed(17.0).unwrap();
        let (p0, v0) = c.star_state(3, 0.0).unwrap();
        let h0 = p0.cross(&v0);
        assert!((h0.norm() - 17.0 * v_r).abs() < 1e-12 * h0.norm());
        for k in 0..50 {
            let t = 90.0 * k as f64 / 49.0;
            let (p, v) = c.star_state(3, t).unwrap();
            assert!((p.norm() - 17.0).abs() < 1e-12 * 17.0);
            assert!((v.norm() - v_r).abs() < 1e-12 * v_r);
            assert!(p.dot(&v).abs() < 1e-9);
            assert!((p.cross(&v) - h0).norm() < 1e-12 * h0.norm());
        }
    }

    #[test]
    fn state_errors() {
        let c = StarCatalog::new(vec![StarRecord::new(0, 8.0, 0.0, 0.0, 0.0)], curve()).unwrap();
        assert!(matches!(c.star_state(9, 1.0), Err(Error::UnknownStar(9))));
        assert!(matches!(c.star_state(0, 90.5), Err(Error::EpochOutOfRange { .. })));
        assert!(c.star_state(0, -0.1).is_err());
    }

    #[test]
    fn sparse_ids_are_looked_up() {
        let c = StarCatalog::new(
            vec![StarRecord::new(10, 9.0, 0.0, 0.0, 0.0), StarRecord::new(4, 8.0, 0.0, 0.0, 0.0)],
            curve(),
        )
        .unwrap();
        assert_eq!(c.stars()[0].id, 4);
        assert_eq!(c.index_of(10), Some(1));
        assert_eq!(c.index_of(5), None);
    }

    #[test]
    fn speed_histogram_flat_curve() {
        let flat = Arc::new(RotationCurve::flat(200.0).unwrap());
        let stars = (0..40)
            .map(|i| StarRecord::new(i, 2.0 + 0.75 * i as f64, 0.0, 0.0, 0.0))
            .collect();
        let c = StarCatalog::new(stars, flat).unwrap();
        let rows = speed_histogram(&c, &uniform_edges(2.0, 32.0, 10)).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|b| b.mean_speed_kms == 200.0));
        let empty = StarCatalog::new(vec![], curve()).unwrap();
        assert!(speed_histogram(&empty, &[2.0, 32.0]).is_err());
    }

    #[test]
    fn bin_index_edges() {
        let e = [2.0, 3.0, 4.0];
        assert_eq!(bin_index(&e, 2.0), Some(0));
        assert_eq!(bin_index(&e, 3.0), Some(1));
        assert_eq!(bin_index(&e, 4.0), Some(1));
        assert_eq!(bin_index(&e, 4.1), None);
        assert_eq!(bin_index(&e, 1.9), None);
    }
}
