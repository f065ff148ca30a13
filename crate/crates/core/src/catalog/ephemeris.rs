//! Precomputed star states on the 0.5 Myr epoch grid over the mission
//! window, with an optional binary cache (`ephemeris.bin`).

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{StarCatalog, MISSION_END_MYR, MISSION_START_MYR};
use crate::error::{Error, Result};
use crate::units::Vec3;

pub const EPHEMERIS_STEP_MYR: f64 = 0.5;
const MAGIC: &[u8; 8] = b"GSEPH001";

/// Star states at one epoch, stored as structure-of-arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochFrame {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub vz: Vec<f64>,
}

impl EpochFrame {
    fn with_capacity(n: usize) -> Self {
        EpochFrame {
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            z: Vec::with_capacity(n),
            vx: Vec::with_capacity(n),
            vy: Vec::with_capacity(n),
            vz: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn position(&self, idx: usize) -> Vec3 {
        Vec3::new(self.x[idx], self.y[idx], self.z[idx])
    }

    #[inline]
    pub fn velocity(&self, idx: usize) -> Vec3 {
        Vec3::new(self.vx[idx], self.vy[idx], self.vz[idx])
    }

    fn push(&mut self, p: Vec3, v: Vec3) {
        self.x.push(p.x);
        self.y.push(p.y);
        self.z.push(p.z);
        self.vx.push(v.x);
        self.vy.push(v.y);
        self.vz.push(v.z);
    }

    /// Frame computed directly at an arbitrary epoch (not cached).
    pub fn compute(catalog: &StarCatalog, t: f64) -> Self {
        let mut f = EpochFrame::with_capacity(catalog.len());
        for i in 0..catalog.len() {
            let (p, v) = catalog.state_at_index(i, t);
            f.push(p, v);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EphemerisGrid {
    pub t_grid: Vec<f64>,
    pub frames: Vec<EpochFrame>,
    key: [u8; 32],
}

pub fn epoch_count() -> usize {
    ((MISSION_END_MYR - MISSION_START_MYR) / EPHEMERIS_STEP_MYR).round() as usize + 1
}

/// Grid index of `t` when it lies on the 0.5 Myr grid (to 1e-9 Myr).
pub fn grid_index(t: f64) -> Option<usize> {
    let k = (t - MISSION_START_MYR) / EPHEMERIS_STEP_MYR;
    let kr = k.round();
    ((k - kr).abs() < 1e-9 && kr >= 0.0 && (kr as usize) < epoch_count()).then_some(kr as usize)
}

/// Smallest grid epoch ≥ `t`.
pub fn snap_up(t: f64) -> f64 {
    match grid_index(t) {
        Some(k) => MISSION_START_MYR + k as f64 * EPHEMERIS_STEP_MYR,
        None => MISSION_START_MYR + ((t - MISSION_START_MYR) / EPHEMERIS_STEP_MYR).ceil() * EPHEMERIS_STEP_MYR,
    }
}

/// Cache key: catalog content hash combined with the rotation-curve hash.
pub fn cache_key(catalog: &StarCatalog) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(catalog.content_hash());
    h.update(catalog.curve().config_hash());
    h.finalize().into()
}

impl EphemerisGrid {
    pub fn build(catalog: &StarCatalog) -> Result<Self> {
        let n_epochs = epoch_count();
        let bytes = catalog
            .len()
            .checked_mul(n_epochs * 6 * std::mem::size_of::<f64>())
            .ok_or_else(|| Error::Capacity("ephemeris size overflows".into()))?;
        if bytes > (1usize << 36) {
            return Err(Error::Capacity(format!("ephemeris would need {bytes} bytes")));
        }
        let t_grid: Vec<f64> = (0..n_epochs)
            .map(|k| MISSION_START_MYR + k as f64 * EPHEMERIS_STEP_MYR)
            .collect();
        let frames = t_grid.iter().map(|&t| EpochFrame::compute(catalog, t)).collect();
        Ok(EphemerisGrid {
            t_grid,
            frames,
            key: cache_key(catalog),
        })
    }

    pub fn n_stars(&self) -> usize {
        self.frames.first().map_or(0, |f| f.len())
    }

    pub fn key(&self) -> [u8; 32] {
        self.key
    }

    pub fn frame(&self, k: usize) -> &EpochFrame {
        &self.frames[k]
    }

    /// Frame for a grid epoch, or `None` if `t` is off-grid.
    pub fn frame_at(&self, t: f64) -> Option<&EpochFrame> {
        grid_index(t).and_then(|k| self.frames.get(k))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&self.key).map_err(io)?;
        w.write_all(&(self.n_stars() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.frames.len() as u64).to_le_bytes()).map_err(io)?;
        for f in &self.frames {
            for col in [&f.x, &f.y, &f.z, &f.vx, &f.vy, &f.vz] {
                for v in col.iter() {
                    w.write_all(&v.to_le_bytes()).map_err(io)?;
                }
            }
        }
        w.flush().map_err(io)
    }

    /// Load a cached grid; fails with [`Error::Cache`] when the file was
    /// built for a different catalog or rotation curve.
    pub fn load(path: &Path, catalog: &StarCatalog) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = std::io::BufReader::new(file);
        let io = |e| Error::io(path, e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Cache("not an ephemeris cache file".into()));
        }
        let mut key = [0u8; 32];
        r.read_exact(&mut key).map_err(io)?;
        if key != cache_key(catalog) {
            return Err(Error::Cache("cache key does not match catalog and curve".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(io)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word).map_err(io)?;
        let n_epochs = u64::from_le_bytes(word) as usize;
        if n != catalog.len() || n_epochs != epoch_count() {
            return Err(Error::Cache("cache dimensions mismatch".into()));
        }
        let mut frames = Vec::with_capacity(n_epochs);
        for _ in 0..n_epochs {
            let mut cols: [Vec<f64>; 6] = Default::default();
            for col in cols.iter_mut() {
                col.reserve_exact(n);
                for _ in 0..n {
                    r.read_exact(&mut word).map_err(io)?;
                    col.push(f64::from_le_bytes(word));
                }
            }
            let [x, y, z, vx, vy, vz] = cols;
            frames.push(EpochFrame { x, y, z, vx, vy, vz });
        }
        Ok(EphemerisGrid {
            t_grid: (0..n_epochs)
                .map(|k| MISSION_START_MYR + k as f64 * EPHEMERIS_STEP_MYR)
                .collect(),
            frames,
            key,
        })
    }

    /// Load the cache if valid, otherwise build and (best effort) write it.
    pub fn load_or_build(path: &Path, catalog: &StarCatalog) -> Result<Self> {
        match Self::load(path, catalog) {
            Ok(g) => Ok(g),
            Err(_) => {
                let g = Self::build(catalog)?;
                g.save(path)?;
                Ok(g)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_synthetic, StarRecord, SyntheticProfile};
    use crate::dynamics::RotationCurve;
    use std::sync::Arc;

    fn small() -> StarCatalog {
        generate_synthetic(25, 4, &SyntheticProfile::default(), Arc::new(RotationCurve::default_curve())).unwrap()
    }

    #[test]
    fn single_star_grid_has_181_epochs() {
        let c = StarCatalog::new(
            vec![StarRecord::new(0, 8.0, 0.0, 0.0, 0.0)],
            Arc::new(RotationCurve::default_curve()),
        )
        .unwrap();
        let g = EphemerisGrid::build(&c).unwrap();
        assert_eq!(g.t_grid.len(), 181);
        assert_eq!(g.frames.len(), 181);
        assert!(g.t_grid.windows(2).all(|w| w[1] - w[0] == 0.5));
    }

    #[test]
    fn grid_matches_direct_states() {
        let c = small();
        let g = EphemerisGrid::build(&c).unwrap();
        for (k, &t) in g.t_grid.iter().enumerate() {
            for s in c.stars() {
                let (p, v) = c.star_state(s.id, t).unwrap();
                let i = c.index_of(s.id).unwrap();
                let f = g.frame(k);
                assert!((f.position(i) - p).norm() <= 1e-13 * p.norm());
                assert!((f.velocity(i) - v).norm() <= 1e-13 * v.norm());
            }
        }
        assert_eq!(g.t_grid[0], 0.0);
        assert_eq!(g.t_grid[180], 90.0);
    }

    #[test]
    fn grid_index_and_snap() {
        assert_eq!(grid_index(0.0), Some(0));
        assert_eq!(grid_index(2.5), Some(5));
        assert_eq!(grid_index(90.0), Some(180));
        assert_eq!(grid_index(2.6), None);
        assert_eq!(grid_index(90.5), None);
        assert_eq!(snap_up(2.6), 3.0);
        assert_eq!(snap_up(3.0), 3.0);
    }

    #[test]
    fn cache_round_trip_and_key_check() {
        let c = small();
        let g = EphemerisGrid::build(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ephemeris.bin");
        g.save(&path).unwrap();
        let back = EphemerisGrid::load(&path, &c).unwrap();
        assert_eq!(back, g);
        let other = generate_synthetic(25, 5, &SyntheticProfile::default(), c.curve_arc()).unwrap();
        assert!(matches!(EphemerisGrid::load(&path, &other), Err(Error::Cache(_))));
        let flat = StarCatalog::new(c.stars().to_vec(), Arc::new(RotationCurve::flat(210.0).unwrap())).unwrap();
        assert!(EphemerisGrid::load(&path, &flat).is_err());
    }
}
