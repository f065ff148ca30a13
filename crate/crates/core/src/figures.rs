//! CSV bundle consumed by the plotting scripts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::campaign::{generation_snapshot, SnapshotRow};
use crate::catalog::{bin_index, uniform_edges, StarCatalog, CATALOG_R_MAX, CATALOG_R_MIN};
use crate::config::StrategyConfig;
use crate::error::{Error, Result};
use crate::merit::{high_value_stars, merit_curve_closest_n, BinnedSquaredError, REFERENCE_EPOCH_MYR};
use crate::tree::{EventRecord, SettlementTree};
use crate::units::polar_angle_deg;

pub const HIGH_VALUE_INCL_LIMIT_DEG: f64 = 10.0;
/// Sample count of the closest-N merit curve.
pub const MERIT_CURVE_POINTS: usize = 200;
pub const HISTOGRAM_RADIAL_BINS: usize = 30;
pub const HISTOGRAM_ANGULAR_BINS: usize = 36;
pub const SNAPSHOT_HEADER: [&str; 7] = ["generation", "star", "x_kpc", "y_kpc", "z_kpc", "r_kpc", "theta_deg"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBinRow {
    pub r_lo_kpc: f64,
    pub r_hi_kpc: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularBinRow {
    pub theta_lo_deg: f64,
    pub theta_hi_deg: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedRow {
    pub id: u32,
    pub r_kpc: f64,
    pub speed_kms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeritCurveRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J_no_dv")]
    pub j_no_dv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighValueRow {
    pub star: u32,
    pub r_kpc: f64,
    pub theta_deg: f64,
    pub incl_deg: f64,
}

pub fn radial_histogram(catalog: &StarCatalog) -> Vec<RadialBinRow> {
    let edges = uniform_edges(CATALOG_R_MIN, CATALOG_R_MAX, HISTOGRAM_RADIAL_BINS);
    let mut counts = vec![0; HISTOGRAM_RADIAL_BINS];
    for s in catalog.stars() {
        if let Some(i) = bin_index(&edges, s.r_kpc) {
            counts[i] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| RadialBinRow {
            r_lo_kpc: edges[i],
            r_hi_kpc: edges[i + 1],
            count,
        })
        .collect()
}

/// Polar angles at the reference epoch.
pub fn angular_histogram(catalog: &StarCatalog) -> Result<Vec<AngularBinRow>> {
    let edges = uniform_edges(-180.0, 180.0, HISTOGRAM_ANGULAR_BINS);
    let mut counts = vec![0; HISTOGRAM_ANGULAR_BINS];
    for s in catalog.stars() {
        let (p, _) = catalog.star_state(s.id, REFERENCE_EPOCH_MYR)?;
        if let Some(i) = bin_index(&edges, polar_angle_deg(&p)) {
            counts[i] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| AngularBinRow {
            theta_lo_deg: edges[i],
            theta_hi_deg: edges[i + 1],
            count,
        })
        .collect())
}

pub fn speed_vs_r(catalog: &StarCatalog) -> Vec<SpeedRow> {
    catalog
        .stars()
        .iter()
        .enumerate()
        .map(|(i, s)| SpeedRow {
            id: s.id,
            r_kpc: s.r_kpc,
            speed_kms: catalog.speed_at_index(i),
        })
        .collect()
}

/// `points` values of N spread evenly over [1, catalog size], both ends
/// included.
pub fn merit_curve_n_list(len: usize, points: usize) -> Vec<usize> {
    let points = points.clamp(1, len.max(1));
    if points == 1 {
        return vec![len];
    }
    let mut out: Vec<usize> = (0..points)
        .map(|k| 1 + ((len - 1) as f64 * k as f64 / (points - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

pub fn merit_curve(catalog: &StarCatalog, cfg: &StrategyConfig, points: usize) -> Result<Vec<MeritCurveRow>> {
    let functional = BinnedSquaredError::new(cfg.grid.grid_spec()?, cfg.grid.radial_target, Some(catalog))?;
    let rows = merit_curve_closest_n(catalog, &functional, &merit_curve_n_list(catalog.len(), points))?;
    Ok(rows.into_iter().map(|(n, j_no_dv)| MeritCurveRow { n, j_no_dv }).collect())
}

pub fn high_value_rows(catalog: &StarCatalog, cfg: &StrategyConfig) -> Result<Vec<HighValueRow>> {
    let ids = high_value_stars(catalog, &cfg.grid.grid_spec()?, HIGH_VALUE_INCL_LIMIT_DEG)?;
    ids.into_iter()
        .map(|id| {
            let (p, _) = catalog.star_state(id, REFERENCE_EPOCH_MYR)?;
            let s = catalog.get(id).ok_or(Error::UnknownStar(id))?;
            Ok(HighValueRow {
                star: id,
                r_kpc: s.r_kpc,
                theta_deg: polar_angle_deg(&p),
                incl_deg: s.incl_deg,
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `generation_snapshots/gen_XX.csv`: stars settled up to each generation,
/// positioned at the reference epoch.
pub fn write_generation_snapshots(dir: &Path, tree: &SettlementTree, catalog: &StarCatalog) -> Result<Vec<PathBuf>> {
    let snap_dir = dir.join("generation_snapshots");
    std::fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
    let mut written = Vec::new();
    for g in 1..=tree.max_generation() {
        let rows: Vec<SnapshotRow> = generation_snapshot(tree, catalog, g)?;
        let p = snap_dir.join(format!("gen_{g:02}.csv"));
        write_rows(&p, &rows, &SNAPSHOT_HEADER)?;
        written.push(p);
    }
    Ok(written)
}

/// Write the catalog figures and, when `events` is given, the campaign
/// figures. Returns the files written.
pub fn write_bundle(
    dir: &Path,
    catalog: &StarCatalog,
    cfg: &StrategyConfig,
    events: Option<&[EventRecord]>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_rows(&put("radial_histogram.csv"), &radial_histogram(catalog), &["r_lo_kpc", "r_hi_kpc", "count"])?;
    write_rows(
        &put("angular_histogram.csv"),
        &angular_histogram(catalog)?,
        &["theta_lo_deg", "theta_hi_deg", "count"],
    )?;
    write_rows(&put("speed_vs_r.csv"), &speed_vs_r(catalog), &["id", "r_kpc", "speed_kms"])?;
    write_rows(&put("merit_curve.csv"), &merit_curve(catalog, cfg, MERIT_CURVE_POINTS)?, &["N", "J_no_dv"])?;
    write_rows(
        &put("high_value_stars.csv"),
        &high_value_rows(catalog, cfg)?,
        &["star", "r_kpc", "theta_deg", "incl_deg"],
    )?;

    let tree = match events {
        Some(ev) => SettlementTree::from_events(ev)?,
        None => SettlementTree::default(),
    };
    write_rows(
        &put("cumulative_by_generation.csv"),
        &tree.generation_stats(),
        &["generation", "new", "cumulative"],
    )?;
    if events.is_some() {
        written.extend(write_generation_snapshots(dir, &tree, catalog)?);
    }
    Ok(written)
}
