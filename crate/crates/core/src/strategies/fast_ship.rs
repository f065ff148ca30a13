//! Fast-ship target selection: rim stars in a polar sector, reached with
//! two large impulses from Sol.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvp::{shooting_solve, ShootingOptions};
use crate::catalog::{StarCatalog, SOL_ID};
use crate::dynamics::{propagate_with, Impulse, ShipState};
use crate::error::{Error, Result};
use crate::units::{polar_angle_deg, KMS_PER_KPC_MYR};

use super::{BudgetSpec, ShipKind, TransferSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastShipParams {
    pub t_departure: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl FastShipParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min < self.r_max) {
            return Err(Error::Config(format!("fast ship r_min {} ≥ r_max {}", self.r_min, self.r_max)));
        }
        if !(self.theta_min < self.theta_max) {
            return Err(Error::Config(format!(
                "fast ship theta_min {} ≥ theta_max {}",
                self.theta_min, self.theta_max
            )));
        }
        if !(0.0..90.0).contains(&self.t_departure) {
            return Err(Error::Config(format!("fast ship departure {} outside [0, 90)", self.t_departure)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastShipOptions {
    pub first_tof: f64,
    pub tof_step: f64,
    pub max_arrival: f64,
    /// Set from the shared solver tolerances; not serialized.
    #[serde(skip)]
    pub shooting: ShootingOptions,
}

impl Default for FastShipOptions {
    fn default() -> Self {
        FastShipOptions {
            first_tof: 2.5,
            tof_step: 2.5,
            max_arrival: 89.5,
            shooting: ShootingOptions::default(),
        }
    }
}

/// Outcome for one candidate star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastShipEvaluation {
    pub star: u32,
    /// First feasible time of flight, if any.
    pub tof: Option<f64>,
    pub dv_total: Option<f64>,
    /// Trial times tried (sector and solver attempts).
    pub trials: usize,
}

struct Feasible {
    tof: f64,
    dv1: crate::units::Vec3,
    dv2: crate::units::Vec3,
}

fn evaluate(
    catalog: &StarCatalog,
    start: &ShipState,
    id: u32,
    p: &FastShipParams,
    budget: &BudgetSpec,
    opts: &FastShipOptions,
) -> (FastShipEvaluation, Option<Feasible>) {
    let mut tof = opts.first_tof;
    let mut trials = 0;
    while start.t + tof <= opts.max_arrival + 1e-12 {
        trials += 1;
        let t_arr = start.t + tof;
        let Ok((pt, vt)) = catalog.star_state(id, t_arr) else { break };
        let theta = polar_angle_deg(&pt);
        if theta >= p.theta_min && theta <= p.theta_max {
            let guess = propagate_with(catalog.curve(), start, tof, &opts.shooting.integrator)
                .map(|drift| start.vel + (pt - drift.pos) / tof * KMS_PER_KPC_MYR)
                .unwrap_or(start.vel);
            if let Ok(arc) = shooting_solve(catalog.curve(), &start.pos, &pt, tof, &guess, &opts.shooting) {
                let dv1 = arc.v0 - start.vel;
                let dv2 = vt - arc.vf;
                let (m1, m2) = (dv1.norm(), dv2.norm());
                if m1 <= budget.per_impulse_kms && m2 <= budget.per_impulse_kms && m1 + m2 <= budget.cumulative_kms {
                    let ev = FastShipEvaluation {
                        star: id,
                        tof: Some(tof),
                        dv_total: Some(m1 + m2),
                        trials,
                    };
                    return (ev, Some(Feasible { tof, dv1, dv2 }));
                }
            }
        }
        tof += opts.tof_step;
    }
    (
        FastShipEvaluation {
            star: id,
            tof: None,
            dv_total: None,
            trials,
        },
        None,
    )
}

/// Minimum-time feasible rim target. Returns the chosen transfer and the
/// per-candidate evaluation log (ordered by star id).
pub fn fast_ship_select(
    catalog: &StarCatalog,
    params: &FastShipParams,
    settled: &HashSet<u32>,
    budget: &BudgetSpec,
    opts: &FastShipOptions,
) -> Result<(TransferSolution, Vec<FastShipEvaluation>)> {
    params.validate()?;
    let start = catalog.ship_state(SOL_ID, params.t_departure)?;
    let candidates: Vec<u32> = catalog
        .stars()
        .iter()
        .filter(|s| s.id != SOL_ID && !settled.contains(&s.id))
        .filter(|s| s.r_kpc >= params.r_min && s.r_kpc <= params.r_max)
        .map(|s| s.id)
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidate(format!(
            "no unsettled star with radius in [{}, {}] kpc",
            params.r_min, params.r_max
        )));
    }
    let results: Vec<(FastShipEvaluation, Option<Feasible>)> = candidates
        .par_iter()
        .map(|&id| evaluate(catalog, &start, id, params, budget, opts))
        .collect();
    let best = results
        .iter()
        .filter_map(|(ev, f)| f.as_ref().map(|f| (ev.star, f)))
        .min_by(|a, b| a.1.tof.total_cmp(&b.1.tof).then(a.0.cmp(&b.0)));
    let Some((id, f)) = best else {
        return Err(Error::NoCandidate(format!(
            "none of {} rim candidates is reachable within budget before {} Myr",
            candidates.len(),
            opts.max_arrival
        )));
    };
    let solution = TransferSolution {
        kind: ShipKind::FastShip,
        parent: SOL_ID,
        target: id,
        departure_t: params.t_departure,
        arrival_t: params.t_departure + f.tof,
        impulses: vec![
            Impulse::new(params.t_departure, f.dv1),
            Impulse::new(params.t_departure + f.tof, f.dv2),
        ],
        trajectory: Vec::new(),
    };
    Ok((solution, results.into_iter().map(|(ev, _)| ev).collect()))
}
