//! End-to-end campaign: fast ships and motherships seed the tree, settlers
//! grow it, and the resulting event log is scored and checked.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::catalog::{EphemerisGrid, StarCatalog, SOL_ID};
use crate::config::StrategyConfig;
use crate::error::{Error, Result};
use crate::merit::{reference_positions, BinnedSquaredError, MeritReport, REFERENCE_EPOCH_MYR};
use crate::strategies::{
    fast_ship_select, mothership_run, settler_campaign, FastShipEvaluation, MomentumSearch, MothershipLeg, Seed,
    ShipKind, TransferSolution,
};
use crate::tree::{validate, EventNote, EventRecord, GenerationStat, SettlementTree, ValidationReport};
use crate::units::{polar_angle_deg, Vec3};

/// Sequential event and vehicle numbering.
#[derive(Debug, Default)]
struct EventLog {
    events: Vec<EventRecord>,
    next_vehicle: u32,
}

impl EventLog {
    fn vehicle(&mut self) -> u32 {
        self.next_vehicle += 1;
        self.next_vehicle - 1
    }

    fn push(&mut self, vehicle_id: u32, kind: ShipKind, parent: u32, target: u32, t: f64, dv: Vec3, note: EventNote) {
        let mut e = EventRecord {
            event_id: self.events.len() as u64,
            vehicle_id,
            vehicle_kind: kind,
            parent_star: parent,
            target_star: target,
            t_myr: t,
            dvx: 0.0,
            dvy: 0.0,
            dvz: 0.0,
            note,
        };
        e.set_dv(&dv);
        self.events.push(e);
    }

    /// Rendezvous vehicle: first impulse `depart`, last `rendezvous`, the
    /// rest `midcourse`.
    fn transfer(&mut self, sol: &TransferSolution) {
        let v = self.vehicle();
        let n = sol.impulses.len();
        for (i, imp) in sol.impulses.iter().enumerate() {
            let note = match i {
                0 if n > 1 => EventNote::Depart,
                _ if i + 1 == n => EventNote::Rendezvous,
                _ => EventNote::Midcourse,
            };
            self.push(v, sol.kind, sol.parent, sol.target, imp.t, imp.dv, note);
        }
    }

    fn mothership(&mut self, legs: &[MothershipLeg]) {
        let ms = self.vehicle();
        for (i, leg) in legs.iter().enumerate() {
            let f = &leg.flyby;
            let imp = f.impulses[0];
            let note = if i == 0 { EventNote::Depart } else { EventNote::Burn };
            self.push(ms, ShipKind::Mothership, SOL_ID, f.target, imp.t, imp.dv, note);
            self.push(ms, ShipKind::Mothership, SOL_ID, f.target, f.arrival_t, Vec3::zeros(), EventNote::Flyby);
        }
        for leg in legs {
            let pod = self.vehicle();
            self.push(pod, ShipKind::Pod, SOL_ID, leg.flyby.target, leg.pod.t, leg.pod.dv, EventNote::Rendezvous);
        }
    }
}

/// Per-seed-vehicle record of what the seeding phase did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub kind: ShipKind,
    /// Index into the config's fast-ship or mothership list.
    pub index: usize,
    pub settled: Vec<u32>,
    /// Why nothing was settled, when that happened.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub events: Vec<EventRecord>,
    pub tree: SettlementTree,
    pub generation_stats: Vec<GenerationStat>,
    pub merit: MeritReport,
    pub validation: ValidationReport,
    pub seeds: Vec<SeedReport>,
    pub fast_ship_evaluations: Vec<Vec<FastShipEvaluation>>,
    pub failed_settlers: usize,
    pub solver_traces: Vec<SolverTrace>,
}

/// Min-time solver history of one settler transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub star: u32,
    pub parent: u32,
    pub generation: usize,
    pub tof_trace: Vec<f64>,
    pub evaluations: usize,
}

/// One settled star at the reference epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub generation: usize,
    pub star: u32,
    pub x_kpc: f64,
    pub y_kpc: f64,
    pub z_kpc: f64,
    pub r_kpc: f64,
    pub theta_deg: f64,
}

/// Run the whole pipeline. Fails with [`Error::Infeasible`] when no
/// first-generation settlement could be made.
pub fn run_campaign(catalog: &StarCatalog, ephemeris: Option<&EphemerisGrid>, cfg: &StrategyConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let search = MomentumSearch::new(catalog, ephemeris, cfg.search);
    let budgets = cfg.budgets;
    let mut log = EventLog::default();
    let mut settled: HashSet<u32> = HashSet::new();
    let mut seeds = Vec::new();
    let mut reports = Vec::new();
    let mut evaluations = Vec::new();

    let fs_opts = cfg.fast_ship_options();
    for (index, p) in cfg.fast_ships.iter().enumerate() {
        match fast_ship_select(catalog, p, &settled, &budgets.fast_ship, &fs_opts) {
            Ok((sol, evals)) => {
                settled.insert(sol.target);
                seeds.push(Seed {
                    star: sol.target,
                    arrival_t: sol.arrival_t,
                });
                log.transfer(&sol);
                reports.push(SeedReport {
                    kind: ShipKind::FastShip,
                    index,
                    settled: vec![sol.target],
                    failure: None,
                });
                evaluations.push(evals);
            }
            Err(e @ Error::NoCandidate(_)) => {
                reports.push(SeedReport {
                    kind: ShipKind::FastShip,
                    index,
                    settled: Vec::new(),
                    failure: Some(e.to_string()),
                });
                evaluations.push(Vec::new());
            }
            Err(e) => return Err(e),
        }
    }

    let ms_opts = cfg.mothership_options();
    for (index, p) in cfg.motherships.iter().enumerate() {
        match mothership_run(catalog, p, &settled, &search, &budgets, &ms_opts) {
            Ok(legs) => {
                let ids: Vec<u32> = legs.iter().map(|l| l.flyby.target).collect();
                for leg in &legs {
                    settled.insert(leg.flyby.target);
                    seeds.push(Seed {
                        star: leg.flyby.target,
                        arrival_t: leg.flyby.arrival_t,
                    });
                }
                log.mothership(&legs);
                reports.push(SeedReport {
                    kind: ShipKind::Mothership,
                    index,
                    settled: ids,
                    failure: None,
                });
            }
            Err(e @ Error::Infeasible(_)) => reports.push(SeedReport {
                kind: ShipKind::Mothership,
                index,
                settled: Vec::new(),
                failure: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }

    if seeds.is_empty() {
        let why: Vec<String> = reports.iter().filter_map(|r| r.failure.clone()).collect();
        return Err(Error::Infeasible(format!("no first-generation settlement: {}", why.join("; "))));
    }

    let outcome = settler_campaign(catalog, &seeds, &settled, &search, &budgets.settler, &cfg.settler_options());
    for s in &outcome.settlements {
        log.transfer(&s.solution);
    }

    let events = log.events;
    let tree = SettlementTree::from_events(&events)?;
    let generation_stats = tree.generation_stats();
    let merit = merit_of_events(catalog, &events, cfg)?;
    let validation = validate(&events, catalog, &cfg.validation_config());
    Ok(CampaignResult {
        events,
        tree,
        generation_stats,
        merit,
        validation,
        seeds: reports,
        fast_ship_evaluations: evaluations,
        failed_settlers: outcome.failed_ships,
        solver_traces: outcome
            .settlements
            .into_iter()
            .map(|s| SolverTrace {
                star: s.star,
                parent: s.parent,
                generation: s.generation,
                tof_trace: s.tof_trace,
                evaluations: s.evaluations,
            })
            .collect(),
    })
}

/// ΔV used (sum of impulse magnitudes) and ΔV max (sum of the allowances
/// of every vehicle flown).
pub fn dv_totals(events: &[EventRecord], cfg: &StrategyConfig) -> (f64, f64) {
    let used = events.iter().map(|e| e.dv().norm()).sum();
    let mut flown: Vec<(u32, ShipKind)> = events.iter().map(|e| (e.vehicle_id, e.vehicle_kind)).collect();
    flown.sort_by_key(|v| v.0);
    flown.dedup_by_key(|v| v.0);
    let max = flown.iter().map(|&(_, k)| cfg.budgets.for_kind(k).dv_allowance_kms).sum();
    (used, max)
}

/// Score an event log on the configured grid.
pub fn merit_of_events(catalog: &StarCatalog, events: &[EventRecord], cfg: &StrategyConfig) -> Result<MeritReport> {
    let tree = SettlementTree::from_events(events)?;
    let functional = BinnedSquaredError::new(cfg.grid.grid_spec()?, cfg.grid.radial_target, Some(catalog))?;
    let positions = reference_positions(catalog, &tree.settled_ids())?;
    let (used, max) = dv_totals(events, cfg);
    MeritReport::compute(&functional, &positions, used, max)
}

/// Every star settled by generation `generation` (inclusive), at the
/// reference epoch, in arrival order.
pub fn generation_snapshot(tree: &SettlementTree, catalog: &StarCatalog, generation: usize) -> Result<Vec<SnapshotRow>> {
    tree.nodes()
        .iter()
        .filter(|n| n.generation <= generation)
        .map(|n| {
            let (p, _) = catalog.star_state(n.star, REFERENCE_EPOCH_MYR)?;
            Ok(SnapshotRow {
                generation: n.generation,
                star: n.star,
                x_kpc: p.x,
                y_kpc: p.y,
                z_kpc: p.z,
                r_kpc: p.norm(),
                theta_deg: polar_angle_deg(&p),
            })
        })
        .collect()
}
