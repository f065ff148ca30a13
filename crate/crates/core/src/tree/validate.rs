//! Constraint validator. Reads only the event log and the catalog; the
//! single piece of shared machinery with the strategy code is the
//! propagator.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{StarCatalog, MISSION_END_MYR, MISSION_START_MYR, SOL_ID};
use crate::dynamics::{propagate_with, IntegratorOptions, ShipState};
use crate::strategies::{Budgets, ShipKind};
use crate::units::Vec3;

use super::events::{EventNote, EventRecord};

const T_EPS: f64 = 1e-9;
const DV_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub budgets: Budgets,
    /// Solver position tolerance; legs may miss by ten times this.
    pub tol_pos: f64,
    pub vel_tol_kms: f64,
    pub max_settlers_per_star: usize,
    pub integrator: IntegratorOptions,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            budgets: Budgets::default(),
            tol_pos: 1e-6,
            vel_tol_kms: 1e-3,
            max_settlers_per_star: 3,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    UniqueEventIds,
    TimeWindow,
    KnownStars,
    VehicleStructure,
    ImpulseCount,
    PerImpulseCap,
    CumulativeCap,
    ImpulseSpacing,
    FlybyZeroDv,
    PodMatchesFlyby,
    SettlerDelay,
    SettlerParentSettled,
    SettlersPerStar,
    SingleSettlement,
    Trajectory,
    RendezvousVelocity,
}

impl Rule {
    pub const ALL: [Rule; 16] = [
        Rule::UniqueEventIds,
        Rule::TimeWindow,
        Rule::KnownStars,
        Rule::VehicleStructure,
        Rule::ImpulseCount,
        Rule::PerImpulseCap,
        Rule::CumulativeCap,
        Rule::ImpulseSpacing,
        Rule::FlybyZeroDv,
        Rule::PodMatchesFlyby,
        Rule::SettlerDelay,
        Rule::SettlerParentSettled,
        Rule::SettlersPerStar,
        Rule::SingleSettlement,
        Rule::Trajectory,
        Rule::RendezvousVelocity,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub event_id: Option<u64>,
    pub vehicle_id: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule: Rule,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    #[serde(rename = "N")]
    pub n: usize,
    pub dv_used: f64,
    pub dv_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub rules: Vec<RuleResult>,
    pub totals: Totals,
}

impl ValidationReport {
    pub fn failed_rules(&self) -> Vec<Rule> {
        self.rules.iter().filter(|r| !r.passed).map(|r| r.rule).collect()
    }

    pub fn rule(&self, rule: Rule) -> &RuleResult {
        self.rules.iter().find(|r| r.rule == rule).expect("every rule is reported")
    }
}

#[derive(Default)]
struct Findings(BTreeMap<Rule, Vec<Violation>>);

impl Findings {
    fn add(&mut self, rule: Rule, e: Option<&EventRecord>, vehicle: Option<u32>, message: impl Into<String>) {
        self.0.entry(rule).or_default().push(Violation {
            event_id: e.map(|e| e.event_id),
            vehicle_id: vehicle.or(e.map(|e| e.vehicle_id)),
            message: message.into(),
        });
    }

    fn merge(&mut self, other: Findings) {
        for (rule, mut v) in other.0 {
            self.0.entry(rule).or_default().append(&mut v);
        }
    }
}

/// A vehicle's rows in time order (ties by event id).
struct Vehicle<'a> {
    id: u32,
    rows: Vec<&'a EventRecord>,
}

impl Vehicle<'_> {
    fn kind(&self) -> ShipKind {
        self.rows[0].vehicle_kind
    }

    fn impulses(&self) -> impl Iterator<Item = &&EventRecord> {
        self.rows.iter().filter(|r| r.note.is_impulse())
    }
}

/// Check an event log against every vehicle rule. Pure in its inputs.
pub fn validate(events: &[EventRecord], catalog: &StarCatalog, cfg: &ValidationConfig) -> ValidationReport {
    let mut f = Findings::default();

    let mut ids = HashSet::new();
    for e in events {
        if !ids.insert(e.event_id) {
            f.add(Rule::UniqueEventIds, Some(e), None, format!("duplicate event id {}", e.event_id));
        }
        if !(e.t_myr >= MISSION_START_MYR - T_EPS && e.t_myr <= MISSION_END_MYR + T_EPS) {
            f.add(Rule::TimeWindow, Some(e), None, format!("epoch {} outside [0, 90] Myr", e.t_myr));
        }
        for star in [e.parent_star, e.target_star] {
            if catalog.index_of(star).is_none() {
                f.add(Rule::KnownStars, Some(e), None, format!("unknown star {star}"));
            }
        }
    }

    let mut by_vehicle: BTreeMap<u32, Vec<&EventRecord>> = BTreeMap::new();
    for e in events {
        by_vehicle.entry(e.vehicle_id).or_default().push(e);
    }
    let vehicles: Vec<Vehicle> = by_vehicle
        .into_iter()
        .map(|(id, mut rows)| {
            rows.sort_by(|a, b| a.t_myr.total_cmp(&b.t_myr).then(a.event_id.cmp(&b.event_id)));
            Vehicle { id, rows }
        })
        .collect();

    // Structure and per-vehicle budgets.
    let mut well_formed = HashSet::new();
    for v in &vehicles {
        if check_structure(v, &mut f) {
            well_formed.insert(v.id);
        }
        check_budgets(v, cfg, &mut f);
    }

    // Settlements: star → settle epoch, first come first served.
    let mut settled: HashMap<u32, f64> = HashMap::new();
    let mut settle_rows: Vec<&EventRecord> = events
        .iter()
        .filter(|e| e.note == EventNote::Rendezvous && e.vehicle_kind.settles())
        .collect();
    settle_rows.sort_by(|a, b| a.t_myr.total_cmp(&b.t_myr).then(a.event_id.cmp(&b.event_id)));
    for e in &settle_rows {
        if e.target_star == SOL_ID {
            f.add(Rule::SingleSettlement, Some(e), None, "Sol cannot be settled");
        } else if settled.contains_key(&e.target_star) {
            f.add(Rule::SingleSettlement, Some(e), None, format!("star {} settled twice", e.target_star));
        } else {
            settled.insert(e.target_star, e.t_myr);
        }
    }

    // Settler parentage.
    let mut per_parent: HashMap<u32, usize> = HashMap::new();
    for v in vehicles.iter().filter(|v| v.kind() == ShipKind::Settler) {
        let first = v.rows[0];
        let parent = first.parent_star;
        *per_parent.entry(parent).or_default() += 1;
        match settled.get(&parent) {
            None => f.add(
                Rule::SettlerParentSettled,
                Some(first),
                None,
                format!("parent star {parent} is never settled"),
            ),
            Some(&t_settle) => {
                let min = t_settle + cfg.budgets.settler.settle_delay_myr;
                if first.t_myr < min - T_EPS {
                    f.add(
                        Rule::SettlerDelay,
                        Some(first),
                        None,
                        format!("departs at {} before {min} Myr", first.t_myr),
                    );
                }
            }
        }
    }
    for (parent, n) in per_parent {
        if n > cfg.max_settlers_per_star {
            f.add(
                Rule::SettlersPerStar,
                None,
                None,
                format!("star {parent} launches {n} settlers (limit {})", cfg.max_settlers_per_star),
            );
        }
    }

    // Re-propagation. Motherships first so pods can use their flyby states.
    let traj = |v: &Vehicle| -> (Findings, Vec<(u32, u64, ShipState)>) {
        let mut local = Findings::default();
        let flybys = replay_vehicle(v, catalog, cfg, &mut local);
        (local, flybys)
    };
    let fly_results: Vec<(Findings, Vec<(u32, u64, ShipState)>)> = vehicles
        .par_iter()
        .filter(|v| well_formed.contains(&v.id) && v.kind() != ShipKind::Pod)
        .map(traj)
        .collect();
    // (target star, flyby epoch bits) → mothership state at the flyby.
    let mut flyby_states: HashMap<(u32, u64), ShipState> = HashMap::new();
    for (local, flybys) in fly_results {
        f.merge(local);
        for (star, bits, s) in flybys {
            flyby_states.insert((star, bits), s);
        }
    }
    // Flyby rows keyed by target; pods must match one.
    let mut flyby_rows: HashMap<u32, Vec<&EventRecord>> = HashMap::new();
    for e in events
        .iter()
        .filter(|e| e.vehicle_kind == ShipKind::Mothership && e.note == EventNote::Flyby)
    {
        flyby_rows.entry(e.target_star).or_default().push(e);
    }
    let mut pods_per_flyby: HashMap<u64, usize> = HashMap::new();
    for v in vehicles
        .iter()
        .filter(|v| v.kind() == ShipKind::Pod && well_formed.contains(&v.id))
    {
        let e = v.rows[0];
        let matched = flyby_rows
            .get(&e.target_star)
            .and_then(|rows| rows.iter().find(|fr| (fr.t_myr - e.t_myr).abs() <= T_EPS));
        let Some(fr) = matched else {
            f.add(
                Rule::PodMatchesFlyby,
                Some(e),
                None,
                format!("no mothership flyby of star {} at {} Myr", e.target_star, e.t_myr),
            );
            continue;
        };
        let n = pods_per_flyby.entry(fr.event_id).or_default();
        *n += 1;
        if *n > 1 {
            f.add(Rule::PodMatchesFlyby, Some(e), None, "flyby already released a pod");
        }
        if let Some(ms) = flyby_states.get(&(fr.target_star, fr.t_myr.to_bits())) {
            if let Ok((_, vt)) = catalog.star_state(e.target_star, e.t_myr) {
                let miss = (ms.vel + e.dv() - vt).norm();
                if miss > cfg.vel_tol_kms {
                    f.add(
                        Rule::RendezvousVelocity,
                        Some(e),
                        None,
                        format!("pod velocity misses star by {miss:.3e} km/s"),
                    );
                }
            }
        }
    }

    let n = settle_rows.iter().map(|e| e.target_star).collect::<HashSet<_>>().len();
    let dv_used: f64 = events.iter().map(|e| e.dv().norm()).sum();
    let mut flown: Vec<(u32, ShipKind)> = events.iter().map(|e| (e.vehicle_id, e.vehicle_kind)).collect();
    flown.sort_by_key(|v| v.0);
    flown.dedup_by_key(|v| v.0);
    let dv_max: f64 = flown.iter().map(|&(_, k)| cfg.budgets.for_kind(k).dv_allowance_kms).sum();

    let rules: Vec<RuleResult> = Rule::ALL
        .iter()
        .map(|&rule| {
            let violations = f.0.remove(&rule).unwrap_or_default();
            RuleResult {
                rule,
                passed: violations.is_empty(),
                violations,
            }
        })
        .collect();
    ValidationReport {
        valid: rules.iter().all(|r| r.passed),
        rules,
        totals: Totals { n, dv_used, dv_max },
    }
}

fn check_structure(v: &Vehicle, f: &mut Findings) -> bool {
    let before = f.0.get(&Rule::VehicleStructure).map_or(0, Vec::len);
    let kind = v.kind();
    let first = v.rows[0];
    let mut bad = |e: Option<&EventRecord>, msg: String| f.add(Rule::VehicleStructure, e, Some(v.id), msg);
    for r in &v.rows {
        if r.vehicle_kind != kind {
            bad(Some(r), format!("vehicle mixes kinds {kind} and {}", r.vehicle_kind));
        }
        if r.parent_star != first.parent_star {
            bad(Some(r), "vehicle rows disagree on parent star".into());
        }
    }
    for w in v.rows.windows(2) {
        if w[1].t_myr <= w[0].t_myr {
            bad(Some(w[1]), "events of one vehicle must be strictly time-ordered".into());
        }
    }
    let notes: Vec<EventNote> = v.rows.iter().map(|r| r.note).collect();
    let same_target = v.rows.iter().all(|r| r.target_star == first.target_star);
    use EventNote::*;
    match kind {
        ShipKind::FastShip => {
            if notes != [Depart, Rendezvous] {
                bad(Some(first), format!("fast ship events {notes:?}, expected depart then rendezvous"));
            }
            if !same_target {
                bad(Some(first), "fast ship rows disagree on target".into());
            }
        }
        ShipKind::Pod => {
            if notes != [Rendezvous] {
                bad(Some(first), format!("pod events {notes:?}, expected a single rendezvous"));
            }
        }
        ShipKind::Settler => {
            let ok = notes.len() >= 2
                && notes[0] == Depart
                && notes[notes.len() - 1] == Rendezvous
                && notes[1..notes.len() - 1].iter().all(|&n| n == Midcourse);
            if !ok {
                bad(Some(first), format!("settler events {notes:?}, expected depart, midcourse…, rendezvous"));
            }
            if !same_target {
                bad(Some(first), "settler rows disagree on target".into());
            }
            if first.parent_star == SOL_ID {
                bad(Some(first), "settlers cannot depart from Sol".into());
            }
        }
        ShipKind::Mothership => {
            // depart, flyby, (burn, flyby)*
            let ok = notes.len() >= 2
                && notes.len() % 2 == 0
                && notes.iter().enumerate().all(|(i, &n)| match i {
                    0 => n == Depart,
                    i if i % 2 == 1 => n == Flyby,
                    _ => n == Burn,
                });
            if !ok {
                bad(Some(first), format!("mothership events {notes:?}, expected depart, flyby, (burn, flyby)…"));
            } else {
                for pair in v.rows.chunks(2) {
                    if pair[0].target_star != pair[1].target_star {
                        bad(Some(pair[0]), "impulse target differs from the following flyby".into());
                    }
                }
            }
        }
    }
    if kind != ShipKind::Settler && first.parent_star != SOL_ID {
        bad(Some(first), format!("{kind} must depart from Sol"));
    }
    f.0.get(&Rule::VehicleStructure).map_or(0, Vec::len) == before
}

fn check_budgets(v: &Vehicle, cfg: &ValidationConfig, f: &mut Findings) {
    let b = cfg.budgets.for_kind(v.kind());
    let count = v.impulses().count();
    if count > b.max_impulses {
        f.add(
            Rule::ImpulseCount,
            Some(v.rows[0]),
            None,
            format!("{count} impulses, limit {}", b.max_impulses),
        );
    }
    let mut total = 0.0;
    for r in v.impulses() {
        let m = r.dv().norm();
        total += m;
        if m > b.per_impulse_kms + DV_EPS {
            f.add(
                Rule::PerImpulseCap,
                Some(r),
                None,
                format!("impulse {m:.6} km/s exceeds {} km/s", b.per_impulse_kms),
            );
        }
    }
    if total > b.cumulative_kms + DV_EPS {
        f.add(
            Rule::CumulativeCap,
            Some(v.rows[0]),
            None,
            format!("cumulative {total:.6} km/s exceeds {} km/s", b.cumulative_kms),
        );
    }
    let imps: Vec<&&EventRecord> = v.impulses().collect();
    for w in imps.windows(2) {
        let gap = w[1].t_myr - w[0].t_myr;
        if gap < b.min_impulse_spacing_myr - T_EPS {
            f.add(
                Rule::ImpulseSpacing,
                Some(w[1]),
                None,
                format!("impulses {gap} Myr apart, minimum {}", b.min_impulse_spacing_myr),
            );
        }
    }
    for r in &v.rows {
        if r.note == EventNote::Flyby && r.dv() != Vec3::zeros() {
            f.add(Rule::FlybyZeroDv, Some(r), None, "flyby rows carry no impulse");
        }
    }
}

/// Replay a vehicle from its origin star. Returns mothership flyby states.
fn replay_vehicle(
    v: &Vehicle,
    catalog: &StarCatalog,
    cfg: &ValidationConfig,
    f: &mut Findings,
) -> Vec<(u32, u64, ShipState)> {
    let mut flybys = Vec::new();
    let first = v.rows[0];
    let Ok(mut s) = catalog.ship_state(first.parent_star, first.t_myr) else {
        f.add(Rule::Trajectory, Some(first), None, "origin state unavailable");
        return flybys;
    };
    let pos_tol = 10.0 * cfg.tol_pos;
    for r in &v.rows {
        if r.t_myr > s.t {
            match propagate_with(catalog.curve(), &s, r.t_myr - s.t, &cfg.integrator) {
                Ok(mut n) => {
                    n.t = r.t_myr;
                    s = n;
                }
                Err(e) => {
                    f.add(Rule::Trajectory, Some(r), None, format!("propagation failed: {e}"));
                    return flybys;
                }
            }
        }
        let arrives = matches!(r.note, EventNote::Flyby | EventNote::Rendezvous);
        if arrives {
            let Ok((pt, vt)) = catalog.star_state(r.target_star, r.t_myr) else {
                f.add(Rule::Trajectory, Some(r), None, "target state unavailable");
                return flybys;
            };
            let miss = (s.pos - pt).norm();
            if miss > pos_tol {
                f.add(
                    Rule::Trajectory,
                    Some(r),
                    None,
                    format!("misses star {} by {miss:.3e} kpc", r.target_star),
                );
            }
            if r.note == EventNote::Flyby {
                flybys.push((r.target_star, r.t_myr.to_bits(), s));
            } else {
                let vmiss = (s.vel + r.dv() - vt).norm();
                if vmiss > cfg.vel_tol_kms {
                    f.add(
                        Rule::RendezvousVelocity,
                        Some(r),
                        None,
                        format!("velocity misses star {} by {vmiss:.3e} km/s", r.target_star),
                    );
                }
            }
        }
        if r.note.is_impulse() {
            s.vel += r.dv();
        }
    }
    flybys
}
