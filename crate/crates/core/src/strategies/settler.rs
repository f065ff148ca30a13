//! Generational settler expansion.
//!
//! Generation 1 is the set of seed settlements. Every settled star of
//! generation g (Sol excluded) launches up to `ships_per_star` settlers once
//! the settle-to-departure delay has passed. Each ship targets the best
//! momentum match among unsettled stars and flies the minimum-time
//! three-impulse transfer; the guess time grows by a fixed step while the
//! solver finds nothing within budget. Arrivals form generation g + 1.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::catalog::ephemeris::snap_up;
use crate::catalog::{StarCatalog, MISSION_END_MYR, SOL_ID};
use crate::dynamics::Impulse;

use super::{min_time_transfer, BudgetSpec, MinTimeOptions, MomentumSearch, ShipKind, TransferSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SettlerOptions {
    /// Wait after settlement before departing, Myr (at least the vehicle
    /// minimum). Departures are then snapped up to the 0.5 Myr grid.
    pub delay: f64,
    pub ships_per_star: usize,
    pub first_tof_guess: f64,
    pub tof_guess_step: f64,
    /// Largest guess tried for one ship before it is abandoned.
    pub max_tof_guess: f64,
    /// Generation count including the seeds.
    pub max_generation: usize,
    /// Use the stricter 150 km/s per-impulse limit.
    pub strict_impulse_cap: bool,
    pub mintime: MinTimeOptions,
}

impl Default for SettlerOptions {
    fn default() -> Self {
        SettlerOptions {
            delay: 2.5,
            ships_per_star: 3,
            first_tof_guess: 2.5,
            tof_guess_step: 1.0,
            max_tof_guess: 8.5,
            max_generation: 20,
            strict_impulse_cap: false,
            mintime: MinTimeOptions::default(),
        }
    }
}

pub const STRICT_SETTLER_IMPULSE_KMS: f64 = 150.0;

impl SettlerOptions {
    pub fn validate(&self, budget: &BudgetSpec) -> crate::error::Result<()> {
        use crate::error::Error;
        if !(self.delay >= budget.settle_delay_myr) {
            return Err(Error::Config(format!(
                "settler delay {} below the {} Myr minimum",
                self.delay, budget.settle_delay_myr
            )));
        }
        if self.ships_per_star == 0 || self.ships_per_star > 3 {
            return Err(Error::Config("settler ships per star must lie in [1, 3]".into()));
        }
        if !(self.first_tof_guess > 0.0) || !(self.tof_guess_step > 0.0) || !(self.max_tof_guess >= self.first_tof_guess) {
            return Err(Error::Config("settler tof guesses must be positive and ordered".into()));
        }
        if self.max_generation == 0 {
            return Err(Error::Config("max_generation must be at least 1".into()));
        }
        Ok(())
    }

    /// Budget actually used by the solver.
    pub fn effective_budget(&self, budget: &BudgetSpec) -> BudgetSpec {
        let mut b = *budget;
        if self.strict_impulse_cap {
            b.per_impulse_kms = b.per_impulse_kms.min(STRICT_SETTLER_IMPULSE_KMS);
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub star: u32,
    pub arrival_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub star: u32,
    pub parent: u32,
    pub generation: usize,
    pub arrival_t: f64,
    pub solution: TransferSolution,
    /// Accepted total times of flight, in solver order.
    pub tof_trace: Vec<f64>,
    /// Penalty evaluations spent by the min-time solver.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettlerOutcome {
    /// In settlement order.
    pub settlements: Vec<Settlement>,
    /// Generations with at least one member, seeds included.
    pub generations: usize,
    pub failed_ships: usize,
}

/// Run the expansion. `already_settled` holds every star that may not be
/// targeted (seeds are added automatically).
pub fn settler_campaign(
    catalog: &StarCatalog,
    seeds: &[Seed],
    already_settled: &HashSet<u32>,
    search: &MomentumSearch<'_>,
    budget: &BudgetSpec,
    opts: &SettlerOptions,
) -> SettlerOutcome {
    let mut out = SettlerOutcome::default();
    if seeds.is_empty() {
        return out;
    }
    let budget = opts.effective_budget(budget);
    let mut claimed: HashSet<u32> = already_settled.clone();
    claimed.extend(seeds.iter().map(|s| s.star));
    claimed.insert(SOL_ID);

    let mut current: Vec<(u32, f64)> = seeds.iter().map(|s| (s.star, s.arrival_t)).collect();
    let mut generation = 1;
    out.generations = 1;
    let delay = opts.delay.max(budget.settle_delay_myr);

    while generation < opts.max_generation && !current.is_empty() {
        current.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut next = Vec::new();
        for &(star, arrival) in &current {
            if star == SOL_ID {
                continue;
            }
            let t_dep = snap_up(arrival + delay);
            if t_dep + opts.mintime.tof_floor > MISSION_END_MYR {
                continue;
            }
            let Ok(s) = catalog.ship_state(star, t_dep) else { continue };
            for _ in 0..opts.ships_per_star {
                let Some(target) = search.closest(&s, &claimed) else { break };
                let target_state = |t: f64| catalog.star_state(target, t);
                let mut guess = opts.first_tof_guess;
                let mut found = None;
                while guess <= opts.max_tof_guess + 1e-12 && t_dep + guess <= MISSION_END_MYR + 1e-12 {
                    if let Ok(sol) = min_time_transfer(catalog.curve(), &s, &target_state, guess, &budget, &opts.mintime) {
                        if t_dep + sol.tof <= MISSION_END_MYR {
                            found = Some(sol);
                            break;
                        }
                    }
                    guess += opts.tof_guess_step;
                }
                let Some(sol) = found else {
                    out.failed_ships += 1;
                    break;
                };
                claimed.insert(target);
                let t_arr = t_dep + sol.tof;
                out.settlements.push(Settlement {
                    star: target,
                    parent: star,
                    generation: generation + 1,
                    arrival_t: t_arr,
                    solution: TransferSolution {
                        kind: ShipKind::Settler,
                        parent: star,
                        target,
                        departure_t: t_dep,
                        arrival_t: t_arr,
                        impulses: vec![
                            Impulse::new(t_dep, sol.dv1),
                            Impulse::new(t_dep + sol.tof1, sol.dv2),
                            Impulse::new(t_arr, sol.dv3),
                        ],
                        trajectory: Vec::new(),
                    },
                    tof_trace: sol.trace,
                    evaluations: sol.evaluations,
                });
                next.push((target, t_arr));
            }
        }
        if next.is_empty() {
            break;
        }
        generation += 1;
        out.generations = generation;
        current = next;
    }
    out
}
