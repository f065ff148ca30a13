//! Mothership flyby chains. Each of up to three impulses is aimed by a
//! nominal in-plane kick (magnitude and angle from the control table); the
//! star whose angular momentum best matches the nominally kicked ship at the
//! trial arrival epoch becomes the flyby target, the impulse is re-solved to
//! hit it exactly, and a pod is released at the flyby to match the star's
//! velocity.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bvp::{shooting_solve, ShootingOptions};
use crate::catalog::{StarCatalog, SOL_ID};
use crate::dynamics::{apply_impulse, in_plane_direction_offset, propagate_with, Impulse, ShipState};
use crate::error::{Error, Result};
use crate::units::{Vec3, KMS_PER_KPC_MYR};

use super::{BudgetSpec, Budgets, MomentumSearch, ShipKind, TransferSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MothershipParams {
    pub t_departure: f64,
    /// Coast time planned after each impulse, Myr.
    pub t_coast: [f64; 3],
    /// Nominal impulse magnitudes, km/s.
    pub dv_mag: [f64; 3],
    /// Nominal impulse direction, degrees counter-clockwise from the
    /// in-plane velocity direction.
    pub dtheta: [f64; 3],
}

impl MothershipParams {
    pub fn validate(&self, budget: &BudgetSpec) -> Result<()> {
        if !(0.0..90.0).contains(&self.t_departure) {
            return Err(Error::Config(format!("mothership departure {} outside [0, 90)", self.t_departure)));
        }
        for (i, &m) in self.dv_mag.iter().enumerate() {
            if !(m >= 0.0 && m <= budget.per_impulse_kms) {
                return Err(Error::Config(format!(
                    "mothership impulse {} of {m} km/s exceeds {} km/s",
                    i + 1,
                    budget.per_impulse_kms
                )));
            }
        }
        let total: f64 = self.dv_mag.iter().sum();
        if total > budget.cumulative_kms {
            return Err(Error::Config(format!(
                "mothership cumulative impulse {total} km/s exceeds {} km/s",
                budget.cumulative_kms
            )));
        }
        if self.t_coast.iter().any(|&c| !(c >= budget.min_impulse_spacing_myr)) {
            return Err(Error::Config(format!(
                "mothership coast times must be at least {} Myr",
                budget.min_impulse_spacing_myr
            )));
        }
        if self.dtheta.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("mothership angles must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MothershipOptions {
    pub first_tof: f64,
    pub tof_step: f64,
    /// The chain ends once a leg has failed more often than this.
    pub max_violations: usize,
    /// Minimum coast after a flyby before the next impulse, Myr.
    pub min_coast_after_flyby: f64,
    pub max_arrival: f64,
    /// Set from the shared solver tolerances; not serialized.
    #[serde(skip)]
    pub shooting: ShootingOptions,
}

impl Default for MothershipOptions {
    fn default() -> Self {
        MothershipOptions {
            first_tof: 2.5,
            tof_step: 2.5,
            max_violations: 20,
            min_coast_after_flyby: 1.5,
            max_arrival: 89.5,
            shooting: ShootingOptions::default(),
        }
    }
}

/// One impulse-and-flyby leg with its pod.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MothershipLeg {
    /// Mothership arc: one impulse at `departure_t`, flyby at `arrival_t`.
    pub flyby: TransferSolution,
    /// Pod rendezvous impulse at the flyby epoch.
    pub pod: Impulse,
    /// Failed trial times before this leg succeeded.
    pub violations: usize,
}

/// Fly one mothership chain. Fails with [`Error::Infeasible`] when not a
/// single leg succeeds.
pub fn mothership_run(
    catalog: &StarCatalog,
    params: &MothershipParams,
    settled: &HashSet<u32>,
    search: &MomentumSearch<'_>,
    budgets: &Budgets,
    opts: &MothershipOptions,
) -> Result<Vec<MothershipLeg>> {
    params.validate(&budgets.mothership)?;
    let curve = catalog.curve();
    let integ = &opts.shooting.integrator;
    let mut claimed = settled.clone();
    let mut legs = Vec::new();
    let mut total = 0.0;
    let mut s = catalog.ship_state(SOL_ID, params.t_departure)?;

    'chain: for i in 0..3 {
        let nominal = in_plane_direction_offset(&s.vel, params.dtheta[i], params.dv_mag[i])?;
        let kicked = apply_impulse(&s, &nominal);
        let mut tof = opts.first_tof;
        let mut violations = 0;
        loop {
            let t_arr = s.t + tof;
            // Stop once arrival plus the post-flyby coast would leave the window.
            if t_arr + opts.min_coast_after_flyby > opts.max_arrival {
                break 'chain;
            }
            let attempt = (|| -> Option<(u32, Vec3, Vec3, ShipState)> {
                let reference = propagate_with(curve, &kicked, tof, integ).ok()?;
                let id = search.closest(&reference, &claimed)?;
                let (pt, vt) = catalog.star_state(id, t_arr).ok()?;
                let guess = kicked.vel + (pt - reference.pos) / tof * KMS_PER_KPC_MYR;
                let arc = shooting_solve(curve, &s.pos, &pt, tof, &guess, &opts.shooting).ok()?;
                let dv1 = arc.v0 - s.vel;
                let dv2 = vt - arc.vf;
                let ok = dv1.norm() <= budgets.mothership.per_impulse_kms
                    && dv2.norm() <= budgets.pod.per_impulse_kms
                    && total + dv1.norm() <= budgets.mothership.cumulative_kms;
                ok.then(|| (id, dv1, dv2, ShipState::new(arc.rf, arc.vf, t_arr)))
            })();
            match attempt {
                Some((id, dv1, dv2, at_flyby)) => {
                    total += dv1.norm();
                    claimed.insert(id);
                    legs.push(MothershipLeg {
                        flyby: TransferSolution {
                            kind: ShipKind::Mothership,
                            parent: SOL_ID,
                            target: id,
                            departure_t: s.t,
                            arrival_t: t_arr,
                            impulses: vec![Impulse::new(s.t, dv1)],
                            trajectory: Vec::new(),
                        },
                        pod: Impulse::new(t_arr, dv2),
                        violations,
                    });
                    // Wait out the unused part of the planned coast, but at
                    // least the minimum post-flyby coast.
                    let margin = params.t_coast[i] - tof;
                    let wait = margin.max(opts.min_coast_after_flyby);
                    if t_arr + wait >= opts.max_arrival {
                        break 'chain;
                    }
                    s = propagate_with(curve, &at_flyby, wait, integ)?;
                    break;
                }
                None => {
                    violations += 1;
                    if violations > opts.max_violations {
                        break 'chain;
                    }
                    tof += opts.tof_step;
                }
            }
        }
        if total >= budgets.mothership.cumulative_kms {
            break;
        }
    }
    if legs.is_empty() {
        return Err(Error::Infeasible(format!(
            "mothership departing at {} Myr settled no star",
            params.t_departure
        )));
    }
    Ok(legs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_synthetic, StarRecord, SyntheticProfile};
    use crate::dynamics::{propagate, RotationCurve};
    use crate::strategies::SearchOptions;
    use std::sync::Arc;

    fn ms1() -> MothershipParams {
        MothershipParams {
            t_departure: 0.0,
            t_coast: [10.0, 5.0, 15.0],
            dv_mag: [100.0, 100.0, 20.0],
            dtheta: [20.0, -30.0, 90.0],
        }
    }

    #[test]
    fn excessive_cumulative_rejected() {
        let mut p = ms1();
        p.dv_mag = [200.0, 200.0, 200.0];
        assert!(p.validate(&Budgets::default().mothership).is_err());
        p.dv_mag = [250.0, 0.0, 0.0];
        assert!(p.validate(&Budgets::default().mothership).is_err());
        let mut p = ms1();
        p.t_coast[1] = 0.5;
        assert!(p.validate(&Budgets::default().mothership).is_err());
    }

    #[test]
    fn table_row_on_synthetic_catalog() {
        let c = generate_synthetic(3000, 1, &SyntheticProfile::default(), Arc::new(RotationCurve::default_curve())).unwrap();
        let search = MomentumSearch::new(&c, None, SearchOptions::default());
        let legs = mothership_run(&c, &ms1(), &HashSet::new(), &search, &Budgets::default(), &MothershipOptions::default()).unwrap();
        assert!((1..=3).contains(&legs.len()));
        let total: f64 = legs.iter().map(|l| l.flyby.total_dv()).sum();
        assert!(total <= 500.0);
        // replay the whole chain from Sol
        let mut s = c.ship_state(0, 0.0).unwrap();
        for leg in &legs {
            s = propagate(c.curve(), &s, leg.flyby.departure_t - s.t).unwrap();
            s = apply_impulse(&s, &leg.flyby.impulses[0].dv);
            s = propagate(c.curve(), &s, leg.flyby.arrival_t - s.t).unwrap();
            let (pt, vt) = c.star_state(leg.flyby.target, leg.flyby.arrival_t).unwrap();
            assert!((s.pos - pt).norm() < 1e-5);
            assert!(leg.pod.dv.norm() <= 300.0);
            assert!((s.vel + leg.pod.dv - vt).norm() < 1e-6);
        }
    }

    #[test]
    fn single_co_orbital_star() {
        let curve = Arc::new(RotationCurve::default_curve());
        let c = StarCatalog::new(
            vec![StarRecord::new(0, 8.0, 0.0, 0.0, 0.0), StarRecord::new(1, 8.0, 0.0, 0.0, 4.0)],
            curve,
        )
        .unwrap();
        let search = MomentumSearch::new(&c, None, SearchOptions::default());
        let p = MothershipParams {
            t_departure: 0.0,
            t_coast: [10.0, 10.0, 10.0],
            dv_mag: [50.0, 0.0, 0.0],
            dtheta: [0.0, 0.0, 0.0],
        };
        let legs = mothership_run(&c, &p, &HashSet::new(), &search, &Budgets::default(), &MothershipOptions::default()).unwrap();
        assert_eq!(legs.len(), 1);
        assert_eq!(legs[0].flyby.target, 1);
        // pod leg re-propagated: mothership state at flyby plus pod impulse
        let sol = c.ship_state(0, 0.0).unwrap();
        let at = propagate(
            c.curve(),
            &apply_impulse(&sol, &legs[0].flyby.impulses[0].dv),
            legs[0].flyby.arrival_t,
        )
        .unwrap();
        let (pt, vt) = c.star_state(1, legs[0].flyby.arrival_t).unwrap();
        assert!((at.pos - pt).norm() < 1e-5);
        assert!(legs[0].pod.dv.norm() < 300.0);
        assert!((at.vel + legs[0].pod.dv - vt).norm() < 1e-6);
    }
}
