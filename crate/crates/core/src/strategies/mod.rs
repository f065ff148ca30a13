//! Dispatch logic for the three vehicle types and the two search
//! primitives they share (momentum-matched target search and the
//! minimum-time three-impulse transfer).

use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_impulse, propagate_with, Impulse, IntegratorOptions, RotationCurve, ShipState};
use crate::error::{Error, Result};

pub mod fast_ship;
pub mod mintime;
pub mod momentum;
pub mod mothership;
pub mod settler;

pub use fast_ship::{fast_ship_select, FastShipEvaluation, FastShipOptions, FastShipParams};
pub use mintime::{min_time_transfer, MinTimeOptions, MinTimeSolution};
pub use momentum::{MomentumSearch, SearchOptions};
pub use mothership::{mothership_run, MothershipLeg, MothershipOptions, MothershipParams};
pub use settler::{settler_campaign, Seed, SettlerOptions, SettlerOutcome, Settlement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShipKind {
    Mothership,
    Pod,
    FastShip,
    Settler,
}

impl ShipKind {
    pub const ALL: [ShipKind; 4] = [ShipKind::Mothership, ShipKind::Pod, ShipKind::FastShip, ShipKind::Settler];

    pub fn as_str(self) -> &'static str {
        match self {
            ShipKind::Mothership => "mothership",
            ShipKind::Pod => "pod",
            ShipKind::FastShip => "fast_ship",
            ShipKind::Settler => "settler",
        }
    }

    /// Whether this kind's final event settles a star.
    pub fn settles(self) -> bool {
        !matches!(self, ShipKind::Mothership)
    }
}

impl std::fmt::Display for ShipKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ShipKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShipKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown vehicle kind '{s}'")))
    }
}

/// Vehicle limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub per_impulse_kms: f64,
    pub cumulative_kms: f64,
    pub max_impulses: usize,
    pub min_impulse_spacing_myr: f64,
    /// Minimum wait between the parent settlement and departure. Zero for
    /// vehicles launched from Sol.
    pub settle_delay_myr: f64,
    /// ΔV credited to the merit ledger per vehicle flown.
    pub dv_allowance_kms: f64,
}

impl BudgetSpec {
    pub fn validate(&self, name: &str) -> Result<()> {
        let positive = [self.per_impulse_kms, self.cumulative_kms, self.min_impulse_spacing_myr];
        if positive.iter().any(|&x| !(x > 0.0 && x.is_finite())) || self.max_impulses == 0 {
            return Err(Error::Config(format!("{name} budget limits must be positive")));
        }
        if !(self.settle_delay_myr >= 0.0) || !(self.dv_allowance_kms >= 0.0) {
            return Err(Error::Config(format!("{name} delay and allowance must be non-negative")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub mothership: BudgetSpec,
    pub pod: BudgetSpec,
    pub fast_ship: BudgetSpec,
    pub settler: BudgetSpec,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            mothership: BudgetSpec {
                per_impulse_kms: 200.0,
                cumulative_kms: 500.0,
                max_impulses: 3,
                min_impulse_spacing_myr: 1.0,
                settle_delay_myr: 0.0,
                dv_allowance_kms: 500.0,
            },
            pod: BudgetSpec {
                per_impulse_kms: 300.0,
                cumulative_kms: 300.0,
                max_impulses: 1,
                min_impulse_spacing_myr: 1.0,
                settle_delay_myr: 0.0,
                dv_allowance_kms: 300.0,
            },
            fast_ship: BudgetSpec {
                per_impulse_kms: 1500.0,
                cumulative_kms: 1500.0,
                max_impulses: 2,
                min_impulse_spacing_myr: 0.5,
                settle_delay_myr: 0.0,
                dv_allowance_kms: 1500.0,
            },
            settler: BudgetSpec {
                per_impulse_kms: 175.0,
                cumulative_kms: 400.0,
                max_impulses: 5,
                min_impulse_spacing_myr: 0.05,
                settle_delay_myr: 2.0,
                dv_allowance_kms: 400.0,
            },
        }
    }
}

impl Budgets {
    pub fn for_kind(&self, kind: ShipKind) -> &BudgetSpec {
        match kind {
            ShipKind::Mothership => &self.mothership,
            ShipKind::Pod => &self.pod,
            ShipKind::FastShip => &self.fast_ship,
            ShipKind::Settler => &self.settler,
        }
    }

    /// Limits may be tightened but never loosened past the defaults.
    pub fn validate(&self) -> Result<()> {
        let limits = Budgets::default();
        for k in ShipKind::ALL {
            let (b, l) = (self.for_kind(k), limits.for_kind(k));
            b.validate(k.as_str())?;
            if b.per_impulse_kms > l.per_impulse_kms
                || b.cumulative_kms > l.cumulative_kms
                || b.max_impulses > l.max_impulses
                || b.min_impulse_spacing_myr < l.min_impulse_spacing_myr
                || b.settle_delay_myr < l.settle_delay_myr
            {
                return Err(Error::Config(format!(
                    "{k} budget exceeds the vehicle limits (per impulse {}, cumulative {}, impulses {}, spacing {}, delay {})",
                    l.per_impulse_kms, l.cumulative_kms, l.max_impulses, l.min_impulse_spacing_myr, l.settle_delay_myr
                )));
            }
        }
        Ok(())
    }
}

/// One vehicle's flight: impulses in time order, ending at the target star
/// (rendezvous, or flyby for a mothership leg).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSolution {
    pub kind: ShipKind,
    /// Star the vehicle left from.
    pub parent: u32,
    pub target: u32,
    pub departure_t: f64,
    pub arrival_t: f64,
    pub impulses: Vec<Impulse>,
    /// Optional dense samples for plotting.
    pub trajectory: Vec<ShipState>,
}

impl TransferSolution {
    pub fn total_dv(&self) -> f64 {
        self.impulses.iter().map(Impulse::magnitude).sum()
    }

    pub fn tof(&self) -> f64 {
        self.arrival_t - self.departure_t
    }
}

/// Apply `impulses` (time-ordered) to `start` and coast to `until`. Used by
/// tests and the campaign driver as an end-to-end check.
pub fn replay(
    curve: &RotationCurve,
    start: &ShipState,
    impulses: &[Impulse],
    until: f64,
    opts: &IntegratorOptions,
) -> Result<ShipState> {
    let mut s = *start;
    for imp in impulses {
        if imp.t < s.t {
            return Err(Error::InvalidArgument("impulses out of order".into()));
        }
        s = propagate_with(curve, &s, imp.t - s.t, opts)?;
        s.t = imp.t;
        s = apply_impulse(&s, &imp.dv);
    }
    let mut end = propagate_with(curve, &s, until - s.t, opts)?;
    end.t = until;
    Ok(end)
}
