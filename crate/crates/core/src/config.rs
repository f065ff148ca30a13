//! The campaign configuration document (`strategy_config.json`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bvp::ShootingOptions;
use crate::catalog::{CATALOG_R_MAX, CATALOG_R_MIN};
use crate::dynamics::{CurveSpec, RotationCurve};
use crate::error::{Error, Result};
use crate::merit::{GridSpec, RadialTarget};
use crate::strategies::{
    Budgets, FastShipOptions, FastShipParams, MothershipOptions, MothershipParams, SearchOptions, SettlerOptions,
};

/// Merit histogram layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub radial_target: RadialTarget,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radial_bins: 30,
            angular_bins: 36,
            radial_target: RadialTarget::default(),
        }
    }
}

impl GridConfig {
    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::uniform(CATALOG_R_MIN, CATALOG_R_MAX, self.radial_bins, self.angular_bins)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverTolerances {
    pub shooting: ShootingOptions,
    /// Rendezvous velocity mismatch tolerated by the validator, km/s.
    pub rendezvous_vel_tol_kms: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            shooting: ShootingOptions::default(),
            rendezvous_vel_tol_kms: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub rotation_curve: CurveSpec,
    pub budgets: Budgets,
    pub fast_ships: Vec<FastShipParams>,
    pub motherships: Vec<MothershipParams>,
    pub settler: SettlerOptions,
    pub search: SearchOptions,
    pub fast_ship_search: FastShipOptions,
    pub mothership_search: MothershipOptions,
    pub grid: GridConfig,
    pub solver_tolerances: SolverTolerances,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        let fast = |theta_min, theta_max| FastShipParams {
            t_departure: 0.0,
            r_min: 27.0,
            r_max: 27.1,
            theta_min,
            theta_max,
        };
        let ms = |t_departure, t_coast, dv_mag, dtheta| MothershipParams {
            t_departure,
            t_coast,
            dv_mag,
            dtheta,
        };
        StrategyConfig {
            rotation_curve: crate::dynamics::curve::default_spec(),
            budgets: Budgets::default(),
            fast_ships: vec![fast(-180.0, -90.0), fast(-90.0, 0.0)],
            motherships: vec![
                ms(0.0, [10.0, 5.0, 15.0], [100.0, 100.0, 20.0], [20.0, -30.0, 90.0]),
                ms(5.0, [10.0, 10.0, 5.0], [100.0, 50.0, 30.0], [0.0, 90.0, 80.0]),
                ms(5.0, [10.0, 5.0, 5.0], [150.0, 80.0, 50.0], [50.0, 90.0, 120.0]),
            ],
            settler: SettlerOptions::default(),
            search: SearchOptions::default(),
            fast_ship_search: FastShipOptions::default(),
            mothership_search: MothershipOptions::default(),
            grid: GridConfig::default(),
            solver_tolerances: SolverTolerances::default(),
        }
    }
}

impl StrategyConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: StrategyConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        RotationCurve::new(self.rotation_curve.clone()).map_err(|e| Error::Config(e.to_string()))?;
        self.budgets.validate()?;
        for fs in &self.fast_ships {
            fs.validate()?;
        }
        for ms in &self.motherships {
            ms.validate(&self.budgets.mothership)?;
        }
        if self.fast_ships.is_empty() && self.motherships.is_empty() {
            return Err(Error::Config("no fast ships and no motherships: nothing seeds the campaign".into()));
        }
        self.settler.validate(&self.budgets.settler)?;
        self.search.validate()?;
        self.grid.grid_spec()?;
        let tol = &self.solver_tolerances;
        if !(tol.shooting.tol_pos > 0.0) || !(tol.rendezvous_vel_tol_kms > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn curve(&self) -> Result<RotationCurve> {
        RotationCurve::new(self.rotation_curve.clone())
    }

    pub fn shooting(&self) -> ShootingOptions {
        self.solver_tolerances.shooting
    }

    pub fn fast_ship_options(&self) -> FastShipOptions {
        FastShipOptions {
            shooting: self.shooting(),
            ..self.fast_ship_search
        }
    }

    pub fn mothership_options(&self) -> MothershipOptions {
        MothershipOptions {
            shooting: self.shooting(),
            ..self.mothership_search
        }
    }

    pub fn settler_options(&self) -> SettlerOptions {
        let mut s = self.settler;
        s.mintime.shooting = self.shooting();
        s
    }

    pub fn validation_config(&self) -> crate::tree::ValidationConfig {
        crate::tree::ValidationConfig {
            budgets: self.budgets,
            tol_pos: self.solver_tolerances.shooting.tol_pos,
            vel_tol_kms: self.solver_tolerances.rendezvous_vel_tol_kms,
            integrator: self.solver_tolerances.shooting.integrator,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULT_FILE: &str = include_str!("../config/default.json");

    #[test]
    fn committed_defaults_match() {
        let cfg = StrategyConfig::from_json_str(DEFAULT_FILE).unwrap();
        assert_eq!(cfg, StrategyConfig::default());
    }

    #[test]
    fn vehicle_tables_verbatim() {
        let cfg = StrategyConfig::default();
        assert_eq!(cfg.fast_ships.len(), 2);
        assert_eq!((cfg.fast_ships[1].theta_min, cfg.fast_ships[1].theta_max), (-90.0, 0.0));
        let ms = &cfg.motherships;
        assert_eq!(ms[0].t_coast, [10.0, 5.0, 15.0]);
        assert_eq!(ms[1].dv_mag, [100.0, 50.0, 30.0]);
        assert_eq!(ms[2].dtheta, [50.0, 90.0, 120.0]);
        assert_eq!(ms[2].t_departure, 5.0);
    }

    #[test]
    fn excessive_mothership_cumulative_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_FILE).unwrap();
        v["budgets"]["mothership"]["cumulative_kms"] = 600.0.into();
        let err = StrategyConfig::from_json_str(&v.to_string()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn partial_document_fills_defaults() {
        let cfg = StrategyConfig::from_json_str(r#"{"settler": {"delay": 3.0}}"#).unwrap();
        assert_eq!(cfg.settler.delay, 3.0);
        assert_eq!(cfg.motherships, StrategyConfig::default().motherships);
        assert!(StrategyConfig::from_json_str(r#"{"setler": {}}"#).is_err());
    }

    #[test]
    fn tolerances_are_injected() {
        let mut cfg = StrategyConfig::default();
        cfg.solver_tolerances.shooting.tol_pos = 1e-7;
        assert_eq!(cfg.fast_ship_options().shooting.tol_pos, 1e-7);
        assert_eq!(cfg.mothership_options().shooting.tol_pos, 1e-7);
        assert_eq!(cfg.settler_options().mintime.shooting.tol_pos, 1e-7);
        assert_eq!(cfg.validation_config().tol_pos, 1e-7);
    }
}
