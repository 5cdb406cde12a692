//! TOML scenario files.
//!
//! ```toml
//! alpha = 0.33                  # optional default power allocation
//!
//! [system]
//! path_loss_constant = 1.0
//! path_loss_exponent = 3.0
//! distance_near_m = 50.0
//! distance_far_m = 100.0
//! residual_interference = 0.1
//! # exactly one of:
//! #   transmit_snr_db = 70.0
//! #   received_snr_db = 10.0
//! #   transmit_power_dbm = -20.0 with noise_power_dbm = -90.0
//! transmit_power_dbm = -20.0
//! noise_power_dbm = -90.0
//!
//! [targets]
//! near = 0.5                    # bits/s/Hz
//! far = 0.1
//!
//! [simulation]                  # optional
//! samples = 1000000
//! seed = 20210601
//! partitions = 64
//!
//! [quadrature]                  # optional
//! relative_tolerance = 1e-8
//! absolute_tolerance = 1e-12
//! tail_cutoff = 30.0            # decay scales
//! max_subintervals = 4000
//!
//! [sweep]                       # optional, used by `sweep`
//! axis = "threshold"            # threshold | threshold_near | threshold_far | rho_r | rho_t | alpha | d2 | beta
//! grid = { start = 0.1, stop = 2.0, count = 20 }   # or a list of values
//! series_axis = "rho_r"         # optional outer axis
//! series = [10.0, 20.0]
//! methods = ["analytic", "mc"]
//! orders = ["D2"]
//! users = [1, 2]
//!
//! [validate]                    # optional, every key has a default
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::experiments::{linspace, Axis, Scenario, SnrSpec, SweepSpec};
use crate::model::{dbm_to_watts, linear_to_db, DecodingOrder, User};
use crate::monte_carlo::{SimulationConfig, DEFAULT_PARTITIONS, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::validation::ValidationPlan;
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub system: SystemSection,
    pub targets: TargetsSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "one")]
    pub path_loss_constant: f64,
    #[serde(default = "three")]
    pub path_loss_exponent: f64,
    pub distance_near_m: f64,
    pub distance_far_m: f64,
    pub residual_interference: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmit_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub received_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmit_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_power_dbm: Option<f64>,
}

impl SystemSection {
    fn snr(&self) -> Result<SnrSpec> {
        let fields = [
            self.transmit_snr_db.is_some(),
            self.received_snr_db.is_some(),
            self.transmit_power_dbm.is_some() || self.noise_power_dbm.is_some(),
        ];
        if fields.iter().filter(|&&f| f).count() != 1 {
            return Err(Error::invalid(
                "system: give exactly one of transmit_snr_db, received_snr_db, \
                 or transmit_power_dbm with noise_power_dbm",
            ));
        }
        if let Some(db) = self.transmit_snr_db {
            return Ok(SnrSpec::TransmitDb(finite("system.transmit_snr_db", db)?));
        }
        if let Some(db) = self.received_snr_db {
            return Ok(SnrSpec::ReceivedDb(finite("system.received_snr_db", db)?));
        }
        match (self.transmit_power_dbm, self.noise_power_dbm) {
            (Some(p), Some(n)) => {
                let ratio = dbm_to_watts(finite("system.transmit_power_dbm", p)?)
                    / dbm_to_watts(finite("system.noise_power_dbm", n)?);
                Ok(SnrSpec::TransmitDb(linear_to_db(ratio)))
            }
            (Some(_), None) => Err(Error::invalid("system.noise_power_dbm is required with transmit_power_dbm")),
            _ => Err(Error::invalid("system.transmit_power_dbm is required with noise_power_dbm")),
        }
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{field} must be finite")))
    }
}

/// Overrides for the adaptive quadrature; omitted keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subintervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsSection {
    pub near: f64,
    pub far: f64,
}

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_partitions() -> u32 {
    DEFAULT_PARTITIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_partitions")]
    pub partitions: u32,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            partitions: DEFAULT_PARTITIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Explicit values or an inclusive evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(Linspace),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => linspace(r.start, r.stop, r.count),
        }
    }
}

fn default_users() -> Vec<u8> {
    vec![1, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Grid>,
    pub methods: Vec<Method>,
    pub orders: Vec<DecodingOrder>,
    #[serde(default = "default_users")]
    pub users: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub orders: Vec<DecodingOrder>,
    pub alpha: f64,
    pub thresholds: Grid,
    pub received_snr_db: Vec<f64>,
    pub sigma_multiplier: f64,
    pub mc_floor: f64,
    pub asymptotic_alpha: f64,
    pub asymptotic_received_snr_db: Vec<f64>,
    pub asymptotic_tolerance: f64,
    pub asymptotic_from_db: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        let plan = ValidationPlan::default();
        Self {
            orders: plan.orders,
            alpha: plan.alpha,
            thresholds: Grid::Range(Linspace {
                start: 0.1,
                stop: 2.0,
                count: 20,
            }),
            received_snr_db: plan.received_snr_db,
            sigma_multiplier: plan.sigma_multiplier,
            mc_floor: plan.mc_floor,
            asymptotic_alpha: plan.asymptotic_alpha,
            asymptotic_received_snr_db: plan.asymptotic_received_snr_db,
            asymptotic_tolerance: plan.asymptotic_tolerance,
            asymptotic_from_db: plan.asymptotic_from_db,
        }
    }
}

impl Default for ScenarioFile {
    /// Users at 50 m and 100 m, `beta = 0.1`, -20 dBm transmit power over
    /// -90 dBm noise.
    fn default() -> Self {
        Self {
            alpha: None,
            system: SystemSection {
                path_loss_constant: 1.0,
                path_loss_exponent: 3.0,
                distance_near_m: 50.0,
                distance_far_m: 100.0,
                residual_interference: 0.1,
                transmit_snr_db: None,
                received_snr_db: None,
                transmit_power_dbm: Some(-20.0),
                noise_power_dbm: Some(-90.0),
            },
            targets: TargetsSection { near: 0.5, far: 0.1 },
            simulation: SimulationSection::default(),
            quadrature: None,
            sweep: None,
            validate: None,
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::invalid(format!("scenario: {}", e.message())))?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialize scenario: {e}")))
    }

    /// Runs every conversion once so that errors surface before any work.
    pub fn check(&self) -> Result<()> {
        let s = self.scenario()?;
        s.params()?;
        s.targets()?;
        if self.alpha.is_some() {
            s.alpha()?;
        }
        self.simulation().validate()?;
        self.quadrature().validate()?;
        if self.sweep.is_some() {
            self.sweep_spec()?.validate()?;
        }
        self.validation_plan()?.validate()?;
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let sys = &self.system;
        Ok(Scenario {
            path_loss_constant: sys.path_loss_constant,
            path_loss_exponent: sys.path_loss_exponent,
            distance_near: sys.distance_near_m,
            distance_far: sys.distance_far_m,
            residual_interference: sys.residual_interference,
            snr: sys.snr()?,
            threshold_near: self.targets.near,
            threshold_far: self.targets.far,
            alpha: self.alpha,
        })
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            sample_count: self.simulation.samples,
            seed: self.simulation.seed,
            partition_count: self.simulation.partitions,
        }
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let mut cfg = QuadratureConfig::default();
        if let Some(q) = &self.quadrature {
            cfg.relative_tolerance = q.relative_tolerance.unwrap_or(cfg.relative_tolerance);
            cfg.absolute_tolerance = q.absolute_tolerance.unwrap_or(cfg.absolute_tolerance);
            cfg.tail_cutoff_mean_multiples = q.tail_cutoff.unwrap_or(cfg.tail_cutoff_mean_multiples);
            cfg.max_subintervals = q.max_subintervals.unwrap_or(cfg.max_subintervals);
        }
        cfg
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::invalid("scenario has no [sweep] section"))?;
        let series = match (&sweep.series_axis, &sweep.series) {
            (None, None) => None,
            (Some(axis), Some(grid)) => Some((*axis, grid.values())),
            _ => return Err(Error::invalid("sweep: series_axis and series go together")),
        };
        let users = sweep
            .users
            .iter()
            .map(|&u| User::from_index(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepSpec {
            scenario: self.scenario()?,
            axis: sweep.axis,
            grid: sweep.grid.values(),
            series,
            methods: sweep.methods.clone(),
            orders: sweep.orders.clone(),
            users,
        })
    }

    /// The `[validate]` section over this file's system; all defaults apply
    /// when the section is absent.
    pub fn validation_plan(&self) -> Result<ValidationPlan> {
        let v = self.validate.clone().unwrap_or_default();
        Ok(ValidationPlan {
            scenario: self.scenario()?,
            orders: v.orders,
            alpha: v.alpha,
            thresholds: v.thresholds.values(),
            received_snr_db: v.received_snr_db,
            sigma_multiplier: v.sigma_multiplier,
            mc_floor: v.mc_floor,
            asymptotic_alpha: v.asymptotic_alpha,
            asymptotic_received_snr_db: v.asymptotic_received_snr_db,
            asymptotic_tolerance: v.asymptotic_tolerance,
            asymptotic_from_db: v.asymptotic_from_db,
        })
    }
}
