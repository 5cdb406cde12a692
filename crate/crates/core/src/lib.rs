//! Secrecy outage probability (SOP) of a two-user downlink NOMA system whose
//! users do not trust each other, with linear imperfect successive
//! interference cancellation.
//!
//! The crate provides
//! - per-realization SINRs, secrecy rates and power-allocation bounds ([`model`]),
//! - exact SOPs for the decoding orders D1 and D2 by one-dimensional
//!   quadrature ([`analytic`]),
//! - high-SNR closed forms ([`asymptotic`]),
//! - a reproducible parallel Monte Carlo estimator for all four orders
//!   ([`monte_carlo`]),
//! - parameter sweeps, optimal power allocation search and cross-validation
//!   ([`experiments`], [`validation`]) driven by TOML scenario files
//!   ([`scenario`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod asymptotic;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod experiments;
pub mod model;
pub mod monte_carlo;
pub mod quadrature;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
pub use estimate::{Method, SopEstimate};
pub use exec::Execution;
pub use experiments::{Scenario, SweepSpec};
pub use model::{
    ChannelRealization, DecodingOrder, SecrecyRates, SecrecyTargets, SinrSet, SystemParams, User,
};
pub use monte_carlo::SimulationConfig;
pub use quadrature::QuadratureConfig;
pub use scenario::ScenarioFile;
