//! Scenario runners behind the `hermitian4` binary.
//!
//! A run is a pure function of its [`ScenarioConfig`]: trial `i` draws from
//! stream `i` of a ChaCha8 generator seeded with the config seed, so reports
//! serialize byte for byte the same for the same config and crate version.
//!
//! Report JSON (`format = 1`):
//!
//! ```text
//! {
//!   "format": 1,
//!   "scenario": "tau" | "norm-invariance" | "conformal" | "junction" | "closedness",
//!   "config": { scenario, n, seed, tolerances: {...}, generator: {...} },
//!   "records": [ { "label": str, "quantities": {name: number}, "flags": {name: bool} } ],
//!   "pass": bool,
//!   "provenance": { "tool": str, "version": str, "seed": int }
//! }
//! ```
//!
//! The CSV has the fixed columns `version,scenario,record,quantity,value`.

mod config;
mod generators;
mod report;
mod scenarios;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{FactorKind, FactorSpec, Family, GeneratorConfig, PairKind, ScenarioConfig, Tolerances};
pub use generators::{
    closed_curved_field, closed_curved_triple, conformal_standard, junction_pair, random_exact_form, random_one_form,
    setup_rng, trial_rng, volume_mismatch, FramePerturbation, Mode, SmoothFunction, VolumeDeformation,
};
pub use report::{Provenance, Record, Report, CSV_COLUMNS, REPORT_FORMAT};
pub use scenarios::{
    run_closedness_diagnostic, run_conformal_scenario, run_junction_scenario, run_norm_invariance, run_tau_scenario,
};

use crate::hodge::HodgeError;
use crate::pointwise::AlgebraError;
use crate::projgeom::GeomError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Tau,
    NormInvariance,
    Conformal,
    Junction,
    Closedness,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Tau, Scenario::NormInvariance, Scenario::Conformal, Scenario::Junction, Scenario::Closedness];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Tau => "tau",
            Scenario::NormInvariance => "norm-invariance",
            Scenario::Conformal => "conformal",
            Scenario::Junction => "junction",
            Scenario::Closedness => "closedness",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("volume forms differ at vertex {vertex} (relative {residual:.3e})")]
    VolumeMismatch { vertex: usize, residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_))
    }
}

/// Validates the config and runs its scenario.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, ExperimentError> {
    let cfg = cfg.clone().resolved()?;
    match cfg.scenario {
        Scenario::Tau => run_tau_scenario(&cfg),
        Scenario::NormInvariance => run_norm_invariance(&cfg),
        Scenario::Conformal => run_conformal_scenario(&cfg),
        Scenario::Junction => run_junction_scenario(&cfg),
        Scenario::Closedness => run_closedness_diagnostic(&cfg),
    }
}
