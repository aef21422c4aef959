use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, Scenario};
use crate::hodge::{TOL_PS, TOL_SOLVE};
use crate::{TOL_ALG, TOL_PROJ};

/// Tolerances of a run. All of them are echoed into the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the Laplace-type solves.
    pub solve: f64,
    /// Threshold on `max |period|` for a nonzero class.
    pub ps: f64,
    /// Pointwise algebraic predicates and cellwise volume matching.
    pub alg: f64,
    pub proj: f64,
    /// Relative norm gap accepted by the norm-invariance scenario.
    pub claim: f64,
    /// Slack in `value ≥ bound − positivity`.
    pub positivity: f64,
    /// Largest compatibility residual accepted for a junction certificate.
    pub certificate: f64,
    /// `‖d*ω‖` below this counts as closed.
    pub closed: f64,
    /// Both norms above this count as non-closed.
    pub open: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solve: TOL_SOLVE,
            ps: TOL_PS,
            alg: TOL_ALG,
            proj: TOL_PROJ,
            claim: 1e-2,
            positivity: 1e-6,
            certificate: 1e-8,
            closed: 1e-8,
            open: 1e-2,
        }
    }
}

/// Triple field used by `tau` and `conformal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Flat metric with the standard structure.
    Flat,
    /// `J = A⁻¹J_std A`, `g = AᵀA` with `A = exp(ε(p₁K₁ + p₂K₂))`.
    Perturbed,
    /// `ω = dη` for a random trigonometric 1-form `η` on the flat grid.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    Zero,
    /// `f = amplitude`.
    Constant,
    /// `f = amplitude · sin(2πx₀) cos(2πx₂)`.
    Bump,
    /// Three random Fourier modes with `max |f| = amplitude` on the grid.
    Random,
}

/// Conformal factor `f` of `(e^f g, J, e^f ω)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub amplitude: f64,
}

impl Default for FactorSpec {
    fn default() -> Self {
        FactorSpec { kind: FactorKind::Bump, amplitude: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Two independent random compatible structures.
    Generic,
    /// `J₁ = J₀`.
    Identical,
    /// `J₁` conjugated by a reflection, so the orientations differ.
    Opposite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub family: Family,
    /// Perturbation amplitude `ε`.
    pub epsilon: f64,
    /// Conformal factor for `conformal`; `closedness` interpolates `e^{tf}`.
    pub factor: FactorSpec,
    /// `norm-invariance`: keep `det g₂ = det g₁` pointwise.
    pub volume_preserving: bool,
    /// Random trials; `None` takes the scenario default.
    pub trials: Option<usize>,
    pub pairs: PairKind,
    /// Values of `t` for `closedness`.
    pub interpolation: Vec<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            family: Family::Flat,
            epsilon: 0.1,
            factor: FactorSpec::default(),
            volume_preserving: true,
            trials: None,
            pairs: PairKind::Generic,
            interpolation: vec![0.0, 0.5, 1.0],
        }
    }
}

/// One scenario run, read from TOML.
///
/// ```toml
/// scenario = "norm-invariance"
/// n = 16
/// seed = 42
///
/// [tolerances]
/// claim = 1e-2
///
/// [generator]
/// epsilon = 0.05
/// volume_preserving = true
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub generator: GeneratorConfig,
}

fn default_n() -> usize {
    8
}

/// File contents; `scenario` may be left to the command line.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Option<Scenario>,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    generator: GeneratorConfig,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            n: default_n(),
            seed: 0,
            tolerances: Tolerances::default(),
            generator: GeneratorConfig::default(),
        }
    }

    /// Parses TOML. A `scenario` key, if present, must agree with `scenario`.
    pub fn from_toml(text: &str, scenario: Option<Scenario>) -> Result<Self, ExperimentError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let scenario = match (file.scenario, scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(ExperimentError::Config(format!("config is for `{a}`, not `{b}`")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(ExperimentError::Config("no scenario given".into())),
        };
        let cfg = ScenarioConfig {
            scenario,
            n: file.n,
            seed: file.seed,
            tolerances: file.tolerances,
            generator: file.generator,
        };
        Ok(cfg)
    }

    pub fn from_path(path: &Path, scenario: Option<Scenario>) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills scenario defaults and checks ranges.
    pub fn resolved(mut self) -> Result<Self, ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.n < 4 {
            return bad(format!("n must be at least 4, got {}", self.n));
        }
        let g = &mut self.generator;
        if !(g.epsilon >= 0.0 && g.epsilon.is_finite()) {
            return bad(format!("epsilon must be finite and nonnegative, got {}", g.epsilon));
        }
        if !g.factor.amplitude.is_finite() {
            return bad("factor amplitude must be finite".into());
        }
        if g.factor.kind == FactorKind::Random && g.factor.amplitude < 0.0 {
            return bad("random factor amplitude must be nonnegative".into());
        }
        if g.interpolation.iter().any(|t| !t.is_finite()) {
            return bad("interpolation values must be finite".into());
        }
        let trials = g.trials.unwrap_or(match self.scenario {
            Scenario::Junction => 1000,
            Scenario::Conformal => 20,
            _ => 1,
        });
        if trials == 0 {
            return bad("trials must be positive".into());
        }
        g.trials = Some(trials);
        let t = &self.tolerances;
        let all = [t.solve, t.ps, t.alg, t.proj, t.claim, t.positivity, t.certificate, t.closed, t.open];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return bad("tolerances must be positive and finite".into());
        }
        Ok(self)
    }

    pub fn trials(&self) -> usize {
        self.generator.trials.unwrap_or(1)
    }
}
