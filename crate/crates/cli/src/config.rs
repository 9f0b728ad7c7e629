//! Run configuration: file values, overridden by flags, filled with defaults.

use std::path::{Path, PathBuf};

use seqshare_core::bell::{builtin_by_name, parse_functional, BellFunctional};
use seqshare_core::measure::Direction;
use seqshare_core::optimize::{Execution, OptimizerConfig};
use seqshare_core::robustness::{SettingsPolicy, ThresholdKind};
use seqshare_core::seqchain::Scenario;
use seqshare_core::states::StateSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Explicit scenario: angles in radians as `[theta, phi]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInput {
    pub alice: Vec<[f64; 2]>,
    pub bobs: Vec<Vec<[f64; 2]>>,
    pub lambdas: Vec<f64>,
}

/// Every setting a command can take. All fields optional so files and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ThresholdKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioInput>,
}

macro_rules! layer {
    ($self:ident, $other:ident, $($field:ident),*) => {
        RunConfig { $($field: $self.$field.or($other.$field)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Values in `self` win; gaps are filled from `other`.
    pub fn over(self, other: RunConfig) -> RunConfig {
        layer!(
            self,
            other,
            inequality,
            functional_file,
            state,
            bobs,
            k_max,
            seed,
            restarts,
            tol,
            max_iters,
            feasibility_eps,
            execution,
            kind,
            settings,
            preset,
            scenario
        )
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        let d = OptimizerConfig::default();
        OptimizerConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            simplex_tol: self.tol.unwrap_or(d.simplex_tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed: self.seed.unwrap_or(d.seed),
            feasibility_eps: self.feasibility_eps.unwrap_or(d.feasibility_eps),
            execution: self.execution.unwrap_or(d.execution),
            ..d
        }
    }

    /// Copies optimizer defaults into the unset fields so the echo is complete.
    pub fn with_optimizer_defaults(mut self) -> Self {
        let o = self.optimizer();
        self.restarts = Some(o.restarts);
        self.tol = Some(o.simplex_tol);
        self.max_iters = Some(o.max_iters);
        self.seed = Some(o.seed);
        self.feasibility_eps = Some(o.feasibility_eps);
        self.execution = Some(o.execution);
        self
    }

    pub fn functional(&self) -> Result<BellFunctional, CliError> {
        if let Some(path) = &self.functional_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            return Ok(parse_functional(&text)?);
        }
        let name = self
            .inequality
            .as_deref()
            .ok_or_else(|| CliError::Input("--inequality is required".into()))?;
        Ok(builtin_by_name(name)?)
    }

    pub fn state(&self) -> StateSpec {
        self.state.unwrap_or(StateSpec::Singlet)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let input = self.scenario.as_ref().ok_or_else(|| {
            CliError::Input("a [scenario] table is required in the config file".into())
        })?;
        let dir = |p: &[f64; 2]| Direction::new(p[0], p[1]);
        let s = Scenario {
            state: self.state(),
            functional: self.functional()?,
            alice_dirs: input.alice.iter().map(dir).collect(),
            bob_dirs: input
                .bobs
                .iter()
                .map(|b| b.iter().map(dir).collect())
                .collect(),
            lambdas: input.lambdas.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}
