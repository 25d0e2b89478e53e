//! Run configuration: a strict TOML document whose every key is optional.
//!
//! ```toml
//! system = "qubit"            # or "lambda"
//! omega = 1.0
//! average_variant = "paper_formula"
//!
//! [kernel]
//! type = "ou"                 # ou | composite | markov_dephased_ou | zero
//! strength = 1.0
//! memory_rate = 0.1
//!
//! [grid]
//! dt = 1e-3
//! horizon = 8.0
//! ```
//!
//! All rates and times are in units of ω.

use std::path::PathBuf;

use noisemix::dynamics::{AverageVariant, PureState};
use noisemix::experiments::System;
use noisemix::kernels::{KernelSpec, OuParams};
use noisemix::trajectories::EnsembleSpec;
use noisemix::{Cx, Error as CoreError, TimeGrid64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuConfig {
    pub strength: f64,
    pub memory_rate: f64,
}

impl From<OuConfig> for OuParams<f64> {
    fn from(c: OuConfig) -> Self {
        OuParams { strength: c.strength, memory_rate: c.memory_rate }
    }
}

impl From<OuParams<f64>> for OuConfig {
    fn from(p: OuParams<f64>) -> Self {
        OuConfig { strength: p.strength, memory_rate: p.memory_rate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Ou { strength: f64, memory_rate: f64 },
    Composite { beta: OuConfig, alpha: OuConfig },
    MarkovDephasedOu { beta: OuConfig, dephasing_strength: f64 },
    Zero,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Ou { strength: 1.0, memory_rate: 0.1 }
    }
}

impl KernelConfig {
    pub fn to_spec(self) -> KernelSpec<f64> {
        match self {
            KernelConfig::Ou { strength, memory_rate } => KernelSpec::Ou(OuParams { strength, memory_rate }),
            KernelConfig::Composite { beta, alpha } => KernelSpec::Composite { beta: beta.into(), alpha: alpha.into() },
            KernelConfig::MarkovDephasedOu { beta, dephasing_strength } => {
                KernelSpec::MarkovDephasedOu { beta: beta.into(), dephasing_strength }
            }
            KernelConfig::Zero => KernelSpec::Zero,
        }
    }

    pub fn from_spec(spec: KernelSpec<f64>) -> Self {
        match spec {
            KernelSpec::Ou(p) => KernelConfig::Ou { strength: p.strength, memory_rate: p.memory_rate },
            KernelSpec::Composite { beta, alpha } => KernelConfig::Composite { beta: beta.into(), alpha: alpha.into() },
            KernelSpec::MarkovDephasedOu { beta, dephasing_strength } => {
                KernelConfig::MarkovDephasedOu { beta: beta.into(), dephasing_strength }
            }
            KernelSpec::Zero => KernelConfig::Zero,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let ou = |prefix: &str, p: OuConfig| OuParams::from(p).validate().map_err(|e| keyed(prefix, e));
        match *self {
            KernelConfig::Ou { strength, memory_rate } => ou("kernel", OuConfig { strength, memory_rate }),
            KernelConfig::Composite { beta, alpha } => {
                ou("kernel.beta", beta)?;
                ou("kernel.alpha", alpha)
            }
            KernelConfig::MarkovDephasedOu { beta, .. } => {
                ou("kernel.beta", beta)?;
                self.to_spec().validate().map_err(|e| keyed("kernel", e))
            }
            KernelConfig::Zero => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dt: f64,
    pub horizon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dt: 1e-3, horizon: 8.0 }
    }
}

/// Initial condition: a state-averaged qubit fidelity or explicit amplitudes
/// `[[re, im], ...]`, upper level first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Average,
    State { amplitudes: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: System,
    pub omega: f64,
    pub average_variant: AverageVariant,
    pub kernel: KernelConfig,
    pub grid: GridConfig,
    /// Defaults to the state average for the qubit and `(|1⟩+|2⟩)/√2` for Λ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: System::Qubit,
            omega: 1.0,
            average_variant: AverageVariant::PaperFormula,
            kernel: KernelConfig::default(),
            grid: GridConfig::default(),
            initial: None,
            ensemble: None,
            output: OutputConfig::default(),
        }
    }
}

/// The resolved initial condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Average,
    State(PureState<f64>),
}

fn keyed(prefix: &str, e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter { name, reason } => CliError::Validation { key: format!("{prefix}.{name}"), reason },
        other => CliError::Core(other),
    }
}

fn bad(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation { key: key.to_string(), reason: reason.into() }
}

/// Parses and validates a TOML document; missing keys take their defaults.
pub fn parse_config(source: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(source).map_err(|e| CliError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.omega.is_finite() {
            return Err(bad("omega", format!("must be finite, got {}", self.omega)));
        }
        self.kernel.validate()?;
        self.time_grid()?;
        self.initial_state()?;
        if let Some(e) = self.ensemble {
            EnsembleSpec::new(e.count, e.seed).map_err(|e| keyed("ensemble", e))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn kernel_spec(&self) -> KernelSpec<f64> {
        self.kernel.to_spec()
    }

    pub fn time_grid(&self) -> Result<TimeGrid64, CliError> {
        let GridConfig { dt, horizon } = self.grid;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(bad("grid.dt", format!("must be finite and > 0, got {dt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(bad("grid.horizon", format!("must be finite and > 0, got {horizon}")));
        }
        TimeGrid64::with_horizon(dt, horizon).map_err(|e| keyed("grid", e))
    }

    pub fn ensemble_spec(&self) -> Option<EnsembleSpec> {
        self.ensemble.map(|e| EnsembleSpec { count: e.count, seed: e.seed })
    }

    pub fn initial_state(&self) -> Result<Initial, CliError> {
        let dim = self.system.kind().dim();
        match &self.initial {
            None if self.system == System::Qubit => Ok(Initial::Average),
            None => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Ok(Initial::State(PureState::normalized(vec![Cx::new(h, 0.0), Cx::new(h, 0.0), Cx::new(0.0, 0.0)]).map_err(
                    |e| keyed("initial", e),
                )?))
            }
            Some(InitialConfig::Average) if self.system == System::Qubit => Ok(Initial::Average),
            Some(InitialConfig::Average) => Err(bad("initial.type", "state averaging is only defined for the qubit")),
            Some(InitialConfig::State { amplitudes }) => {
                if amplitudes.len() != dim {
                    return Err(bad(
                        "initial.amplitudes",
                        format!("{:?} needs {dim} amplitudes, got {}", self.system, amplitudes.len()),
                    ));
                }
                let amps = amplitudes.iter().map(|[re, im]| Cx::new(*re, *im)).collect();
                PureState::normalized(amps)
                    .map(Initial::State)
                    .map_err(|e| bad("initial.amplitudes", e.to_string()))
            }
        }
    }
}
