//! Experiment configuration. Values are layered: built-in defaults, then the
//! `UDD_SEED` environment variable (seed only), then a `key = value` file, then
//! command-line flags.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{
    bell_plus_state, polarization_from_state, singlet_state, PolarizationOperator,
};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector, C64};
use crate::models::{
    build_three_level_bath_with, build_two_qubit_spin_bath_with, control_operator, BathState,
    Control, ControlKind, CouplingMode, ModelInstance,
};
use crate::pulses::{udd_times, PulseSchedule, PulseShape};

pub const SEED_ENV: &str = "UDD_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    TwoQubit,
    ThreeLevel,
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "two_qubit" => Ok(ModelKind::TwoQubit),
            "three_level" => Ok(ModelKind::ThreeLevel),
            other => Err(format!("unknown model '{other}' (two_qubit | three_level)")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TwoQubit => "two_qubit",
            ModelKind::ThreeLevel => "three_level",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    Delta,
    Gaussian,
}

impl FromStr for PulseKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "delta" => Ok(PulseKind::Delta),
            "gaussian" => Ok(PulseKind::Gaussian),
            other => Err(format!("unknown pulse '{other}' (delta | gaussian)")),
        }
    }
}

/// Named system state, or explicit amplitudes `re[:im],re[:im],...`
/// (normalized on use).
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    UpUp,
    BellPlus,
    Singlet,
    Level0,
    Amplitudes(Vec<C64>),
}

impl FromStr for InitialState {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "up_up" => return Ok(InitialState::UpUp),
            "bell_plus" => return Ok(InitialState::BellPlus),
            "singlet" => return Ok(InitialState::Singlet),
            "level0" => return Ok(InitialState::Level0),
            _ => {}
        }
        let amps = s
            .split(',')
            .map(|entry| {
                let entry = entry.trim();
                let (re, im) = entry.split_once(':').unwrap_or((entry, "0"));
                let re: f64 = re
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad amplitude '{entry}'"))?;
                let im: f64 = im
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad amplitude '{entry}'"))?;
                Ok(C64::new(re, im))
            })
            .collect::<std::result::Result<Vec<_>, String>>()
            .map_err(|e| {
                format!("{e}; expected up_up | bell_plus | singlet | level0 | re[:im],re[:im],...")
            })?;
        Ok(InitialState::Amplitudes(amps))
    }
}

impl InitialState {
    pub fn state(&self) -> Result<StateVector> {
        match self {
            InitialState::UpUp => StateVector::basis(4, 0),
            InitialState::BellPlus => Ok(bell_plus_state()),
            InitialState::Singlet => Ok(singlet_state()),
            InitialState::Level0 => StateVector::basis(3, 0),
            InitialState::Amplitudes(a) => StateVector::normalized(a.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// `None` picks `y1_product` (two qubits) or `mlevel_v1` (three levels).
    pub control: Option<ControlKind>,
    pub n: usize,
    pub total_time: f64,
    pub pulse: PulseKind,
    pub c_ratio: f64,
    pub seed: u64,
    pub samples: usize,
    /// `None` picks `up_up` or `level0` to match the model.
    pub initial_state: Option<InitialState>,
    pub coupling: CouplingMode,
    pub bath_state: BathState,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::TwoQubit,
            control: None,
            n: 8,
            total_time: 0.1,
            pulse: PulseKind::Gaussian,
            c_ratio: 100.0,
            seed: 42,
            samples: 1000,
            initial_state: None,
            coupling: CouplingMode::Independent,
            bath_state: BathState::FirstBasisState,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::InvalidShape(format!("{key}: {e}")))
}

impl ExperimentConfig {
    /// Defaults with the seed taken from `UDD_SEED` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seed = parse(SEED_ENV, v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = parse(key, value)?,
            "control" => self.control = Some(parse(key, value)?),
            "n" => self.n = parse(key, value)?,
            "total_time" | "t" => self.total_time = parse(key, value)?,
            "pulse" => self.pulse = parse(key, value)?,
            "c_ratio" => self.c_ratio = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "initial_state" | "initial" => self.initial_state = Some(parse(key, value)?),
            "coupling" => self.coupling = parse(key, value)?,
            "bath_state" => self.bath_state = parse(key, value)?,
            other => return Err(Error::InvalidShape(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidShape(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn control_kind(&self) -> ControlKind {
        self.control.unwrap_or(match self.model {
            ModelKind::TwoQubit => ControlKind::Y1Product,
            ModelKind::ThreeLevel => ControlKind::MlevelV1 { target: 0 },
        })
    }

    pub fn initial(&self) -> InitialState {
        self.initial_state.clone().unwrap_or(match self.model {
            ModelKind::TwoQubit => InitialState::UpUp,
            ModelKind::ThreeLevel => InitialState::Level0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("total_time", self.total_time)?;
        positive("c_ratio", self.c_ratio)?;
        if self.samples < 2 {
            return Err(Error::InvalidShape(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn build_model(&self) -> ModelInstance {
        match self.model {
            ModelKind::TwoQubit => build_two_qubit_spin_bath_with(self.seed, self.coupling),
            ModelKind::ThreeLevel => build_three_level_bath_with(self.seed, self.coupling),
        }
    }

    /// Resolves everything a run needs against an already-built model.
    pub fn prepare(&self, model: &ModelInstance) -> Result<Prepared> {
        self.validate()?;
        let psi = self.initial().state()?;
        if psi.dim() != model.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.system_dim(),
                found: psi.dim(),
            });
        }
        let kind = if self.n == 0 {
            ControlKind::None
        } else {
            self.control_kind()
        };
        let control = control_operator(self.control_kind(), model.system_dims())?;
        let control = if kind == ControlKind::None {
            Control::None
        } else {
            control
        };
        let schedule = if kind == ControlKind::None {
            PulseSchedule::empty(self.total_time)?
        } else {
            udd_times(self.n, self.total_time)?
        };
        let shape = match self.pulse {
            PulseKind::Delta => PulseShape::Delta,
            PulseKind::Gaussian => PulseShape::gaussian_ratio(self.total_time, self.c_ratio)?,
        };
        Ok(Prepared {
            observable: polarization_from_state(&psi)?,
            rho0: model.initial_state(&psi, self.bath_state)?,
            rho_ref: DensityMatrix::pure(&psi),
            control,
            schedule,
            shape,
        })
    }
}

/// A config resolved against a model.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub observable: PolarizationOperator,
    pub rho0: DensityMatrix,
    /// Initial system state, the reference for distances.
    pub rho_ref: DensityMatrix,
    pub control: Control,
    pub schedule: PulseSchedule,
    pub shape: PulseShape,
}
