//! Run configuration, read from TOML or JSON.
//!
//! A config names one experiment and may carry a parameter block for it.
//! Missing fields take the defaults below, which reproduce the reference
//! runs. Unknown keys and blocks for other experiments are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TwoLevel,
    DoubleWell,
    Harmonic,
    HarmonicOdd,
    Gibbs,
    Nonhermitian,
    Propagator,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::TwoLevel,
        ExperimentKind::DoubleWell,
        ExperimentKind::Harmonic,
        ExperimentKind::HarmonicOdd,
        ExperimentKind::Gibbs,
        ExperimentKind::Nonhermitian,
        ExperimentKind::Propagator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TwoLevel => "two_level",
            ExperimentKind::DoubleWell => "double_well",
            ExperimentKind::Harmonic => "harmonic",
            ExperimentKind::HarmonicOdd => "harmonic_odd",
            ExperimentKind::Gibbs => "gibbs",
            ExperimentKind::Nonhermitian => "nonhermitian",
            ExperimentKind::Propagator => "propagator",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentKind::TwoLevel => {
                "two-level system, exact and first-order circuits against closed forms"
            }
            ExperimentKind::DoubleWell => {
                "asymmetric double well on a 6-qubit grid, split-operator circuit"
            }
            ExperimentKind::Harmonic => "harmonic oscillator from the lowest four eigenstates",
            ExperimentKind::HarmonicOdd => {
                "harmonic oscillator from odd-parity eigenstates 1, 3, 5"
            }
            ExperimentKind::Gibbs => "Gibbs state and partition function of a random Hamiltonian",
            ExperimentKind::Nonhermitian => {
                "two-ancilla evolution under a random non-Hermitian generator"
            }
            ExperimentKind::Propagator => "free-particle kinetic propagator table",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Postselect,
    Sampled,
}

impl FromStr for ModeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "postselect" => Ok(ModeName::Postselect),
            "sampled" => Ok(ModeName::Sampled),
            other => Err(format!(
                "unknown mode `{other}` (expected postselect or sampled)"
            )),
        }
    }
}

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_level: Option<TwoLevelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_well: Option<DoubleWellConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<HarmonicConfig>,
    #[serde(
        default,
        deserialize_with = "odd_block",
        skip_serializing_if = "Option::is_none"
    )]
    pub harmonic_odd: Option<HarmonicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonhermitian: Option<NonHermitianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagator: Option<PropagatorConfig>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoLevelConfig {
    pub eps_gs: f64,
    pub eps_ex: f64,
    pub m0: f64,
    pub dtau: Vec<f64>,
    pub n_steps: usize,
    /// Initial weight ratio of the excited to the ground level.
    pub w0: f64,
}

impl Default for TwoLevelConfig {
    fn default() -> Self {
        TwoLevelConfig {
            eps_gs: 0.0,
            eps_ex: 1.0,
            m0: 0.8,
            dtau: vec![0.1, 0.3, 0.5],
            n_steps: 31,
            w0: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialShape {
    /// Gaussian on the lower well plus half a Gaussian on the upper well.
    DoublePeak,
    /// Gaussian on the lower well only.
    SinglePeak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoubleWellConfig {
    pub n_qubits: usize,
    pub length: f64,
    pub separation: f64,
    pub delta: f64,
    pub barrier: f64,
    pub mass: f64,
    pub m0: f64,
    pub dtau: f64,
    pub n_steps: usize,
    pub initial: InitialShape,
}

impl Default for DoubleWellConfig {
    fn default() -> Self {
        DoubleWellConfig {
            n_qubits: 6,
            length: 18.0,
            separation: 3.0,
            delta: 0.25,
            barrier: 0.5,
            mass: 1.0,
            m0: 0.9,
            dtau: 0.1,
            n_steps: 40,
            initial: InitialShape::DoublePeak,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicConfig {
    pub n_qubits: usize,
    pub length: f64,
    pub omega: f64,
    pub mass: f64,
    pub m0: f64,
    pub dtau: f64,
    pub n_steps: usize,
    /// Eigenstates superposed with equal weight in the initial state.
    pub eigenstates: Vec<usize>,
}

impl HarmonicConfig {
    pub fn ground_run() -> Self {
        HarmonicConfig {
            n_qubits: 6,
            length: 10.0,
            omega: 1.0,
            mass: 1.0,
            m0: 0.85,
            dtau: 0.15,
            n_steps: 30,
            eigenstates: vec![0, 1, 2, 3],
        }
    }

    pub fn odd_run() -> Self {
        HarmonicConfig {
            dtau: 0.1,
            n_steps: 60,
            eigenstates: vec![1, 3, 5],
            ..HarmonicConfig::ground_run()
        }
    }
}

impl Default for HarmonicConfig {
    fn default() -> Self {
        HarmonicConfig::ground_run()
    }
}

/// A `harmonic_odd` block, laid over the odd-run defaults rather than the
/// ground-run ones.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HarmonicPatch {
    n_qubits: Option<usize>,
    length: Option<f64>,
    omega: Option<f64>,
    mass: Option<f64>,
    m0: Option<f64>,
    dtau: Option<f64>,
    n_steps: Option<usize>,
    eigenstates: Option<Vec<usize>>,
}

fn odd_block<'de, D: Deserializer<'de>>(d: D) -> Result<Option<HarmonicConfig>, D::Error> {
    let Some(p) = Option::<HarmonicPatch>::deserialize(d)? else {
        return Ok(None);
    };
    let base = HarmonicConfig::odd_run();
    Ok(Some(HarmonicConfig {
        n_qubits: p.n_qubits.unwrap_or(base.n_qubits),
        length: p.length.unwrap_or(base.length),
        omega: p.omega.unwrap_or(base.omega),
        mass: p.mass.unwrap_or(base.mass),
        m0: p.m0.unwrap_or(base.m0),
        dtau: p.dtau.unwrap_or(base.dtau),
        n_steps: p.n_steps.unwrap_or(base.n_steps),
        eigenstates: p.eigenstates.unwrap_or(base.eigenstates),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsConfig {
    pub n_qubits: usize,
    pub beta: f64,
    pub m0: f64,
    pub shots: usize,
    /// Seed of the random Hamiltonian; the run seed drives the shots.
    pub hamiltonian_seed: u64,
    pub scale: f64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            n_qubits: 2,
            beta: 1.0,
            m0: 0.5,
            shots: 10_000,
            hamiltonian_seed: 7,
            scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonHermitianConfig {
    pub n_qubits: usize,
    pub dt: f64,
    pub m0: f64,
    pub n_steps: usize,
    pub generator_seed: u64,
    pub scale: f64,
}

impl Default for NonHermitianConfig {
    fn default() -> Self {
        NonHermitianConfig {
            n_qubits: 1,
            dt: 0.05,
            m0: 0.6,
            n_steps: 40,
            generator_seed: 11,
            scale: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub n_points: usize,
    pub lambdas: Vec<f64>,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            n_points: 32,
            lambdas: vec![0.01, 0.04],
        }
    }
}

/// Largest grid and generator registers the harness accepts.
const MAX_REGISTER: usize = 10;

impl RunConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        RunConfig {
            experiment,
            seed: DEFAULT_SEED,
            mode: ModeName::Postselect,
            two_level: None,
            double_well: None,
            harmonic: None,
            harmonic_odd: None,
            gibbs: None,
            nonhermitian: None,
            propagator: None,
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?
        };
        cfg.check_structure()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn two_level(&self) -> TwoLevelConfig {
        self.two_level.clone().unwrap_or_default()
    }

    pub fn double_well(&self) -> DoubleWellConfig {
        self.double_well.clone().unwrap_or_default()
    }

    pub fn harmonic(&self) -> HarmonicConfig {
        self.harmonic
            .clone()
            .unwrap_or_else(HarmonicConfig::ground_run)
    }

    pub fn harmonic_odd(&self) -> HarmonicConfig {
        self.harmonic_odd
            .clone()
            .unwrap_or_else(HarmonicConfig::odd_run)
    }

    pub fn gibbs(&self) -> GibbsConfig {
        self.gibbs.clone().unwrap_or_default()
    }

    pub fn nonhermitian(&self) -> NonHermitianConfig {
        self.nonhermitian.clone().unwrap_or_default()
    }

    pub fn propagator(&self) -> PropagatorConfig {
        self.propagator.clone().unwrap_or_default()
    }

    fn present_blocks(&self) -> Vec<ExperimentKind> {
        [
            (self.two_level.is_some(), ExperimentKind::TwoLevel),
            (self.double_well.is_some(), ExperimentKind::DoubleWell),
            (self.harmonic.is_some(), ExperimentKind::Harmonic),
            (self.harmonic_odd.is_some(), ExperimentKind::HarmonicOdd),
            (self.gibbs.is_some(), ExperimentKind::Gibbs),
            (self.nonhermitian.is_some(), ExperimentKind::Nonhermitian),
            (self.propagator.is_some(), ExperimentKind::Propagator),
        ]
        .into_iter()
        .filter_map(|(present, kind)| present.then_some(kind))
        .collect()
    }

    /// Shape checks that do not involve the physics: block selection,
    /// counts and register sizes.
    pub fn check_structure(&self) -> Result<(), LabError> {
        let config = |msg: String| Err(LabError::Config(msg));
        if let Some(other) = self
            .present_blocks()
            .into_iter()
            .find(|&k| k != self.experiment)
        {
            return config(format!(
                "block `{other}` does not belong to experiment `{}`",
                self.experiment
            ));
        }
        let trajectory_run = matches!(
            self.experiment,
            ExperimentKind::DoubleWell | ExperimentKind::Harmonic | ExperimentKind::HarmonicOdd
        );
        if self.mode == ModeName::Sampled && !trajectory_run {
            return config(format!(
                "experiment `{}` runs postselected only",
                self.experiment
            ));
        }
        let register = |n: usize, what: &str| {
            if n == 0 || n > MAX_REGISTER {
                config(format!("{what} must be in 1..={MAX_REGISTER}, got {n}"))
            } else {
                Ok(())
            }
        };
        let steps = |n: usize| {
            if n == 0 {
                config("n_steps must be positive".to_string())
            } else {
                Ok(())
            }
        };
        match self.experiment {
            ExperimentKind::TwoLevel => {
                let c = self.two_level();
                steps(c.n_steps)?;
                if c.dtau.is_empty() {
                    return config("dtau sweep is empty".to_string());
                }
            }
            ExperimentKind::DoubleWell => {
                let c = self.double_well();
                register(c.n_qubits, "n_qubits")?;
                steps(c.n_steps)?;
            }
            ExperimentKind::Harmonic | ExperimentKind::HarmonicOdd => {
                let c = if self.experiment == ExperimentKind::Harmonic {
                    self.harmonic()
                } else {
                    self.harmonic_odd()
                };
                register(c.n_qubits, "n_qubits")?;
                steps(c.n_steps)?;
                if c.eigenstates.is_empty() {
                    return config("eigenstates must not be empty".to_string());
                }
                if let Some(&i) = c.eigenstates.iter().find(|&&i| i >= 1 << c.n_qubits) {
                    return config(format!(
                        "eigenstate {i} does not exist on a {}-qubit grid",
                        c.n_qubits
                    ));
                }
            }
            ExperimentKind::Gibbs => {
                let c = self.gibbs();
                register(c.n_qubits, "n_qubits")?;
                if c.shots == 0 {
                    return config("shots must be positive".to_string());
                }
            }
            ExperimentKind::Nonhermitian => {
                let c = self.nonhermitian();
                register(c.n_qubits, "n_qubits")?;
                steps(c.n_steps)?;
            }
            ExperimentKind::Propagator => {
                let c = self.propagator();
                if c.n_points < 2 || !c.n_points.is_power_of_two() {
                    return config(format!(
                        "n_points must be a power of two >= 2, got {}",
                        c.n_points
                    ));
                }
                if c.lambdas.is_empty() {
                    return config("lambdas must not be empty".to_string());
                }
            }
        }
        Ok(())
    }
}
