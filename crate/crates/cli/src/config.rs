//! Experiment configuration: a TOML file with one section per pipeline
//! stage. Defaults mirror the reference reservoir settings.

use serde::{Deserialize, Serialize};

use qrpe_core::reservoir::ReservoirParams;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReservoirSection {
    pub kind: String,
    pub local_dim: usize,
    pub j: f64,
    pub p1: f64,
    pub p2: f64,
    pub e1: f64,
    pub e2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub t: f64,
}

impl Default for ReservoirSection {
    fn default() -> Self {
        Self {
            kind: "qubit".into(),
            local_dim: 2,
            j: -0.41,
            p1: 4.0,
            p2: 1.3,
            e1: 0.71,
            e2: 0.46,
            alpha1: 0.0,
            alpha2: 0.0,
            t: 1.0,
        }
    }
}

impl ReservoirSection {
    pub fn qutrit_defaults() -> Self {
        Self {
            kind: "bosonic".into(),
            local_dim: 3,
            j: 0.9,
            p1: 2.1,
            p2: 1.1,
            e1: 1.1,
            e2: 0.4,
            alpha1: 0.6,
            alpha2: 0.7,
            t: 1.0,
        }
    }

    pub fn to_params(&self, hbar: f64) -> ReservoirParams {
        ReservoirParams {
            j: self.j,
            p1: self.p1,
            p2: self.p2,
            e1: self.e1,
            e2: self.e2,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            t: self.t,
            hbar,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RandFidelitySection {
    pub n_max: usize,
    pub states_per_n: usize,
    pub epsilons: Vec<f64>,
    pub delta: f64,
}

impl Default for RandFidelitySection {
    fn default() -> Self {
        Self {
            n_max: 4,
            states_per_n: 1000,
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EsdSection {
    pub q_points: usize,
    pub kt_points: usize,
    pub kt_max: f64,
    pub snapshots: usize,
}

impl Default for EsdSection {
    fn default() -> Self {
        Self {
            q_points: 21,
            kt_points: 21,
            kt_max: 3.0,
            snapshots: 6000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PauliLocalSection {
    pub k_max: usize,
    pub n_grid: Vec<usize>,
    pub repeats: usize,
}

impl Default for PauliLocalSection {
    fn default() -> Self {
        Self {
            k_max: 4,
            n_grid: vec![250, 500, 1000, 2000, 4000, 8000],
            repeats: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GhzFidelitySection {
    pub ks: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub repeats: usize,
}

impl Default for GhzFidelitySection {
    fn default() -> Self {
        Self {
            ks: vec![3, 6],
            n_grid: vec![500, 1000, 2000, 4000, 8000, 16000],
            repeats: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PuritySection {
    pub states: usize,
}

impl Default for PuritySection {
    fn default() -> Self {
        Self { states: 10_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WbpSection {
    pub n_qubits: usize,
    pub depth_max: usize,
    pub depth_step: usize,
    pub snapshots: usize,
    pub seeds: usize,
    pub region: Vec<usize>,
}

impl Default for WbpSection {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            depth_max: 75,
            depth_step: 5,
            snapshots: 2000,
            seeds: 5,
            region: vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VdSection {
    pub readouts: usize,
    pub repeats: usize,
    pub eps_grid: Vec<f64>,
}

impl Default for VdSection {
    fn default() -> Self {
        Self {
            readouts: 10_000,
            repeats: 10,
            eps_grid: (1..=9).map(|k| 0.1 * k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeScanSection {
    pub t_max: f64,
    pub t_points: usize,
    pub ensemble: usize,
}

impl Default for TimeScanSection {
    fn default() -> Self {
        Self {
            t_max: 5.5,
            t_points: 111,
            ensemble: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PtmSection {
    pub cases: usize,
    pub t1: f64,
    pub t2: f64,
    pub j_max: usize,
    pub targets: usize,
}

impl Default for PtmSection {
    fn default() -> Self {
        Self {
            cases: 50,
            t1: 1.0,
            t2: 10.0,
            j_max: 200,
            targets: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Config {
    pub experiment: String,
    pub seed: u64,
    pub out_dir: String,
    pub threads: usize,
    pub hbar: f64,
    pub reservoir: ReservoirSection,
    pub reservoir_qudit: ReservoirSection,
    pub rand_fidelity: RandFidelitySection,
    pub esd: EsdSection,
    pub pauli_local: PauliLocalSection,
    pub ghz_fidelity: GhzFidelitySection,
    pub purity: PuritySection,
    pub wbp: WbpSection,
    pub vd: VdSection,
    pub time_scan: TimeScanSection,
    pub ptm: PtmSection,
}

pub const EXPERIMENTS: &[&str] = &[
    "rand-fidelity",
    "esd",
    "pauli-local",
    "ghz-fidelity",
    "purity",
    "wbp",
    "vd",
    "time-scan",
    "ptm",
];

impl Config {
    pub fn for_experiment(experiment: &str) -> Result<Self> {
        if !EXPERIMENTS.contains(&experiment) {
            return Err(Error::Config(format!(
                "unknown experiment '{experiment}'; expected one of {EXPERIMENTS:?}"
            )));
        }
        Ok(Self {
            experiment: experiment.into(),
            seed: 7,
            out_dir: "out".into(),
            threads: 0,
            hbar: 1.0,
            reservoir: ReservoirSection::default(),
            reservoir_qudit: ReservoirSection::qutrit_defaults(),
            ..Default::default()
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        if cfg.hbar == 0.0 {
            cfg.hbar = 1.0;
        }
        if cfg.out_dir.is_empty() {
            cfg.out_dir = "out".into();
        }
        if cfg.reservoir_qudit.kind == "qubit" && cfg.reservoir_qudit.local_dim == 2 {
            // section absent from the file: fall back to qutrit defaults
            cfg.reservoir_qudit = ReservoirSection::qutrit_defaults();
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::Config(format!(
                "unknown experiment '{}'; expected one of {EXPERIMENTS:?}",
                self.experiment
            )));
        }
        if self.hbar <= 0.0 {
            return Err(Error::Config(format!("hbar must be positive, got {}", self.hbar)));
        }
        Ok(())
    }
}
