//! Reproducible time-sweep experiments: configuration, the
//! solve → synthesize → transpile → execute → mitigate → analyze pipeline,
//! persistence and variant comparison.

mod compare;
mod run;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use compare::{compare_variants, render_table, ComparisonRow};
pub use run::{load_run, load_steps, run_experiment, solve, LoadedRun, RunResult, RunSummary, StepRecord};

use crate::error::{Error, Result};
use crate::mitigation::MitigationConfig;
use crate::model::TcParams;
use crate::noise::{noise_from_fidelity, FidelityTable, NoiseModel};
use crate::transpiler::{Entangler, GateSetSpec, TranspileOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_max: f64,
    /// Samples including both endpoints.
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn reference() -> TimeGrid {
        TimeGrid { t_start: 0.0, t_max: 3.0, n_steps: 51 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::Config(format!("n_steps = {} must be >= 2", self.n_steps)));
        }
        if !(self.t_start >= 0.0 && self.t_max > self.t_start && self.t_max.is_finite()) {
            return Err(Error::Config(format!("time range [{}, {}] is invalid", self.t_start, self.t_max)));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = (self.t_max - self.t_start) / (self.n_steps - 1) as f64;
        (0..self.n_steps).map(|i| if i + 1 == self.n_steps { self.t_max } else { self.t_start + i as f64 * dt }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Backend {
    pub gate_set: GateSetSpec,
    #[serde(default)]
    pub transpile: TranspileOptions,
    /// Explicit noise; with `fidelity_run` set its depolarizing rates are
    /// replaced by the table's.
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub fidelity_run: Option<usize>,
    /// Fidelity table file; the bundled ion table when absent.
    #[serde(default)]
    pub fidelity_table: Option<PathBuf>,
}

impl Backend {
    pub fn resolved_noise(&self) -> Result<NoiseModel> {
        let Some(run) = self.fidelity_run else { return Ok(self.noise.clone()) };
        let table = match &self.fidelity_table {
            Some(p) => FidelityTable::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => FidelityTable::qscout(),
        };
        let base = noise_from_fidelity(&table, run)?;
        Ok(NoiseModel { depol_1q: base.depol_1q, depol_2q: base.depol_2q, depol_2q_pairs: base.depol_2q_pairs, ..self.noise.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bootstrap_replicates: usize,
    pub ci_level: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { bootstrap_replicates: 1000, ci_level: 0.95 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Variant name; also the run directory name.
    pub name: String,
    pub model: TcParams,
    pub grid: TimeGrid,
    pub shots: u64,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    pub backend: Backend,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("name {:?} is not a valid directory name", self.name)));
        }
        self.model.validate()?;
        self.grid.validate()?;
        if self.shots == 0 {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        self.backend.gate_set.validate(self.model.n_emitters + 1)?;
        let t = &self.backend.transpile;
        if t.mirror && !t.use_zz {
            return Err(Error::Config("mirroring requires a ZZ or MS block basis (use_zz)".into()));
        }
        if t.use_zz && self.backend.gate_set.native_two_qubit == Entangler::Cz {
            return Err(Error::Config("block synthesis needs a rotation entangler, not CZ".into()));
        }
        self.backend.resolved_noise()?.validate()?;
        self.mitigation.validate()?;
        if let Some(&bad) = self.mitigation.average_identical.iter().find(|&&i| i > self.model.n_emitters) {
            return Err(Error::Config(format!("average_identical names emitter {bad} of {}", self.model.n_emitters)));
        }
        if self.mitigation.average_identical.contains(&self.model.excited_emitter) {
            return Err(Error::Config("average_identical includes the excited emitter".into()));
        }
        if self.analysis.bootstrap_replicates == 0 || !(self.analysis.ci_level > 0.0 && self.analysis.ci_level < 1.0) {
            return Err(Error::Config("bootstrap needs replicates >= 1 and ci_level in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_toml(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hash_text(&self.to_toml()?))
    }

    pub fn preset(name: &str) -> Result<RunConfig> {
        preset(name)
    }
}

pub(crate) fn hash_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub const PRESETS: [&str; 8] = ["manual_ms", "zz", "zz_mirror", "zz_rc", "aqt", "aqt_rc40", "aqt_rc80", "aqt_rc40_nox"];

/// Trapped-ion noise: bundled fidelity run 0 plus readout error.
fn ion_backend(entangler: Entangler, transpile: TranspileOptions) -> Backend {
    Backend {
        gate_set: GateSetSpec::ion(entangler),
        transpile,
        noise: NoiseModel { spam_flip: 0.005, ..NoiseModel::default() },
        fidelity_run: Some(0),
        fidelity_table: None,
    }
}

/// Superconducting noise: depolarizing CZ and single-qubit errors, 3% CZ
/// over-rotation and readout error.
pub fn superconducting_noise() -> NoiseModel {
    let mut n = NoiseModel { depol_1q: 0.002, depol_2q: 0.01, spam_flip: 0.01, ..NoiseModel::default() };
    n.coherent_overrotation.insert("CZ".into(), 0.03);
    n
}

fn preset(name: &str) -> Result<RunConfig> {
    let zz = TranspileOptions { use_zz: true, fuse_single_qubit: true, ..TranspileOptions::default() };
    let mirror = TranspileOptions { mirror: true, ..zz.clone() };
    let routed = TranspileOptions { route: true, fuse_single_qubit: true, ..TranspileOptions::default() };
    let aqt_backend = Backend {
        gate_set: GateSetSpec::superconducting(4),
        transpile: routed,
        noise: superconducting_noise(),
        fidelity_run: None,
        fidelity_table: None,
    };
    let (backend, mitigation, shots) = match name {
        "manual_ms" => (ion_backend(Entangler::MsXx, TranspileOptions::default()), MitigationConfig::default(), 2000),
        "zz" => (ion_backend(Entangler::Zz, zz), MitigationConfig::default(), 2000),
        "zz_mirror" => (ion_backend(Entangler::Zz, mirror), MitigationConfig::default(), 2000),
        "zz_rc" => (
            ion_backend(Entangler::Zz, mirror),
            MitigationConfig { rc_randomizations: 10, ..MitigationConfig::default() },
            2000,
        ),
        "aqt" => (aqt_backend, MitigationConfig::default(), 20_000),
        "aqt_rc40" => (aqt_backend, MitigationConfig { rc_randomizations: 40, ..MitigationConfig::default() }, 20_000),
        "aqt_rc80" => (aqt_backend, MitigationConfig { rc_randomizations: 80, ..MitigationConfig::default() }, 20_000),
        "aqt_rc40_nox" => (
            aqt_backend,
            MitigationConfig { rc_randomizations: 40, nox_factors: vec![1, 3, 5, 7, 9], ..MitigationConfig::default() },
            20_000,
        ),
        _ => return Err(Error::Config(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    };
    Ok(RunConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        model: TcParams::reference(),
        grid: TimeGrid::reference(),
        shots,
        seed: 1,
        jobs: 0,
        backend,
        mitigation,
        analysis: AnalysisConfig::default(),
        output_dir: None,
    })
}
