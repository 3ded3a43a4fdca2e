//! Experiment configuration: JSON files with every seed explicit, so a
//! config plus the code version pins the output bit for bit.

use std::path::{Path, PathBuf};

use masked_consensus::masks::{MaskFamily, ParamRanges};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Path to a graph JSON file, relative to the config file.
    File(PathBuf),
    /// Seeded cycle-superposition generator.
    Generate {
        n: usize,
        extra_cycles: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSource {
    /// Path to a private mask-spec JSON file.
    File(PathBuf),
    /// Seeded random parameters from the given ranges.
    Sample {
        family: MaskFamily,
        seed: u64,
        #[serde(default)]
        ranges: ParamRanges,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    /// Path to a JSON array with one value per node.
    File(PathBuf),
    Uniform { low: f64, high: f64, seed: u64 },
}

fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub t0: f64,
    pub step: f64,
    pub horizon: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_nu() -> f64 {
    1e-3
}

fn default_deviation_grid() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
}

fn default_deviation_box() -> f64 {
    10.0
}

fn default_deviation_samples() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_deviation_grid")]
    pub deviation_grid: Vec<f64>,
    #[serde(default = "default_deviation_box")]
    pub deviation_box: f64,
    #[serde(default = "default_deviation_samples")]
    pub deviation_samples: usize,
    #[serde(default)]
    pub deviation_seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            nu: default_nu(),
            deviation_grid: default_deviation_grid(),
            deviation_box: default_deviation_box(),
            deviation_samples: default_deviation_samples(),
            deviation_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackConfig {
    /// Assume the additive mask structure and fit its exponential.
    Additive,
    /// Scan candidate gains under the affine assumption.
    Affine { c_grid: Vec<f64> },
    /// Flow-integral eavesdropping for one ordered (victim, attacker) pair.
    Integral { victim: usize, attacker: usize },
    /// Additive + affine + every containment pair.
    Suite { c_grid: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub sigma: Vec<f64>,
    pub delta: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub mask: MaskSource,
    pub x0: StateSource,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub attacks: Vec<AttackConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

impl ExperimentConfig {
    /// Parse a config file; referenced files must exist, seeds are explicit
    /// by construction, and numeric settings must be sane.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("malformed config {}: {e}", path.display())))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        config.validate(&base)?;
        Ok((config, base))
    }

    pub fn validate(&self, base: &Path) -> Result<(), CliError> {
        if !(self.integrator.step > 0.0) {
            return Err(CliError::config("integrator.step must be positive"));
        }
        if !(self.integrator.horizon > 0.0) {
            return Err(CliError::config("integrator.horizon must be positive"));
        }
        if self.integrator.sample_every == 0 {
            return Err(CliError::config("integrator.sample_every must be at least 1"));
        }
        if !(self.integrator.t0 >= 0.0) {
            return Err(CliError::config("integrator.t0 must be nonnegative"));
        }
        for referenced in [
            match &self.graph {
                GraphSource::File(p) => Some(p),
                GraphSource::Generate { .. } => None,
            },
            match &self.mask {
                MaskSource::File(p) => Some(p),
                MaskSource::Sample { .. } => None,
            },
            match &self.x0 {
                StateSource::File(p) => Some(p),
                StateSource::Uniform { .. } => None,
            },
        ]
        .into_iter()
        .flatten()
        {
            let resolved = resolve(base, referenced);
            if !resolved.is_file() {
                return Err(CliError::config(format!(
                    "referenced file does not exist: {}",
                    resolved.display()
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.sigma.is_empty() || sweep.delta.is_empty() || sweep.seeds.is_empty() {
                return Err(CliError::config("sweep grid must not be empty"));
            }
            if sweep.sigma.iter().chain(&sweep.delta).any(|v| !(*v > 0.0)) {
                return Err(CliError::config("sweep rates must be positive"));
            }
        }
        for attack in &self.attacks {
            if let AttackConfig::Affine { c_grid } | AttackConfig::Suite { c_grid } = attack {
                if c_grid.is_empty() {
                    return Err(CliError::config("attack c_grid must not be empty"));
                }
            }
        }
        Ok(())
    }

    /// Replace generator seeds with `seed`, `seed + 1`, `seed + 2`.
    /// File-based sources are untouched.
    pub fn override_seed(&mut self, seed: u64) {
        if let GraphSource::Generate { seed: s, .. } = &mut self.graph {
            *s = seed;
        }
        if let MaskSource::Sample { seed: s, .. } = &mut self.mask {
            *s = seed + 1;
        }
        if let StateSource::Uniform { seed: s, .. } = &mut self.x0 {
            *s = seed + 2;
        }
    }
}

/// Attack job: which log to read, which public graph it belongs to, and
/// which attack to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackJobConfig {
    pub log_csv: PathBuf,
    pub graph: PathBuf,
    pub attack: AttackConfig,
    #[serde(default)]
    pub targets: Option<Vec<usize>>,
}

impl AttackJobConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let config: AttackJobConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("malformed config {}: {e}", path.display())))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        for referenced in [&config.log_csv, &config.graph] {
            let resolved = resolve(&base, referenced);
            if !resolved.is_file() {
                return Err(CliError::config(format!(
                    "referenced file does not exist: {}",
                    resolved.display()
                )));
            }
        }
        Ok((config, base))
    }
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
