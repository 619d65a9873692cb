//! Run configuration.

use std::path::{Path, PathBuf};

use kreinlab::grid::Grid1D;
use kreinlab::model::{MatrixPotential, PotentialSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::schema::config_schema;
use crate::validate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Gauge,
    Trace,
    Ssf,
    Pushnitski,
    Witten,
    Gmw,
    Commutator,
    Convergence,
    All,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Gauge,
        Experiment::Trace,
        Experiment::Ssf,
        Experiment::Pushnitski,
        Experiment::Witten,
        Experiment::Gmw,
        Experiment::Commutator,
        Experiment::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gauge => "gauge",
            Experiment::Trace => "trace",
            Experiment::Ssf => "ssf",
            Experiment::Pushnitski => "pushnitski",
            Experiment::Witten => "witten",
            Experiment::Gmw => "gmw",
            Experiment::Commutator => "commutator",
            Experiment::Convergence => "convergence",
            Experiment::All => "all",
        }
    }

    /// The concrete experiments this selector stands for.
    pub fn expand(self) -> Vec<Experiment> {
        match self {
            Experiment::All => Self::ALL.to_vec(),
            e => vec![e],
        }
    }

    /// Default box `(length, n)`.
    pub fn default_grid(self) -> (f64, usize) {
        match self {
            Experiment::Gmw => (60.0, 512),
            Experiment::Convergence => (40.0, 256),
            _ => (40.0, 1024),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    pub scale: f64,
}

/// Contents of a config file. Every field except `experiment` is optional
/// and falls back to a per-experiment default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch: Option<SwitchConfig>,
    /// Negative spectral parameters for the `g_z` traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_list: Option<Vec<f64>>,
    /// Boost angles in `(0, π/2)` for the soliton experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    /// Matrix sizes for the commutator study, doubling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Commutator grid spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Momentum cutoffs for the convergence study; the untruncated operator is appended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    /// Node count of the fine grid used for the soliton norm identities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} is not valid JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("config does not match the schema:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let value: Value = serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })?;
        Self::from_value(value)
    }

    /// Schema check, then deserialization, then semantic checks.
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let errors = validate(&config_schema(), &value);
        if !errors.is_empty() {
            return Err(ConfigError::Schema(errors));
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        for e in self.experiment.expand() {
            self.grid_for(e)?;
        }
        self.potential()?;
        if let Some(sizes) = &self.sizes {
            if sizes.windows(2).any(|w| w[1] != 2 * w[0]) {
                return Err(ConfigError::Invalid("`sizes` must double from one entry to the next".into()));
            }
        }
        if let Some(c) = &self.cutoffs {
            if c.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(ConfigError::Invalid("`cutoffs` must be strictly ascending".into()));
            }
        }
        Ok(())
    }

    pub fn grid_for(&self, e: Experiment) -> Result<Grid1D, ConfigError> {
        let (length, n) = match self.grid {
            Some(g) => (g.length, g.n),
            None => e.default_grid(),
        };
        Grid1D::new(length, n).map_err(|err| ConfigError::Invalid(err.to_string()))
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        self.potential.clone().unwrap_or_default()
    }

    pub fn potential(&self) -> Result<MatrixPotential, ConfigError> {
        self.potential_spec().build().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn switch_scale(&self) -> f64 {
        self.switch.map_or(1.0, |s| s.scale)
    }

    pub fn z_list(&self) -> Vec<f64> {
        self.z_list.clone().unwrap_or_else(|| vec![-0.5, -1.0, -2.0, -4.0])
    }

    pub fn theta_angles(&self) -> Vec<f64> {
        use std::f64::consts::PI;
        self.theta_angles.clone().unwrap_or_else(|| vec![PI / 6.0, PI / 4.0, PI / 3.0])
    }

    pub fn t_list(&self) -> Vec<f64> {
        self.t_list.clone().unwrap_or_else(|| vec![-2.0, 0.0, 2.0])
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sizes.clone().unwrap_or_else(|| vec![256, 512, 1024, 2048])
    }

    pub fn spacing(&self) -> f64 {
        self.spacing.unwrap_or(40.0 / 1024.0)
    }

    pub fn cutoffs(&self) -> Vec<f64> {
        self.cutoffs.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0])
    }

    pub fn fine_n(&self) -> usize {
        self.fine_n.unwrap_or(8192)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_value(json!({"experiment": "trace"})).unwrap();
        assert_eq!(cfg.grid_for(Experiment::Trace).unwrap().len(), 1024);
        assert_eq!(cfg.grid_for(Experiment::Gmw).unwrap().length(), 60.0);
        assert_eq!(cfg.z_list().len(), 4);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn schema_and_semantic_errors() {
        let bad_n = ExperimentConfig::from_value(json!({"experiment": "trace", "grid": {"length": 40.0, "n": 1000}}));
        assert!(matches!(bad_n, Err(ConfigError::Schema(ref e)) if e[0].starts_with("/grid/n")));
        let unknown = ExperimentConfig::from_value(json!({"experiment": "trace", "colour": 1}));
        assert!(matches!(unknown, Err(ConfigError::Schema(_))));
        let sizes = ExperimentConfig::from_value(json!({"experiment": "commutator", "sizes": [256, 1024]}));
        assert!(matches!(sizes, Err(ConfigError::Invalid(_))));
        let diag = ExperimentConfig::from_value(json!({"experiment": "trace", "potential": {"kind": "matrix_diag", "m": 2, "diag": [1.0]}}));
        assert!(matches!(diag, Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn all_expands_to_every_experiment() {
        assert_eq!(Experiment::All.expand().len(), 8);
        assert!(!Experiment::All.expand().contains(&Experiment::All));
    }
}
