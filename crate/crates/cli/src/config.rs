//! Run configuration: a TOML file with `problem`, `hyperparams`, `optimizer`,
//! `chain` and `output` sections.
//!
//! Every value is validated before any computation starts. Errors point at
//! the offending line of the source file.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rml_core::model::BUILTIN_PROBLEMS;
use rml_core::sampler::{Algorithm, QuadSettings};
use rml_core::{HyperParams, JacobianMode, OptSettings, ProblemSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub hyperparams: HyperConfig,
    #[serde(default)]
    pub optimizer: OptSettings,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Either a built-in problem by name or an inline linear-Gaussian problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearProblem>,
}

/// `g(x) = operator · x`; matrices are given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearProblem {
    pub prior_mean: Vec<f64>,
    pub prior_cov: Vec<Vec<f64>>,
    pub operator: Vec<Vec<f64>>,
    pub obs: Vec<f64>,
    pub obs_cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperConfig {
    pub rho: f64,
    pub gamma: f64,
}

impl Default for HyperConfig {
    fn default() -> Self {
        Self { rho: 0.5, gamma: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub n_steps: usize,
    pub seed: u64,
    pub jacobian: JacobianMode,
    pub algorithm: Algorithm,
    /// Leading states left out of the histogram comparison.
    pub discard_prefix: usize,
    /// Quadrature for the one-dimensional marginal sampler.
    pub quadrature: QuadSettings,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            n_steps: 10_000,
            seed: 1,
            jacobian: JacobianMode::Full,
            algorithm: Algorithm::Augmented,
            discard_prefix: 0,
            quadrature: QuadSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Grid nodes per axis; `(grid_nodes − 1)` must be divisible by
    /// `histogram_bins`.
    pub grid_nodes: usize,
    pub histogram_bins: usize,
    /// Grid extent per axis; defaults to prior mean ± 6 prior standard deviations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<Vec<f64>>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            grid_nodes: 1025,
            histogram_bins: 64,
            grid_lo: None,
            grid_hi: None,
        }
    }
}

/// A configuration error with the key it concerns and, when the config came
/// from a TOML file, the line of that key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}", p.display())?;
            if let Some(l) = self.line {
                write!(f, ":{l}")?;
            }
            write!(f, ": ")?;
        } else if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "{k}: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: None,
        line: None,
        key: Some(key.to_owned()),
        message: message.into(),
    }
}

fn line_of(src: &str, byte: usize) -> usize {
    src[..byte.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Line of the value at a dotted key path, or of the deepest existing
/// table on that path.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    let doc = toml_edit::Document::parse(src.to_owned()).ok()?;
    let mut item = doc.as_item();
    let mut span = None;
    for part in key.split('.') {
        match item.get(part) {
            Some(next) => {
                item = next;
                span = next.span().or(span);
            }
            None => break,
        }
    }
    span.map(|s| line_of(src, s.start))
}

impl RunConfig {
    /// Parses and validates TOML text.
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml_edit::de::from_str(src).map_err(|e| ConfigError {
            path: None,
            line: e.span().map(|s| line_of(src, s.start)),
            key: None,
            message: e.message().trim().to_owned(),
        })?;
        cfg.validate().map_err(|mut e| {
            e.line = e.key.as_deref().and_then(|k| line_of_key(src, k));
            e
        })?;
        Ok(cfg)
    }

    /// Accepts a TOML config, a JSON config, or a run summary whose `config`
    /// field echoes the config of an earlier run.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let with_path = |mut e: ConfigError| {
            e.path = Some(path.to_owned());
            e
        };
        let src = std::fs::read_to_string(path).map_err(|e| with_path(invalid_io(e)))?;
        if let Ok(json) = serde_json::from_str::<serde_json::Value>(&src) {
            let value = json.get("config").cloned().unwrap_or(json);
            return Self::from_json(value).map_err(with_path);
        }
        Self::from_toml(&src).map_err(with_path)
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| ConfigError {
            path: None,
            line: None,
            key: None,
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let problem = self.problem.build()?;
        self.hyper()?;
        self.optimizer.validate().map_err(|e| core_error("optimizer", e))?;
        let c = &self.chain;
        if c.n_steps == 0 {
            return Err(invalid("chain.n_steps", "must be at least 1"));
        }
        if c.discard_prefix >= c.n_steps {
            return Err(invalid("chain.discard_prefix", format!("must be less than n_steps = {}", c.n_steps)));
        }
        if c.algorithm == Algorithm::Legacy1d {
            if problem.dim_x() != 1 || problem.dim_d() != 1 {
                return Err(invalid("chain.algorithm", "legacy-1d needs a problem with one model and one data variable"));
            }
            if !(c.quadrature.half_width_sigmas > 0.0) || c.quadrature.nodes < 3 {
                return Err(invalid("chain.quadrature", "needs half_width_sigmas > 0 and at least 3 nodes"));
            }
        }
        let o = &self.output;
        if o.histogram_bins == 0 {
            return Err(invalid("output.histogram_bins", "must be at least 1"));
        }
        if o.grid_nodes < 2 || (o.grid_nodes - 1) % o.histogram_bins != 0 {
            return Err(invalid(
                "output.grid_nodes",
                format!("grid_nodes − 1 must be a positive multiple of histogram_bins = {}", o.histogram_bins),
            ));
        }
        for (key, v) in [("output.grid_lo", &o.grid_lo), ("output.grid_hi", &o.grid_hi)] {
            if let Some(v) = v {
                if v.len() != problem.dim_x() {
                    return Err(invalid(key, format!("needs {} entries, one per model axis", problem.dim_x())));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (&o.grid_lo, &o.grid_hi) {
            if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                return Err(invalid("output.grid_hi", "every upper bound must exceed its lower bound"));
            }
        }
        Ok(())
    }

    pub fn hyper(&self) -> Result<HyperParams, ConfigError> {
        HyperParams::new(self.hyperparams.gamma, self.hyperparams.rho).map_err(|e| core_error("hyperparams", e))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        self.problem.build()
    }
}

fn invalid_io(e: std::io::Error) -> ConfigError {
    ConfigError {
        path: None,
        line: None,
        key: None,
        message: e.to_string(),
    }
}

fn core_error(section: &str, e: rml_core::Error) -> ConfigError {
    match e {
        rml_core::Error::InvalidParameter { name, reason } => invalid(&format!("{section}.{name}"), reason),
        other => invalid(section, other.to_string()),
    }
}

fn matrix(key: &str, rows: &[Vec<f64>], shape: (usize, usize)) -> Result<DMatrix<f64>, ConfigError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(invalid(key, format!("expected a {} x {} matrix", shape.0, shape.1)));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec, ConfigError> {
        match (&self.name, &self.linear) {
            (Some(name), None) => ProblemSpec::by_name(name).ok_or_else(|| {
                invalid("problem.name", format!("unknown problem {name:?}; built-in problems are {}", BUILTIN_PROBLEMS.join(", ")))
            }),
            (None, Some(l)) => {
                let (n, m) = (l.prior_mean.len(), l.obs.len());
                if n == 0 || m == 0 {
                    return Err(invalid("problem.linear", "prior_mean and obs must be non-empty"));
                }
                let cx = matrix("problem.linear.prior_cov", &l.prior_cov, (n, n))?;
                let g = matrix("problem.linear.operator", &l.operator, (m, n))?;
                let cd = matrix("problem.linear.obs_cov", &l.obs_cov, (m, m))?;
                ProblemSpec::linear("linear", DVector::from_vec(l.prior_mean.clone()), cx, g, DVector::from_vec(l.obs.clone()), cd)
                    .map_err(|e| invalid("problem.linear", e.to_string()))
            }
            _ => Err(invalid("problem", "give exactly one of `name` or `linear`")),
        }
    }
}
