use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Hyperparameters;
use crate::problems::ProblemKind;
use crate::treatments::{affine_param_len, FreezePolicy, Variant};

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_TARGET: f64 = 1e-10;
pub const DEFAULT_TRIALS: usize = 100;

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub m: usize,
    pub alpha: Vec<f64>,
    pub algorithms: Vec<Variant>,
    pub trials: usize,
    pub budget: u64,
    pub target: f64,
    pub t_freeze: FreezePolicy,
    pub seed: u64,
    pub traj: bool,
    pub workers: usize,
    pub out: PathBuf,
}

/// Any subset of the configuration keys, as found in a JSON file or on the
/// command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub problem: Option<ProblemKind>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub algorithms: Option<Vec<Variant>>,
    pub trials: Option<usize>,
    pub budget: Option<u64>,
    pub target: Option<f64>,
    pub t_freeze: Option<FreezePolicy>,
    pub seed: Option<u64>,
    pub traj: Option<bool>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    /// Values present in `over` win.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            problem: over.problem.or(self.problem),
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            alpha: over.alpha.or(self.alpha),
            algorithms: over.algorithms.or(self.algorithms),
            trials: over.trials.or(self.trials),
            budget: over.budget.or(self.budget),
            target: over.target.or(self.target),
            t_freeze: over.t_freeze.or(self.t_freeze),
            seed: over.seed.or(self.seed),
            traj: over.traj.or(self.traj),
            workers: over.workers.or(self.workers),
            out: over.out.or(self.out),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let missing: Vec<&str> = [
            ("problem", self.problem.is_none()),
            ("n", self.n.is_none()),
            ("m", self.m.is_none()),
        ]
        .into_iter()
        .filter_map(|(k, absent)| absent.then_some(k))
        .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing required key(s): {}", missing.join(", "))));
        }
        let config = RunConfig {
            problem: self.problem.unwrap(),
            n: self.n.unwrap(),
            m: self.m.unwrap(),
            alpha: self.alpha.unwrap_or_else(|| vec![0.0]),
            algorithms: self.algorithms.unwrap_or_else(|| Variant::ALL.to_vec()),
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            target: self.target.unwrap_or(DEFAULT_TARGET),
            t_freeze: self.t_freeze.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
            traj: self.traj.unwrap_or(false),
            workers: self.workers.unwrap_or(1),
            out: self.out.unwrap_or_else(|| PathBuf::from("results")),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads an optional JSON file and lays the flag values over it.
pub fn parse_config(file: Option<&Path>, flags: PartialConfig) -> Result<RunConfig> {
    let base = match file {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    base.merge(flags).resolve()
}

impl RunConfig {
    /// Population size a variant uses on this problem.
    pub fn lambda_for(&self, variant: Variant) -> Result<usize> {
        let ell = if variant.hyper_representation() {
            affine_param_len(self.n, self.m)
        } else {
            self.n
        };
        Ok(Hyperparameters::new(ell)?.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 || self.m == 0 {
            return fail("n and m must be >= 1".into());
        }
        if self.problem.is_masked() && self.n != self.m {
            return fail(format!("{} requires n == m", self.problem));
        }
        if self.alpha.is_empty() {
            return fail("alpha list is empty".into());
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return fail(format!("alpha must be finite and >= 0, got {a}"));
        }
        if self.algorithms.is_empty() {
            return fail("algorithm list is empty".into());
        }
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        if !(self.target > 0.0) {
            return fail(format!("target must be > 0, got {}", self.target));
        }
        if self.workers == 0 {
            return fail("workers must be >= 1".into());
        }
        for &variant in &self.algorithms {
            let lambda = self.lambda_for(variant)?;
            if self.budget < lambda as u64 {
                return fail(format!(
                    "budget {} is smaller than the population size {lambda} of {variant}",
                    self.budget
                ));
            }
        }
        Ok(())
    }
}
