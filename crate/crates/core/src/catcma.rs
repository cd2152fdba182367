//! The joint optimizer: ask/tell orchestration of the Bernoulli and Gaussian
//! models.

use nalgebra::DVector;
use rand::Rng;

use crate::bernoulli::{self, BernoulliModel};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianModel, Hyperparameters};

/// A mixed binary-continuous objective to be minimised.
pub trait Objective {
    fn evaluate(&mut self, c: &[bool], x: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: FnMut(&[bool], &[f64]) -> f64,
{
    fn evaluate(&mut self, c: &[bool], x: &[f64]) -> f64 {
        self(c, x)
    }
}

/// One sampled pair and, once evaluated, its value and 1-based rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub c: Vec<bool>,
    /// Continuous search vector: `x` itself, or the parameters `w` of a
    /// hyper-representation.
    pub v: DVector<f64>,
    pub value: f64,
    pub rank: usize,
}

impl Candidate {
    pub fn new(c: Vec<bool>, v: DVector<f64>) -> Self {
        Self {
            c,
            v,
            value: f64::NAN,
            rank: 0,
        }
    }
}

/// Ascending 1-based ranks; ties keep the original order.
pub fn rank(values: &[f64]) -> Result<Vec<usize>> {
    if let Some(index) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFiniteValue {
            index,
            value: values[index],
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0; values.len()];
    for (r, idx) in order.into_iter().enumerate() {
        ranks[idx] = r + 1;
    }
    Ok(ranks)
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
}

impl Termination {
    pub fn is_success(self) -> bool {
        self == Termination::TargetReached
    }
}

/// CatCMA state: both models, the shared hyperparameters and the incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct CatCma {
    bernoulli: BernoulliModel,
    gaussian: GaussianModel,
    hyper: Hyperparameters,
    evals_used: u64,
    best: Option<Candidate>,
}

impl CatCma {
    pub fn new(bernoulli: BernoulliModel, gaussian: GaussianModel, hyper: Hyperparameters) -> Result<Self> {
        if hyper.dim != gaussian.dim() {
            return Err(Error::DimensionMismatch {
                what: "hyperparameter dimension",
                expected: gaussian.dim(),
                actual: hyper.dim,
            });
        }
        Ok(Self {
            bernoulli,
            gaussian,
            hyper,
            evals_used: 0,
            best: None,
        })
    }

    /// `q = 0.5`, `C = I` and default hyperparameters for the continuous dimension.
    pub fn with_defaults(m: usize, mean: DVector<f64>, sigma: f64) -> Result<Self> {
        let hyper = Hyperparameters::new(mean.len())?;
        Self::new(BernoulliModel::new(m)?, GaussianModel::new(mean, sigma)?, hyper)
    }

    pub fn bernoulli(&self) -> &BernoulliModel {
        &self.bernoulli
    }

    pub fn gaussian(&self) -> &GaussianModel {
        &self.gaussian
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn population_size(&self) -> usize {
        self.hyper.lambda
    }

    pub fn binary_dim(&self) -> usize {
        self.bernoulli.dim()
    }

    pub fn continuous_dim(&self) -> usize {
        self.gaussian.dim()
    }

    pub fn evals_used(&self) -> u64 {
        self.evals_used
    }

    pub fn iteration(&self) -> u64 {
        self.gaussian.iteration()
    }

    /// Best evaluated candidate so far.
    pub fn best(&self) -> Option<&Candidate> {
        self.best.as_ref()
    }

    pub fn best_value(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.value)
    }

    /// Samples `lambda` independent pairs, the continuous part first.
    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Candidate> {
        (0..self.hyper.lambda)
            .map(|_| {
                let v = self.gaussian.sample(rng);
                let c = self.bernoulli.sample(rng);
                Candidate::new(c, v)
            })
            .collect()
    }

    /// Samples one binary vector and `lambda` continuous vectors that all share it.
    pub fn ask_shared_binary<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Candidate> {
        let c = self.bernoulli.sample(rng);
        (0..self.hyper.lambda)
            .map(|_| Candidate::new(c.clone(), self.gaussian.sample(rng)))
            .collect()
    }

    fn validate(&self, candidates: &[Candidate]) -> Result<()> {
        if candidates.len() != self.hyper.lambda {
            return Err(Error::PopulationSize {
                expected: self.hyper.lambda,
                actual: candidates.len(),
            });
        }
        for (index, cand) in candidates.iter().enumerate() {
            if cand.c.len() != self.binary_dim() {
                return Err(Error::DimensionMismatch {
                    what: "binary vector",
                    expected: self.binary_dim(),
                    actual: cand.c.len(),
                });
            }
            if cand.v.len() != self.continuous_dim() {
                return Err(Error::DimensionMismatch {
                    what: "continuous vector",
                    expected: self.continuous_dim(),
                    actual: cand.v.len(),
                });
            }
            if !cand.value.is_finite() {
                return Err(Error::NonFiniteValue {
                    index,
                    value: cand.value,
                });
            }
        }
        Ok(())
    }

    /// Ranks the population in place and returns the continuous vectors and ranks.
    fn assign_ranks(&self, candidates: &mut [Candidate]) -> Result<(Vec<DVector<f64>>, Vec<usize>)> {
        self.validate(candidates)?;
        let values: Vec<f64> = candidates.iter().map(|c| c.value).collect();
        let ranks = rank(&values)?;
        for (cand, &r) in candidates.iter_mut().zip(&ranks) {
            cand.rank = r;
        }
        let xs = candidates.iter().map(|c| c.v.clone()).collect();
        Ok((xs, ranks))
    }

    fn finish_iteration(&mut self, candidates: &[Candidate]) {
        self.evals_used += candidates.len() as u64;
        if let Some(top) = candidates.iter().min_by(|a, b| a.rank.cmp(&b.rank)) {
            if top.value < self.best_value() {
                self.best = Some(top.clone());
            }
        }
    }

    /// Full update from an evaluated population: Gaussian block, then the
    /// Bernoulli block. Candidates get their ranks assigned.
    pub fn tell(&mut self, candidates: &mut [Candidate]) -> Result<()> {
        let (xs, ranks) = self.assign_ranks(candidates)?;
        let q_before = self.bernoulli.probabilities().to_vec();
        self.gaussian.step(&xs, &ranks, &self.hyper)?;
        let samples: Vec<&[bool]> = candidates.iter().map(|c| c.c.as_slice()).collect();
        let grad = bernoulli::natural_gradient(&q_before, &samples, &ranks, &self.hyper.weights)?;
        self.bernoulli.step(&grad);
        self.finish_iteration(candidates);
        Ok(())
    }

    /// Gaussian block only; the Bernoulli model and its ASNG state stay frozen.
    pub fn tell_continuous_only(&mut self, candidates: &mut [Candidate]) -> Result<()> {
        let (xs, ranks) = self.assign_ranks(candidates)?;
        self.gaussian.step(&xs, &ranks, &self.hyper)?;
        self.finish_iteration(candidates);
        Ok(())
    }

    /// Success when the incumbent is strictly below `target`, otherwise
    /// budget exhaustion once `evals_used >= budget`.
    pub fn should_terminate(&self, budget: u64, target: f64) -> Option<Termination> {
        should_terminate(self.best_value(), self.evals_used, budget, target)
    }

    /// Runs ask/evaluate/tell until a termination condition holds.
    pub fn optimize<F, R>(&mut self, objective: &mut F, rng: &mut R, budget: u64, target: f64) -> Result<Termination>
    where
        F: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        loop {
            if let Some(stop) = self.should_terminate(budget, target) {
                return Ok(stop);
            }
            let mut population = self.ask(rng);
            for cand in &mut population {
                cand.value = objective.evaluate(&cand.c, cand.v.as_slice());
            }
            self.tell(&mut population)?;
        }
    }
}

pub fn should_terminate(best_value: f64, evals_used: u64, budget: u64, target: f64) -> Option<Termination> {
    if best_value < target {
        Some(Termination::TargetReached)
    } else if evals_used >= budget {
        Some(Termination::BudgetExhausted)
    } else {
        None
    }
}
