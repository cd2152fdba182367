//! Bernoulli half of the joint sampling distribution.
//!
//! The probability vector is updated along the natural gradient of the
//! rank-weighted expected objective. Its learning rate follows the adaptive
//! stochastic natural gradient (ASNG) rule: a trust-region radius `delta`
//! normalised by the Fisher norm of the gradient, adapted from an
//! accumulation of past gradients. Probabilities are clipped into margins so
//! that no coordinate is ever absorbed at 0 or 1.

use rand::Rng;

use crate::error::{Error, Result};

/// Default margin parameter: the probability that all `m` coordinates sit at
/// their majority value under the margin bounds is `1 - xi`.
pub const DEFAULT_XI: f64 = 0.27;

/// Constant of the ASNG trust-region update.
///
/// Called `alpha` in the ASNG literature; renamed here so it is not confused
/// with the interaction strength of the test problems.
pub const ALPHA_ASNG: f64 = 1.5;

/// Lower and upper margin bounds for an `m`-dimensional probability vector.
///
/// `q_min_i = 1 - (1 - xi)^(1/m)` and `q_max = 1 - q_min`.
pub fn margin_bounds(m: usize, xi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return Err(Error::InvalidArgument("binary dimension m must be >= 1".into()));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidArgument(format!("xi must lie in (0, 1), got {xi}")));
    }
    let lo = 1.0 - (1.0 - xi).powf(1.0 / m as f64);
    Ok((vec![lo; m], vec![1.0 - lo; m]))
}

fn check_interior(q: &[f64]) -> Result<()> {
    match q.iter().position(|&qi| !(qi > 0.0 && qi < 1.0)) {
        Some(i) => Err(Error::InvalidArgument(format!(
            "probability q[{i}] = {} is not strictly inside (0, 1)",
            q[i]
        ))),
        None => Ok(()),
    }
}

/// Log probability mass of `c` under independent Bernoulli(q_i) coordinates.
pub fn log_pmf(q: &[f64], c: &[bool]) -> Result<f64> {
    if q.len() != c.len() {
        return Err(Error::DimensionMismatch {
            what: "binary vector",
            expected: q.len(),
            actual: c.len(),
        });
    }
    check_interior(q)?;
    Ok(q.iter()
        .zip(c)
        .map(|(&qi, &ci)| if ci { qi.ln() } else { (1.0 - qi).ln() })
        .sum())
}

/// Diagonal of the Fisher information matrix, `1 / (q_i (1 - q_i))`.
pub fn fisher_diag(q: &[f64]) -> Result<Vec<f64>> {
    check_interior(q)?;
    Ok(q.iter().map(|&qi| 1.0 / (qi * (1.0 - qi))).collect())
}

/// Rank-weighted natural gradient estimate `G = sum_k w_{rank(k)} (c_k - q)`.
///
/// `ranks` are 1-based and index into `weights`.
pub fn natural_gradient(
    q: &[f64],
    samples: &[&[bool]],
    ranks: &[usize],
    weights: &[f64],
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    if ranks.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            what: "ranks",
            expected: samples.len(),
            actual: ranks.len(),
        });
    }
    let mut grad = vec![0.0; q.len()];
    for (c, &rank) in samples.iter().zip(ranks) {
        if c.len() != q.len() {
            return Err(Error::DimensionMismatch {
                what: "binary vector",
                expected: q.len(),
                actual: c.len(),
            });
        }
        let w = *rank
            .checked_sub(1)
            .and_then(|r| weights.get(r))
            .ok_or_else(|| Error::InvalidArgument(format!("rank {rank} has no weight")))?;
        if w == 0.0 {
            continue;
        }
        for ((g, &ci), &qi) in grad.iter_mut().zip(c.iter()).zip(q) {
            *g += w * (f64::from(u8::from(ci)) - qi);
        }
    }
    Ok(grad)
}

/// Squared Fisher norm `G^T F(q) G` for the diagonal Fisher matrix.
fn fisher_norm_sq(q: &[f64], grad: &[f64]) -> f64 {
    q.iter()
        .zip(grad)
        .map(|(&qi, &gi)| gi * gi / (qi * (1.0 - qi)))
        .sum()
}

/// Bernoulli model with margins and ASNG learning-rate state.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliModel {
    q: Vec<f64>,
    q_min: Vec<f64>,
    q_max: Vec<f64>,
    delta: f64,
    s: Vec<f64>,
    gamma: f64,
}

impl BernoulliModel {
    /// Maximum-entropy start: `q = 0.5`, `delta = 1`, `s = 0`, `gamma = 0`.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_probabilities(vec![0.5; m])
    }

    /// Starts from the given probabilities, clipped into the default margins.
    pub fn with_probabilities(q: Vec<f64>) -> Result<Self> {
        let (q_min, q_max) = margin_bounds(q.len(), DEFAULT_XI)?;
        if let Some(bad) = q.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite probability {bad}")));
        }
        let q = q
            .iter()
            .zip(q_min.iter().zip(&q_max))
            .map(|(&qi, (&lo, &hi))| qi.clamp(lo, hi))
            .collect();
        let m = q_min.len();
        Ok(Self {
            q,
            q_min,
            q_max,
            delta: 1.0,
            s: vec![0.0; m],
            gamma: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    pub fn lower_margin(&self) -> &[f64] {
        &self.q_min
    }

    pub fn upper_margin(&self) -> &[f64] {
        &self.q_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn accumulation(&self) -> &[f64] {
        &self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Overwrites the ASNG state. Intended for tests and state restoration.
    pub fn set_asng_state(&mut self, delta: f64, s: Vec<f64>, gamma: f64) -> Result<()> {
        if !(delta > 0.0) || !(gamma >= 0.0) || s.len() != self.dim() {
            return Err(Error::InvalidArgument(
                "ASNG state needs delta > 0, gamma >= 0 and s of length m".into(),
            ));
        }
        self.delta = delta;
        self.s = s;
        self.gamma = gamma;
        Ok(())
    }

    /// Draws one binary vector, coordinate `i` being `true` with probability `q_i`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        self.q.iter().map(|&qi| rng.random::<f64>() < qi).collect()
    }

    /// ASNG learning rate `eta = delta / ||G||_F(q)`.
    ///
    /// Returns `None` when the Fisher norm of `G` vanishes; the caller skips
    /// the whole Bernoulli update for that iteration.
    pub fn learning_rate(&self, grad: &[f64]) -> Option<f64> {
        let norm = fisher_norm_sq(&self.q, grad).sqrt();
        (norm > 0.0 && norm.is_finite()).then(|| self.delta / norm)
    }

    /// Updates the accumulation `s`, its normaliser `gamma` and the radius `delta`.
    ///
    /// Uses the current (pre-update) `q` and `delta`.
    pub fn asng_update(&mut self, grad: &[f64]) {
        let m = self.dim() as f64;
        // beta > 1 would flip the sign of the decay; beta = 1 already makes
        // the exponent negative, so delta is pulled back below sqrt(m).
        let beta = (self.delta / m.sqrt()).min(1.0);
        let keep = 1.0 - beta;
        let inject = (beta * (2.0 - beta)).sqrt();
        let mut norm_sq = 0.0;
        for ((s, &g), &qi) in self.s.iter_mut().zip(grad).zip(&self.q) {
            let fisher = 1.0 / (qi * (1.0 - qi));
            norm_sq += g * g * fisher;
            *s = keep * *s + inject * fisher.sqrt() * g;
        }
        self.gamma = keep * keep * self.gamma + beta * (2.0 - beta) * norm_sq;
        let s_sq: f64 = self.s.iter().map(|v| v * v).sum();
        self.delta *= (beta * (s_sq / ALPHA_ASNG - self.gamma)).exp();
    }

    /// `q <- clip(q + eta G, q_min, q_max)`.
    pub fn update_and_clip(&mut self, eta: f64, grad: &[f64]) {
        for (i, qi) in self.q.iter_mut().enumerate() {
            let raw = *qi + eta * grad[i];
            *qi = raw.clamp(self.q_min[i], self.q_max[i]);
        }
    }

    /// Full Bernoulli step of one iteration. Returns `false` when skipped
    /// because the gradient has zero Fisher norm.
    pub fn step(&mut self, grad: &[f64]) -> bool {
        let Some(eta) = self.learning_rate(grad) else {
            return false;
        };
        // ASNG statistics are computed at the pre-update q.
        let q_before = self.q.clone();
        self.update_and_clip(eta, grad);
        let q_after = std::mem::replace(&mut self.q, q_before);
        self.asng_update(grad);
        self.q = q_after;
        true
    }
}
