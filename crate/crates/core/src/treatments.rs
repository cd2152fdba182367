//! Interaction treatments layered on [`CatCma`].
//!
//! *Warm-starting* freezes the Bernoulli model for the first `t_freeze`
//! iterations. During that phase every population shares one binary vector
//! drawn from the initial probabilities, so the continuous vectors are ranked
//! without binary noise.
//!
//! *Hyper-representation* replaces the continuous vector `x` by the
//! parameters `w = (V, b)` of an affine map `φ_w(c) = V c + b`, and the
//! optimizer minimises `F(c, w) = f(c, φ_w(c))`.
//!
//! Both together make up ICatCMA.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catcma::{CatCma, Candidate, Objective, Termination};
use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemKind};

/// Affine map `φ(c) = V c + b` from `{0,1}^m` to `R^n`.
///
/// Packed layout: `V` row-major, then `b`; `n (m + 1)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub v: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Length of the packed parameter vector.
pub fn affine_param_len(n: usize, m: usize) -> usize {
    n * (m + 1)
}

impl AffineMap {
    pub fn new(v: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if v.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                what: "affine offset",
                expected: v.nrows(),
                actual: b.len(),
            });
        }
        Ok(Self { v, b })
    }

    pub fn output_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn pack(&self) -> Vec<f64> {
        let (n, m) = self.v.shape();
        let mut w = Vec::with_capacity(affine_param_len(n, m));
        for i in 0..n {
            w.extend(self.v.row(i).iter());
        }
        w.extend(self.b.iter());
        w
    }

    pub fn unpack(w: &[f64], n: usize, m: usize) -> Result<Self> {
        let expected = affine_param_len(n, m);
        if w.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "packed affine parameters",
                expected,
                actual: w.len(),
            });
        }
        Ok(Self {
            v: DMatrix::from_row_slice(n, m, &w[..n * m]),
            b: DVector::from_column_slice(&w[n * m..]),
        })
    }

    pub fn apply(&self, c: &[bool]) -> DVector<f64> {
        let mut out = self.b.clone();
        for (j, _) in c.iter().enumerate().filter(|(_, &bit)| bit) {
            out += self.v.column(j);
        }
        out
    }
}

/// `V c + b` read straight from the packed parameters.
pub fn apply_affine(w: &[f64], n: usize, m: usize, c: &[bool]) -> Result<DVector<f64>> {
    let expected = affine_param_len(n, m);
    if w.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "packed affine parameters",
            expected,
            actual: w.len(),
        });
    }
    if c.len() != m {
        return Err(Error::DimensionMismatch {
            what: "binary vector",
            expected: m,
            actual: c.len(),
        });
    }
    Ok(apply_packed(w, n, m, c))
}

fn apply_packed(w: &[f64], n: usize, m: usize, c: &[bool]) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        let row = &w[i * m..(i + 1) * m];
        w[n * m + i] + row.iter().zip(c).filter(|(_, &bit)| bit).map(|(v, _)| v).sum::<f64>()
    })
}

/// Objective over `(c, w)` defined as `f(c, φ_w(c))`; one call of this
/// objective is exactly one call of `f`.
#[derive(Debug, Clone)]
pub struct HyperRepresentation<F> {
    inner: F,
    n: usize,
    m: usize,
}

/// Wraps `f` so the optimizer searches over affine-map parameters.
pub fn wrap_objective<F: Objective>(f: F, n: usize, m: usize) -> HyperRepresentation<F> {
    HyperRepresentation { inner: f, n, m }
}

impl<F> HyperRepresentation<F> {
    pub fn param_len(&self) -> usize {
        affine_param_len(self.n, self.m)
    }

    pub fn into_inner(self) -> F {
        self.inner
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: Objective> Objective for HyperRepresentation<F> {
    fn evaluate(&mut self, c: &[bool], w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.param_len(), "packed affine parameters");
        assert_eq!(c.len(), self.m, "binary vector length");
        let x = apply_packed(w, self.n, self.m, c);
        self.inner.evaluate(c, x.as_slice())
    }
}

/// Counts objective calls.
#[derive(Debug, Clone)]
pub struct Counted<F> {
    inner: F,
    calls: u64,
}

impl<F> Counted<F> {
    pub fn new(inner: F) -> Self {
        Self { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

impl<F: Objective> Objective for Counted<F> {
    fn evaluate(&mut self, c: &[bool], x: &[f64]) -> f64 {
        self.calls += 1;
        self.inner.evaluate(c, x)
    }
}

/// Analytic gradient of the hyper-represented affine `F2` objective with
/// respect to `(V, b)`: `dV = 2 (V - α V*) c c^T`, `db = 2 (b - b*)`.
pub fn analytic_grad_fii_affine(
    instance: &ProblemInstance,
    c: &[bool],
    v: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if instance.kind != ProblemKind::F2 {
        return Err(Error::WrongProblemKind(format!(
            "analytic gradient needs f2 with an affine optimum, got {}",
            instance.kind
        )));
    }
    if v.shape() != (instance.n, instance.m) || b.len() != instance.n || c.len() != instance.m {
        return Err(Error::InvalidArgument("gradient arguments do not match the instance".into()));
    }
    let cvec = DVector::from_iterator(c.len(), c.iter().map(|&bit| f64::from(u8::from(bit))));
    let residual = v - &instance.v_star * instance.alpha;
    let dv = (&residual * &cvec) * cvec.transpose() * 2.0;
    let db = (b - &instance.b_star) * 2.0;
    Ok((dv, db))
}

/// How long the Bernoulli model stays frozen. Serialised as `adaptive:A` or `fixed:T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FreezePolicy {
    /// `floor(A * 100 * l / lambda)` iterations.
    Adaptive(f64),
    Fixed(u64),
}

impl Default for FreezePolicy {
    fn default() -> Self {
        FreezePolicy::Adaptive(DEFAULT_FREEZE_FACTOR)
    }
}

pub const DEFAULT_FREEZE_FACTOR: f64 = 5.0;

impl fmt::Display for FreezePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreezePolicy::Adaptive(a) => write!(f, "adaptive:{a}"),
            FreezePolicy::Fixed(t) => write!(f, "fixed:{t}"),
        }
    }
}

impl FromStr for FreezePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("freeze policy {s:?} is not adaptive:A or fixed:T"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "adaptive" => {
                let a: f64 = value.trim().parse().map_err(|_| bad())?;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(bad());
                }
                Ok(FreezePolicy::Adaptive(a))
            }
            "fixed" => Ok(FreezePolicy::Fixed(value.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for FreezePolicy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FreezePolicy> for String {
    fn from(policy: FreezePolicy) -> Self {
        policy.to_string()
    }
}

pub fn resolve_t_freeze(policy: FreezePolicy, ell: usize, lambda: usize) -> Result<u64> {
    if ell == 0 || lambda == 0 {
        return Err(Error::InvalidArgument("l and lambda must be >= 1".into()));
    }
    Ok(match policy {
        FreezePolicy::Adaptive(a) => (a * 100.0 * ell as f64 / lambda as f64).floor() as u64,
        FreezePolicy::Fixed(t) => t,
    })
}

/// The four algorithm variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "catcma")]
    CatCma,
    #[serde(rename = "ws")]
    WsCatCma,
    #[serde(rename = "hr")]
    HrCatCma,
    #[serde(rename = "icatcma")]
    ICatCma,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::CatCma, Variant::WsCatCma, Variant::HrCatCma, Variant::ICatCma];

    pub fn from_flags(warm_start: bool, hyper_representation: bool) -> Self {
        match (warm_start, hyper_representation) {
            (false, false) => Variant::CatCma,
            (true, false) => Variant::WsCatCma,
            (false, true) => Variant::HrCatCma,
            (true, true) => Variant::ICatCma,
        }
    }

    pub fn warm_start(self) -> bool {
        matches!(self, Variant::WsCatCma | Variant::ICatCma)
    }

    pub fn hyper_representation(self) -> bool {
        matches!(self, Variant::HrCatCma | Variant::ICatCma)
    }

    /// Short name used on the command line and in CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CatCma => "catcma",
            Variant::WsCatCma => "ws",
            Variant::HrCatCma => "hr",
            Variant::ICatCma => "icatcma",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::CatCma => "CatCMA",
            Variant::WsCatCma => "WS-CatCMA",
            Variant::HrCatCma => "HR-CatCMA",
            Variant::ICatCma => "ICatCMA",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == lower || v.display_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?} (expected catcma, ws, hr or icatcma)")))
    }
}

/// CatCMA with optional warm-starting and hyper-representation.
///
/// Candidates returned by [`ask`](Self::ask) carry the search vector; use
/// [`decode`](Self::decode) to obtain the `x` to evaluate, or let
/// [`optimize`](Self::optimize) do the wrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionOptimizer {
    core: CatCma,
    variant: Variant,
    n: usize,
    m: usize,
    t_freeze: u64,
}

/// Builds one of the four variants with `mu0 = 0` and `sigma0 = 1 / (l + m)`.
pub fn make_icatcma(n: usize, m: usize, use_ws: bool, use_hr: bool, policy: FreezePolicy) -> Result<InteractionOptimizer> {
    InteractionOptimizer::new(n, m, Variant::from_flags(use_ws, use_hr), policy)
}

impl InteractionOptimizer {
    pub fn new(n: usize, m: usize, variant: Variant, policy: FreezePolicy) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("dimensions n and m must be >= 1".into()));
        }
        let ell = if variant.hyper_representation() { affine_param_len(n, m) } else { n };
        let sigma0 = 1.0 / (ell + m) as f64;
        let core = CatCma::with_defaults(m, DVector::zeros(ell), sigma0)?;
        let t_freeze = if variant.warm_start() {
            resolve_t_freeze(policy, ell, core.population_size())?
        } else {
            0
        };
        Ok(Self {
            core,
            variant,
            n,
            m,
            t_freeze,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn core(&self) -> &CatCma {
        &self.core
    }

    /// Number of continuous search variables.
    pub fn search_dim(&self) -> usize {
        self.core.continuous_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.n
    }

    pub fn binary_dim(&self) -> usize {
        self.m
    }

    pub fn population_size(&self) -> usize {
        self.core.population_size()
    }

    pub fn t_freeze(&self) -> u64 {
        self.t_freeze
    }

    pub fn evals_used(&self) -> u64 {
        self.core.evals_used()
    }

    pub fn best_value(&self) -> f64 {
        self.core.best_value()
    }

    pub fn iteration(&self) -> u64 {
        self.core.iteration()
    }

    pub fn in_warm_start(&self) -> bool {
        self.core.iteration() < self.t_freeze
    }

    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Candidate> {
        if self.in_warm_start() {
            self.core.ask_shared_binary(rng)
        } else {
            self.core.ask(rng)
        }
    }

    pub fn tell(&mut self, candidates: &mut [Candidate]) -> Result<()> {
        if self.in_warm_start() {
            self.core.tell_continuous_only(candidates)
        } else {
            self.core.tell(candidates)
        }
    }

    /// The continuous vector `x` a candidate stands for.
    pub fn decode(&self, candidate: &Candidate) -> DVector<f64> {
        if self.variant.hyper_representation() {
            apply_packed(candidate.v.as_slice(), self.n, self.m, &candidate.c)
        } else {
            candidate.v.clone()
        }
    }

    /// Best `(c, x)` evaluated so far.
    pub fn best_solution(&self) -> Option<(Vec<bool>, DVector<f64>)> {
        self.core.best().map(|cand| (cand.c.clone(), self.decode(cand)))
    }

    pub fn should_terminate(&self, budget: u64, target: f64) -> Option<Termination> {
        self.core.should_terminate(budget, target)
    }

    /// Evaluates one population of `f(c, x)`, wrapping through `φ_w` as needed.
    pub fn evaluate_population<F: Objective + ?Sized>(&self, objective: &mut F, population: &mut [Candidate]) {
        for cand in population {
            cand.value = if self.variant.hyper_representation() {
                let x = apply_packed(cand.v.as_slice(), self.n, self.m, &cand.c);
                objective.evaluate(&cand.c, x.as_slice())
            } else {
                objective.evaluate(&cand.c, cand.v.as_slice())
            };
        }
    }

    /// One ask/evaluate/tell cycle.
    pub fn step<F, R>(&mut self, objective: &mut F, rng: &mut R) -> Result<()>
    where
        F: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        let mut population = self.ask(rng);
        self.evaluate_population(objective, &mut population);
        self.tell(&mut population)
    }

    /// Runs until the target is hit or the evaluation budget is spent.
    pub fn optimize<F, R>(&mut self, objective: &mut F, rng: &mut R, budget: u64, target: f64) -> Result<Termination>
    where
        F: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        loop {
            if let Some(stop) = self.should_terminate(budget, target) {
                return Ok(stop);
            }
            self.step(objective, rng)?;
        }
    }
}
