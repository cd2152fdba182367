//! Test problems with binary-continuous interaction.
//!
//! * `F1`: `||x ⊙ c - b*||^2`. Binary variables mask continuous coordinates.
//! * `F2`: `f_c(c) + ||x - φ*(c)||^2` with `f_c(c) = Σ (1 - c_i)`. The best
//!   continuous vector depends on `c`.
//! * `F2Tanh`: as `F2` with `φ*(c) = tanh(α V* c + b*)`.
//! * `F3`: `||x ⊙ c - φ*(c)||^2`, both interactions at once.
//!
//! For `F2` and `F3`, `φ*(c) = α V* c + b*` with `||V*||_F = ||b*||_2 = 1`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::catcma::Objective;
use crate::error::{Error, Result};

/// Largest binary dimension accepted by the brute-force optimum.
pub const MAX_ENUMERATION_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "f1")]
    F1,
    #[serde(rename = "f2")]
    F2,
    #[serde(rename = "f2tanh")]
    F2Tanh,
    #[serde(rename = "f3")]
    F3,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [ProblemKind::F1, ProblemKind::F2, ProblemKind::F2Tanh, ProblemKind::F3];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::F1 => "f1",
            ProblemKind::F2 => "f2",
            ProblemKind::F2Tanh => "f2tanh",
            ProblemKind::F3 => "f3",
        }
    }

    /// Whether `x` is masked by `c`, which requires `n == m`.
    pub fn is_masked(self) -> bool {
        matches!(self, ProblemKind::F1 | ProblemKind::F3)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem kind {s:?} (expected f1, f2, f2tanh or f3)")))
    }
}

/// `Σ (1 - c_i)`.
pub fn binary_penalty(c: &[bool]) -> f64 {
    c.iter().filter(|&&b| !b).count() as f64
}

/// An immutable problem instance with its random data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub v_star: DMatrix<f64>,
    pub b_star: DVector<f64>,
    pub seed: u64,
}

/// Global minimiser found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub c: Vec<bool>,
    pub x: DVector<f64>,
    pub value: f64,
}

impl ProblemInstance {
    /// Draws `V*` (row-major) then `b*` from standard normals and rescales both
    /// to unit norm. Deterministic in `seed`.
    pub fn generate(kind: ProblemKind, n: usize, m: usize, alpha: f64, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("problem dimensions must be >= 1".into()));
        }
        if kind.is_masked() && n != m {
            return Err(Error::InvalidArgument(format!("{kind} requires n == m, got n = {n}, m = {m}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut v_star = DMatrix::from_fn(n, m, |_, _| 0.0);
        for i in 0..n {
            for j in 0..m {
                v_star[(i, j)] = draw();
            }
        }
        let norm = v_star.norm();
        v_star /= norm;
        // Every b*_i must be nonzero for the F1 optimum to be unique; redraw
        // in the measure-zero case.
        let b_star = loop {
            let b = DVector::from_fn(n, |_, _| draw());
            let b = &b / b.norm();
            if b.iter().all(|v| v.abs() > 1e-12) {
                break b;
            }
        };
        Ok(Self {
            kind,
            n,
            m,
            alpha,
            v_star,
            b_star,
            seed,
        })
    }

    fn check_dims(&self, c: &[bool], x: Option<&[f64]>) -> Result<()> {
        if c.len() != self.m {
            return Err(Error::DimensionMismatch {
                what: "binary vector",
                expected: self.m,
                actual: c.len(),
            });
        }
        if let Some(x) = x {
            if x.len() != self.n {
                return Err(Error::DimensionMismatch {
                    what: "continuous vector",
                    expected: self.n,
                    actual: x.len(),
                });
            }
        }
        Ok(())
    }

    /// Optimal continuous vector for `c` (`α V* c + b*`, or its tanh).
    pub fn phi_star(&self, c: &[bool]) -> Result<DVector<f64>> {
        if self.kind == ProblemKind::F1 {
            return Err(Error::WrongProblemKind("phi_star is undefined for f1".into()));
        }
        self.check_dims(c, None)?;
        Ok(self.phi_unchecked(c))
    }

    fn phi_unchecked(&self, c: &[bool]) -> DVector<f64> {
        let mut phi = self.b_star.clone();
        if self.kind != ProblemKind::F1 {
            for (j, _) in c.iter().enumerate().filter(|(_, &b)| b) {
                phi.axpy(self.alpha, &self.v_star.column(j), 1.0);
            }
            if self.kind == ProblemKind::F2Tanh {
                phi.apply(|v| *v = v.tanh());
            }
        }
        phi
    }

    pub fn evaluate(&self, c: &[bool], x: &[f64]) -> Result<f64> {
        self.check_dims(c, Some(x))?;
        Ok(self.evaluate_unchecked(c, x))
    }

    fn evaluate_unchecked(&self, c: &[bool], x: &[f64]) -> f64 {
        let target = self.phi_unchecked(c);
        match self.kind {
            ProblemKind::F1 | ProblemKind::F3 => x
                .iter()
                .zip(c)
                .zip(target.iter())
                .map(|((&xi, &ci), &ti)| {
                    let d = if ci { xi - ti } else { -ti };
                    d * d
                })
                .sum(),
            ProblemKind::F2 | ProblemKind::F2Tanh => {
                binary_penalty(c) + x.iter().zip(target.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
        }
    }

    /// Closed-form minimiser over `c` for fixed `x` on `F1`:
    /// `c_i = 1` iff `|x_i - b*_i| <= |b*_i|`.
    pub fn f1_best_binary(&self, x: &[f64]) -> Result<Vec<bool>> {
        if self.kind != ProblemKind::F1 {
            return Err(Error::WrongProblemKind("closed-form optimal c is defined for f1 only".into()));
        }
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "continuous vector",
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.b_star.iter())
            .map(|(&xi, &bi)| (xi - bi).abs() <= bi.abs())
            .collect())
    }

    /// Minimum over `x` for a fixed `c`, with a minimiser.
    fn inner_optimum(&self, c: &[bool]) -> (DVector<f64>, f64) {
        let x = self.phi_unchecked(c);
        let value = self.evaluate_unchecked(c, x.as_slice());
        (x, value)
    }

    /// Global optimum by enumerating all `2^m` binary vectors.
    pub fn optimum(&self) -> Result<Optimum> {
        if self.m > MAX_ENUMERATION_DIM {
            return Err(Error::InvalidArgument(format!(
                "enumeration needs m <= {MAX_ENUMERATION_DIM}, got {}",
                self.m
            )));
        }
        let mut best: Option<Optimum> = None;
        for bits in 0u64..(1u64 << self.m) {
            let c: Vec<bool> = (0..self.m).map(|j| bits >> j & 1 == 1).collect();
            let (x, value) = self.inner_optimum(&c);
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(Optimum { c, x, value });
            }
        }
        Ok(best.expect("at least one binary vector"))
    }

    /// Self-describing text record with every value at round-trip precision.
    pub fn to_record(&self) -> String {
        let join = |it: &mut dyn Iterator<Item = f64>| it.map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ");
        let mut rows = Vec::with_capacity(self.n * self.m);
        for i in 0..self.n {
            for j in 0..self.m {
                rows.push(self.v_star[(i, j)]);
            }
        }
        format!(
            "kind {}\nn {}\nm {}\nalpha {:?}\nseed {}\nv_star {}\nb_star {}\n",
            self.kind,
            self.n,
            self.m,
            self.alpha,
            self.seed,
            join(&mut rows.into_iter()),
            join(&mut self.b_star.iter().copied()),
        )
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(key, rest.trim());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("instance record lacks {key:?}")))
        };
        let bad = |key: &str| Error::InvalidArgument(format!("instance record has a malformed {key:?}"));
        let floats = |key: &str| -> Result<Vec<f64>> {
            get(key)?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(key)))
                .collect()
        };
        let kind: ProblemKind = get("kind")?.parse()?;
        let n: usize = get("n")?.parse().map_err(|_| bad("n"))?;
        let m: usize = get("m")?.parse().map_err(|_| bad("m"))?;
        let alpha: f64 = get("alpha")?.parse().map_err(|_| bad("alpha"))?;
        let seed: u64 = get("seed")?.parse().map_err(|_| bad("seed"))?;
        let v = floats("v_star")?;
        let b = floats("b_star")?;
        if v.len() != n * m || b.len() != n {
            return Err(Error::InvalidArgument("instance record has inconsistent lengths".into()));
        }
        Ok(Self {
            kind,
            n,
            m,
            alpha,
            v_star: DMatrix::from_row_slice(n, m, &v),
            b_star: DVector::from_vec(b),
            seed,
        })
    }
}

/// Panics on dimension mismatch; callers size their vectors from the instance.
impl Objective for &ProblemInstance {
    fn evaluate(&mut self, c: &[bool], x: &[f64]) -> f64 {
        assert_eq!(c.len(), self.m, "binary vector length");
        assert_eq!(x.len(), self.n, "continuous vector length");
        self.evaluate_unchecked(c, x)
    }
}
