//! Gaussian half of the joint sampling distribution (CMA-ES).
//!
//! The covariance is parameterised as `sigma^2 C`. Each iteration updates the
//! mean by weighted recombination, accumulates the evolution paths, adapts
//! `sigma` by cumulative step-size adaptation and `C` by the rank-one and
//! rank-mu updates, then raises `sigma` so that no eigenvalue of `sigma^2 C`
//! drops below [`LAMBDA_MIN`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Lower bound on the eigenvalues of `sigma^2 C`.
pub const LAMBDA_MIN: f64 = 1e-30;

/// Approximation of `E||N(0, I_n)||`.
pub fn expected_chi_norm(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}

/// Population size, recombination weights and learning rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    /// Indexed by rank - 1; nonnegative, nonincreasing, summing to one.
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_m: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
}

impl Hyperparameters {
    /// Standard CMA-ES defaults with `lambda = 4 + floor(3 ln n)`.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("continuous dimension must be >= 1".into()));
        }
        let lambda = 4 + (3.0 * (dim as f64).ln()).floor() as usize;
        Self::with_population_size(dim, lambda)
    }

    /// Standard CMA-ES defaults for an explicit population size.
    pub fn with_population_size(dim: usize, lambda: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("continuous dimension must be >= 1".into()));
        }
        if lambda < 2 {
            return Err(Error::InvalidArgument(format!(
                "population size must be >= 2, got {lambda}"
            )));
        }
        let mu = lambda / 2;
        let anchor = ((lambda as f64 + 1.0) / 2.0).ln();
        let mut weights: Vec<f64> = (1..=lambda)
            .map(|k| if k <= mu { anchor - (k as f64).ln() } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let n = dim as f64;
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        Ok(Self {
            dim,
            lambda,
            mu,
            weights,
            mu_eff,
            c_m: 1.0,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
        })
    }
}

/// Mean shift normaliser `c_m sqrt(sum_l w_l^2)`.
fn shift_scale(hyper: &Hyperparameters) -> f64 {
    hyper.c_m * hyper.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    /// Iterations completed so far.
    t: u64,
    /// Eigenvectors of `cov` as columns.
    basis: DMatrix<f64>,
    /// Square roots of the eigenvalues of `cov`.
    scales: DVector<f64>,
}

/// Outcome of one Gaussian update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStep {
    pub h_sigma: bool,
    pub sigma_floored: bool,
}

impl GaussianModel {
    /// Starts at `mean` with step-size `sigma` and `C = I`.
    pub fn new(mean: DVector<f64>, sigma: f64) -> Result<Self> {
        let n = mean.len();
        Self::with_covariance(mean, sigma, DMatrix::identity(n, n))
    }

    pub fn with_covariance(mean: DVector<f64>, sigma: f64, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::InvalidArgument("continuous dimension must be >= 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if cov.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                what: "covariance rows",
                expected: n,
                actual: cov.nrows(),
            });
        }
        let (basis, scales) = decompose(&cov)?;
        Ok(Self {
            mean,
            sigma,
            cov,
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            t: 0,
            basis,
            scales,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn p_sigma(&self) -> &DVector<f64> {
        &self.p_sigma
    }

    pub fn p_c(&self) -> &DVector<f64> {
        &self.p_c
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    /// Eigenvalues of `C`, from the cached decomposition.
    pub fn eigenvalues(&self) -> DVector<f64> {
        self.scales.map(|d| d * d)
    }

    pub fn set_sigma(&mut self, sigma: f64) -> Result<()> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        self.sigma = sigma;
        Ok(())
    }

    pub fn set_paths(&mut self, p_sigma: DVector<f64>, p_c: DVector<f64>) {
        assert_eq!(p_sigma.len(), self.dim());
        assert_eq!(p_c.len(), self.dim());
        self.p_sigma = p_sigma;
        self.p_c = p_c;
    }

    /// `x = mu + sigma C^(1/2) z` with `z ~ N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &self.basis * z.component_mul(&self.scales);
        &self.mean + y * self.sigma
    }

    pub fn sample_population<R: Rng + ?Sized>(&self, lambda: usize, rng: &mut R) -> Vec<DVector<f64>> {
        (0..lambda).map(|_| self.sample(rng)).collect()
    }

    /// `C^(-1/2) v` through the cached eigendecomposition.
    pub fn inv_sqrt_times(&self, v: &DVector<f64>) -> DVector<f64> {
        let coords = self.basis.tr_mul(v).component_div(&self.scales);
        &self.basis * coords
    }

    /// Weighted recombination `mu + c_m sum_k w_rank(k) (x_k - mu)`.
    pub fn update_mean(&self, xs: &[DVector<f64>], ranks: &[usize], hyper: &Hyperparameters) -> DVector<f64> {
        let mut shift = DVector::zeros(self.dim());
        for (x, &rank) in xs.iter().zip(ranks) {
            let w = hyper.weights[rank - 1];
            if w != 0.0 {
                shift.axpy(w, &(x - &self.mean), 1.0);
            }
        }
        &self.mean + shift * hyper.c_m
    }

    /// New evolution paths and the stall indicator `h_sigma`.
    pub fn update_evolution_paths(
        &self,
        new_mean: &DVector<f64>,
        hyper: &Hyperparameters,
    ) -> (DVector<f64>, DVector<f64>, bool) {
        let n = self.dim();
        let scale = shift_scale(hyper);
        let shift = new_mean - &self.mean;
        let cs = hyper.c_sigma;
        let p_sigma = &self.p_sigma * (1.0 - cs)
            + self.inv_sqrt_times(&shift) * ((cs * (2.0 - cs)).sqrt() / (self.sigma * scale));

        let chi = expected_chi_norm(n);
        let decay = 1.0 - (1.0 - cs).powf(2.0 * (self.t as f64 + 1.0));
        let threshold = decay.sqrt() * (1.4 + 2.0 / (n as f64 + 1.0)) * chi;
        let h_sigma = p_sigma.norm() < threshold;

        let cc = hyper.c_c;
        let mut p_c = &self.p_c * (1.0 - cc);
        if h_sigma {
            p_c += shift * ((cc * (2.0 - cc)).sqrt() / (self.sigma * scale));
        }
        (p_sigma, p_c, h_sigma)
    }

    /// Cumulative step-size adaptation.
    pub fn update_step_size(&self, p_sigma: &DVector<f64>, hyper: &Hyperparameters) -> f64 {
        let ratio = p_sigma.norm() / expected_chi_norm(self.dim());
        self.sigma * ((hyper.c_sigma / hyper.d_sigma) * (ratio - 1.0)).exp()
    }

    /// Rank-one plus rank-mu covariance update, symmetrised.
    pub fn update_covariance(
        &self,
        xs: &[DVector<f64>],
        ranks: &[usize],
        p_c: &DVector<f64>,
        h_sigma: bool,
        hyper: &Hyperparameters,
    ) -> DMatrix<f64> {
        let n = self.dim();
        let mut rank_mu = DMatrix::zeros(n, n);
        let mut weight_sum = 0.0;
        for (x, &rank) in xs.iter().zip(ranks) {
            let w = hyper.weights[rank - 1];
            if w == 0.0 {
                continue;
            }
            weight_sum += w;
            let y = (x - &self.mean) / self.sigma;
            rank_mu.ger(w, &y, &y, 1.0);
        }
        let cc = hyper.c_c;
        let stall = if h_sigma { 0.0 } else { cc * (2.0 - cc) };
        let keep = 1.0 - hyper.c_mu * weight_sum - hyper.c_1 * (1.0 - stall);
        let mut cov = &self.cov * keep;
        cov += rank_mu * hyper.c_mu;
        cov.ger(hyper.c_1, p_c, p_c, 1.0);
        symmetrize(&mut cov);
        cov
    }

    /// Installs a new covariance and refreshes the decomposition.
    pub fn set_covariance(&mut self, cov: DMatrix<f64>) -> Result<()> {
        let (basis, scales) = decompose(&cov)?;
        self.cov = cov;
        self.basis = basis;
        self.scales = scales;
        Ok(())
    }

    /// `sigma <- max(sigma, sqrt(LAMBDA_MIN / min eig(C)))`. Returns whether
    /// `sigma` was raised.
    pub fn enforce_sigma_floor(&mut self) -> bool {
        let min_eig = self.scales.min().powi(2);
        let floor = (LAMBDA_MIN / min_eig).sqrt();
        if self.sigma < floor {
            self.sigma = floor;
            true
        } else {
            false
        }
    }

    /// One full Gaussian update from a ranked population, in the fixed order:
    /// mean, evolution paths, step-size, covariance, step-size floor.
    pub fn step(&mut self, xs: &[DVector<f64>], ranks: &[usize], hyper: &Hyperparameters) -> Result<GaussianStep> {
        let new_mean = self.update_mean(xs, ranks, hyper);
        let (p_sigma, mut p_c, h_sigma) = self.update_evolution_paths(&new_mean, hyper);
        let mut new_sigma = self.update_step_size(&p_sigma, hyper);
        let mut new_cov = self.update_covariance(xs, ranks, &p_c, h_sigma, hyper);
        rebalance_scale(&mut new_cov, &mut new_sigma, &mut p_c);
        if !new_sigma.is_finite() || new_sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!("step-size diverged to {new_sigma}")));
        }
        self.set_covariance(new_cov)?;
        self.mean = new_mean;
        self.p_sigma = p_sigma;
        self.p_c = p_c;
        self.sigma = new_sigma;
        let sigma_floored = self.enforce_sigma_floor();
        self.t += 1;
        Ok(GaussianStep { h_sigma, sigma_floored })
    }
}

/// Largest diagonal entry of `C` tolerated before [`rebalance_scale`] kicks in,
/// and the reciprocal of the smallest.
const SCALE_BAND: f64 = 1e16;

/// Only `sigma^2 C` matters for sampling, and the update is equivariant under
/// `(C, sigma, p_c) -> (C / s, sigma sqrt(s), p_c / sqrt(s))`. While the floor
/// keeps raising `sigma`, `C` shrinks geometrically and would eventually
/// underflow, so a power-of-four factor is moved from `C` into `sigma` once
/// its scale leaves the band. Powers of two keep the rescaling exact.
fn rebalance_scale(cov: &mut DMatrix<f64>, sigma: &mut f64, p_c: &mut DVector<f64>) {
    let top = cov.diagonal().max();
    if !(top.is_finite() && top > 0.0) || (1.0 / SCALE_BAND..=SCALE_BAND).contains(&top) {
        return;
    }
    let k = (top.log2() / 2.0).round() as i32;
    let half = 2f64.powi(-k);
    *cov *= half * half;
    *p_c *= half;
    *sigma /= half;
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Eigenvectors and square-rooted eigenvalues of a symmetric positive-definite matrix.
fn decompose(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCovariance);
    }
    let mut sym = cov.clone();
    symmetrize(&mut sym);
    let eig = SymmetricEigen::new(sym);
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok((eig.eigenvectors, eig.eigenvalues.map(f64::sqrt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn default_population_sizes() {
        let h = Hyperparameters::new(5).unwrap();
        assert_eq!((h.lambda, h.mu), (8, 4));
        let h = Hyperparameters::new(30).unwrap();
        assert_eq!((h.lambda, h.mu), (14, 7));
        assert!(Hyperparameters::new(0).is_err());
        assert!(Hyperparameters::with_population_size(3, 1).is_err());
    }

    #[test]
    fn default_weights_lambda_eight() {
        let h = Hyperparameters::new(5).unwrap();
        let expected = [
            0.529_930_184_478_779_2,
            0.285_714_285_714_285_7,
            0.142_857_142_857_142_8,
            0.041_498_386_949_792_215,
            0.0,
            0.0,
            0.0,
            0.0,
        ];
        for (w, e) in h.weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-12);
        }
        assert!((h.mu_eff - 2.600_178_826_113_18).abs() < 1e-12);
        assert!((h.c_sigma - 0.365_088_376_093_485_43).abs() < 1e-12);
        assert!((h.d_sigma - 1.365_088_376_093_485_3).abs() < 1e-12);
        assert!((h.c_c - 0.450_199_557_992_807_9).abs() < 1e-12);
        assert!((h.c_1 - 0.047_292_304_159_400_896).abs() < 1e-12);
        assert!((h.c_mu - 0.038_169_160_703_857_84).abs() < 1e-12);
    }

    #[test]
    fn hyperparameter_ranges() {
        for n in 1..60 {
            let h = Hyperparameters::new(n).unwrap();
            assert!((h.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(h.weights.windows(2).all(|w| w[0] >= w[1]));
            for rate in [h.c_m, h.c_sigma, h.c_c, h.c_1, h.c_mu] {
                assert!((0.0..=1.0).contains(&rate));
            }
            assert!(h.d_sigma >= 1.0);
        }
    }

    #[test]
    fn chi_norm_approximation() {
        let exact_one = (2.0 / std::f64::consts::PI).sqrt();
        assert!((expected_chi_norm(1) - 0.797_619_047_619_047_7).abs() < 1e-12);
        assert!((expected_chi_norm(1) - exact_one).abs() < 5e-3);
        assert!((expected_chi_norm(5) - 2.128_523_755_724_799_6).abs() < 1e-12);
        assert!((1..100).all(|n| expected_chi_norm(n + 1) > expected_chi_norm(n)));
    }

    #[test]
    fn chi_norm_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 1_000_000;
        let mut total = 0.0;
        for _ in 0..draws {
            let sq: f64 = (0..5).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
            total += sq.sqrt();
        }
        assert!((total / draws as f64 - expected_chi_norm(5)).abs() < 1e-2);
    }

    #[test]
    fn tiny_sigma_samples_equal_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = GaussianModel::new(dv(&[1.0, -2.0, 3.0]), 1e-300).unwrap();
        for x in model.sample_population(10, &mut rng) {
            assert_eq!(x, *model.mean());
        }
    }

    #[test]
    fn sample_moments_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = GaussianModel::new(DVector::zeros(2), 1.0).unwrap();
        let xs = model.sample_population(100_000, &mut rng);
        for i in 0..2 {
            let mean = xs.iter().map(|x| x[i]).sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x[i] - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            assert!((var - 1.0).abs() < 0.02, "var {var}");
        }
    }

    #[test]
    fn sample_moments_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cov = DMatrix::from_diagonal(&dv(&[4.0, 1.0]));
        let model = GaussianModel::with_covariance(DVector::zeros(2), 1.0, cov).unwrap();
        let xs = model.sample_population(100_000, &mut rng);
        let k = xs.len() as f64;
        let v0 = xs.iter().map(|x| x[0] * x[0]).sum::<f64>() / k;
        let v1 = xs.iter().map(|x| x[1] * x[1]).sum::<f64>() / k;
        let c01 = xs.iter().map(|x| x[0] * x[1]).sum::<f64>() / k;
        assert!((v0 / 4.0 - 1.0).abs() < 0.03);
        assert!((v1 - 1.0).abs() < 0.03);
        assert!(c01.abs() < 0.03);
    }

    #[test]
    fn mean_update_examples() {
        let h = Hyperparameters::new(3).unwrap();
        let model = GaussianModel::new(dv(&[0.5, 0.5, 0.5]), 1.0).unwrap();
        let xs = vec![model.mean().clone(); h.lambda];
        let ranks: Vec<usize> = (1..=h.lambda).collect();
        assert_eq!(model.update_mean(&xs, &ranks, &h), *model.mean());

        let mut h = Hyperparameters::with_population_size(1, 2).unwrap();
        h.weights = vec![0.7, 0.3];
        let model = GaussianModel::new(dv(&[0.0]), 1.0).unwrap();
        let xs = vec![dv(&[-1.0]), dv(&[1.0])];
        let new = model.update_mean(&xs, &[2, 1], &h);
        assert!((new[0] - 0.4).abs() < 1e-15);

        h.weights = vec![1.0, 0.0];
        let new = model.update_mean(&xs, &[2, 1], &h);
        assert_eq!(new[0], 1.0);
    }

    #[test]
    fn paths_decay_without_shift() {
        let h = Hyperparameters::new(4).unwrap();
        let mut model = GaussianModel::new(DVector::zeros(4), 0.3).unwrap();
        model.set_paths(dv(&[1.0, 0.0, -1.0, 2.0]), dv(&[0.5, 0.5, 0.0, 0.0]));
        let (ps, pc, _) = model.update_evolution_paths(&model.mean().clone(), &h);
        assert!((ps - model.p_sigma() * (1.0 - h.c_sigma)).norm() < 1e-15);
        assert!((pc - model.p_c() * (1.0 - h.c_c)).norm() < 1e-15);
    }

    #[test]
    fn path_full_replacement() {
        let mut h = Hyperparameters::new(2).unwrap();
        h.c_sigma = 1.0;
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let model = GaussianModel::with_covariance(DVector::zeros(2), 1.0, cov.clone()).unwrap();
        let new_mean = dv(&[0.3, -0.1]);
        let (ps, _, _) = model.update_evolution_paths(&new_mean, &h);
        // ||C^(-1/2) v||^2 = v^T C^(-1) v, checked through an explicit inverse.
        let expected_sq = (new_mean.transpose() * cov.try_inverse().unwrap() * &new_mean)[0]
            / shift_scale(&h).powi(2);
        assert!((ps.norm_squared() - expected_sq).abs() < 1e-12);
    }

    #[test]
    fn long_path_stalls_rank_one_input() {
        let h = Hyperparameters::new(3).unwrap();
        let model = GaussianModel::new(DVector::zeros(3), 1.0).unwrap();
        // Mean shift large enough that ||p_sigma|| is ten times E||N||.
        let target = 10.0 * expected_chi_norm(3);
        let factor = shift_scale(&h) / (h.c_sigma * (2.0 - h.c_sigma)).sqrt();
        let new_mean = dv(&[target * factor, 0.0, 0.0]);
        let (ps, pc, h_sigma) = model.update_evolution_paths(&new_mean, &h);
        assert!((ps.norm() - target).abs() < 1e-9);
        assert!(!h_sigma);
        assert_eq!(pc, DVector::zeros(3));
    }

    #[test]
    fn step_size_examples() {
        let h = Hyperparameters::new(5).unwrap();
        let model = GaussianModel::new(DVector::zeros(5), 0.7).unwrap();
        let chi = expected_chi_norm(5);
        let neutral = dv(&[chi, 0.0, 0.0, 0.0, 0.0]);
        assert!((model.update_step_size(&neutral, &h) - 0.7).abs() < 1e-15);
        let zero = DVector::zeros(5);
        let shrink = model.update_step_size(&zero, &h);
        assert!((shrink - 0.7 * (-h.c_sigma / h.d_sigma).exp()).abs() < 1e-15);
        let long = neutral * 2.0;
        let grow = model.update_step_size(&long, &h);
        assert!((grow - 0.7 * (h.c_sigma / h.d_sigma).exp()).abs() < 1e-14);
    }

    #[test]
    fn covariance_examples() {
        let mut h = Hyperparameters::with_population_size(2, 2).unwrap();
        let cov = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.8]);
        let model = GaussianModel::with_covariance(dv(&[0.1, 0.2]), 0.5, cov.clone()).unwrap();
        let xs = vec![dv(&[1.0, 0.0]), dv(&[0.0, 1.0])];
        let pc = dv(&[0.3, -0.4]);

        h.c_1 = 0.0;
        h.c_mu = 0.0;
        assert_eq!(model.update_covariance(&xs, &[1, 2], &pc, true, &h), cov);

        h.c_mu = 1.0;
        h.weights = vec![1.0, 0.0];
        let y = (&xs[0] - model.mean()) / 0.5;
        let got = model.update_covariance(&xs, &[1, 2], &pc, true, &h);
        assert!((got - &y * y.transpose()).norm() < 1e-14);

        h.c_mu = 0.0;
        h.c_1 = 0.2;
        let got = model.update_covariance(&xs, &[1, 2], &pc, true, &h);
        let expected_trace = cov.trace() + 0.2 * (pc.norm_squared() - cov.trace());
        assert!((got.trace() - expected_trace).abs() < 1e-14);
    }

    #[test]
    fn sigma_floor_examples() {
        let mut model = GaussianModel::new(DVector::zeros(3), 0.1).unwrap();
        assert!(!model.enforce_sigma_floor());
        assert_eq!(model.sigma(), 0.1);

        model.set_sigma(1e-20).unwrap();
        assert!(model.enforce_sigma_floor());
        assert!((model.sigma() - 1e-15).abs() < 1e-28);

        let cov = DMatrix::from_diagonal(&dv(&[1.0, 1e-10]));
        let mut model = GaussianModel::with_covariance(DVector::zeros(2), 1e-12, cov).unwrap();
        assert!(model.enforce_sigma_floor());
        assert!((model.sigma() - 1e-10).abs() < 1e-22);
        assert!(model.sigma().powi(2) * model.eigenvalues().min() >= LAMBDA_MIN);
    }

    #[test]
    fn rebalancing_keeps_the_sampling_covariance() {
        let mut cov = DMatrix::from_diagonal(&dv(&[3e-20, 1e-25]));
        let (mut sigma, mut pc) = (7e8, dv(&[1e-10, 2e-10]));
        let before = &cov * (sigma * sigma);
        let (cov0, pc_over_sigma) = (cov.clone(), &pc * sigma);
        rebalance_scale(&mut cov, &mut sigma, &mut pc);
        assert_ne!(cov, cov0);
        assert!((cov.diagonal().max() - 1.0).abs() < 1.0);
        assert!((&cov * (sigma * sigma) - &before).amax() <= 1e-15 * before.amax());
        assert_eq!(&pc * sigma, pc_over_sigma);

        let mut unchanged = DMatrix::<f64>::identity(2, 2) * 1e10;
        let mut s = 1.0;
        rebalance_scale(&mut unchanged, &mut s, &mut pc);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = DMatrix::from_diagonal(&dv(&[1.0, -1.0]));
        let err = GaussianModel::with_covariance(DVector::zeros(2), 1.0, cov).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
        let cov = DMatrix::from_diagonal(&dv(&[1.0, f64::NAN]));
        let err = GaussianModel::with_covariance(DVector::zeros(2), 1.0, cov).unwrap_err();
        assert!(matches!(err, Error::NonFiniteCovariance));
    }
}
