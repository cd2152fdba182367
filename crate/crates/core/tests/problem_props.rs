mod common;

use catcma::problems::binary_penalty;
use catcma::treatments::{analytic_grad_fii_affine, wrap_objective, AffineMap};
use catcma::{make_icatcma, FreezePolicy, Objective, ProblemInstance, ProblemKind};
use common::{all_binary, finite_difference, relative_error};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits(m: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), m)
}

fn matrix(n: usize, m: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0..2.0f64, n * m).prop_map(move |v| DMatrix::from_row_slice(n, m, &v))
}

fn vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0f64, n).prop_map(DVector::from_vec)
}

fn assert_close(got: &[f64], want: &[f64]) -> Result<(), TestCaseError> {
    let err = relative_error(got, want);
    prop_assert!(err <= 1e-4, "relative error {err}: numeric {got:?} vs analytic {want:?}");
    Ok(())
}

fn f2(seed: u64, alpha: f64) -> ProblemInstance {
    ProblemInstance::generate(ProblemKind::F2, 5, 5, alpha, seed).unwrap()
}

proptest! {
    // The closed-form gradients drop the cross term between the V and b
    // residuals, so each is checked where that term vanishes: dV with b = b*,
    // db with V c = alpha V* c.
    #[test]
    fn v_gradient_matches_finite_differences(
        seed in any::<u64>(), alpha in 0.0..16.0f64, c in bits(5), v in matrix(5, 5),
    ) {
        let instance = f2(seed, alpha);
        let b = instance.b_star.clone();
        let (dv, _) = analytic_grad_fii_affine(&instance, &c, &v, &b).unwrap();
        let (num_dv, _) = finite_difference(&instance, &c, &v, &b);
        assert_close(num_dv.as_slice(), dv.as_slice())?;
    }

    #[test]
    fn b_gradient_matches_finite_differences(
        seed in any::<u64>(), alpha in 0.0..16.0f64, c in bits(5), b in vector(5),
    ) {
        let instance = f2(seed, alpha);
        let v = &instance.v_star * alpha;
        let (_, db) = analytic_grad_fii_affine(&instance, &c, &v, &b).unwrap();
        let (_, num_db) = finite_difference(&instance, &c, &v, &b);
        assert_close(num_db.as_slice(), db.as_slice())?;
    }

    #[test]
    fn b_gradient_does_not_depend_on_c(seed in any::<u64>(), v in matrix(5, 5), b in vector(5)) {
        let instance = f2(seed, 4.0);
        let (_, zeros) = analytic_grad_fii_affine(&instance, &[false; 5], &v, &b).unwrap();
        let (_, ones) = analytic_grad_fii_affine(&instance, &[true; 5], &v, &b).unwrap();
        prop_assert_eq!(zeros, ones);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gradient_step_contracts_towards_the_optimal_map(
        seed in any::<u64>(), alpha in 0.0..16.0f64, c in bits(5), v in matrix(5, 5), b in vector(5),
    ) {
        let instance = f2(seed, alpha);
        let target = &instance.v_star * alpha;
        let (dv, _) = analytic_grad_fii_affine(&instance, &c, &v, &b).unwrap();
        let stepped = &v - dv * 0.01;
        let before = (&v - &target).norm();
        let after = (&stepped - &target).norm();
        prop_assert!(after <= before, "{after} > {before}");
        let cvec = DVector::from_iterator(5, c.iter().map(|&x| f64::from(u8::from(x))));
        if ((&v - &target) * cvec).norm() > 1e-9 {
            prop_assert!(after < before);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn perfect_representation_reduces_to_the_binary_part(seed in any::<u64>(), alpha in 0.0..16.0f64) {
        let instance = f2(seed, alpha);
        let w = AffineMap::new(&instance.v_star * alpha, instance.b_star.clone()).unwrap().pack();
        let mut wrapped = wrap_objective(&instance, 5, 5);
        for c in all_binary(5) {
            let got = wrapped.evaluate(&c, &w);
            prop_assert!((got - binary_penalty(&c)).abs() <= 1e-18, "{got} for {c:?}");
        }
    }

    #[test]
    fn optimum_oracle_finds_zero(seed in any::<u64>(), alpha in 0.0..16.0f64) {
        for kind in [ProblemKind::F1, ProblemKind::F2, ProblemKind::F3] {
            let instance = ProblemInstance::generate(kind, 5, 5, alpha, seed).unwrap();
            let opt = instance.optimum().unwrap();
            prop_assert_eq!(opt.value, 0.0);
            prop_assert_eq!(instance.evaluate(&opt.c, opt.x.as_slice()).unwrap(), 0.0);
        }
    }

    #[test]
    fn affine_pack_round_trip(n in 1usize..8, m in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DMatrix::from_fn(n, m, |_, _| rand::Rng::random::<f64>(&mut rng));
        let b = DVector::from_fn(n, |_, _| rand::Rng::random::<f64>(&mut rng));
        let map = AffineMap::new(v, b).unwrap();
        let w = map.pack();
        prop_assert_eq!(w.len(), n * (m + 1));
        prop_assert_eq!(AffineMap::unpack(&w, n, m).unwrap(), map);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn f1_closed_form_matches_brute_force(m in 1usize..=10, seed in any::<u64>()) {
        let instance = ProblemInstance::generate(ProblemKind::F1, m, m, 0.0, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let x: Vec<f64> = (0..m).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect();
            let closed = instance.f1_best_binary(&x).unwrap();
            let closed_value = instance.evaluate(&closed, &x).unwrap();
            let brute = all_binary(m)
                .map(|c| instance.evaluate(&c, &x).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(closed_value, brute);
        }
    }
}

#[test]
fn warm_start_keeps_the_bernoulli_model_frozen() {
    let instance = f2(3, 4.0);
    let mut opt = make_icatcma(5, 5, true, true, FreezePolicy::Fixed(40)).unwrap();
    let initial = opt.core().bernoulli().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut calls = 0u64;
    let mut f = |c: &[bool], x: &[f64]| {
        calls += 1;
        instance.evaluate(c, x).unwrap()
    };
    while opt.in_warm_start() {
        let mut pop = opt.ask(&mut rng);
        assert!(pop.iter().all(|cand| cand.c == pop[0].c));
        opt.evaluate_population(&mut f, &mut pop);
        opt.tell(&mut pop).unwrap();
        assert_eq!(opt.core().bernoulli(), &initial);
    }
    assert_eq!(opt.iteration(), 40);
    opt.step(&mut f, &mut rng).unwrap();
    assert_ne!(opt.core().bernoulli(), &initial);
    assert_eq!(opt.evals_used(), calls);
}
