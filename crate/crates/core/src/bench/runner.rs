use std::collections::HashSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::treatments::{Counted, InteractionOptimizer, Variant};

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub problem: ProblemKind,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub algorithm: Variant,
    pub t_freeze: u64,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub evals_used: u64,
    pub best_value: f64,
    pub success: bool,
    pub wall_ms: u64,
    /// `(evals_used, best-so-far)` after every iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<(u64, f64)>>,
    /// Set when the optimizer aborted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RunRecord {
    /// Equality ignoring the wall-clock field.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        RunRecord {
            wall_ms: 0,
            ..self.clone()
        } == RunRecord {
            wall_ms: 0,
            ..other.clone()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x243f_6a88_85a3_08d3, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

fn problem_code(kind: ProblemKind) -> u64 {
    match kind {
        ProblemKind::F1 => 1,
        ProblemKind::F2 => 2,
        ProblemKind::F2Tanh => 3,
        ProblemKind::F3 => 4,
    }
}

fn variant_code(variant: Variant) -> u64 {
    match variant {
        Variant::CatCma => 1,
        Variant::WsCatCma => 2,
        Variant::HrCatCma => 3,
        Variant::ICatCma => 4,
    }
}

/// Seed of the shared instance for `(base seed, problem, alpha, trial)`.
pub fn instance_seed(base_seed: u64, problem: ProblemKind, alpha: f64, trial: usize) -> u64 {
    hash_words(&[base_seed, problem_code(problem), alpha.to_bits(), trial as u64])
}

/// Optimizer seed for one algorithm on one instance.
pub fn run_seed(instance_seed: u64, algorithm: Variant) -> u64 {
    hash_words(&[instance_seed, variant_code(algorithm)])
}

/// Runs one variant on one instance until success or budget exhaustion.
///
/// Optimizer aborts become failed records carrying a diagnostic.
pub fn run_single(algorithm: Variant, instance: &ProblemInstance, config: &RunConfig, run_seed: u64) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord {
        run_id: format!("{}_{}_{run_seed:016x}", instance.kind, algorithm),
        problem: instance.kind,
        n: instance.n,
        m: instance.m,
        alpha: instance.alpha,
        algorithm,
        t_freeze: 0,
        instance_seed: instance.seed,
        run_seed,
        evals_used: 0,
        best_value: f64::INFINITY,
        success: false,
        wall_ms: 0,
        trajectory: config.traj.then(Vec::new),
        diagnostic: None,
    };
    let mut optimizer = match InteractionOptimizer::new(instance.n, instance.m, algorithm, config.t_freeze) {
        Ok(opt) => opt,
        Err(e) => {
            record.diagnostic = Some(format!("{}: {e}", e.tag()));
            return record;
        }
    };
    record.t_freeze = optimizer.t_freeze();
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut objective = Counted::new(instance);
    while optimizer.should_terminate(config.budget, config.target).is_none() {
        if let Err(e) = optimizer.step(&mut objective, &mut rng) {
            record.diagnostic = Some(format!("{}: {e}", e.tag()));
            break;
        }
        if let Some(traj) = record.trajectory.as_mut() {
            traj.push((optimizer.evals_used(), optimizer.best_value()));
        }
    }
    // An aborted tell still consumed its evaluations.
    record.evals_used = objective.calls();
    debug_assert!(record.diagnostic.is_some() || record.evals_used == optimizer.evals_used());
    record.best_value = optimizer.best_value();
    record.success = record.best_value < config.target;
    record.wall_ms = start.elapsed().as_millis() as u64;
    record
}

/// One cell of the suite grid.
#[derive(Debug, Clone, Copy)]
struct Task {
    alpha_index: usize,
    trial: usize,
    algorithm: Variant,
}

/// Runs every `(alpha, trial, algorithm)` combination; all algorithms share
/// the instance of a given `(alpha, trial)`. Records come back in grid order
/// whatever the worker count.
pub fn run_suite(config: &RunConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut instances = Vec::with_capacity(config.alpha.len());
    let mut seen = HashSet::new();
    for &alpha in &config.alpha {
        let mut row = Vec::with_capacity(config.trials);
        for trial in 0..config.trials {
            let seed = instance_seed(config.seed, config.problem, alpha, trial);
            if !seen.insert(seed) {
                return Err(Error::Config(format!("instance seed collision at alpha {alpha}, trial {trial}")));
            }
            for &algo in &config.algorithms {
                if !seen.insert(run_seed(seed, algo)) {
                    return Err(Error::Config(format!("run seed collision at alpha {alpha}, trial {trial}")));
                }
            }
            row.push(ProblemInstance::generate(config.problem, config.n, config.m, alpha, seed)?);
        }
        instances.push(row);
    }

    let tasks: Vec<Task> = (0..config.alpha.len())
        .flat_map(|alpha_index| {
            (0..config.trials).flat_map(move |trial| {
                config.algorithms.iter().map(move |&algorithm| Task {
                    alpha_index,
                    trial,
                    algorithm,
                })
            })
        })
        .collect();

    let execute = |task: &Task| {
        let instance = &instances[task.alpha_index][task.trial];
        let mut record = run_single(task.algorithm, instance, config, run_seed(instance.seed, task.algorithm));
        record.run_id = format!(
            "{}_a{}_t{:03}_{}",
            config.problem, config.alpha[task.alpha_index], task.trial, task.algorithm
        );
        record
    };

    if config.workers <= 1 {
        return Ok(tasks.iter().map(execute).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(execute).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{parse_config, PartialConfig};

    fn config(algorithms: Vec<Variant>) -> RunConfig {
        parse_config(
            None,
            PartialConfig {
                problem: Some(ProblemKind::F2),
                n: Some(3),
                m: Some(3),
                alpha: Some(vec![1.0, 2.0]),
                algorithms: Some(algorithms),
                trials: Some(3),
                budget: Some(3_000),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let a = instance_seed(0, ProblemKind::F2, 4.0, 3);
        assert_eq!(a, instance_seed(0, ProblemKind::F2, 4.0, 3));
        assert_ne!(a, instance_seed(0, ProblemKind::F2, 4.0, 4));
        assert_ne!(a, instance_seed(0, ProblemKind::F3, 4.0, 3));
        assert_ne!(a, instance_seed(1, ProblemKind::F2, 4.0, 3));
        assert_ne!(run_seed(a, Variant::CatCma), run_seed(a, Variant::ICatCma));
    }

    #[test]
    fn huge_target_stops_after_first_iteration() {
        let mut cfg = config(vec![Variant::CatCma]);
        cfg.target = 1e9;
        let inst = ProblemInstance::generate(ProblemKind::F2, 3, 3, 1.0, 1).unwrap();
        let rec = run_single(Variant::CatCma, &inst, &cfg, 5);
        assert!(rec.success);
        assert_eq!(rec.evals_used, cfg.lambda_for(Variant::CatCma).unwrap() as u64);
    }

    #[test]
    fn budget_of_one_population() {
        let mut cfg = config(vec![Variant::HrCatCma]);
        let lambda = cfg.lambda_for(Variant::HrCatCma).unwrap() as u64;
        cfg.budget = lambda;
        cfg.traj = true;
        let inst = ProblemInstance::generate(ProblemKind::F2, 3, 3, 1.0, 1).unwrap();
        let rec = run_single(Variant::HrCatCma, &inst, &cfg, 5);
        assert_eq!(rec.evals_used, lambda);
        assert_eq!(rec.trajectory.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn run_single_is_deterministic() {
        let mut cfg = config(vec![Variant::ICatCma]);
        cfg.traj = true;
        let inst = ProblemInstance::generate(ProblemKind::F2, 3, 3, 2.0, 9).unwrap();
        let a = run_single(Variant::ICatCma, &inst, &cfg, 77);
        let b = run_single(Variant::ICatCma, &inst, &cfg, 77);
        assert!(a.same_outcome(&b));
        assert!(a.evals_used <= cfg.budget + 13);
    }

    #[test]
    fn suite_grid_and_shared_instances() {
        let cfg = config(Variant::ALL.to_vec());
        let records = run_suite(&cfg).unwrap();
        assert_eq!(records.len(), 2 * 3 * 4);
        for chunk in records.chunks(4) {
            assert!(chunk.iter().all(|r| r.instance_seed == chunk[0].instance_seed));
            assert!(chunk.iter().all(|r| r.alpha == chunk[0].alpha));
        }
        let ids: HashSet<_> = records.iter().map(|r| r.run_id.clone()).collect();
        assert_eq!(ids.len(), records.len());
    }

    #[test]
    fn suite_is_independent_of_worker_count() {
        let mut cfg = config(vec![Variant::CatCma, Variant::WsCatCma]);
        let serial = run_suite(&cfg).unwrap();
        cfg.workers = 4;
        let parallel = run_suite(&cfg).unwrap();
        assert_eq!(serial.len(), parallel.len());
        assert!(serial.iter().zip(&parallel).all(|(a, b)| a.same_outcome(b)));
    }
}
