//! Mixed binary/continuous optimization with a joint Bernoulli and Gaussian
//! search distribution, two treatments for strong binary-continuous
//! interaction (warm-starting and a hyper-representation of the continuous
//! variables), synthetic benchmark problems and a benchmark harness.

pub mod bench;
pub mod bernoulli;
pub mod catcma;
pub mod error;
pub mod gaussian;
pub mod problems;
pub mod treatments;

pub use bernoulli::BernoulliModel;
pub use catcma::{Candidate, CatCma, Objective, Termination};
pub use error::{Error, Result};
pub use gaussian::{GaussianModel, Hyperparameters};
pub use problems::{ProblemInstance, ProblemKind};
pub use treatments::{make_icatcma, FreezePolicy, InteractionOptimizer, Variant};
