//! State-space-agnostic chain primitives.

pub mod ctmc;
pub mod dist;
pub mod empirical;
pub mod kernel;

pub use ctmc::{observe_at, simulate_ctmc, simulate_ctmc_capped, CtmcSim, FnRates, JumpPath, RateFunction};
pub use dist::{tv_distance, ProbVector};
pub use empirical::{binomial_se, empirical_distribution, frequency, tv_lower_bound_detailed, tv_lower_bound_from_samples};
pub use kernel::{evolve_distribution, for_each_step, run_dtmc, simulate_dtmc, DenseKernel};
