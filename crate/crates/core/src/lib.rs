//! Concentration inequalities, contractive couplings and cut-off analysis
//! for Markov chains, with two worked models: the Bernoulli–Laplace urn
//! and a two-host epidemic with immigration.

pub mod bernoulli_laplace;
pub mod concentration;
pub mod cutoff;
pub mod error;
pub mod io;
pub mod markov;
pub mod rng;
pub mod two_host;

pub use error::{Error, Result};
pub use rng::SeedSpec;
