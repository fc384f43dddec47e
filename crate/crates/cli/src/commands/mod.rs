pub mod bl;
pub mod conc;
pub mod epi;

use anyhow::{bail, Result};

use crate::output::Format;

pub trait Subcommand {
    /// Validates the resolved options and fills derived defaults.
    fn prepare(&mut self) -> Result<()>;
    /// Runs the computation and renders it.
    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>>;
}

pub fn require_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => bail!("--seed is required for stochastic subcommands"),
    }
}
