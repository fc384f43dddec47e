//! Urn-chain subcommands.

use anyhow::{bail, Result};
use clap::Args;
use mixcut::bernoulli_laplace::{
    bl_coalescence_experiment, bl_tv_profile, bl_window_fit, default_delta_grid, ehrenfest_tv_bound_check, BLParams, EhrenfestParams,
};
use mixcut::io::{fmt_f64, write_tv_profile_csv};
use mixcut::SeedSpec;
use serde::{Deserialize, Serialize};

use super::{require_seed, Subcommand};
use crate::output::{json_bytes, records_csv, table_csv, Format};

/// Exact distance to equilibrium of the urn chain after r = 0..rmax steps.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BlTv {
    /// Balls of each colour
    #[arg(long)]
    pub n: Option<usize>,
    /// Red balls in the left urn at time 0 [default: n]
    #[arg(long)]
    pub start: Option<usize>,
    /// Last step of the profile [default: ceil(n ln n / 4 + 4n)]
    #[arg(long)]
    pub rmax: Option<usize>,
}

impl Subcommand for BlTv {
    fn prepare(&mut self) -> Result<()> {
        let Some(n) = self.n else { bail!("--n is required") };
        BLParams::new(n)?;
        let start = *self.start.get_or_insert(n);
        if start > n {
            bail!("--start {start} exceeds n = {n}");
        }
        let nf = n as f64;
        self.rmax.get_or_insert((nf * nf.ln() / 4.0 + 4.0 * nf).ceil() as usize);
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let prof = bl_tv_profile(BLParams::new(self.n.unwrap())?, self.start.unwrap(), self.rmax.unwrap())?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut buf = Vec::new();
                write_tv_profile_csv(&mut buf, &prof)?;
                Ok(buf)
            }
            Format::Json => json_bytes(&prof),
        }
    }
}

/// Monte-Carlo check of the monotone coupling's coalescence rate.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BlCoupling {
    /// Balls of each colour
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Trials for both checks unless set separately
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// One-step trials from split states [default: --trials]
    #[arg(long)]
    pub step_trials: Option<usize>,
    /// Full runs timed until the copies meet [default: --trials]
    #[arg(long)]
    pub time_trials: Option<usize>,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Subcommand for BlCoupling {
    fn prepare(&mut self) -> Result<()> {
        BLParams::new(self.n)?;
        require_seed(self.seed)?;
        self.step_trials.get_or_insert(self.trials);
        self.time_trials.get_or_insert(self.trials);
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let r = bl_coalescence_experiment(BLParams::new(self.n)?, self.step_trials.unwrap(), self.time_trials.unwrap(), SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Json) {
            Format::Csv => records_csv(&[r]),
            Format::Json => json_bytes(&r),
        }
    }
}

/// Exact distance of the ball scheme on {-k..k} against its decay bound.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BlSurrogate {
    /// Half-width of the state space
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    /// Starting position
    #[arg(long, default_value_t = 16, allow_negative_numbers = true)]
    pub y0: i64,
    /// Steps at which to compare, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 32, 64, 128, 256])]
    pub r_grid: Vec<usize>,
}

impl Subcommand for BlSurrogate {
    fn prepare(&mut self) -> Result<()> {
        EhrenfestParams::new(self.k)?.index(self.y0)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rep = ehrenfest_tv_bound_check(EhrenfestParams::new(self.k)?, self.y0, &self.r_grid)?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => records_csv(&rep.rows),
            Format::Json => json_bytes(&rep),
        }
    }
}

/// Distance at r_n(delta) = n ln n / 4 + delta n, with fitted window constants.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BlWindow {
    /// Urn sizes, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![64usize, 128, 256])]
    pub ns: Vec<usize>,
    /// Window offsets, comma separated [default: -3 to 3 in steps of 0.25]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_grid: Option<Vec<f64>>,
}

impl Subcommand for BlWindow {
    fn prepare(&mut self) -> Result<()> {
        for &n in &self.ns {
            BLParams::new(n)?;
        }
        self.delta_grid.get_or_insert_with(default_delta_grid);
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rep = bl_window_fit(&self.ns, self.delta_grid.as_deref().unwrap())?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => table_csv(
                &["n", "delta", "r", "tv", "c1", "c2"],
                rep.rows.iter().flat_map(|row| {
                    row.points.iter().map(move |p| {
                        vec![row.n.to_string(), fmt_f64(p.delta), p.r.to_string(), fmt_f64(p.tv), fmt_f64(row.c1), fmt_f64(row.c2)]
                    })
                }),
            ),
            Format::Json => json_bytes(&rep),
        }
    }
}
