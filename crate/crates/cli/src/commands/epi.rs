//! Two-host epidemic subcommands.

use anyhow::{bail, Result};
use clap::Args;
use mixcut::io::{fmt_f64, write_jump_path_csv};
use mixcut::markov::simulate_ctmc;
use mixcut::rng::purpose;
use mixcut::two_host::{
    coalescence_tv_upper_with_pool, epi_cutoff_experiment, equilibrium_sample, equilibrium_summary, mean_trajectory, spectral_decompose,
    travel_time, CutoffExperimentConfig, EpiParams, EpiRates, EpiState,
};
use mixcut::SeedSpec;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{require_seed, Subcommand};
use crate::output::{json_bytes, records_csv, table_csv, Format};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiArgs {
    /// Infection rate of host 1 by host 2
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Infection rate of host 2 by host 1
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Recovery rate of host 1
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// Recovery rate of host 2
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    /// Immigration rate into host 1, per unit of n
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Immigration rate into host 2, per unit of n
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Population scale
    #[arg(long, default_value_t = 100)]
    pub n: u64,
}

impl EpiArgs {
    fn params(&self) -> Result<EpiParams> {
        Ok(EpiParams::new(self.alpha, self.beta, self.gamma, self.delta, self.mu, self.nu, self.n)?)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StartArgs {
    /// Infected in host 1 at time 0
    #[arg(long)]
    pub x1: Option<u64>,
    /// Infected in host 2 at time 0
    #[arg(long)]
    pub x2: Option<u64>,
}

impl StartArgs {
    fn state(&self) -> Result<EpiState> {
        match (self.x1, self.x2) {
            (Some(a), Some(b)) => Ok(EpiState::new(a, b)),
            _ => bail!("--x1 and --x2 are required"),
        }
    }
}

fn default_s_grid() -> Vec<f64> {
    (0..=32).map(|i| i as f64 * 0.25).collect()
}

/// Deterministic mean trajectory n m_x(t) with spectral data and travel time.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiMean {
    #[command(flatten)]
    #[serde(flatten)]
    pub epi: EpiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub start: StartArgs,
    /// Last time of the trajectory
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    /// Number of evenly spaced times on [0, t_max]
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

impl Subcommand for EpiMean {
    fn prepare(&mut self) -> Result<()> {
        self.epi.params()?;
        self.start.state()?;
        if !(self.t_max >= 0.0) || self.points < 2 {
            bail!("--t-max must be non-negative and --points at least 2");
        }
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let p = self.epi.params()?;
        let x = self.start.state()?;
        let times: Vec<f64> = (0..self.points).map(|i| self.t_max * i as f64 / (self.points - 1) as f64).collect();
        let rows: Vec<[f64; 3]> = times.iter().map(|&t| mean_trajectory(&p, x, t).map(|m| [t, m[0], m[1]])).collect::<Result<_, _>>()?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => table_csv(&["t", "m1", "m2"], rows.iter().map(|r| r.iter().map(|v| fmt_f64(*v)).collect())),
            Format::Json => json_bytes(&json!({
                "spectral": spectral_decompose(&p)?,
                "travel_time": travel_time(&p, x)?,
                "rows": rows.iter().map(|r| json!({ "t": r[0], "m1": r[1], "m2": r[2] })).collect::<Vec<_>>(),
            })),
        }
    }
}

/// One exact jump-chain trajectory.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiSimulate {
    #[command(flatten)]
    #[serde(flatten)]
    pub epi: EpiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub start: StartArgs,
    /// Simulation horizon
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Subcommand for EpiSimulate {
    fn prepare(&mut self) -> Result<()> {
        self.epi.params()?;
        self.start.state()?;
        if !(self.t_end >= 0.0) {
            bail!("--t-end must be non-negative");
        }
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rates = EpiRates { params: self.epi.params()? };
        let path = simulate_ctmc(&rates, self.start.state()?, self.t_end, SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut buf = Vec::new();
                write_jump_path_csv(&mut buf, &path)?;
                Ok(buf)
            }
            Format::Json => json_bytes(&path),
        }
    }
}

/// Non-coalescence probability of the contractive coupling, started
/// against equilibrium samples, at t_n(x) + s.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiCoalesce {
    #[command(flatten)]
    #[serde(flatten)]
    pub epi: EpiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub start: StartArgs,
    /// Offsets s after the travel time, comma separated [default: 0 to 8 in steps of 0.25]
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    /// Independent runs
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Equilibrium samples paired with the start
    #[arg(long, default_value_t = 1000)]
    pub pool_size: usize,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Subcommand for EpiCoalesce {
    fn prepare(&mut self) -> Result<()> {
        self.epi.params()?;
        self.start.state()?;
        self.s_grid.get_or_insert_with(default_s_grid);
        if self.trials < 1000 || self.pool_size == 0 {
            bail!("--trials must be at least 1000 and --pool-size positive");
        }
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let p = self.epi.params()?;
        let x = self.start.state()?;
        let seed = SeedSpec::root(self.seed.unwrap());
        let s_grid = self.s_grid.clone().unwrap();
        let pool = equilibrium_sample(&p, self.pool_size, seed.for_purpose(purpose::EQUILIBRIUM))?;
        let prof = coalescence_tv_upper_with_pool(&p, x, &s_grid, &pool, self.trials, seed.for_purpose(purpose::COUPLING))?;
        let tn = travel_time(&p, x)?;
        let se = prof.se.clone().unwrap_or_default();
        match format.unwrap_or(Format::Csv) {
            Format::Csv => table_csv(
                &["s", "time", "not_coalesced", "se"],
                s_grid.iter().zip(&prof.times).zip(prof.values.iter().zip(&se)).map(|((s, t), (v, e))| vec![fmt_f64(*s), fmt_f64(*t), fmt_f64(*v), fmt_f64(*e)]),
            ),
            Format::Json => json_bytes(&json!({ "travel_time": tn, "s_grid": s_grid, "profile": prof })),
        }
    }
}

/// Lower and upper distance profiles from a grid of starts, with the cut-off check.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiCutoff {
    #[command(flatten)]
    #[serde(flatten)]
    pub epi: EpiArgs,
    /// Starts lie at distances n*zeta and n/zeta from n c
    #[arg(long, default_value_t = 0.5)]
    pub zeta: f64,
    /// Independent runs
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Equilibrium samples shared by all starts
    #[arg(long, default_value_t = 2000)]
    pub pool_size: usize,
    /// Offsets s, comma separated [default: 0 to 8 in steps of 0.25]
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    /// Tolerances of the cut-off check, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.3])]
    pub eps_grid: Vec<f64>,
    /// Window width w_n
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl EpiCutoff {
    fn config(&self) -> Result<CutoffExperimentConfig> {
        let mut cfg = CutoffExperimentConfig::new(self.epi.params()?, self.zeta, self.trials, self.pool_size);
        cfg.s_grid = self.s_grid.clone().unwrap_or_else(default_s_grid);
        cfg.epsilon_grid = self.eps_grid.clone();
        cfg.window = self.window;
        Ok(cfg)
    }
}

impl Subcommand for EpiCutoff {
    fn prepare(&mut self) -> Result<()> {
        self.epi.params()?;
        self.s_grid.get_or_insert_with(default_s_grid);
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            bail!("--zeta must lie in (0, 1)");
        }
        if !(self.window > 0.0) {
            bail!("--window must be positive");
        }
        if self.trials < 1000 || self.pool_size == 0 {
            bail!("--trials must be at least 1000 and --pool-size positive");
        }
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rep = epi_cutoff_experiment(&self.config()?, SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let s_grid = self.s_grid.clone().unwrap();
                let mut rows = Vec::new();
                for st in &rep.starts {
                    for &s in &s_grid {
                        rows.push(vec![
                            st.label.clone(),
                            st.x.x1.to_string(),
                            st.x.x2.to_string(),
                            fmt_f64(st.travel_time),
                            fmt_f64(s),
                            fmt_f64(st.lower.at_s(s * self.window)?),
                            fmt_f64(st.upper_at_s(s * self.window)?),
                        ]);
                    }
                }
                table_csv(&["start", "x1", "x2", "travel_time", "s", "lower", "upper"], rows)
            }
            Format::Json => json_bytes(&rep),
        }
    }
}

/// Approximate equilibrium samples by long runs from round(n c).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EpiEquilibrium {
    #[command(flatten)]
    #[serde(flatten)]
    pub epi: EpiArgs,
    /// Independent runs
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Subcommand for EpiEquilibrium {
    fn prepare(&mut self) -> Result<()> {
        self.epi.params()?;
        if self.trials < 2 {
            bail!("--trials must be at least 2");
        }
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let p = self.epi.params()?;
        let samples = equilibrium_sample(&p, self.trials, SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => records_csv(&samples),
            Format::Json => json_bytes(&equilibrium_summary(&p, &samples)?),
        }
    }
}
