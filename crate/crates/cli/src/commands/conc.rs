//! Concentration-bound subcommands.

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use mixcut::concentration::{
    continuous_chain_tail_bound, contractive_bound, discrete_chain_tail_bound, hitting_time_bound, mg_tail_bound, run_preset, walk_hitting,
    ContinuousChainBoundParams, ContractiveMode, ContractiveParams, DiscreteChainBoundParams, HittingBoundParams, MartingaleBoundParams, Preset,
    WalkHittingConfig,
};
use mixcut::SeedSpec;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{require_seed, Subcommand};
use crate::output::{json_bytes, records_csv, table_csv, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Martingale with bounded jumps: --delta, --gamma
    Mg,
    /// Discrete-time chain: --beta, --a-k
    Discrete,
    /// Continuous-time chain: --beta-hat, --a-hat-t
    Continuous,
    /// Contractive coupling: --mode, --lipschitz, --max-jump, --rho, and --q, --b, --horizon by mode
    Contractive,
    /// Hitting time of a walk without upward drift: --phi, --t0, --jump-max, --jump-min, --rate
    Hitting,
}

/// Evaluates one tail bound.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConcBounds {
    /// Which bound to evaluate
    #[arg(long, value_enum)]
    pub bound: Option<BoundKind>,
    /// Deviation
    #[arg(long)]
    pub m: Option<f64>,
    /// Bound on the summed conditional variances
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bound on the jump size
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bound on one-step changes of the conditional mean
    #[arg(long)]
    pub beta: Option<f64>,
    /// Summed squared influence of the first k steps
    #[arg(long)]
    pub a_k: Option<f64>,
    /// Number of steps
    #[arg(long)]
    pub k: Option<u64>,
    /// Bound on the drift of the conditional mean
    #[arg(long)]
    pub beta_hat: Option<f64>,
    /// Integrated squared influence up to time t
    #[arg(long)]
    pub a_hat_t: Option<f64>,
    /// Time horizon of the continuous chain
    #[arg(long)]
    pub t: Option<f64>,
    /// discrete-a, discrete-b, continuous-a or continuous-b
    #[arg(long)]
    pub mode: Option<ContractiveMode>,
    /// Lipschitz constant of f
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Largest jump in the metric
    #[arg(long)]
    pub max_jump: Option<f64>,
    /// Contraction rate
    #[arg(long)]
    pub rho: Option<f64>,
    /// Largest exit rate
    #[arg(long)]
    pub q: Option<f64>,
    /// Excursion constant for the (b) modes
    #[arg(long)]
    pub b: Option<f64>,
    /// Steps or time of the (b) modes
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Start height in units of jump-min * sqrt(rate)
    #[arg(long)]
    pub phi: Option<f64>,
    /// Time horizon
    #[arg(long)]
    pub t0: Option<f64>,
    /// Largest jump
    #[arg(long)]
    pub jump_max: Option<f64>,
    /// Guaranteed jump size
    #[arg(long)]
    pub jump_min: Option<f64>,
    /// Half the guaranteed rate of jumps of size at least jump-min
    #[arg(long)]
    pub rate: Option<f64>,
    /// Constant of the second term of the hitting bound
    #[arg(long)]
    pub k_h: Option<f64>,
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64> {
    v.ok_or_else(|| anyhow::anyhow!("--{flag} is required for --bound {kind}"))
}

impl ConcBounds {
    fn kind(&self) -> Result<BoundKind> {
        self.bound.ok_or_else(|| anyhow::anyhow!("--bound is required (mg, discrete, continuous, contractive, hitting)"))
    }

    fn evaluate(&self) -> Result<serde_json::Value> {
        let kind = self.kind()?;
        let name = kind.to_possible_value().unwrap().get_name().to_string();
        if kind == BoundKind::Hitting {
            let mut p = HittingBoundParams::new(
                need(self.phi, "phi", &name)?,
                need(self.t0, "t0", &name)?,
                need(self.jump_max, "jump-max", &name)?,
                need(self.jump_min, "jump-min", &name)?,
                need(self.rate, "rate", &name)?,
            )?;
            if let Some(k) = self.k_h {
                p = p.with_k_h(k);
            }
            return Ok(json!({ "kind": name, "leading_term": p.leading_term(), "bound": hitting_time_bound(&p) }));
        }
        let m = need(self.m, "m", &name)?;
        let bound = match kind {
            BoundKind::Mg => mg_tail_bound(m, &MartingaleBoundParams::new(need(self.delta, "delta", &name)?, need(self.gamma, "gamma", &name)?)?)?,
            BoundKind::Discrete => discrete_chain_tail_bound(
                m,
                &DiscreteChainBoundParams::new(need(self.beta, "beta", &name)?, need(self.a_k, "a-k", &name)?, self.k.unwrap_or(1))?,
            )?,
            BoundKind::Continuous => continuous_chain_tail_bound(
                m,
                &ContinuousChainBoundParams::new(need(self.beta_hat, "beta-hat", &name)?, need(self.a_hat_t, "a-hat-t", &name)?, self.t.unwrap_or(1.0))?,
            )?,
            BoundKind::Contractive => {
                let Some(mode) = self.mode else { bail!("--mode is required for --bound contractive") };
                let mut p = ContractiveParams::new(need(self.lipschitz, "lipschitz", &name)?, need(self.max_jump, "max-jump", &name)?, need(self.rho, "rho", &name)?);
                if let Some(q) = self.q {
                    p = p.with_q(q);
                }
                if let (Some(b), Some(h)) = (self.b, self.horizon) {
                    p = p.with_excursion(b, h);
                } else if self.b.is_some() || self.horizon.is_some() {
                    bail!("--b and --horizon go together");
                }
                contractive_bound(m, &p, mode)?
            }
            BoundKind::Hitting => unreachable!(),
        };
        Ok(json!({ "kind": name, "m": m, "bound": bound }))
    }
}

impl Subcommand for ConcBounds {
    fn prepare(&mut self) -> Result<()> {
        self.evaluate().map(|_| ())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let v = self.evaluate()?;
        match format.unwrap_or(Format::Json) {
            Format::Json => json_bytes(&v),
            Format::Csv => {
                let obj = v.as_object().unwrap();
                let header: Vec<&str> = obj.keys().map(String::as_str).collect();
                table_csv(&header, [obj.values().map(crate::output::cell).collect()])
            }
        }
    }
}

/// Simulates a preset chain and compares its empirical tails with the matching bound.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConcVerify {
    /// bl, bl-contractive, mg, epi-contractive or walk-hitting
    #[arg(long, default_value = "bl")]
    pub preset: String,
    /// Simulated samples per tail estimate
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Subcommand for ConcVerify {
    fn prepare(&mut self) -> Result<()> {
        self.preset.parse::<Preset>()?;
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rep = run_preset(self.preset.parse()?, self.samples, SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => records_csv(&rep.report.rows),
            Format::Json => json_bytes(&rep),
        }
    }
}

/// Miss probability of the level-zero hitting time of a symmetric walk.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WalkHitting {
    /// Jump rate in each direction
    #[arg(long, default_value_t = 2500.0)]
    pub rate: f64,
    /// Start at round(phi * sqrt(rate))
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    /// Horizons, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 4.0, 9.0, 16.0, 25.0])]
    pub t0_grid: Vec<f64>,
    /// Independent runs
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Constant of the second term of the bound
    #[arg(long, default_value_t = 1.0)]
    pub k_h: f64,
    /// Root seed of the random streams
    #[arg(long)]
    pub seed: Option<u64>,
}

impl WalkHitting {
    fn config(&self) -> WalkHittingConfig {
        WalkHittingConfig { rate: self.rate, phi: self.phi, t0_grid: self.t0_grid.clone(), trials: self.trials, k_h: self.k_h }
    }
}

impl Subcommand for WalkHitting {
    fn prepare(&mut self) -> Result<()> {
        if !(self.rate > 0.0 && self.phi > 0.0) || self.t0_grid.iter().any(|t| !(*t > 0.0)) || self.trials == 0 {
            bail!("--rate, --phi, --t0-grid entries and --trials must be positive");
        }
        require_seed(self.seed)?;
        Ok(())
    }

    fn execute(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let rep = walk_hitting(&self.config(), SeedSpec::root(self.seed.unwrap()))?;
        match format.unwrap_or(Format::Csv) {
            Format::Csv => records_csv(&rep.rows),
            Format::Json => json_bytes(&rep),
        }
    }
}
