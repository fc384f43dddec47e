//! Hitting-time desk experiment: a continuous-time ±1 walk absorbed at 0.

use serde::Serialize;

use super::{hitting_time_bound, HittingBoundParams};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::markov::{binomial_se, CtmcSim, RateFunction};
use crate::rng::{try_ensemble, SeedSpec};

/// Steps of +1 and −1, each at `rate`; 0 is absorbing.
#[derive(Debug, Clone, Copy)]
pub struct WalkRates {
    pub rate: f64,
}

impl RateFunction for WalkRates {
    type State = i64;

    fn transitions(&self, x: &i64, out: &mut Vec<(i64, f64)>) {
        if *x > 0 {
            out.push((x + 1, self.rate));
            out.push((x - 1, self.rate));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkHittingConfig {
    /// Rate per direction.
    pub rate: f64,
    pub phi: f64,
    pub t0_grid: Vec<f64>,
    pub trials: usize,
    pub k_h: f64,
}

impl WalkHittingConfig {
    /// Start height `round(φ√r)`.
    pub fn start(&self) -> i64 {
        (self.phi * self.rate.sqrt()).round() as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkHittingRow {
    pub t0: f64,
    /// Empirical `P(T* ≥ t0)`.
    pub miss_prob: f64,
    pub se: f64,
    pub leading_term: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkHittingReport {
    pub start: i64,
    pub trials: usize,
    pub rows: Vec<WalkHittingRow>,
}

impl WalkHittingReport {
    /// Each miss probability is at most the previous one plus 3 SE.
    pub fn monotone_within_noise(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].miss_prob <= w[0].miss_prob + 3.0 * w[1].se.max(w[0].se))
    }

    /// Columns `t0,miss_prob,se,leading_term,bound`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_table(
            w,
            &["t0", "miss_prob", "se", "leading_term", "bound"],
            self.rows.iter().map(|r| {
                vec![fmt_f64(r.t0), fmt_f64(r.miss_prob), fmt_f64(r.se), fmt_f64(r.leading_term), fmt_f64(r.bound)]
            }),
        )
    }
}

pub fn walk_hitting(cfg: &WalkHittingConfig, seed: SeedSpec) -> Result<WalkHittingReport> {
    if cfg.t0_grid.is_empty() || cfg.t0_grid.windows(2).any(|w| w[1] <= w[0]) || cfg.t0_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("t0 grid must be positive and strictly increasing".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::EmptySamples);
    }
    let x0 = cfg.start();
    if x0 < 1 {
        return Err(Error::InvalidParameter(format!("start height round(phi*sqrt(r)) = {x0} must be >= 1")));
    }
    let rates = WalkRates { rate: cfg.rate };
    let horizon = *cfg.t0_grid.last().unwrap();
    let hits = try_ensemble(seed, cfg.trials, |_, rng| {
        let mut sim = CtmcSim::new(&rates, x0, rng);
        Ok::<_, Error>(sim.advance_until(horizon, |x| *x <= 0)?.unwrap_or(f64::INFINITY))
    })?;
    let rows = cfg
        .t0_grid
        .iter()
        .map(|&t0| {
            let miss_prob = hits.iter().filter(|&&t| t >= t0).count() as f64 / cfg.trials as f64;
            let p = HittingBoundParams::new(cfg.phi, t0, 1.0, 1.0, cfg.rate)?.with_k_h(cfg.k_h);
            Ok(WalkHittingRow { t0, miss_prob, se: binomial_se(miss_prob, cfg.trials), leading_term: p.leading_term(), bound: hitting_time_bound(&p) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WalkHittingReport { start: x0, trials: cfg.trials, rows })
}
