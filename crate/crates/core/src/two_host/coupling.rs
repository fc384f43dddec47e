//! Pair coupling that contracts in the θ-norm.
//!
//! In a coordinate where the copies agree, each move type is made jointly at
//! the smaller of the two rates and by the faster copy alone at the rate
//! difference. In a coordinate where they differ, the copies move
//! independently. Each copy on its own is an exact copy of the chain.

use serde::{Deserialize, Serialize};

use super::{apply_move, move_rates, spectral_decompose, theta_norm, EpiParams, EpiState};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table, StateColumns};
use crate::markov::{observe_at, RateFunction};
use crate::rng::{try_ensemble, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoupledEpiState {
    pub u: EpiState,
    pub v: EpiState,
}

impl CoupledEpiState {
    pub fn new(u: EpiState, v: EpiState) -> Self {
        Self { u, v }
    }

    pub fn coalesced(&self) -> bool {
        self.u == self.v
    }

    /// `‖u − v‖_θ`.
    pub fn distance(&self, theta: f64) -> f64 {
        theta_norm([self.u.x1 as f64 - self.v.x1 as f64, self.u.x2 as f64 - self.v.x2 as f64], theta)
    }
}

impl StateColumns for CoupledEpiState {
    fn column_names() -> Vec<String> {
        vec!["u1".into(), "u2".into(), "v1".into(), "v2".into()]
    }
    fn columns(&self) -> Vec<String> {
        vec![self.u.x1.to_string(), self.u.x2.to_string(), self.v.x1.to_string(), self.v.x2.to_string()]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoupledRates {
    pub params: EpiParams,
}

fn coord(x: EpiState, k: usize) -> u64 {
    if k % 2 == 0 {
        x.x1
    } else {
        x.x2
    }
}

impl RateFunction for CoupledRates {
    type State = CoupledEpiState;

    fn transitions(&self, s: &CoupledEpiState, out: &mut Vec<(CoupledEpiState, f64)>) {
        let ru = move_rates(&self.params, s.u);
        let rv = move_rates(&self.params, s.v);
        let mut push = |next: CoupledEpiState, r: f64| {
            if r > 0.0 {
                out.push((next, r));
            }
        };
        for k in 0..4 {
            let u_moved = CoupledEpiState { u: apply_move_checked(s.u, k, ru[k]), v: s.v };
            let v_moved = CoupledEpiState { u: s.u, v: apply_move_checked(s.v, k, rv[k]) };
            if coord(s.u, k) == coord(s.v, k) {
                let joint = ru[k].min(rv[k]);
                push(CoupledEpiState { u: apply_move_checked(s.u, k, joint), v: apply_move_checked(s.v, k, joint) }, joint);
                if ru[k] > rv[k] {
                    push(u_moved, ru[k] - rv[k]);
                } else {
                    push(v_moved, rv[k] - ru[k]);
                }
            } else {
                push(u_moved, ru[k]);
                push(v_moved, rv[k]);
            }
        }
    }
}

/// Moves with zero rate are never taken, so they may leave the state alone.
fn apply_move_checked(x: EpiState, k: usize, rate: f64) -> EpiState {
    if rate > 0.0 {
        apply_move(x, k)
    } else {
        x
    }
}

/// Generator of the θ-distance at `s`: `Σ rate · (d(after) − d(before))`.
pub fn distance_generator(p: &EpiParams, theta: f64, s: CoupledEpiState) -> f64 {
    let mut out = Vec::new();
    CoupledRates { params: *p }.transitions(&s, &mut out);
    let d0 = s.distance(theta);
    out.iter().map(|(next, r)| r * (next.distance(theta) - d0)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRow {
    pub t: f64,
    pub mean_distance: f64,
    pub se: f64,
    /// `e^{−ρt} ‖u0 − v0‖_θ`.
    pub bound: f64,
    /// `mean ≤ bound · (1 + 3 se/mean)`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub theta: f64,
    pub rho: f64,
    pub trials: usize,
    pub rows: Vec<ContractionRow>,
}

impl ContractionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Columns `t,mean_distance,se,bound,pass`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_table(
            w,
            &["t", "mean_distance", "se", "bound", "pass"],
            self.rows
                .iter()
                .map(|r| vec![fmt_f64(r.t), fmt_f64(r.mean_distance), fmt_f64(r.se), fmt_f64(r.bound), r.pass.to_string()]),
        )
    }
}

pub fn contraction_check(
    p: &EpiParams,
    u0: EpiState,
    v0: EpiState,
    t_grid: &[f64],
    trials: usize,
    seed: SeedSpec,
) -> Result<ContractionReport> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!("trials = {trials} must be >= 1000")));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
    }
    let s = spectral_decompose(p)?;
    let rates = CoupledRates { params: *p };
    let start = CoupledEpiState::new(u0, v0);
    let d0 = start.distance(s.theta);
    let paths = try_ensemble(seed, trials, |_, rng| {
        Ok::<_, Error>(observe_at(&rates, start, t_grid, rng)?.into_iter().map(|x| x.distance(s.theta)).collect::<Vec<_>>())
    })?;
    let tn = trials as f64;
    let rows = t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mean = paths.iter().map(|d| d[i]).sum::<f64>() / tn;
            let var = paths.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (tn - 1.0);
            let se = (var / tn).sqrt();
            let bound = (-s.rho * t).exp() * d0;
            let slack = if mean > 0.0 { 1.0 + 3.0 * se / mean } else { 1.0 };
            ContractionRow { t, mean_distance: mean, se, bound, pass: mean <= bound * slack }
        })
        .collect();
    Ok(ContractionReport { theta: s.theta, rho: s.rho, trials, rows })
}
