use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::markov::binomial_se;
use crate::rng::{ensemble, try_ensemble, SeedSpec, SimRng};

pub const MIN_TAIL_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub m: f64,
    pub empirical: f64,
    pub bound: f64,
    pub se: f64,
    /// `empirical ≤ bound + 3·se`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub center: f64,
    pub n_samples: usize,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Columns `m,empirical,bound,se,pass`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_table(
            w,
            &["m", "empirical", "bound", "se", "pass"],
            self.rows
                .iter()
                .map(|r| vec![fmt_f64(r.m), fmt_f64(r.empirical), fmt_f64(r.bound), fmt_f64(r.se), r.pass.to_string()]),
        )
    }
}

/// Draws `n_samples` values from `sampler` (sample `i` on stream `i`) and
/// compares the two-sided tail `P(|value − center| ≥ m)` with `bound_fn(m)`.
pub fn empirical_tail_verify<F, B>(
    sampler: F,
    center: f64,
    m_grid: &[f64],
    bound_fn: B,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<TailReport>
where
    F: Fn(usize, &mut SimRng) -> Result<f64> + Sync,
    B: Fn(f64) -> Result<f64>,
{
    if n_samples < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidParameter(format!("n_samples = {n_samples} must be >= {MIN_TAIL_SAMPLES}")));
    }
    let values = try_ensemble(seed, n_samples, sampler)?;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let rows = m_grid
        .iter()
        .map(|&m| {
            let below = dev.partition_point(|&d| d < m);
            let empirical = (n_samples - below) as f64 / n_samples as f64;
            let se = binomial_se(empirical, n_samples);
            let bound = bound_fn(m)?;
            Ok(TailRow { m, empirical, bound, se, pass: empirical <= bound + 3.0 * se })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailReport { center, n_samples, rows })
}

/// Monte-Carlo stand-in for the excursion constant
/// `b_k = max_{i≤k} sup_y E_y[f(X(i)); X left the good set by step i]`.
///
/// The supremum is replaced by a maximum over `starts`, so the result is an
/// estimate from below and only a heuristic.
pub fn heuristic_excursion_b<S, Step, F, G>(
    starts: &[S],
    steps: usize,
    trials: usize,
    step: Step,
    f: F,
    good: G,
    seed: SeedSpec,
) -> Result<f64>
where
    S: Clone + Sync,
    Step: Fn(&S, &mut SimRng) -> S + Sync,
    F: Fn(&S) -> f64 + Sync,
    G: Fn(&S) -> bool + Sync,
{
    if starts.is_empty() || trials == 0 {
        return Err(Error::EmptySamples);
    }
    let mut best = 0.0f64;
    for (si, start) in starts.iter().enumerate() {
        let per_trial = ensemble(seed.substream((si * trials) as u64), trials, |_, rng| {
            let mut x = start.clone();
            let mut escaped = !good(&x);
            let mut contrib = Vec::with_capacity(steps + 1);
            contrib.push(if escaped { f(&x) } else { 0.0 });
            for _ in 0..steps {
                x = step(&x, rng);
                escaped |= !good(&x);
                contrib.push(if escaped { f(&x) } else { 0.0 });
            }
            contrib
        });
        for i in 0..=steps {
            let mean = per_trial.iter().map(|c| c[i]).sum::<f64>() / trials as f64;
            best = best.max(mean.abs());
        }
    }
    Ok(best)
}
