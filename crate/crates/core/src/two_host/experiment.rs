//! Monte-Carlo side of the cut-off experiment.
//!
//! The distance from equilibrium at `t_n(x) + s` is bounded above by the
//! probability that a copy started at `x` has not met a copy started from
//! an equilibrium sample. At `t_n(x) − s` it is bounded below by the largest
//! discrepancy between the law of `X(t)` and the equilibrium samples over
//! Euclidean balls centred at `n c`.

use serde::{Deserialize, Serialize};

use super::coupling::{CoupledEpiState, CoupledRates};
use super::{kappa, region_predicates, spectral_decompose, travel_time_with, EpiParams, EpiRates, EpiState, Spectral, Vec2};
use crate::cutoff::{check_cutoff, CutoffReport, CutoffStart, ProfileKind, TVProfile, TimeDomain};
use crate::error::{Error, Result};
use crate::markov::{binomial_se, observe_at, tv_lower_bound_detailed, CtmcSim};
use crate::rng::{purpose, try_ensemble, SeedSpec};

/// Endpoints of runs from `round(n c)` of length `(log n + 10)/ρ`.
pub fn equilibrium_sample(p: &EpiParams, trials: usize, seed: SeedSpec) -> Result<Vec<EpiState>> {
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let s = spectral_decompose(p)?;
    let n = p.nf();
    let start = EpiState::round([n * s.c[0], n * s.c[1]]);
    let burn_in = (n.ln() + 10.0) / s.rho;
    let rates = EpiRates { params: *p };
    try_ensemble(seed, trials, |_, rng| {
        let mut sim = CtmcSim::new(&rates, start, rng);
        sim.advance_to(burn_in, |_, _| {})?;
        Ok::<_, Error>(*sim.state())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSummary {
    pub samples: usize,
    pub mean: Vec2,
    pub se: Vec2,
    pub covariance: [[f64; 2]; 2],
    /// `n c`.
    pub target: Vec2,
}

impl EquilibriumSummary {
    /// Each mean coordinate within `k` standard errors of `n c`.
    pub fn mean_within(&self, k: f64) -> bool {
        (0..2).all(|i| (self.mean[i] - self.target[i]).abs() <= k * self.se[i])
    }
}

pub fn equilibrium_summary(p: &EpiParams, samples: &[EpiState]) -> Result<EquilibriumSummary> {
    if samples.len() < 2 {
        return Err(Error::EmptySamples);
    }
    let s = spectral_decompose(p)?;
    let m = samples.len() as f64;
    let xs: Vec<Vec2> = samples.iter().map(EpiState::as_vec2).collect();
    let mean = [xs.iter().map(|x| x[0]).sum::<f64>() / m, xs.iter().map(|x| x[1]).sum::<f64>() / m];
    let mut cov = [[0.0; 2]; 2];
    for x in &xs {
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]) / (m - 1.0);
            }
        }
    }
    Ok(EquilibriumSummary {
        samples: samples.len(),
        mean,
        se: [(cov[0][0] / m).sqrt(), (cov[1][1] / m).sqrt()],
        covariance: cov,
        target: [p.nf() * s.c[0], p.nf() * s.c[1]],
    })
}

/// Meeting times of coupled pairs (`∞` if they have not met by `horizon`).
pub fn coalescence_times(p: &EpiParams, pairs: &[CoupledEpiState], horizon: f64, seed: SeedSpec) -> Result<Vec<f64>> {
    let rates = CoupledRates { params: *p };
    try_ensemble(seed, pairs.len(), |i, rng| {
        let mut sim = CtmcSim::new(&rates, pairs[i], rng);
        Ok::<_, Error>(sim.advance_until(horizon, CoupledEpiState::coalesced)?.unwrap_or(f64::INFINITY))
    })
}

/// `P(τ > t)` with binomial standard errors, at each of `times`.
fn survival_profile(taus: &[f64], times: &[f64]) -> Result<TVProfile> {
    let m = taus.len();
    let values: Vec<f64> = times.iter().map(|&t| taus.iter().filter(|&&tau| tau > t).count() as f64 / m as f64).collect();
    let se = values.iter().map(|&v| binomial_se(v, m)).collect();
    TVProfile::new(times.to_vec(), values, ProfileKind::McUpper, Some(se), TimeDomain::Continuous)
}

/// Upper profile at `t_n(x) + s` from pairs `(x, pool[i mod |pool|])`.
pub fn coalescence_tv_upper_with_pool(
    p: &EpiParams,
    x: EpiState,
    s_grid: &[f64],
    pool: &[EpiState],
    trials: usize,
    seed: SeedSpec,
) -> Result<TVProfile> {
    check_trials(trials)?;
    check_s_grid(s_grid)?;
    if pool.is_empty() {
        return Err(Error::EmptySamples);
    }
    let tn = travel_time_with(&spectral_decompose(p)?, p.nf(), x.as_vec2())?;
    let times: Vec<f64> = s_grid.iter().map(|s| tn + s).collect();
    let pairs: Vec<CoupledEpiState> = (0..trials).map(|i| CoupledEpiState::new(x, pool[i % pool.len()])).collect();
    let taus = coalescence_times(p, &pairs, *times.last().unwrap(), seed)?;
    survival_profile(&taus, &times)
}

/// As [`coalescence_tv_upper_with_pool`], drawing `trials` equilibrium samples first.
pub fn coalescence_tv_upper(p: &EpiParams, x: EpiState, s_grid: &[f64], trials: usize, seed: SeedSpec) -> Result<TVProfile> {
    let pool = equilibrium_sample(p, trials, seed.for_purpose(purpose::EQUILIBRIUM))?;
    coalescence_tv_upper_with_pool(p, x, s_grid, &pool, trials, seed.for_purpose(purpose::COUPLING))
}

/// Survival profile of given pairs over absolute `times`.
pub fn coalescence_profile_from_pairs(p: &EpiParams, pairs: &[CoupledEpiState], times: &[f64], seed: SeedSpec) -> Result<TVProfile> {
    if pairs.is_empty() || times.is_empty() {
        return Err(Error::EmptySamples);
    }
    let taus = coalescence_times(p, pairs, *times.last().unwrap(), seed)?;
    survival_profile(&taus, times)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!("trials = {trials} must be >= 1000")));
    }
    Ok(())
}

fn check_s_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() || s_grid[0] < 0.0 || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("s grid must be non-negative and strictly increasing".into()));
    }
    Ok(())
}

/// 20 radii spaced geometrically on `[√n/2, n/2]`.
pub fn ball_radii(n: f64) -> Vec<f64> {
    let (a, b) = (0.5 * n.sqrt(), 0.5 * n);
    (0..20).map(|i| a * (b / a).powf(i as f64 / 19.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerProfile {
    pub travel_time: f64,
    /// Values at absolute times `max(t_n − s, 0)`, with `s` an offset in time units.
    pub profile: TVProfile,
    /// Offsets `s` with `t_n − s < 0`, read at time 0.
    pub clamped_s: Vec<f64>,
}

impl LowerProfile {
    /// Lower value at `t_n − s`, with `s` in time units.
    pub fn at_s(&self, s: f64) -> Result<f64> {
        self.profile.value_at((self.travel_time - s).max(0.0))
    }
}

pub fn tv_lower_profile_with_pool(
    p: &EpiParams,
    x: EpiState,
    s_grid: &[f64],
    pool: &[EpiState],
    trials: usize,
    seed: SeedSpec,
) -> Result<LowerProfile> {
    check_trials(trials)?;
    check_s_grid(s_grid)?;
    if pool.is_empty() {
        return Err(Error::EmptySamples);
    }
    let s = spectral_decompose(p)?;
    let n = p.nf();
    let tn = travel_time_with(&s, n, x.as_vec2())?;
    let clamped_s: Vec<f64> = s_grid.iter().copied().filter(|s| tn - s < 0.0).collect();
    let mut times: Vec<f64> = s_grid.iter().map(|s| (tn - s).max(0.0)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let rates = EpiRates { params: *p };
    let paths = try_ensemble(seed, trials, |_, rng| observe_at(&rates, x, &times, rng))?;
    let centre = [n * s.c[0], n * s.c[1]];
    let dist = |w: &EpiState| (w.x1 as f64 - centre[0]).hypot(w.x2 as f64 - centre[1]);
    let pool_d: Vec<f64> = pool.iter().map(dist).collect();
    let balls: Vec<_> = ball_radii(n).into_iter().map(|r| move |d: &f64| *d <= r).collect();

    let mut values = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let d: Vec<f64> = paths.iter().map(|path| dist(&path[i])).collect();
        let best = tv_lower_bound_detailed(&d, &pool_d, &balls)?;
        values.push(best.value);
        se.push(best.se);
    }
    Ok(LowerProfile {
        travel_time: tn,
        profile: TVProfile::new(times, values, ProfileKind::McLower, Some(se), TimeDomain::Continuous)?,
        clamped_s,
    })
}

pub fn tv_lower_profile(p: &EpiParams, x: EpiState, s_grid: &[f64], trials: usize, seed: SeedSpec) -> Result<LowerProfile> {
    let pool = equilibrium_sample(p, trials, seed.for_purpose(purpose::EQUILIBRIUM))?;
    tv_lower_profile_with_pool(p, x, s_grid, &pool, trials, seed.for_purpose(purpose::LOWER))
}

/// Starts on 8 directions at radii `nζ` and `n/ζ` around `n c`, kept when
/// they lie in the positive quadrant. Rounding is nudged so each start
/// stays inside `E_n(ζ)`.
pub fn start_grid(p: &EpiParams, zeta: f64) -> Result<Vec<(String, EpiState)>> {
    let regions = region_predicates(p, zeta, None)?;
    let n = p.nf();
    let centre = [n * regions.c[0], n * regions.c[1]];
    let mut out = Vec::new();
    for (radius, step) in [(n * zeta, 0.5), (n / zeta, -0.5)] {
        for k in 0..8 {
            let ang = std::f64::consts::FRAC_PI_4 * k as f64;
            let dir = [ang.cos(), ang.sin()];
            let mut r = radius;
            let found = loop {
                let z = [centre[0] + r * dir[0], centre[1] + r * dir[1]];
                if z[0] < -0.5 || z[1] < -0.5 {
                    break None;
                }
                let x = EpiState::round(z);
                if regions.in_e(x) {
                    break Some(x);
                }
                r += step;
                if (r - radius).abs() > 10.0 {
                    break None;
                }
            };
            if let Some(x) = found {
                out.push((format!("r={radius}:deg={}", 45 * k), x));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffExperimentConfig {
    pub params: EpiParams,
    pub zeta: f64,
    pub trials: usize,
    pub pool_size: usize,
    pub s_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub window: f64,
}

impl CutoffExperimentConfig {
    /// `s ∈ {0, ¼, …, 8}`, ε ∈ {0.1, 0.2, 0.3}, window 1.
    pub fn new(params: EpiParams, zeta: f64, trials: usize, pool_size: usize) -> Self {
        Self {
            params,
            zeta,
            trials,
            pool_size,
            s_grid: (0..=32).map(|i| i as f64 * 0.25).collect(),
            epsilon_grid: vec![0.1, 0.2, 0.3],
            window: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartResult {
    pub label: String,
    pub x: EpiState,
    pub travel_time: f64,
    pub lower: LowerProfile,
    pub upper: TVProfile,
}

impl StartResult {
    /// Upper value at `t_n + s`, with `s` in time units.
    pub fn upper_at_s(&self, s: f64) -> Result<f64> {
        self.upper.value_at(self.travel_time + s)
    }

    /// Lower profile non-decreasing in `s`, upper non-increasing, both up to 3 SE.
    pub fn monotone_within_noise(&self) -> bool {
        let lo = &self.lower.profile;
        let lower_ok = lo.values.windows(2).zip(lo.se.as_deref().unwrap_or(&[]).windows(2)).all(|(v, e)| v[1] <= v[0] + 3.0 * e[0].max(e[1]));
        let up = &self.upper;
        let upper_ok = up.values.windows(2).zip(up.se.as_deref().unwrap_or(&[]).windows(2)).all(|(v, e)| v[1] <= v[0] + 3.0 * e[0].max(e[1]));
        lower_ok && upper_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffExperimentReport {
    pub spectral: Spectral,
    pub h: f64,
    pub kappa: f64,
    pub starts: Vec<StartResult>,
    pub cutoff: CutoffReport,
}

pub fn epi_cutoff_experiment(cfg: &CutoffExperimentConfig, seed: SeedSpec) -> Result<CutoffExperimentReport> {
    let p = &cfg.params;
    let spectral = spectral_decompose(p)?;
    let regions = region_predicates(p, cfg.zeta, None)?;
    if !(cfg.window > 0.0) {
        return Err(Error::InvalidParameter(format!("window width {} must be positive", cfg.window)));
    }
    let grid = start_grid(p, cfg.zeta)?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("no start of the grid lies in the positive quadrant".into()));
    }
    let pool = equilibrium_sample(p, cfg.pool_size, seed.for_purpose(purpose::EQUILIBRIUM))?;
    let mut starts = Vec::with_capacity(grid.len());
    // Profiles are read at t_n ± s w_n.
    let offsets: Vec<f64> = cfg.s_grid.iter().map(|s| s * cfg.window).collect();
    for (i, (label, x)) in grid.into_iter().enumerate() {
        let offset = (i as u64) << 32;
        let lower = tv_lower_profile_with_pool(p, x, &offsets, &pool, cfg.trials, seed.for_purpose(purpose::LOWER).substream(offset))?;
        let upper =
            coalescence_tv_upper_with_pool(p, x, &offsets, &pool, cfg.trials, seed.for_purpose(purpose::COUPLING).substream(offset))?;
        starts.push(StartResult { label, x, travel_time: lower.travel_time, lower, upper });
    }
    let views: Vec<CutoffStart<'_>> = starts
        .iter()
        .map(|s| CutoffStart { label: s.label.clone(), travel_time: s.travel_time, lower: &s.lower.profile, upper: &s.upper })
        .collect();
    let cutoff = check_cutoff(&views, cfg.window, &cfg.epsilon_grid, &cfg.s_grid)?;
    Ok(CutoffExperimentReport { kappa: kappa(&spectral, 5.0, 50)?, spectral, h: regions.h, starts, cutoff })
}

/// Fraction of runs from `starts` that leave `D_n(h)` before `t_end`.
pub fn deviation_exit_fraction(p: &EpiParams, h: f64, starts: &[EpiState], t_end: f64, trials: usize, seed: SeedSpec) -> Result<f64> {
    if starts.is_empty() {
        return Err(Error::EmptySamples);
    }
    let regions = region_predicates(p, 0.5, Some(h))?;
    let rates = EpiRates { params: *p };
    let exits = try_ensemble(seed, trials, |i, rng| {
        let mut sim = CtmcSim::new(&rates, starts[i % starts.len()], rng);
        Ok::<_, Error>(sim.advance_until(t_end, |x| !regions.in_d(*x))?.is_some())
    })?;
    Ok(exits.iter().filter(|e| **e).count() as f64 / trials as f64)
}
