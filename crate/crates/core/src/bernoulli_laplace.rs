//! Two-urn ball exchange chain.
//!
//! Each urn holds `n` balls; the state `j` is the number of red balls in the
//! left urn, which starts with all `n`. Every step one ball is drawn from
//! each urn and the two are swapped. The chain has cut-off at `¼ n log n`
//! with window of order `n`.

use rand::Rng;
use serde::Serialize;

use crate::cutoff::{fit_window_exponents, TVProfile, WindowExponents};
use crate::error::{Error, Result};
use crate::markov::{binomial_se, for_each_step, tv_distance, DenseKernel, ProbVector};
use crate::rng::{ensemble, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BLParams {
    pub n: usize,
}

impl BLParams {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n = {n} must be >= 2")));
        }
        Ok(Self { n })
    }

    fn check_state(&self, j: usize) -> Result<()> {
        if j > self.n {
            return Err(Error::InvalidParameter(format!("state {j} outside 0..={}", self.n)));
        }
        Ok(())
    }
}

/// `(up, down)` probabilities from `j`.
pub fn bl_moves(j: usize, n: usize) -> (f64, f64) {
    let x = j as f64 / n as f64;
    ((1.0 - x) * (1.0 - x), x * x)
}

/// One step from `j` driven by a single uniform `u`.
#[inline]
pub fn bl_step_with(j: usize, n: usize, u: f64) -> usize {
    let (up, down) = bl_moves(j, n);
    if u < up {
        j + 1
    } else if u < up + down {
        j - 1
    } else {
        j
    }
}

#[inline]
pub fn bl_step<R: Rng + ?Sized>(j: usize, n: usize, rng: &mut R) -> usize {
    bl_step_with(j, n, rng.random())
}

pub fn bl_kernel(p: BLParams) -> Result<DenseKernel> {
    let n = p.n;
    let rows = (0..=n)
        .map(|j| {
            let (up, down) = bl_moves(j, n);
            let mut row = vec![0.0; n + 1];
            if j < n {
                row[j + 1] = up;
            }
            if j > 0 {
                row[j - 1] = down;
            }
            row[j] = 1.0 - up - down;
            row
        })
        .collect();
    DenseKernel::new(rows)
}

/// Normalizes log-weights built by the recursion `l[j+1] = l[j] + log_ratio(j)`.
fn from_log_ratios(len: usize, log_ratio: impl Fn(usize) -> f64) -> Result<ProbVector> {
    let mut logs = Vec::with_capacity(len);
    let mut l = 0.0;
    logs.push(l);
    for j in 0..len - 1 {
        l += log_ratio(j);
        logs.push(l);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ProbVector::from_weights(logs.into_iter().map(|l| (l - top).exp()).collect())
}

/// Hypergeometric law `C(n,j) C(n,n−j) / C(2n,n)`.
///
/// Built from `log C(n,j)²` via the ratio `C(n,j+1)/C(n,j) = (n−j)/(j+1)`,
/// then exponentiated and renormalized; factorials overflow around n = 90.
pub fn bl_equilibrium(p: BLParams) -> Result<ProbVector> {
    let n = p.n as f64;
    from_log_ratios(p.n + 1, |j| 2.0 * ((n - j as f64) / (j as f64 + 1.0)).ln())
}

/// `E_j X(r) = n[(j/n − ½)(1 − 2/n)^r + ½]`.
pub fn bl_mean(j: usize, p: BLParams, r: usize) -> Result<f64> {
    p.check_state(j)?;
    let n = p.n as f64;
    Ok(n * ((j as f64 / n - 0.5) * (1.0 - 2.0 / n).powi(r as i32) + 0.5))
}

/// `⌊¼ n log n + δ n⌋`.
pub fn r_n(delta: f64, p: BLParams) -> Result<usize> {
    let n = p.n as f64;
    let r = (0.25 * n * n.ln() + delta * n).floor();
    if r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("r_n({delta}) = {r} is negative")));
    }
    Ok(r as usize)
}

/// Exact `d_TV(L_{j0}(X(r)), π)` for `r = 0..=r_max`.
pub fn bl_tv_profile(p: BLParams, j0: usize, r_max: usize) -> Result<TVProfile> {
    p.check_state(j0)?;
    let k = bl_kernel(p)?;
    let pi = bl_equilibrium(p)?;
    let mut values = Vec::with_capacity(r_max + 1);
    for_each_step(&k, &ProbVector::point_mass(p.n + 1, j0)?, r_max, |_, law| {
        values.push(tv_distance(law, &pi)?.clamp(0.0, 1.0));
        Ok(())
    })?;
    TVProfile::exact_steps(values)
}

/// Exact `Var_{j0} X(r)` for `r = 0..=r_max`.
pub fn bl_variance_profile(p: BLParams, j0: usize, r_max: usize) -> Result<Vec<f64>> {
    p.check_state(j0)?;
    let k = bl_kernel(p)?;
    let mut out = Vec::with_capacity(r_max + 1);
    for_each_step(&k, &ProbVector::point_mass(p.n + 1, j0)?, r_max, |_, law| {
        out.push(law.variance());
        Ok(())
    })?;
    Ok(out)
}

/// Two copies of the chain with `lo ≤ hi ≤ lo + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BLCoupledState {
    pub lo: usize,
    pub hi: usize,
}

impl BLCoupledState {
    pub fn new(lo: usize, hi: usize, p: BLParams) -> Result<Self> {
        if lo > hi || hi - lo > 1 || hi > p.n {
            return Err(Error::InvalidParameter(format!("({lo}, {hi}) is not a coupled state for n = {}", p.n)));
        }
        Ok(Self { lo, hi })
    }

    pub fn coalesced(&self) -> bool {
        self.lo == self.hi
    }
}

/// Event probabilities of the coupling from the split state `(j, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitMoves {
    pub joint_up: f64,
    pub joint_down: f64,
    /// Lower copy steps up alone (coalescence at `j+1`).
    pub lo_up: f64,
    /// Upper copy steps down alone (coalescence at `j`).
    pub hi_down: f64,
    /// Lower copy up and upper copy down at once; only nonzero at the two
    /// boundary pairs, where the plain decomposition overshoots by `1/n²`.
    pub swap: f64,
    pub stay: f64,
}

pub fn split_moves(j: usize, n: usize) -> SplitMoves {
    let (up_lo, down_lo) = bl_moves(j, n);
    let (up_hi, down_hi) = bl_moves(j + 1, n);
    let (joint_up, joint_down) = (up_hi, down_lo);
    let (mut lo_up, mut hi_down) = (up_lo - up_hi, down_hi - down_lo);
    let mut stay = 1.0 - joint_up - joint_down - lo_up - hi_down;
    let mut swap = 0.0;
    if stay < 0.0 {
        swap = -stay;
        lo_up -= swap;
        hi_down -= swap;
        stay = 0.0;
    }
    SplitMoves { joint_up, joint_down, lo_up, hi_down, swap, stay }
}

/// One coupled step; returns the new positions of the copies that were at
/// `(lo, hi)`, in that order. The copies can swap order at the boundary.
pub fn bl_coupled_step_tracked<R: Rng + ?Sized>(s: BLCoupledState, n: usize, rng: &mut R) -> (usize, usize) {
    let u: f64 = rng.random();
    if s.coalesced() {
        let j = bl_step_with(s.lo, n, u);
        return (j, j);
    }
    let j = s.lo;
    let m = split_moves(j, n);
    let mut acc = m.joint_up;
    if u < acc {
        return (j + 1, j + 2);
    }
    acc += m.joint_down;
    if u < acc {
        return (j - 1, j);
    }
    acc += m.lo_up;
    if u < acc {
        return (j + 1, j + 1);
    }
    acc += m.hi_down;
    if u < acc {
        return (j, j);
    }
    acc += m.swap;
    if u < acc {
        return (j + 1, j);
    }
    (j, j + 1)
}

pub fn bl_coupled_step<R: Rng + ?Sized>(s: BLCoupledState, p: BLParams, rng: &mut R) -> BLCoupledState {
    let (a, b) = bl_coupled_step_tracked(s, p.n, rng);
    BLCoupledState { lo: a.min(b), hi: a.max(b) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoalescenceReport {
    pub n: usize,
    /// One-step trials from interior split states `(j, j+1)`, `1 ≤ j ≤ n−2`.
    pub step_trials: usize,
    pub step_frequency: f64,
    pub step_se: f64,
    pub expected_frequency: f64,
    /// Runs from `(n/2 − 1, n/2)` until coalescence.
    pub time_trials: usize,
    pub mean_time: f64,
    pub time_se: f64,
    pub expected_time: f64,
}

impl CoalescenceReport {
    pub fn frequency_ok(&self) -> bool {
        (self.step_frequency - self.expected_frequency).abs() <= 3.0 * self.step_se
    }

    pub fn time_ok(&self) -> bool {
        (self.mean_time - self.expected_time).abs() <= 3.0 * self.time_se
    }
}

pub fn bl_coalescence_experiment(p: BLParams, step_trials: usize, time_trials: usize, seed: SeedSpec) -> Result<CoalescenceReport> {
    let n = p.n;
    if n < 4 || step_trials == 0 || time_trials < 2 {
        return Err(Error::InvalidParameter("need n >= 4, step_trials >= 1 and time_trials >= 2".into()));
    }
    let interior = n - 2;
    let hits = ensemble(seed.for_purpose(crate::rng::purpose::PRIMARY), step_trials, |i, rng| {
        let j = 1 + i % interior;
        bl_coupled_step(BLCoupledState { lo: j, hi: j + 1 }, p, rng).coalesced()
    });
    let step_frequency = hits.iter().filter(|h| **h).count() as f64 / step_trials as f64;

    let start = BLCoupledState { lo: n / 2 - 1, hi: n / 2 };
    let times = ensemble(seed.for_purpose(crate::rng::purpose::COUPLING), time_trials, |_, rng| {
        let mut s = start;
        let mut t = 0u64;
        while !s.coalesced() {
            s = bl_coupled_step(s, p, rng);
            t += 1;
        }
        t as f64
    });
    let tn = time_trials as f64;
    let mean_time = times.iter().sum::<f64>() / tn;
    let var = times.iter().map(|t| (t - mean_time).powi(2)).sum::<f64>() / (tn - 1.0);
    Ok(CoalescenceReport {
        n,
        step_trials,
        step_frequency,
        step_se: binomial_se(2.0 / n as f64, step_trials),
        expected_frequency: 2.0 / n as f64,
        time_trials,
        mean_time,
        time_se: (var / tn).sqrt(),
        expected_time: n as f64 / 2.0,
    })
}

/// Ball scheme with `2k` balls on states `−k..=k` (index `j + k`), standing
/// in for the urn chain with `n = 4k` near its centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EhrenfestParams {
    pub k: usize,
}

impl EhrenfestParams {
    pub fn new(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        Ok(Self { k })
    }

    pub fn n(&self) -> usize {
        4 * self.k
    }

    pub fn index(&self, y: i64) -> Result<usize> {
        let k = self.k as i64;
        if y.abs() > k {
            return Err(Error::InvalidParameter(format!("|y0| = {} exceeds k = {k}", y.abs())));
        }
        Ok((y + k) as usize)
    }
}

/// Up `¼ − j/4k`, down `¼ + j/4k`, stay `½`.
pub fn ehrenfest_kernel(p: EhrenfestParams) -> Result<DenseKernel> {
    let k = p.k as i64;
    let kf = p.k as f64;
    let size = 2 * p.k + 1;
    let rows = (-k..=k)
        .map(|j| {
            let i = (j + k) as usize;
            let up = 0.25 - j as f64 / (4.0 * kf);
            let down = 0.25 + j as f64 / (4.0 * kf);
            let mut row = vec![0.0; size];
            if j < k {
                row[i + 1] = up;
            }
            if j > -k {
                row[i - 1] = down;
            }
            row[i] = 1.0 - row.iter().sum::<f64>();
            row
        })
        .collect();
    DenseKernel::new(rows)
}

/// `Bin(2k, ½)` shifted by `−k`.
pub fn ehrenfest_stationary(p: EhrenfestParams) -> Result<ProbVector> {
    let m = 2.0 * p.k as f64;
    from_log_ratios(2 * p.k + 1, |i| ((m - i as f64) / (i as f64 + 1.0)).ln())
}

/// `{k^{−1/2}(|y0| + √(k/2)) + 8} e^{−2r/n}` with `n = 4k`.
pub fn ehrenfest_tv_bound(k: usize, y0: i64, r: usize) -> f64 {
    let kf = k as f64;
    ((y0.abs() as f64 + (kf / 2.0).sqrt()) / kf.sqrt() + 8.0) * (-2.0 * r as f64 / (4.0 * kf)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateRow {
    pub r: usize,
    pub tv: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateReport {
    pub k: usize,
    pub y0: i64,
    pub rows: Vec<SurrogateRow>,
}

impl SurrogateReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub fn ehrenfest_tv_bound_check(p: EhrenfestParams, y0: i64, r_grid: &[usize]) -> Result<SurrogateReport> {
    let start = p.index(y0)?;
    let kernel = ehrenfest_kernel(p)?;
    let pi = ehrenfest_stationary(p)?;
    let r_max = r_grid.iter().copied().max().unwrap_or(0);
    let mut tv = Vec::with_capacity(r_max + 1);
    for_each_step(&kernel, &ProbVector::point_mass(2 * p.k + 1, start)?, r_max, |_, law| {
        tv.push(tv_distance(law, &pi)?);
        Ok(())
    })?;
    let rows = r_grid
        .iter()
        .map(|&r| {
            let bound = ehrenfest_tv_bound(p.k, y0, r);
            SurrogateRow { r, tv: tv[r], bound, pass: tv[r] <= bound }
        })
        .collect();
    Ok(SurrogateReport { k: p.k, y0, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurrogateGapRow {
    pub r: usize,
    pub tv_urn: f64,
    pub tv_surrogate: f64,
}

/// Distance-to-equilibrium profiles of the urn chain (`n = 4k`, started at
/// `n/2 + y0`) and of the ball scheme started at `y0`, side by side.
pub fn surrogate_gap(p: EhrenfestParams, y0: i64, r_max: usize) -> Result<Vec<SurrogateGapRow>> {
    let start = p.index(y0)?;
    let bl = BLParams::new(p.n())?;
    let urn = bl_tv_profile(bl, (2 * p.k as i64 + y0) as usize, r_max)?;
    let kernel = ehrenfest_kernel(p)?;
    let pi = ehrenfest_stationary(p)?;
    let mut rows = Vec::with_capacity(r_max + 1);
    for_each_step(&kernel, &ProbVector::point_mass(2 * p.k + 1, start)?, r_max, |r, law| {
        rows.push(SurrogateGapRow { r, tv_urn: urn.values[r], tv_surrogate: tv_distance(law, &pi)? });
        Ok(())
    })?;
    Ok(rows)
}

/// Default δ grid: spacing ¼ on `[−3, 3]`.
pub fn default_delta_grid() -> Vec<f64> {
    (-12..=12).map(|i| i as f64 * 0.25).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowPoint {
    pub delta: f64,
    pub r: usize,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFitRow {
    pub n: usize,
    /// `max (1 − TV) e^{4|δ|}` over grid points with δ < 0.
    pub c1: f64,
    /// `max TV e^{2δ}` over grid points with δ ≥ 0.
    pub c2: f64,
    pub exponents: WindowExponents,
    pub points: Vec<WindowPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFitReport {
    pub rows: Vec<WindowFitRow>,
    pub c1_max: f64,
    pub c2_max: f64,
    /// max/min of the per-n constants.
    pub c1_spread: f64,
    pub c2_spread: f64,
}

/// Smallest `C₁, C₂` with `1 − TV(r_n(δ)) ≤ C₁e^{−4|δ|}` for δ < 0 and
/// `TV(r_n(δ)) ≤ C₂e^{−2δ}` for δ ≥ 0 on the grid, from the start `j0 = n`.
/// Grid points with `r_n(δ) < 0` are skipped.
pub fn bl_window_fit(ns: &[usize], delta_grid: &[f64]) -> Result<WindowFitReport> {
    if ns.is_empty() || delta_grid.is_empty() {
        return Err(Error::InvalidParameter("need at least one n and one delta".into()));
    }
    let rows = ns
        .iter()
        .map(|&n| {
            let p = BLParams::new(n)?;
            let pts: Vec<(f64, usize)> = delta_grid.iter().filter_map(|&d| r_n(d, p).ok().map(|r| (d, r))).collect();
            let r_max = pts.iter().map(|x| x.1).max().unwrap_or(0);
            let prof = bl_tv_profile(p, n, r_max)?;
            let points: Vec<WindowPoint> = pts.iter().map(|&(delta, r)| WindowPoint { delta, r, tv: prof.values[r] }).collect();
            Ok(window_constants(n, points))
        })
        .collect::<Result<Vec<_>>>()?;
    let c1: Vec<f64> = rows.iter().map(|r| r.c1).collect();
    let c2: Vec<f64> = rows.iter().map(|r| r.c2).collect();
    let spread = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WindowFitReport {
        c1_max: c1.iter().copied().fold(0.0, f64::max),
        c2_max: c2.iter().copied().fold(0.0, f64::max),
        c1_spread: spread(&c1),
        c2_spread: spread(&c2),
        rows,
    })
}

/// Constants and exponent fits from `(δ, r, TV)` points.
pub fn window_constants(n: usize, points: Vec<WindowPoint>) -> WindowFitRow {
    let c1 = points.iter().filter(|p| p.delta < 0.0).map(|p| (1.0 - p.tv) * (-4.0 * p.delta).exp()).fold(0.0, f64::max);
    let c2 = points.iter().filter(|p| p.delta >= 0.0).map(|p| p.tv * (2.0 * p.delta).exp()).fold(0.0, f64::max);
    let exponents = fit_window_exponents(&points.iter().map(|p| (p.delta, p.tv)).collect::<Vec<_>>());
    WindowFitRow { n, c1, c2, exponents, points }
}
