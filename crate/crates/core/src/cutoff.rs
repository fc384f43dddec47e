//! Total-variation profiles and cut-off bookkeeping.
//!
//! A family of chains has cut-off at `t_n(x)` with window `w_n` when, for
//! each ε, some `s(ε)` makes the distance exceed `1 − ε` at
//! `t_n(x) − s(ε) w_n` and fall below `ε` at `t_n(x) + s(ε) w_n`, uniformly
//! over the starting states considered. [`check_cutoff`] searches a finite
//! `s` grid for the smallest such `s` over a finite set of tested starts.
//!
//! Monte-Carlo profiles come as a lower estimate (used for the `− s` side)
//! and an upper estimate (used for the `+ s` side), so a pass is
//! trustworthy while a fail may be sampling noise.
//!
//! Times before zero are read as time zero: the chain sits at its start
//! until it is released. Such evaluations are counted in the report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Exact,
    McUpper,
    McLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeDomain {
    /// Integer step counts; a real time `t` reads the value at `⌊t⌋`.
    Steps,
    /// Real times; values are interpolated linearly between grid points.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TVProfile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
    pub se: Option<Vec<f64>>,
    pub domain: TimeDomain,
}

impl TVProfile {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: ProfileKind, se: Option<Vec<f64>>, domain: TimeDomain) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("profile times must be strictly increasing".into()));
        }
        if domain == TimeDomain::Steps && times.iter().any(|t| t.fract() != 0.0) {
            return Err(Error::InvalidParameter("step profiles need integer times".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("profile value {v} outside [0, 1]")));
        }
        match (&se, kind) {
            (Some(_), ProfileKind::Exact) => {
                return Err(Error::InvalidParameter("exact profiles carry no standard errors".into()))
            }
            (None, ProfileKind::McUpper | ProfileKind::McLower) => {
                return Err(Error::InvalidParameter("Monte-Carlo profiles need standard errors".into()))
            }
            (Some(se), _) if se.len() != times.len() => {
                return Err(Error::DimensionMismatch { expected: times.len(), found: se.len() })
            }
            _ => {}
        }
        Ok(Self { times, values, kind, se, domain })
    }

    /// Exact profile over steps `0..values.len()`.
    pub fn exact_steps(values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|r| r as f64).collect();
        Self::new(times, values, ProfileKind::Exact, None, TimeDomain::Steps)
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn max_gap(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn out_of_range(&self, time: f64) -> Error {
        Error::TimeOutOfRange { time, start: self.start(), end: self.end() }
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self.domain {
            TimeDomain::Steps => {
                let r = t.floor();
                let i = self.times.partition_point(|&s| s < r);
                match self.times.get(i) {
                    Some(&s) if s == r => Ok(self.values[i]),
                    _ => Err(self.out_of_range(r)),
                }
            }
            TimeDomain::Continuous => {
                if !(t >= self.start() - 1e-12 && t <= self.end() + 1e-12) {
                    return Err(self.out_of_range(t));
                }
                let i = self.times.partition_point(|&s| s <= t);
                if i == 0 {
                    return Ok(self.values[0]);
                }
                if i == self.times.len() {
                    return Ok(self.values[i - 1]);
                }
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let w = (t - t0) / (t1 - t0);
                Ok(self.values[i - 1] * (1.0 - w) + self.values[i] * w)
            }
        }
    }

    /// Time at which the profile falls fastest (midpoint of the steepest segment).
    pub fn steepest_drop_time(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| ((v[0] - v[1]) / (t[1] - t[0]), 0.5 * (t[0] + t[1])))
            .fold((f64::NEG_INFINITY, self.start()), |best, cur| if cur.0 > best.0 { cur } else { best })
            .1
    }
}

/// One tested starting state.
#[derive(Debug, Clone)]
pub struct CutoffStart<'a> {
    pub label: String,
    pub travel_time: f64,
    /// Lower estimate of the distance, read at `t_n − s w_n`.
    pub lower: &'a TVProfile,
    /// Upper estimate of the distance, read at `t_n + s w_n`.
    pub upper: &'a TVProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub epsilon_grid: Vec<f64>,
    /// Smallest tested `s` meeting both inequalities, per ε.
    pub s_of_eps: Vec<Option<f64>>,
    pub pass: Vec<bool>,
    pub tested_starts: Vec<String>,
    pub window: f64,
    /// `min_x t_n(x) / w_n` over the tested starts.
    pub min_travel_ratio: f64,
    /// Number of lower-side evaluations whose time fell below zero.
    pub clamped_evaluations: usize,
    pub note: String,
}

pub fn check_cutoff(starts: &[CutoffStart<'_>], window: f64, epsilon_grid: &[f64], s_grid: &[f64]) -> Result<CutoffReport> {
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!("window width {window} must be positive")));
    }
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting states".into()));
    }
    if let Some(e) = epsilon_grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidParameter(format!("epsilon {e} outside (0, 1)")));
    }
    for st in starts {
        for prof in [st.lower, st.upper] {
            if prof.domain == TimeDomain::Continuous && prof.max_gap() > window / 4.0 + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "profile for {} has grid gap {} coarser than w_n/4 = {}",
                    st.label,
                    prof.max_gap(),
                    window / 4.0
                )));
            }
        }
    }
    let mut s_sorted = s_grid.to_vec();
    s_sorted.sort_by(f64::total_cmp);
    s_sorted.dedup();

    // values[k][i] = (lower value at t − s_k w, upper value at t + s_k w) for start i.
    let mut clamped = 0;
    let mut values = Vec::with_capacity(s_sorted.len());
    for &s in &s_sorted {
        let mut row = Vec::with_capacity(starts.len());
        for st in starts {
            let t_lo = st.travel_time - s * window;
            if t_lo < 0.0 {
                clamped += 1;
            }
            let lo = st.lower.value_at(t_lo.max(0.0))?;
            let hi = st.upper.value_at(st.travel_time + s * window)?;
            row.push((lo, hi));
        }
        values.push(row);
    }

    let s_of_eps: Vec<Option<f64>> = epsilon_grid
        .iter()
        .map(|&eps| {
            s_sorted
                .iter()
                .zip(&values)
                .find(|(_, row)| row.iter().all(|&(lo, hi)| lo > 1.0 - eps && hi < eps))
                .map(|(s, _)| *s)
        })
        .collect();

    Ok(CutoffReport {
        epsilon_grid: epsilon_grid.to_vec(),
        pass: s_of_eps.iter().map(Option::is_some).collect(),
        s_of_eps,
        tested_starts: starts.iter().map(|s| s.label.clone()).collect(),
        window,
        min_travel_ratio: starts.iter().map(|s| s.travel_time / window).fold(f64::INFINITY, f64::min),
        clamped_evaluations: clamped,
        note: "finite sample of starting states; Monte-Carlo profiles use lower estimates before t_n and upper \
               estimates after, so passes are conservative"
            .into(),
    })
}

/// Least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(LineFit { slope, intercept, rms_residual: (rss / nf).sqrt(), points: n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowExponents {
    /// Fit of `log(1 − TV)` against `|δ|` over δ < 0.
    pub lower: Option<LineFit>,
    /// Fit of `log TV` against δ over δ > 0.
    pub upper: Option<LineFit>,
    /// δ values dropped because TV was exactly 0 or 1 there.
    pub excluded: Vec<f64>,
}

/// Fits the exponential tails of a profile sampled at `(δ, TV(r_n(δ)))`.
pub fn fit_window_exponents(points: &[(f64, f64)]) -> WindowExponents {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut excluded = Vec::new();
    for &(delta, tv) in points {
        if delta < 0.0 {
            if tv >= 1.0 {
                excluded.push(delta);
            } else {
                lower.push((-delta, (1.0 - tv).ln()));
            }
        } else if delta > 0.0 {
            if tv <= 0.0 {
                excluded.push(delta);
            } else {
                upper.push((delta, tv.ln()));
            }
        }
    }
    WindowExponents { lower: least_squares(&lower), upper: least_squares(&upper), excluded }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn continuous(times: Vec<f64>, values: Vec<f64>) -> TVProfile {
        TVProfile::new(times, values, ProfileKind::Exact, None, TimeDomain::Continuous).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(TVProfile::new(vec![0.0, 0.0], vec![1.0, 0.5], ProfileKind::Exact, None, TimeDomain::Continuous).is_err());
        assert!(TVProfile::new(vec![0.0], vec![1.5], ProfileKind::Exact, None, TimeDomain::Continuous).is_err());
        assert!(TVProfile::new(vec![0.0], vec![0.5], ProfileKind::McUpper, None, TimeDomain::Continuous).is_err());
        assert!(TVProfile::new(vec![0.0], vec![0.5], ProfileKind::Exact, Some(vec![0.1]), TimeDomain::Continuous).is_err());
        assert!(TVProfile::new(vec![0.5], vec![0.5], ProfileKind::Exact, None, TimeDomain::Steps).is_err());
    }

    #[test]
    fn lookups() {
        let p = continuous(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0]);
        assert_eq!(p.value_at(0.5).unwrap(), 0.75);
        assert_eq!(p.value_at(2.0).unwrap(), 0.0);
        assert!(matches!(p.value_at(2.5), Err(Error::TimeOutOfRange { .. })));
        let s = TVProfile::exact_steps(vec![1.0, 0.8, 0.3]).unwrap();
        assert_eq!(s.value_at(1.9).unwrap(), 0.8);
        let e = s.value_at(3.2).unwrap_err();
        assert!(e.to_string().contains("time 3"), "{e}");
    }

    fn step_profile() -> TVProfile {
        // 1 before t = 10, 0 from t = 10 on.
        TVProfile::exact_steps((0..21).map(|r| if r < 10 { 1.0 } else { 0.0 }).collect()).unwrap()
    }

    #[test]
    fn step_function_passes_with_smallest_positive_s() {
        let p = step_profile();
        let st = [CutoffStart { label: "x".into(), travel_time: 10.0, lower: &p, upper: &p }];
        let rep = check_cutoff(&st, 1.0, &[0.05, 0.1, 0.5], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(rep.pass.iter().all(|&b| b));
        assert!(rep.s_of_eps.iter().all(|&s| s == Some(1.0)));
        assert_eq!(rep.tested_starts, vec!["x".to_string()]);
    }

    #[test]
    fn constant_half_fails_small_eps() {
        let p = TVProfile::exact_steps(vec![0.5; 30]).unwrap();
        let st = [CutoffStart { label: "x".into(), travel_time: 10.0, lower: &p, upper: &p }];
        let rep = check_cutoff(&st, 1.0, &[0.1, 0.3, 0.49], &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(rep.pass, vec![false, false, false]);
    }

    #[test]
    fn enlarging_the_grid_keeps_passes() {
        let p = TVProfile::exact_steps((0..40).map(|r| 1.0 / (1.0 + (0.5 * (r as f64 - 20.0)).exp())).collect()).unwrap();
        let st = [CutoffStart { label: "x".into(), travel_time: 20.0, lower: &p, upper: &p }];
        let eps = [0.05, 0.1, 0.2, 0.3];
        let small = check_cutoff(&st, 2.0, &eps, &[0.0, 4.0, 8.0]).unwrap();
        let big = check_cutoff(&st, 2.0, &eps, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 8.0, 9.0]).unwrap();
        for (a, b) in small.pass.iter().zip(&big.pass) {
            assert!(!a || *b);
        }
        let s: Vec<f64> = big.s_of_eps.iter().flatten().copied().collect();
        assert!(s.windows(2).all(|w| w[0] >= w[1]), "s(ε) must not grow with ε: {s:?}");
    }

    #[test]
    fn missing_time_is_named() {
        let p = step_profile();
        let st = [CutoffStart { label: "x".into(), travel_time: 10.0, lower: &p, upper: &p }];
        let e = check_cutoff(&st, 1.0, &[0.1], &[50.0]).unwrap_err();
        assert!(matches!(e, Error::TimeOutOfRange { time, .. } if time == 60.0));
    }

    #[test]
    fn coarse_continuous_grid_is_refused() {
        let p = continuous(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0]);
        let st = [CutoffStart { label: "x".into(), travel_time: 1.0, lower: &p, upper: &p }];
        assert!(check_cutoff(&st, 1.0, &[0.1], &[0.0]).is_err());
        assert!(check_cutoff(&st, 4.0, &[0.1], &[0.0]).is_ok());
    }

    #[test]
    fn negative_times_are_clamped() {
        let p = step_profile();
        let st = [CutoffStart { label: "x".into(), travel_time: 10.0, lower: &p, upper: &p }];
        let rep = check_cutoff(&st, 1.0, &[0.1], &[20.0]).unwrap_err();
        assert!(matches!(rep, Error::TimeOutOfRange { .. }));
        let rep = check_cutoff(&st, 1.0, &[0.1], &[1.0, 10.0]).unwrap();
        assert_eq!(rep.clamped_evaluations, 0);
        let q = TVProfile::exact_steps((0..60).map(|r| if r < 10 { 1.0 } else { 0.0 }).collect()).unwrap();
        let st = [CutoffStart { label: "x".into(), travel_time: 10.0, lower: &q, upper: &q }];
        let rep = check_cutoff(&st, 1.0, &[0.1], &[12.0]).unwrap();
        assert_eq!(rep.clamped_evaluations, 1);
        assert!(rep.pass[0]);
    }

    #[test]
    fn synthetic_exponents() {
        let grid: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.25).collect();
        let upper_only: Vec<(f64, f64)> = grid.iter().map(|&d| (d, (-2.0 * d).exp().min(1.0))).collect();
        let fit = fit_window_exponents(&upper_only);
        assert!((fit.upper.unwrap().slope + 2.0).abs() < 1e-9);
        assert!(fit.excluded.iter().all(|d| *d < 0.0));

        let lower_only: Vec<(f64, f64)> = grid.iter().filter(|d| **d < 0.0).map(|&d| (d, 1.0 - (4.0 * d).exp())).collect();
        let fit = fit_window_exponents(&lower_only);
        assert!((fit.lower.unwrap().slope + 4.0).abs() < 1e-9);
    }

    #[test]
    fn steepest_drop() {
        let p = TVProfile::exact_steps(vec![1.0, 0.95, 0.5, 0.45, 0.4]).unwrap();
        assert_eq!(p.steepest_drop_time(), 1.5);
    }
}
