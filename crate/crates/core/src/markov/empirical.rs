use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Relative frequency of each distinct sample value.
pub fn empirical_distribution<S: Ord + Clone>(samples: &[S]) -> Result<BTreeMap<S, f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.clone()).or_insert(0usize) += 1;
    }
    let n = samples.len() as f64;
    Ok(counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect())
}

/// Fraction of `samples` satisfying `pred`.
pub fn frequency<S>(samples: &[S], pred: impl Fn(&S) -> bool) -> f64 {
    samples.iter().filter(|s| pred(s)).count() as f64 / samples.len() as f64
}

/// Binomial standard error of a frequency estimated from `n` draws.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Result of maximizing the two-sample discrepancy over a family of sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSetDiscrepancy {
    pub value: f64,
    /// Index of the maximizing test set.
    pub best: usize,
    pub freq_a: f64,
    pub freq_b: f64,
    /// Standard error of `freq_a − freq_b` at the maximizer.
    pub se: f64,
}

/// `max_A |freq_{s1}(A) − freq_{s2}(A)|`, a lower estimate of `d_TV(L(s1), L(s2))`.
pub fn tv_lower_bound_from_samples<S, T>(s1: &[S], s2: &[S], tests: &[T]) -> Result<f64>
where
    T: Fn(&S) -> bool,
{
    Ok(tv_lower_bound_detailed(s1, s2, tests)?.value)
}

pub fn tv_lower_bound_detailed<S, T>(s1: &[S], s2: &[S], tests: &[T]) -> Result<TestSetDiscrepancy>
where
    T: Fn(&S) -> bool,
{
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySamples);
    }
    if tests.is_empty() {
        return Err(Error::InvalidParameter("no test sets given".into()));
    }
    let mut best: Option<TestSetDiscrepancy> = None;
    for (i, t) in tests.iter().enumerate() {
        let fa = frequency(s1, t);
        let fb = frequency(s2, t);
        let value = (fa - fb).abs();
        if best.map_or(true, |b| value > b.value) {
            let se = (binomial_se(fa, s1.len()).powi(2) + binomial_se(fb, s2.len()).powi(2)).sqrt();
            best = Some(TestSetDiscrepancy { value, best: i, freq_a: fa, freq_b: fb, se });
        }
    }
    Ok(best.expect("tests is non-empty"))
}
