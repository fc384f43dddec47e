use rand::Rng;

use super::dist::{ProbVector, NORM_TOL};
use crate::error::{Error, Result};
use crate::rng::SeedSpec;

/// Row-stochastic one-step transition matrix of a finite chain.
///
/// Alongside the dense rows the kernel keeps, per state, the neighbourhood
/// `{y : P(x, y) > 0}` with cumulative probabilities, which is what
/// trajectory sampling walks.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    size: usize,
    entries: Vec<f64>,
    support: Vec<Vec<(usize, f64)>>,
}

impl DenseKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidKernel("no states".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::DimensionMismatch { expected: size, found: row.len() });
            }
            if let Some((j, p)) = row.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidKernel(format!("entry ({i}, {j}) = {p} outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidKernel(format!("row {i} sums to {total}")));
            }
            entries.extend_from_slice(row);
        }
        let support = (0..size)
            .map(|i| {
                let mut acc = 0.0;
                entries[i * size..(i + 1) * size]
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(j, p)| {
                        acc += p;
                        (j, acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { size, entries, support })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.size..(from + 1) * self.size]
    }

    /// States reachable in one step from `from`.
    pub fn neighbourhood(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.support[from].iter().map(|(j, _)| *j)
    }

    /// One left multiplication `p ↦ pP`.
    pub fn push_forward(&self, p: &ProbVector) -> Result<ProbVector> {
        self.check_dim(p.len())?;
        Ok(ProbVector::from_raw(self.push_raw(p.as_slice())))
    }

    fn push_raw(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for &(j, _) in &self.support[i] {
                out[j] += pi * self.entries[i * self.size + j];
            }
        }
        out
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: len });
        }
        Ok(())
    }

    /// Samples the successor of `from`.
    pub fn sample_next<R: Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        let row = &self.support[from];
        let u: f64 = rng.random::<f64>() * row.last().map_or(1.0, |(_, c)| *c);
        row.iter().find(|(_, c)| u < *c).or(row.last()).map_or(from, |(j, _)| *j)
    }

    /// Stationary distribution by power iteration from the uniform law.
    ///
    /// Intended for small aperiodic kernels; stops when successive iterates
    /// differ by less than `tol` in ℓ₁.
    pub fn stationary_power(&self, tol: f64, max_iter: usize) -> Result<ProbVector> {
        let mut p = vec![1.0 / self.size as f64; self.size];
        for _ in 0..max_iter {
            let next = self.push_raw(&p);
            let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
            p = next;
            if diff < tol {
                let total: f64 = p.iter().sum();
                return ProbVector::new(p.into_iter().map(|x| x / total).collect());
            }
        }
        Err(Error::InvalidParameter(format!("power iteration did not converge in {max_iter} steps")))
    }
}

/// Pushes `p0` forward `r` steps.
pub fn evolve_distribution(k: &DenseKernel, p0: &ProbVector, r: usize) -> Result<ProbVector> {
    k.check_dim(p0.len())?;
    let mut p = p0.as_slice().to_vec();
    for _ in 0..r {
        p = k.push_raw(&p);
    }
    Ok(ProbVector::from_raw(p))
}

/// Calls `visit(r, law)` for `r = 0..=r_max` along the propagation from `p0`.
pub fn for_each_step(
    k: &DenseKernel,
    p0: &ProbVector,
    r_max: usize,
    mut visit: impl FnMut(usize, &ProbVector) -> Result<()>,
) -> Result<()> {
    k.check_dim(p0.len())?;
    let mut p = p0.clone();
    visit(0, &p)?;
    for r in 1..=r_max {
        p = ProbVector::from_raw(k.push_raw(p.as_slice()));
        visit(r, &p)?;
    }
    Ok(())
}

/// Trajectory `x0, X(1), …, X(r)` of the chain.
pub fn simulate_dtmc(k: &DenseKernel, x0: usize, r: usize, seed: SeedSpec) -> Result<Vec<usize>> {
    simulate_dtmc_with(k, x0, r, &mut seed.rng())
}

pub fn simulate_dtmc_with<R: Rng + ?Sized>(k: &DenseKernel, x0: usize, r: usize, rng: &mut R) -> Result<Vec<usize>> {
    if x0 >= k.size {
        return Err(Error::DimensionMismatch { expected: k.size, found: x0 + 1 });
    }
    let mut path = Vec::with_capacity(r + 1);
    path.push(x0);
    let mut x = x0;
    for _ in 0..r {
        x = k.sample_next(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// Endpoint `X(r)` only.
pub fn run_dtmc<R: Rng + ?Sized>(k: &DenseKernel, x0: usize, r: usize, rng: &mut R) -> usize {
    (0..r).fold(x0, |x, _| k.sample_next(x, rng))
}
