//! Two-type infection model with immigration.
//!
//! State `(x₁, x₂)` counts infected hosts of each type. Type 1 infections
//! arrive at rate `α x₂ + μ n`, type 2 at `β x₁ + ν n`; recoveries happen at
//! `γ x₁` and `δ x₂`. With `R = αβ/(γδ) < 1` the scaled mean follows the
//! linear flow `ṁ = A m + b`, `A = [[−γ, α], [β, −δ]]`, `b = (μ, ν)`, which
//! contracts onto the point `c = −A⁻¹ b`.

mod coupling;
mod experiment;

pub use coupling::{contraction_check, distance_generator, ContractionReport, ContractionRow, CoupledEpiState, CoupledRates};
pub use experiment::{
    ball_radii, coalescence_profile_from_pairs, coalescence_times, coalescence_tv_upper, coalescence_tv_upper_with_pool,
    deviation_exit_fraction, epi_cutoff_experiment, equilibrium_sample, equilibrium_summary, start_grid, tv_lower_profile, tv_lower_profile_with_pool, CutoffExperimentConfig,
    CutoffExperimentReport, EquilibriumSummary, LowerProfile, StartResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::StateColumns;
use crate::markov::RateFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpiParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    pub n: u64,
}

impl EpiParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, mu: f64, nu: f64, n: u64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta, mu, nu, n };
        p.validate()?;
        Ok(p)
    }

    /// `(α, β, γ, δ, μ, ν) = (1, 1, 2, 2, 1, 1)`.
    pub fn symmetric(n: u64) -> Self {
        Self { alpha: 1.0, beta: 1.0, gamma: 2.0, delta: 2.0, mu: 1.0, nu: 1.0, n }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("mu", self.mu),
            ("nu", self.nu),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and > 0")));
            }
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if self.r0() >= 1.0 {
            return Err(Error::InvalidParameter(format!("R = alpha*beta/(gamma*delta) = {} must be < 1", self.r0())));
        }
        Ok(())
    }

    /// `R = αβ/(γδ)`.
    pub fn r0(&self) -> f64 {
        self.alpha * self.beta / (self.gamma * self.delta)
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn drift_matrix(&self) -> [[f64; 2]; 2] {
        [[-self.gamma, self.alpha], [self.beta, -self.delta]]
    }
}

pub type Vec2 = [f64; 2];

fn norm(z: Vec2) -> f64 {
    z[0].hypot(z[1])
}

fn unit(z: Vec2) -> Vec2 {
    let l = norm(z);
    [z[0] / l, z[1] / l]
}

/// `|z₁| + θ|z₂|`.
pub fn theta_norm(z: Vec2, theta: f64) -> f64 {
    z[0].abs() + theta * z[1].abs()
}

/// Eigen-data of the drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectral {
    pub rho: f64,
    pub rho_prime: f64,
    /// Positive root of `βθ² + (δ−γ)θ − α = 0`; `(1, θ)` is a left eigenvector for `−ρ`.
    pub theta: f64,
    pub theta_prime: f64,
    /// Unit right eigenvector for `−ρ`.
    pub v: Vec2,
    /// Unit right eigenvector for `−ρ′`.
    pub v_prime: Vec2,
    /// Equilibrium point, per capita.
    pub c: Vec2,
}

impl Spectral {
    /// Coordinates `(λ, λ′)` of `z` in the basis `(v, v′)`.
    pub fn coordinates(&self, z: Vec2) -> Result<Vec2> {
        let det = self.v[0] * self.v_prime[1] - self.v[1] * self.v_prime[0];
        if det.abs() < 1e-14 {
            return Err(Error::DefectiveMatrix(self.rho_prime - self.rho));
        }
        Ok([(z[0] * self.v_prime[1] - z[1] * self.v_prime[0]) / det, (self.v[0] * z[1] - self.v[1] * z[0]) / det])
    }

    /// `e^{At} z`.
    pub fn flow(&self, z: Vec2, t: f64) -> Result<Vec2> {
        let [l, lp] = self.coordinates(z)?;
        let (a, b) = (l * (-self.rho * t).exp(), lp * (-self.rho_prime * t).exp());
        Ok([a * self.v[0] + b * self.v_prime[0], a * self.v[1] + b * self.v_prime[1]])
    }
}

/// Solves `M x = y` for a 2×2 system by Gaussian elimination with pivoting.
fn solve2(m: [[f64; 2]; 2], y: Vec2) -> Result<Vec2> {
    let (mut a, mut r) = (m, y);
    if a[1][0].abs() > a[0][0].abs() {
        a.swap(0, 1);
        r.swap(0, 1);
    }
    if a[0][0] == 0.0 {
        return Err(Error::DefectiveMatrix(0.0));
    }
    let f = a[1][0] / a[0][0];
    let a11 = a[1][1] - f * a[0][1];
    let r1 = r[1] - f * r[0];
    if a11.abs() < 1e-300 {
        return Err(Error::DefectiveMatrix(a11));
    }
    let x1 = r1 / a11;
    Ok([(r[0] - a[0][1] * x1) / a[0][0], x1])
}

/// `{γδ(1−R)}⁻¹ (αν + δμ, βμ + γν)`.
pub fn closed_form_c(p: &EpiParams) -> Vec2 {
    let d = p.gamma * p.delta * (1.0 - p.r0());
    [(p.alpha * p.nu + p.delta * p.mu) / d, (p.beta * p.mu + p.gamma * p.nu) / d]
}

pub fn spectral_decompose(p: &EpiParams) -> Result<Spectral> {
    p.validate()?;
    let (al, be, ga, de) = (p.alpha, p.beta, p.gamma, p.delta);
    let disc = ((de - ga) * (de - ga) + 4.0 * al * be).sqrt();
    let theta = ((ga - de) + disc) / (2.0 * be);
    let theta_prime = ((ga - de) - disc) / (2.0 * be);
    let rho = ga - be * theta;
    let rho_prime = ga - be * theta_prime;
    if (rho_prime - rho).abs() < 1e-12 {
        return Err(Error::DefectiveMatrix(rho_prime - rho));
    }
    // (A + ρI) v = 0 from the first row: v ∝ (α, γ − ρ) = (α, βθ).
    let v = unit([al, be * theta]);
    let v_prime = unit([al, be * theta_prime]);
    let a = p.drift_matrix();
    let c = solve2(a, [-p.mu, -p.nu])?;
    Ok(Spectral { rho, rho_prime, theta, theta_prime, v, v_prime, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpiState {
    pub x1: u64,
    pub x2: u64,
}

impl EpiState {
    pub fn new(x1: u64, x2: u64) -> Self {
        Self { x1, x2 }
    }

    pub fn as_vec2(&self) -> Vec2 {
        [self.x1 as f64, self.x2 as f64]
    }

    /// Nearest lattice point per coordinate (negatives go to 0).
    pub fn round(z: Vec2) -> Self {
        Self { x1: z[0].round().max(0.0) as u64, x2: z[1].round().max(0.0) as u64 }
    }
}

impl StateColumns for EpiState {
    fn column_names() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }
    fn columns(&self) -> Vec<String> {
        vec![self.x1.to_string(), self.x2.to_string()]
    }
}

/// `n·m_x(t) = n c + e^{At}(x − n c)`.
pub fn mean_trajectory(p: &EpiParams, x: EpiState, t: f64) -> Result<Vec2> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(x.as_vec2());
    }
    let s = spectral_decompose(p)?;
    mean_with(&s, p.nf(), x, t)
}

fn mean_with(s: &Spectral, n: f64, x: EpiState, t: f64) -> Result<Vec2> {
    let z = [x.x1 as f64 / n - s.c[0], x.x2 as f64 / n - s.c[1]];
    let e = s.flow(z, t)?;
    Ok([n * (s.c[0] + e[0]), n * (s.c[1] + e[1])])
}

/// First time `|e^{At}(x/n − c)| ≤ n^{−1/2}`: a scan with step `0.01/ρ`
/// followed by bisection to `1e-9` inside the first bracketing step.
pub fn travel_time(p: &EpiParams, x: EpiState) -> Result<f64> {
    let s = spectral_decompose(p)?;
    travel_time_with(&s, p.nf(), x.as_vec2())
}

pub(crate) fn travel_time_with(s: &Spectral, n: f64, x: Vec2) -> Result<f64> {
    let z = [x[0] / n - s.c[0], x[1] / n - s.c[1]];
    let thr = n.powf(-0.5);
    let dist = |t: f64| s.flow(z, t).map(norm);
    if dist(0.0)? <= thr {
        return Ok(0.0);
    }
    let h = 0.01 / s.rho;
    let mut hi = h;
    while dist(hi)? > thr {
        hi += h;
        if hi > 1e9 {
            return Err(Error::InvalidParameter("mean trajectory never reaches the equilibrium ball".into()));
        }
    }
    let mut lo = hi - h;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if dist(mid)? > thr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Rates of the four transitions.
#[derive(Debug, Clone, Copy)]
pub struct EpiRates {
    pub params: EpiParams,
}

/// `[+e₁, +e₂, −e₁, −e₂]` rates at `x`.
#[inline]
pub fn move_rates(p: &EpiParams, x: EpiState) -> [f64; 4] {
    let n = p.nf();
    let (x1, x2) = (x.x1 as f64, x.x2 as f64);
    [p.alpha * x2 + p.mu * n, p.beta * x1 + p.nu * n, p.gamma * x1, p.delta * x2]
}

/// Applies move `k` (order as in [`move_rates`]).
#[inline]
pub fn apply_move(x: EpiState, k: usize) -> EpiState {
    match k {
        0 => EpiState { x1: x.x1 + 1, ..x },
        1 => EpiState { x2: x.x2 + 1, ..x },
        2 => EpiState { x1: x.x1 - 1, ..x },
        _ => EpiState { x2: x.x2 - 1, ..x },
    }
}

impl RateFunction for EpiRates {
    type State = EpiState;

    fn transitions(&self, x: &EpiState, out: &mut Vec<(EpiState, f64)>) {
        for (k, r) in move_rates(&self.params, *x).into_iter().enumerate() {
            if r > 0.0 {
                out.push((apply_move(*x, k), r));
            }
        }
    }
}

/// Membership tests for the start region `E_n(ζ)` and the bounded region `D_n(H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regions {
    pub n: f64,
    pub zeta: f64,
    pub h: f64,
    pub c: Vec2,
    pub theta: f64,
}

impl Regions {
    /// `nζ ≤ |x − nc| ≤ n/ζ`.
    pub fn in_e(&self, x: EpiState) -> bool {
        let d = norm([x.x1 as f64 - self.n * self.c[0], x.x2 as f64 - self.n * self.c[1]]);
        self.n * self.zeta <= d && d <= self.n / self.zeta
    }

    /// `‖x‖_θ ≤ H n`.
    pub fn in_d(&self, x: EpiState) -> bool {
        theta_norm(x.as_vec2(), self.theta) <= self.h * self.n
    }
}

/// `H = max((1 ∨ θ)(1/ζ + |c|), 4‖b‖_θ/ρ)`.
pub fn default_h(p: &EpiParams, s: &Spectral, zeta: f64) -> f64 {
    let a = s.theta.max(1.0) * (1.0 / zeta + norm(s.c));
    let b = 4.0 * theta_norm([p.mu, p.nu], s.theta) / s.rho;
    a.max(b)
}

pub fn region_predicates(p: &EpiParams, zeta: f64, h: Option<f64>) -> Result<Regions> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParameter(format!("zeta = {zeta} must lie in (0, 1)")));
    }
    let s = spectral_decompose(p)?;
    let h = h.unwrap_or_else(|| default_h(p, &s, zeta));
    Ok(Regions { n: p.nf(), zeta, h, c: s.c, theta: s.theta })
}

/// `min |e^{−As} z| e^{−ρs}` over unit vectors `z` (720 directions) and
/// `s` on `0..=s_max` in `steps` intervals. Diagnostic only.
pub fn kappa(s: &Spectral, s_max: f64, steps: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let t = s_max * i as f64 / steps.max(1) as f64;
        for a in 0..720 {
            let ang = std::f64::consts::PI * a as f64 / 360.0;
            let z = [ang.cos(), ang.sin()];
            let back = s.flow(z, -t)?;
            best = best.min(norm(back) * (-s.rho * t).exp());
        }
    }
    Ok(best)
}
