//! Closed-form tail bounds for functions of Markov chains.
//!
//! Every bound has the Bernstein shape `2·exp(−m² / denominator(m))`; the
//! evaluators differ only in how the denominator is assembled from chain
//! constants. All results are clamped to `[0, 1]`.

mod presets;
mod verify;
mod walk;

pub use presets::{bl_endpoint, bl_gaussian_tail, run_preset, Preset, PresetReport};
pub use verify::{empirical_tail_verify, heuristic_excursion_b, TailReport, TailRow};
pub use walk::{walk_hitting, WalkHittingConfig, WalkHittingReport, WalkHittingRow, WalkRates};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be finite and >= 0")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be finite and > 0")));
    }
    Ok(())
}

/// `min(1, 2·exp(−m²/denominator))`; a zero denominator at `m > 0` gives 0.
fn bernstein(m: f64, denominator: f64) -> Result<f64> {
    check_non_negative("m", m)?;
    if m == 0.0 {
        return Ok(1.0);
    }
    if denominator == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * (-m * m / denominator).exp()).min(1.0))
}

/// Bounds on a martingale: conditional variances sum to at most `delta`,
/// increments are at most `gamma` in magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleBoundParams {
    pub delta: f64,
    pub gamma: f64,
}

impl MartingaleBoundParams {
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        check_non_negative("delta", delta)?;
        check_non_negative("gamma", gamma)?;
        Ok(Self { delta, gamma })
    }
}

/// `P(|Z − EZ| ≥ m) ≤ 2·exp(−m²/(2δ + 2γm/3))`.
pub fn mg_tail_bound(m: f64, p: &MartingaleBoundParams) -> Result<f64> {
    bernstein(m, 2.0 * p.delta + 2.0 * p.gamma * m / 3.0)
}

/// Constants of a discrete-time chain: `beta` bounds the one-step change of
/// `P^i f`, `a_k` is the sum of the first `k` quadratic-variation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChainBoundParams {
    pub beta: f64,
    pub a_k: f64,
    pub k: u64,
}

impl DiscreteChainBoundParams {
    pub fn new(beta: f64, a_k: f64, k: u64) -> Result<Self> {
        check_non_negative("beta", beta)?;
        check_non_negative("a_k", a_k)?;
        Ok(Self { beta, a_k, k })
    }
}

/// Tail of `f(X(k))` about `(P^k f)(x₀)`: the martingale bound with
/// `δ = a_k` and `γ = 2β`, i.e. exponent `−m²/(2a_k + 4βm/3)`.
pub fn discrete_chain_tail_bound(m: f64, p: &DiscreteChainBoundParams) -> Result<f64> {
    mg_tail_bound(m, &MartingaleBoundParams { delta: p.a_k, gamma: 2.0 * p.beta })
}

/// Continuous-time analogue: `beta_hat` bounds `|P̂^s f(x) − P̂^s f(y)|` over
/// jumps, `a_hat_t` is `∫₀ᵗ η̂(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousChainBoundParams {
    pub beta_hat: f64,
    pub a_hat_t: f64,
    pub t: f64,
}

impl ContinuousChainBoundParams {
    pub fn new(beta_hat: f64, a_hat_t: f64, t: f64) -> Result<Self> {
        check_non_negative("beta_hat", beta_hat)?;
        check_non_negative("a_hat_t", a_hat_t)?;
        check_non_negative("t", t)?;
        Ok(Self { beta_hat, a_hat_t, t })
    }
}

/// `2·exp(−m²/(2â_t + 2β̂m/3))`.
pub fn continuous_chain_tail_bound(m: f64, p: &ContinuousChainBoundParams) -> Result<f64> {
    mg_tail_bound(m, &MartingaleBoundParams { delta: p.a_hat_t, gamma: p.beta_hat })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractiveMode {
    DiscreteA,
    DiscreteB,
    ContinuousA,
    ContinuousB,
}

impl std::str::FromStr for ContractiveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete_a" | "discrete-a" => Ok(Self::DiscreteA),
            "discrete_b" | "discrete-b" => Ok(Self::DiscreteB),
            "continuous_a" | "continuous-a" => Ok(Self::ContinuousA),
            "continuous_b" | "continuous-b" => Ok(Self::ContinuousB),
            other => Err(Error::InvalidParameter(format!("unknown contractive mode `{other}`"))),
        }
    }
}

/// Constants of a chain with a contractive coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractiveParams {
    /// Lipschitz constant of `f` for the coupling metric.
    pub lipschitz: f64,
    /// Largest one-jump distance.
    pub max_jump: f64,
    pub rho: f64,
    /// Largest total exit rate (continuous modes).
    pub q: Option<f64>,
    /// Excursion correction `b_k` / `b_t` ((b) modes).
    pub b: f64,
    /// Steps `k` or time `t` ((b) modes).
    pub horizon: Option<f64>,
}

impl ContractiveParams {
    pub fn new(lipschitz: f64, max_jump: f64, rho: f64) -> Self {
        Self { lipschitz, max_jump, rho, q: None, b: 0.0, horizon: None }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_excursion(mut self, b: f64, horizon: f64) -> Self {
        self.b = b;
        self.horizon = Some(horizon);
        self
    }

    fn validate(&self, mode: ContractiveMode) -> Result<()> {
        check_positive("L", self.lipschitz)?;
        check_positive("D", self.max_jump)?;
        check_positive("rho", self.rho)?;
        check_non_negative("b", self.b)?;
        let ctx = "this contractive mode";
        match mode {
            ContractiveMode::DiscreteA | ContractiveMode::DiscreteB if self.rho > 1.0 => {
                return Err(Error::InvalidParameter(format!("rho = {} must be <= 1 in discrete time", self.rho)))
            }
            ContractiveMode::ContinuousA | ContractiveMode::ContinuousB => {
                check_positive("q", self.q.ok_or(Error::MissingParameter { field: "q", context: ctx })?)?;
            }
            _ => {}
        }
        if matches!(mode, ContractiveMode::DiscreteB | ContractiveMode::ContinuousB) {
            check_non_negative("horizon", self.horizon.ok_or(Error::MissingParameter { field: "horizon", context: ctx })?)?;
        }
        Ok(())
    }

    /// Denominator of the exponent for `mode` at deviation `m`.
    pub fn denominator(&self, m: f64, mode: ContractiveMode) -> Result<f64> {
        self.validate(mode)?;
        let ld = self.lipschitz * self.max_jump;
        let b = self.b;
        let rho = self.rho;
        Ok(match mode {
            ContractiveMode::DiscreteA => 2.0 * ld * ld / (2.0 * rho - rho * rho) + 4.0 * ld * m / 3.0,
            ContractiveMode::DiscreteB => {
                let k = self.horizon.unwrap_or_default();
                2.0 * ld * ld / (2.0 * rho - rho * rho) + 16.0 * k * b * b + 4.0 * (ld + 2.0 * b) * m / 3.0
            }
            ContractiveMode::ContinuousA => self.q.unwrap_or_default() * ld * ld / rho + 2.0 * ld * m / 3.0,
            ContractiveMode::ContinuousB => {
                let q = self.q.unwrap_or_default();
                let t = self.horizon.unwrap_or_default();
                q * ld * ld / rho + 16.0 * q * t * b * b + 2.0 * (ld + 2.0 * b) * m / 3.0
            }
        })
    }
}

pub fn contractive_bound(m: f64, p: &ContractiveParams, mode: ContractiveMode) -> Result<f64> {
    check_non_negative("m", m)?;
    let d = p.denominator(m, mode)?;
    bernstein(m, d)
}

/// Constants for the hitting-time bound of a non-positive-drift process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingBoundParams {
    /// Start height in units of `η√r`.
    pub phi: f64,
    pub t0: f64,
    /// Largest jump `B` of `f`.
    pub jump_max: f64,
    /// Guaranteed jump size `η`.
    pub jump_min: f64,
    /// Half the guaranteed rate of jumps of size at least `η`.
    pub rate: f64,
    /// The universal constant `K_H`.
    pub k_h: f64,
}

impl HittingBoundParams {
    pub fn new(phi: f64, t0: f64, jump_max: f64, jump_min: f64, rate: f64) -> Result<Self> {
        check_non_negative("phi", phi)?;
        check_positive("t0", t0)?;
        check_positive("eta", jump_min)?;
        check_positive("r", rate)?;
        if jump_max < jump_min {
            return Err(Error::InvalidParameter(format!("B = {jump_max} must be >= eta = {jump_min}")));
        }
        Ok(Self { phi, t0, jump_max, jump_min, rate, k_h: 1.0 })
    }

    pub fn with_k_h(mut self, k_h: f64) -> Self {
        self.k_h = k_h;
        self
    }

    pub fn leading_term(&self) -> f64 {
        self.phi / self.t0.sqrt()
    }
}

/// `P(T* ≥ t₀) ≤ min(1, φ/√t₀ + K_H·(B/(η√(r t₀)))^{1/4})`.
pub fn hitting_time_bound(p: &HittingBoundParams) -> f64 {
    let ratio = p.jump_max / (p.jump_min * (p.rate * p.t0).sqrt());
    (p.leading_term() + p.k_h * ratio.powf(0.25)).min(1.0)
}
