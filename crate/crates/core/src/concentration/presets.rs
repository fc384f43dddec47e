//! Named pairings of a simulated chain with the bound that should hold for it.

use rand::Rng;
use serde::Serialize;

use super::{
    contractive_bound, empirical_tail_verify, mg_tail_bound, walk_hitting, ContractiveMode, ContractiveParams,
    MartingaleBoundParams, TailReport, TailRow, WalkHittingConfig,
};
use crate::bernoulli_laplace::{bl_mean, bl_step, BLParams};
use crate::error::{Error, Result};
use crate::markov::CtmcSim;
use crate::rng::{SeedSpec, SimRng};
use crate::two_host::{default_h, mean_trajectory, spectral_decompose, EpiParams, EpiRates, EpiState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Urn chain, n = 100 from j = n after 575 steps, against `2e^{−c²/2}` at `m = c√n`.
    Bl,
    /// Same chain against the contractive bound with `L = D = 1`, `ρ = 2/n`.
    BlContractive,
    /// Sum of 100 fair ±1 steps against the martingale bound with `δ = 100`, `γ = 1`.
    Mg,
    /// `x₁` of the symmetric two-host model (n = 100, from (150, 150), t = 1)
    /// against the continuous contractive bound.
    EpiContractive,
    /// ±1 walk at rate 2500 per direction from 50; `m` is the horizon `t₀`.
    WalkHitting,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Bl, Preset::BlContractive, Preset::Mg, Preset::EpiContractive, Preset::WalkHitting];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Bl => "bl",
            Preset::BlContractive => "bl-contractive",
            Preset::Mg => "mg",
            Preset::EpiContractive => "epi-contractive",
            Preset::WalkHitting => "walk-hitting",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset `{s}` (expected one of bl, bl-contractive, mg, epi-contractive, walk-hitting)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: Preset,
    pub report: TailReport,
}

/// `X(r)` of the urn chain from `j0`.
pub fn bl_endpoint(n: usize, j0: usize, r: usize, rng: &mut SimRng) -> usize {
    (0..r).fold(j0, |j, _| bl_step(j, n, rng))
}

/// Two-sided tails of `X(r)` about its mean at `m = c√n`, against `2e^{−c²/2}`.
pub fn bl_gaussian_tail(n: usize, j0: usize, r: usize, c_grid: &[f64], samples: usize, seed: SeedSpec) -> Result<TailReport> {
    let p = BLParams::new(n)?;
    let centre = bl_mean(j0, p, r)?;
    let sq = (n as f64).sqrt();
    let m_grid: Vec<f64> = c_grid.iter().map(|c| c * sq).collect();
    empirical_tail_verify(
        |_, rng| Ok(bl_endpoint(n, j0, r, rng) as f64),
        centre,
        &m_grid,
        |m| Ok((2.0 * (-(m / sq).powi(2) / 2.0).exp()).min(1.0)),
        samples,
        seed,
    )
}

pub fn run_preset(preset: Preset, samples: usize, seed: SeedSpec) -> Result<PresetReport> {
    let report = match preset {
        Preset::Bl => bl_gaussian_tail(100, 100, 575, &[1.0, 1.5, 2.0], samples, seed)?,
        Preset::BlContractive => {
            let (n, r) = (100usize, 575usize);
            let p = BLParams::new(n)?;
            let cp = ContractiveParams::new(1.0, 1.0, 2.0 / n as f64);
            let m_grid: Vec<f64> = [1.0, 1.5, 2.0, 2.5].iter().map(|c| c * 10.0).collect();
            empirical_tail_verify(
                |_, rng| Ok(bl_endpoint(n, n, r, rng) as f64),
                bl_mean(n, p, r)?,
                &m_grid,
                |m| contractive_bound(m, &cp, ContractiveMode::DiscreteA),
                samples,
                seed,
            )?
        }
        Preset::Mg => {
            let k = 100;
            let mp = MartingaleBoundParams::new(k as f64, 1.0)?;
            empirical_tail_verify(
                |_, rng| Ok((0..k).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).sum()),
                0.0,
                &[5.0, 10.0, 20.0, 30.0],
                |m| mg_tail_bound(m, &mp),
                samples,
                seed,
            )?
        }
        Preset::EpiContractive => {
            let p = EpiParams::symmetric(100);
            let s = spectral_decompose(&p)?;
            let x = EpiState::new(150, 150);
            let t = 1.0;
            // Exit rates are unbounded; q is taken as the largest exit rate on
            // D_n(H) with the default H for ζ = ½, where the chain stays.
            let h = default_h(&p, &s, 0.5);
            let q = ((p.beta + p.gamma).max((p.alpha + p.delta) / s.theta) * h + p.mu + p.nu) * p.nf();
            let cp = ContractiveParams::new(1.0, s.theta.max(1.0), s.rho).with_q(q);
            let rates = EpiRates { params: p };
            empirical_tail_verify(
                |_, rng| {
                    let mut sim = CtmcSim::new(&rates, x, rng);
                    sim.advance_to(t, |_, _| {})?;
                    Ok(sim.state().x1 as f64)
                },
                mean_trajectory(&p, x, t)?[0],
                &[5.0, 10.0, 20.0, 40.0],
                |m| contractive_bound(m, &cp, ContractiveMode::ContinuousA),
                samples,
                seed,
            )?
        }
        Preset::WalkHitting => {
            let cfg = WalkHittingConfig { rate: 2500.0, phi: 1.0, t0_grid: vec![1.0, 4.0, 9.0, 16.0, 25.0], trials: samples, k_h: 1.0 };
            let w = walk_hitting(&cfg, seed)?;
            TailReport {
                center: w.start as f64,
                n_samples: samples,
                rows: w
                    .rows
                    .iter()
                    .map(|r| TailRow { m: r.t0, empirical: r.miss_prob, bound: r.bound, se: r.se, pass: r.miss_prob <= r.bound + 3.0 * r.se })
                    .collect(),
            }
        }
    };
    Ok(PresetReport { preset, report })
}
