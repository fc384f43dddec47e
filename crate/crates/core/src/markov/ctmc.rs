//! Event-driven simulation of continuous-time chains.
//!
//! A chain is given by a [`RateFunction`]: from each state, the list of
//! distinct target states with their (strictly positive) jump rates. The
//! simulator draws an exponential holding time with the total exit rate and
//! then a target proportionally to its rate.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeedSpec;

pub const DEFAULT_MAX_JUMPS: u64 = 100_000_000;

pub trait RateFunction {
    type State: Clone + PartialEq;

    /// Appends every `(target, rate)` out of `state`. Targets differ from
    /// `state`; zero-rate moves are left out.
    fn transitions(&self, state: &Self::State, out: &mut Vec<(Self::State, f64)>);

    fn exit_rate(&self, state: &Self::State) -> f64 {
        let mut buf = Vec::new();
        self.transitions(state, &mut buf);
        buf.iter().map(|(_, r)| r).sum()
    }
}

/// Adapts a closure into a [`RateFunction`].
pub struct FnRates<S, F> {
    f: F,
    _state: std::marker::PhantomData<fn(&S)>,
}

impl<S, F> FnRates<S, F>
where
    F: Fn(&S, &mut Vec<(S, f64)>),
{
    pub fn new(f: F) -> Self {
        Self { f, _state: std::marker::PhantomData }
    }
}

impl<S: Clone + PartialEq, F: Fn(&S, &mut Vec<(S, f64)>)> RateFunction for FnRates<S, F> {
    type State = S;
    fn transitions(&self, state: &S, out: &mut Vec<(S, f64)>) {
        (self.f)(state, out)
    }
}

/// A realized trajectory on `[0, t_end]`: `states[i + 1]` is entered at `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub t_end: f64,
}

impl<S: PartialEq> JumpPath<S> {
    pub fn jumps(&self) -> usize {
        self.times.len()
    }

    pub fn final_state(&self) -> &S {
        self.states.last().expect("a path always holds its start state")
    }

    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> &S {
        let k = self.times.partition_point(|&s| s <= t);
        &self.states[k]
    }

    pub fn is_valid(&self) -> bool {
        self.states.len() == self.times.len() + 1
            && self.times.windows(2).all(|w| w[0] < w[1])
            && self.times.iter().all(|&t| (0.0..=self.t_end).contains(&t))
            && self.states.windows(2).all(|w| w[0] != w[1])
    }
}

/// Stepper holding the current state and clock of one trajectory.
pub struct CtmcSim<'a, R: RateFunction, G: Rng> {
    rates: &'a R,
    rng: &'a mut G,
    state: R::State,
    time: f64,
    jumps: u64,
    max_jumps: u64,
    buf: Vec<(R::State, f64)>,
}

impl<'a, R: RateFunction, G: Rng> CtmcSim<'a, R, G> {
    pub fn new(rates: &'a R, x0: R::State, rng: &'a mut G) -> Self {
        Self { rates, rng, state: x0, time: 0.0, jumps: 0, max_jumps: DEFAULT_MAX_JUMPS, buf: Vec::new() }
    }

    pub fn with_max_jumps(mut self, cap: u64) -> Self {
        self.max_jumps = cap;
        self
    }

    pub fn state(&self) -> &R::State {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn jumps(&self) -> u64 {
        self.jumps
    }

    /// Draws the next event. Returns `None` (and leaves the chain at
    /// `horizon`) if no jump happens before `horizon`.
    fn step(&mut self, horizon: f64) -> Result<Option<()>> {
        self.buf.clear();
        self.rates.transitions(&self.state, &mut self.buf);
        let mut total = 0.0;
        for &(_, r) in &self.buf {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::NonPositiveRate { rate: r });
            }
            total += r;
        }
        if total == 0.0 {
            self.time = horizon;
            return Ok(None);
        }
        let hold: f64 = Exp1.sample(self.rng);
        let next = self.time + hold / total;
        if next > horizon {
            self.time = horizon;
            return Ok(None);
        }
        if self.jumps >= self.max_jumps {
            return Err(Error::Explosion { cap: self.max_jumps, t_end: horizon });
        }
        let u = self.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = self.buf.len() - 1;
        for (i, &(_, r)) in self.buf.iter().enumerate() {
            acc += r;
            if u < acc {
                pick = i;
                break;
            }
        }
        self.state = self.buf.swap_remove(pick).0;
        self.time = next;
        self.jumps += 1;
        Ok(Some(()))
    }

    /// Runs to `t_end`, calling `on_jump(time, new_state)` after each jump.
    pub fn advance_to(&mut self, t_end: f64, mut on_jump: impl FnMut(f64, &R::State)) -> Result<()> {
        if t_end < self.time {
            return Err(Error::InvalidParameter(format!("cannot run backwards from {} to {t_end}", self.time)));
        }
        while self.step(t_end)?.is_some() {
            on_jump(self.time, &self.state);
        }
        Ok(())
    }

    /// Runs until `stop(state)` holds or `t_end` is reached; returns the stopping time.
    pub fn advance_until(&mut self, t_end: f64, stop: impl Fn(&R::State) -> bool) -> Result<Option<f64>> {
        if stop(&self.state) {
            return Ok(Some(self.time));
        }
        while self.step(t_end)?.is_some() {
            if stop(&self.state) {
                return Ok(Some(self.time));
            }
        }
        Ok(None)
    }
}

/// Exact simulation on `[0, t_end]`.
pub fn simulate_ctmc<R: RateFunction>(rf: &R, x0: R::State, t_end: f64, seed: SeedSpec) -> Result<JumpPath<R::State>> {
    simulate_ctmc_capped(rf, x0, t_end, seed, DEFAULT_MAX_JUMPS)
}

pub fn simulate_ctmc_capped<R: RateFunction>(
    rf: &R,
    x0: R::State,
    t_end: f64,
    seed: SeedSpec,
    max_jumps: u64,
) -> Result<JumpPath<R::State>> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must be >= 0")));
    }
    let mut rng = seed.rng();
    let mut sim = CtmcSim::new(rf, x0.clone(), &mut rng).with_max_jumps(max_jumps);
    let mut times = Vec::new();
    let mut states = vec![x0];
    sim.advance_to(t_end, |t, s| {
        times.push(t);
        states.push(s.clone());
    })?;
    Ok(JumpPath { times, states, t_end })
}

/// States at each (non-decreasing) observation time.
pub fn observe_at<R: RateFunction, G: Rng>(rf: &R, x0: R::State, times: &[f64], rng: &mut G) -> Result<Vec<R::State>> {
    let mut sim = CtmcSim::new(rf, x0, rng);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        sim.advance_to(t, |_, _| {})?;
        out.push(sim.state().clone());
    }
    Ok(out)
}
