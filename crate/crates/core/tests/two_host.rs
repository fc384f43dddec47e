use mixcut::markov::{CtmcSim, RateFunction};
use mixcut::rng::ensemble;
use mixcut::two_host::{
    closed_form_c, coalescence_tv_upper, default_h, deviation_exit_fraction, distance_generator, epi_cutoff_experiment, equilibrium_sample,
    mean_trajectory, move_rates, region_predicates, spectral_decompose, start_grid, travel_time, CoupledEpiState, CoupledRates,
    CutoffExperimentConfig, EpiParams, EpiState,
};
use mixcut::SeedSpec;
use proptest::prelude::*;

fn subcritical() -> impl Strategy<Value = EpiParams> {
    (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 1u64..1000)
        .prop_filter_map("supercritical", |(a, b, g, d, m, v, n)| EpiParams::new(a, b, g, d, m, v, n).ok())
}

fn apply(a: [[f64; 2]; 2], z: [f64; 2]) -> [f64; 2] {
    [a[0][0] * z[0] + a[0][1] * z[1], a[1][0] * z[0] + a[1][1] * z[1]]
}

/// Classical fourth-order Runge–Kutta for `x' = A x + n (μ, ν)`.
fn rk4(p: &EpiParams, x0: [f64; 2], t: f64, steps: usize) -> [f64; 2] {
    let a = p.drift_matrix();
    let n = p.nf();
    let f = |x: [f64; 2]| {
        let d = apply(a, x);
        [d[0] + n * p.mu, d[1] + n * p.nu]
    };
    let h = t / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f([x[0] + h / 2.0 * k1[0], x[1] + h / 2.0 * k1[1]]);
        let k3 = f([x[0] + h / 2.0 * k2[0], x[1] + h / 2.0 * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        for i in 0..2 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectral_identities(p in subcritical()) {
        let s = spectral_decompose(&p).unwrap();
        let a = p.drift_matrix();
        prop_assert!(s.rho > 0.0 && s.rho_prime > s.rho);
        for (v, lam) in [(s.v, -s.rho), (s.v_prime, -s.rho_prime)] {
            let av = apply(a, v);
            let scale = 1.0 + lam.abs();
            prop_assert!((av[0] - lam * v[0]).abs() <= 1e-12 * scale);
            prop_assert!((av[1] - lam * v[1]).abs() <= 1e-12 * scale);
        }
        let th = s.theta;
        prop_assert!(th > 0.0);
        prop_assert!(((p.delta - p.alpha / th) - (p.gamma - p.beta * th)).abs() <= 1e-12 * (1.0 + p.gamma + p.beta * th));
        let ac = apply(a, s.c);
        prop_assert!((ac[0] + p.mu).abs() <= 1e-12 * (1.0 + p.mu));
        prop_assert!((ac[1] + p.nu).abs() <= 1e-12 * (1.0 + p.nu));
        let cf = closed_form_c(&p);
        prop_assert!((cf[0] - s.c[0]).abs() <= 1e-12 * (1.0 + cf[0]));
        prop_assert!((cf[1] - s.c[1]).abs() <= 1e-12 * (1.0 + cf[1]));
    }

    #[test]
    fn mean_matches_ode_solution(p in subcritical(), x1 in 0u64..2000, x2 in 0u64..2000, t in 0.0f64..3.0) {
        let x = EpiState::new(x1, x2);
        let m = mean_trajectory(&p, x, t).unwrap();
        let o = rk4(&p, [x1 as f64, x2 as f64], t, 4000);
        let scale = 1.0 + o[0].abs().max(o[1].abs());
        prop_assert!((m[0] - o[0]).abs() <= 1e-8 * scale, "{m:?} vs {o:?}");
        prop_assert!((m[1] - o[1]).abs() <= 1e-8 * scale, "{m:?} vs {o:?}");
    }

    /// Every move of either copy happens at its own chain's rate, summed over
    /// the coupled transitions that carry it.
    #[test]
    fn coupled_rates_have_exact_marginals(p in subcritical(), u1 in 0u64..50, u2 in 0u64..50, v1 in 0u64..50, v2 in 0u64..50) {
        let s = CoupledEpiState::new(EpiState::new(u1, u2), EpiState::new(v1, v2));
        let mut out = Vec::new();
        CoupledRates { params: p }.transitions(&s, &mut out);
        for (copy, x) in [(0, s.u), (1, s.v)] {
            let want = move_rates(&p, x);
            let mut got = [0.0; 4];
            for (next, r) in &out {
                let y = if copy == 0 { next.u } else { next.v };
                let k = match (y.x1 as i64 - x.x1 as i64, y.x2 as i64 - x.x2 as i64) {
                    (0, 0) => continue,
                    (1, 0) => 0,
                    (0, 1) => 1,
                    (-1, 0) => 2,
                    (0, -1) => 3,
                    d => return Err(TestCaseError::fail(format!("copy moved by {d:?}"))),
                };
                got[k] += r;
            }
            for k in 0..4 {
                prop_assert!((got[k] - want[k]).abs() <= 1e-9 * (1.0 + want[k]), "copy {copy} move {k}: {} vs {}", got[k], want[k]);
            }
        }
    }

    #[test]
    fn distance_drift_is_at_most_minus_rho_d(p in subcritical(), u1 in 0u64..40, u2 in 0u64..40, v1 in 0u64..40, v2 in 0u64..40) {
        let s = spectral_decompose(&p).unwrap();
        let c = CoupledEpiState::new(EpiState::new(u1, u2), EpiState::new(v1, v2));
        let d = c.distance(s.theta);
        prop_assert!(distance_generator(&p, s.theta, c) <= -s.rho * d + 1e-9 * (1.0 + d));
    }
}

/// Shifting the start along the slow eigenvector by a factor e^{ρs} adds s to the travel time.
#[test]
fn travel_time_shifts_along_the_slow_direction() {
    let p = EpiParams::symmetric(10_000);
    let base = travel_time(&p, EpiState::new(10_500, 10_500)).unwrap();
    let shifted = travel_time(&p, EpiState::new(10_000 + (500.0 * 2f64.exp()).round() as u64, 10_000 + (500.0 * 2f64.exp()).round() as u64)).unwrap();
    assert!((shifted - base - 2.0).abs() < 1e-3, "{base} {shifted}");
}

/// First jump of the coupled process: each copy's move frequencies match
/// its own rates over the coupled exit rate.
#[test]
fn coupling_marginals_by_first_event() {
    let p = EpiParams::symmetric(10);
    let states = [
        CoupledEpiState::new(EpiState::new(5, 5), EpiState::new(5, 6)),
        CoupledEpiState::new(EpiState::new(0, 3), EpiState::new(2, 3)),
        CoupledEpiState::new(EpiState::new(12, 1), EpiState::new(4, 9)),
    ];
    let rates = CoupledRates { params: p };
    let trials = 100_000;
    for (i, s) in states.into_iter().enumerate() {
        let total = rates.exit_rate(&s);
        let firsts = ensemble(SeedSpec::new(5, (i as u64) << 32), trials, |_, rng| {
            let mut sim = CtmcSim::new(&rates, s, rng);
            sim.advance_until(f64::INFINITY, |x| *x != s).unwrap();
            *sim.state()
        });
        for (copy, x) in [(0, s.u), (1, s.v)] {
            let r = move_rates(&p, x);
            let targets = [
                EpiState::new(x.x1 + 1, x.x2),
                EpiState::new(x.x1, x.x2 + 1),
                EpiState::new(x.x1.wrapping_sub(1), x.x2),
                EpiState::new(x.x1, x.x2.wrapping_sub(1)),
            ];
            for k in 0..4 {
                let want = r[k] / total;
                let got = firsts.iter().filter(|f| (if copy == 0 { f.u } else { f.v }) == targets[k]).count() as f64 / trials as f64;
                let se = (want * (1.0 - want) / trials as f64).sqrt();
                assert!((got - want).abs() <= 5.0 * se + 1e-12, "state {i} copy {copy} move {k}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn grid_starts_lie_in_e_n_and_inside_d_n() {
    for (n, zeta) in [(100u64, 0.5), (400, 0.5), (400, 0.3), (1000, 0.8)] {
        let p = EpiParams::symmetric(n);
        let r = region_predicates(&p, zeta, None).unwrap();
        let grid = start_grid(&p, zeta).unwrap();
        assert!(!grid.is_empty());
        for (label, x) in grid {
            assert!(r.in_e(x) && r.in_d(x), "{label} {x:?}");
        }
    }
    let p = EpiParams::new(0.5, 1.5, 1.0, 2.0, 0.7, 0.3, 200).unwrap();
    let r = region_predicates(&p, 0.5, None).unwrap();
    for x1 in (0..1200).step_by(7) {
        for x2 in (0..1200).step_by(7) {
            let x = EpiState::new(x1, x2);
            if r.in_e(x) {
                assert!(r.in_d(x), "{x:?}");
            }
        }
    }
}

/// Deviation check at n = 100: runs from E_n(½) starts essentially never leave D_n(2H) before t = n.
#[test]
fn runs_stay_inside_the_doubled_region() {
    let p = EpiParams::symmetric(100);
    let s = spectral_decompose(&p).unwrap();
    let h = default_h(&p, &s, 0.5);
    let starts: Vec<EpiState> = start_grid(&p, 0.5).unwrap().into_iter().map(|(_, x)| x).collect();
    let frac = deviation_exit_fraction(&p, 2.0 * h, &starts, 100.0, 1100, SeedSpec::root(6)).unwrap();
    assert!(frac < 1e-3, "{frac}");
}

#[test]
fn equilibrium_samples_are_non_negative_and_reproducible() {
    let p = EpiParams::symmetric(50);
    let a = equilibrium_sample(&p, 200, SeedSpec::root(2)).unwrap();
    let b = equilibrium_sample(&p, 200, SeedSpec::root(2)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().any(|x| *x != a[0]));
}

#[test]
fn upper_profile_from_equilibrium_start_decays() {
    let p = EpiParams::symmetric(100);
    let prof = coalescence_tv_upper(&p, EpiState::new(150, 150), &[0.0, 2.0, 4.0, 6.0], 1000, SeedSpec::root(8)).unwrap();
    let se = prof.se.as_ref().unwrap();
    for i in 1..prof.values.len() {
        assert!(prof.values[i] <= prof.values[i - 1] + 3.0 * se[i].max(se[i - 1]));
    }
    assert!(prof.values[3] < 0.2);
}

/// A window other than 1 stretches the grids, and the check still runs.
#[test]
fn cutoff_experiment_honours_the_window() {
    let mut cfg = CutoffExperimentConfig::new(EpiParams::symmetric(60), 0.5, 1000, 300);
    cfg.window = 2.0;
    cfg.s_grid = (0..=16).map(|i| i as f64 * 0.25).collect();
    let rep = epi_cutoff_experiment(&cfg, SeedSpec::root(9)).unwrap();
    assert_eq!(rep.cutoff.window, 2.0);
    for st in &rep.starts {
        assert!((st.upper.times.last().unwrap() - st.travel_time - 8.0).abs() < 1e-9);
    }
    assert!(rep.cutoff.pass.iter().all(|p| *p), "{:?}", rep.cutoff.s_of_eps);
}
