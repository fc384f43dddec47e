use mixcut::bernoulli_laplace::{
    bl_coupled_step_tracked, bl_equilibrium, bl_kernel, bl_mean, bl_tv_profile, bl_variance_profile, r_n, BLCoupledState, BLParams,
};
use mixcut::cutoff::{check_cutoff, CutoffStart};
use mixcut::markov::{evolve_distribution, tv_distance, ProbVector};
use mixcut::rng::ensemble;
use mixcut::SeedSpec;
use proptest::prelude::*;

#[test]
fn mean_formula_matches_propagation() {
    let p = BLParams::new(20).unwrap();
    let k = bl_kernel(p).unwrap();
    for j in 0..=20 {
        let mut law = ProbVector::point_mass(21, j).unwrap();
        for r in 0..=200 {
            let exact = bl_mean(j, p, r).unwrap();
            assert!((law.mean() - exact).abs() <= 1e-10, "j={j} r={r}: {} vs {exact}", law.mean());
            law = k.push_forward(&law).unwrap();
        }
    }
}

#[test]
fn variance_below_six_n_from_every_start() {
    for n in [20usize, 100] {
        let p = BLParams::new(n).unwrap();
        let r_max = 2 * r_n(0.0, p).unwrap();
        for j in 0..=n {
            let worst = bl_variance_profile(p, j, r_max).unwrap().into_iter().fold(0.0, f64::max);
            assert!(worst < 6.0 * n as f64, "n={n} j={j}: {worst}");
        }
    }
}

#[test]
fn full_urn_is_the_worst_start() {
    let p = BLParams::new(20).unwrap();
    let worst = bl_tv_profile(p, 20, 300).unwrap();
    for j in 0..20 {
        let prof = bl_tv_profile(p, j, 300).unwrap();
        for r in 0..=300 {
            assert!(prof.values[r] <= worst.values[r] + 1e-12, "j={j} r={r}");
        }
    }
}

/// Each copy of the coupled pair, viewed alone, steps like the urn chain.
#[test]
fn coupling_marginals_match_kernel_rows() {
    let n = 20;
    let p = BLParams::new(n).unwrap();
    let k = bl_kernel(p).unwrap();
    let trials = 100_000;
    let states: Vec<(usize, usize)> = (0..n).map(|j| (j, j + 1)).chain([(0, 0), (7, 7), (20, 20)]).collect();
    for (idx, &(lo, hi)) in states.iter().enumerate() {
        let s = BLCoupledState::new(lo, hi, p).unwrap();
        let moves = ensemble(SeedSpec::new(77, (idx as u64) << 32), trials, |_, rng| bl_coupled_step_tracked(s, n, rng));
        for (copy, from) in [(0usize, lo), (1, hi)] {
            for to in from.saturating_sub(1)..=(from + 1).min(n) {
                let want = k.get(from, to);
                let got = moves.iter().filter(|m| if copy == 0 { m.0 == to } else { m.1 == to }).count() as f64 / trials as f64;
                let se = (want * (1.0 - want) / trials as f64).sqrt();
                assert!((got - want).abs() <= 5.0 * se + 1e-12, "({lo},{hi}) copy {copy} -> {to}: {got} vs {want}");
            }
        }
    }
}

/// The analytic cut-off time and the steepest-drop time of the exact
/// profile give the same verdicts, with s(ε) within one grid step.
#[test]
fn steepest_drop_agrees_with_analytic_travel_time() {
    let n = 128usize;
    let nf = n as f64;
    let prof = bl_tv_profile(BLParams::new(n).unwrap(), n, 2000).unwrap();
    let eps = [0.1, 0.2, 0.3];
    let s_grid: Vec<f64> = (0..=16).map(|i| i as f64 * 0.25).collect();
    let analytic = nf * nf.ln() / 4.0;
    let steep = prof.steepest_drop_time();
    let run = |t: f64| {
        check_cutoff(&[CutoffStart { label: "n".into(), travel_time: t, lower: &prof, upper: &prof }], nf, &eps, &s_grid).unwrap()
    };
    let (a, b) = (run(analytic), run(steep));
    assert_eq!(a.pass, b.pass);
    for (x, y) in a.s_of_eps.iter().zip(&b.s_of_eps) {
        assert!((x.unwrap() - y.unwrap()).abs() <= 0.25 + 1e-12, "{x:?} vs {y:?} (t_n {analytic}, steepest {steep})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_stochastic_and_reversible(n in 2usize..300) {
        let p = BLParams::new(n).unwrap();
        let k = bl_kernel(p).unwrap();
        let pi = bl_equilibrium(p).unwrap();
        for j in 0..=n {
            let row: f64 = k.row(j).iter().sum();
            prop_assert!((row - 1.0).abs() <= 1e-12);
            if j < n {
                let flow = pi.as_slice()[j] * k.get(j, j + 1) - pi.as_slice()[j + 1] * k.get(j + 1, j);
                prop_assert!(flow.abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn distance_to_equilibrium_never_increases(n in 2usize..60, frac in 0.0f64..=1.0) {
        let p = BLParams::new(n).unwrap();
        let j = (frac * n as f64).round() as usize;
        let prof = bl_tv_profile(p, j, 4 * n).unwrap();
        for w in prof.values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let pi = bl_equilibrium(p).unwrap();
        let law = evolve_distribution(&bl_kernel(p).unwrap(), &ProbVector::point_mass(n + 1, j).unwrap(), 4 * n).unwrap();
        prop_assert!((tv_distance(&law, &pi).unwrap() - prof.values[4 * n]).abs() <= 1e-12);
    }

    #[test]
    fn mean_relaxes_geometrically(n in 2usize..500, frac in 0.0f64..=1.0, r in 0usize..2000) {
        let p = BLParams::new(n).unwrap();
        let j = (frac * n as f64).round() as usize;
        let m = bl_mean(j, p, r).unwrap();
        let half = n as f64 / 2.0;
        prop_assert!((m - half).abs() <= (j as f64 - half).abs() + 1e-9);
    }
}
