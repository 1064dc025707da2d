mod common;

use proptest::prelude::*;
use stefan1d::maximal::{check_admissible, solve_by_sweep};
use stefan1d::measure1d::l1_distance;
use stefan1d::potential1d::{dominates, potential};
use stefan1d::stability::{lipschitz_ratio, LipschitzFamilyParams};
use stefan1d::{solve, solve_component, OpenSet1D, StepMeasure, DEFAULT_TOL};

fn instance() -> impl Strategy<Value = (StepMeasure, OpenSet1D)> {
    any::<u64>().prop_map(|seed| common::random_instance(&mut common::rng(seed)))
}

/// Unit blocks in a random domain `(c, d)`.
fn block_instance(min: usize) -> impl Strategy<Value = (Vec<(f64, f64)>, (f64, f64))> {
    (any::<u64>(), min..min + 5, -2.0..0.0f64, 0.5..3.0f64).prop_map(|(seed, n, c, len)| {
        let blocks = common::random_blocks(&mut common::rng(seed), n, c, c + len);
        (blocks, (c, c + len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conservation((mu, o) in instance()) {
        let sol = solve(&mu, &o, DEFAULT_TOL).unwrap();
        for (pair, mom) in sol.blocks.iter().zip(&sol.provenance) {
            prop_assert!((pair.mass() - mom.k).abs() <= 1e-9);
            prop_assert!((pair.first_moment() - mom.beta).abs() <= 1e-9);
        }
        prop_assert!((sol.measure.mass() - mu.mass()).abs() <= 1e-9);
    }

    #[test]
    fn idempotent((mu, o) in instance()) {
        let first = solve(&mu, &o, DEFAULT_TOL).unwrap();
        let second = solve(&first.measure, &o, DEFAULT_TOL).unwrap();
        for (a, b) in first.blocks.iter().zip(&second.blocks) {
            prop_assert!((a.e - b.e).abs() <= 1e-9 && (a.f - b.f).abs() <= 1e-9);
        }
    }

    #[test]
    fn potentials_agree_outside_components((mu, o) in instance()) {
        let sol = solve(&mu, &o, DEFAULT_TOL).unwrap();
        let (u_mu, u_nu) = (potential(&mu), potential(&sol.measure));
        let comps = o.components();
        let mut probes = vec![comps[0].0 - 0.5, comps[comps.len() - 1].1 + 0.5];
        for w in comps.windows(2) {
            probes.push(w[0].1);
            probes.push(0.5 * (w[0].1 + w[1].0));
            probes.push(w[1].0);
        }
        for y in probes {
            prop_assert!((u_mu.eval(y) - u_nu.eval(y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn feasibility_window_holds_for_admissible_densities(
        seed in any::<u64>(), c in -3.0..3.0f64, len in 0.01..4.0f64,
    ) {
        let d = c + len;
        let mu = common::random_density_on(&mut common::rng(seed), c, d);
        prop_assert!(solve_component(c, d, mu.mass(), mu.first_moment()).is_ok());
    }

    #[test]
    fn sweep_matches_closed_form((blocks, (c, d)) in block_instance(1)) {
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        let o = OpenSet1D::interval(c, d).unwrap();
        let direct = solve(&mu, &o, DEFAULT_TOL).unwrap().blocks[0];
        let swept = solve_by_sweep(&blocks, (c, d)).unwrap().solution.blocks[0];
        prop_assert!((direct.e - swept.e).abs() <= 1e-8);
        prop_assert!((direct.f - swept.f).abs() <= 1e-8);
    }

    #[test]
    fn maximal_target_dominates_candidates((blocks, (c, d)) in block_instance(2)) {
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        let o = OpenSet1D::interval(c, d).unwrap();
        let star = solve(&mu, &o, DEFAULT_TOL).unwrap().measure;
        let sweep = solve_by_sweep(&blocks, (c, d)).unwrap();
        let mut candidates = vec![mu.clone()];
        candidates.extend(sweep.intermediates.iter().cloned());
        for nu in &candidates {
            prop_assert!(check_admissible(nu, &mu, &o, DEFAULT_TOL).ordered);
            // U^ν ≥ U^{ν*}.
            prop_assert!(dominates(nu, &star, DEFAULT_TOL).ordered);
            if l1_distance(nu, &star) > 1e-9 {
                prop_assert!(!dominates(&star, nu, DEFAULT_TOL).ordered);
            }
        }
    }

    #[test]
    fn antisymmetric((mu, o) in instance()) {
        let star = solve(&mu, &o, DEFAULT_TOL).unwrap().measure;
        let forward = dominates(&mu, &star, DEFAULT_TOL).ordered;
        let backward = dominates(&star, &mu, DEFAULT_TOL).ordered;
        prop_assert!(forward);
        if backward {
            prop_assert!(l1_distance(&mu, &star) <= 1e-6);
        }
    }

    #[test]
    fn transitive((blocks, (c, d)) in block_instance(2)) {
        let mu = StepMeasure::from_blocks(&blocks).unwrap();
        let sweep = solve_by_sweep(&blocks, (c, d)).unwrap();
        let mid = &sweep.intermediates[0];
        let last = &sweep.solution.measure;
        prop_assert!(dominates(&mu, mid, DEFAULT_TOL).ordered);
        prop_assert!(dominates(mid, last, DEFAULT_TOL).ordered);
        prop_assert!(dominates(&mu, last, DEFAULT_TOL).ordered);
    }
}

#[test]
fn ratio_doubles_when_one_minus_rx_halves() {
    let (x, c, y) = (0.98, 0.99, 1e-7);
    let mut prev: Option<f64> = None;
    for j in 0..3 {
        let gap = 0.16 / 2f64.powi(j);
        let r = (1.0 - gap) / x;
        let p = LipschitzFamilyParams { x, y, r, c };
        let ratio = lipschitz_ratio(&p).unwrap().ratio.unwrap();
        if let Some(prev) = prev {
            assert!((ratio / prev - 2.0).abs() < 1e-4, "{ratio} / {prev}");
        }
        prev = Some(ratio);
    }
}
