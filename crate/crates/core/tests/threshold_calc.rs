use approx::assert_relative_eq;
use ftqc::fault::{NoiseKind, RectangleTree};
use ftqc::threshold::*;
use ftqc::Error;
use proptest::prelude::*;

#[test]
fn eta_c_examples() {
    assert_eq!(eta_c_rational(100, 1).unwrap(), (1, 4950));
    assert_relative_eq!(eta_c(100, 1).unwrap(), 1.0 / 4950.0, max_relative = 1e-14);
    for k in 1..5 {
        assert_relative_eq!(eta_c(k + 1, k).unwrap(), 1.0, epsilon = 1e-12);
    }
    let e = eta_c(1414, 1).unwrap();
    assert!((0.99e-6..=1.01e-6).contains(&e), "{e}");
    assert!(matches!(eta_c(1, 1), Err(Error::BadParams(_))));
}

#[test]
fn eta_c_general_examples() {
    let g = eta_c_general(100, 1).unwrap();
    assert!((g - 0.5 * (-1f64).exp() / 4950.0).abs() < 1e-12);
    assert_relative_eq!(g, 3.716e-5, max_relative = 1e-3);
    for (a, k) in [(10, 1), (30, 2), (100, 3), (8, 4)] {
        let r = eta_c_general(a, k).unwrap() / eta_c(a, k).unwrap();
        assert_relative_eq!(r, 0.5 * (-(k as f64)).exp(), max_relative = 1e-12);
        assert!(r < 1.0);
    }
    assert!(matches!(eta_c_general(5, 0), Err(Error::BadParams(_))));
}

#[test]
fn eta_c_universal_examples() {
    let table: Vec<(f64, f64)> = (1..10).map(|i| (i as f64 * 1e-7, 10.0)).collect();
    let (v, d) = eta_c_universal(1e-5, &table).unwrap();
    assert_eq!(d, 1e-7);
    assert_relative_eq!(v, (1e-5 - 1e-7) / 10.0, max_relative = 1e-12);
    assert_relative_eq!(eta_c_universal(1e-5, &[(2e-6, 4.0)]).unwrap().0, 2e-6, max_relative = 1e-12);
    // S(delta) = 1/delta: objective (eta' - d) d peaks at eta'/2.
    let table: Vec<(f64, f64)> = (1..100).map(|i| (i as f64 * 1e-2, 100.0 / i as f64)).collect();
    let (_, d) = eta_c_universal(1.0, &table).unwrap();
    assert_relative_eq!(d, 0.5, epsilon = 1e-12);
    assert!(matches!(eta_c_universal(1.0, &[]), Err(Error::EmptyTable)));
    assert!(eta_c_universal(1e-5, &[(2e-5, 1.0)]).is_err());
}

#[test]
fn delta_examples() {
    let d = delta_for(1e-4, 100, 1).unwrap();
    assert_relative_eq!(d, 0.495f64.ln() / 1e-4f64.ln(), epsilon = 1e-8);
    assert!((d - 0.0763).abs() < 1e-4, "{d}");
    let d5 = delta_for(1e-5, 100, 1).unwrap();
    assert!((d5 - delta_closed_form(1e-5, 100, 1)).abs() < 1e-8);
    assert_relative_eq!(d5, (4950e-5f64).ln() / 1e-5f64.ln(), epsilon = 1e-8);
    let near = delta_for(eta_c(100, 1).unwrap() * (1.0 - 1e-9), 100, 1).unwrap();
    assert!(near < 1e-6);
    assert!(matches!(delta_for(1e-3, 100, 1), Err(Error::AboveThreshold)));
}

#[test]
fn the_two_deltas_differ() {
    let eta = 1e-6;
    let a = delta_for(eta, 100, 1).unwrap();
    let b = delta_small_for(eta, 100, 1).unwrap();
    let x: f64 = 2.0 * eta;
    assert_relative_eq!(b, (1.0 + 4950f64.ln() + 2.0 * x.ln()) / x.ln() - 1.0, epsilon = 1e-8);
    assert!((a - b).abs() > 1e-3);
    // Below eta_c but outside the norm lemma's range.
    assert!(delta_for(1e-4, 100, 1).is_ok());
    assert!(matches!(delta_small_for(1e-4, 100, 1), Err(Error::AboveThreshold)));
}

#[test]
fn sparse_prob_bound_examples() {
    assert_relative_eq!(sparse_prob_bound(1e-4, 0.05, 0), 1.0 - 1e-4, max_relative = 1e-14);
    assert_relative_eq!(sparse_prob_bound(1e-4, 0.05, 3), 1.0 - 1e-4f64.powf(1.157625), max_relative = 1e-14);
    let mut prev = 0.0;
    for r in 0..8 {
        let v = sparse_prob_bound(0.01, 0.2, r);
        assert!(v > prev);
        prev = v;
    }
    // Tiny complements stay resolvable in log form.
    assert!(sparse_prob_bound(1e-4, 1.0, 6) < 1.0 || 1e-4f64.powi(64) < f64::EPSILON);
}

#[test]
fn effective_rate_examples() {
    let e = effective_rate(1e-4, 100, 1, 3);
    for (got, want) in e.iter().zip([4.950e-5, 1.2129e-5, 7.28e-7]) {
        assert_relative_eq!(*got, want, max_relative = 1e-3);
    }
    let c = eta_c(100, 1).unwrap();
    for v in effective_rate(c, 100, 1, 5) {
        assert!((v - c).abs() < 1e-12);
    }
    let up = effective_rate(1.1 * c, 100, 1, 4);
    assert!(up[0] > 1.1 * c && up.windows(2).all(|w| w[1] > w[0]));
    assert_relative_eq!(threshold_fixed_point(100, 1).unwrap(), c, max_relative = 1e-12);
    assert_relative_eq!(threshold_fixed_point(10, 2).unwrap(), 120f64.powf(-0.5), max_relative = 1e-12);
}

#[test]
fn minimal_bad_counts() {
    assert_eq!(minimal_bad_count(4, 1, 1).unwrap(), (6.0, Some(6)));
    let (b, exact) = minimal_bad_count(4, 1, 2).unwrap();
    assert_relative_eq!(b, 216.0, max_relative = 1e-12);
    // Two bad children each hit by a pair: C(4,2) child choices times 6*6 pair choices.
    assert_eq!(exact, Some(216));
    assert_eq!(minimal_bad_count(9, 3, 0).unwrap().0, 1.0);
    assert_eq!(minimal_bad_count(3, 1, 2).unwrap(), (27.0, Some(27)));
    assert_eq!(minimal_bad_count(100, 1, 3).unwrap().1, None);
}

#[test]
fn brute_force_within_closed_form() {
    for a in 2..=5u64 {
        for r in 0..=2u32 {
            let (b, exact) = minimal_bad_count(a, 1, r).unwrap();
            let x = exact.expect("enumerated");
            assert!(x as f64 <= b + 1e-9, "A={a} r={r}: {x} > {b}");
        }
    }
}

#[test]
fn correlated_bound_examples() {
    let b2 = correlated_bad_bound(2.0, 1e3, 100, 1, 1e-4, 2).unwrap();
    assert_relative_eq!(b2, 2000.0 * 0.495f64.powi(4), max_relative = 1e-12);
    assert!((b2 - 120.1).abs() < 0.1);
    let b4 = correlated_bad_bound(2.0, 1e3, 100, 1, 1e-4, 4).unwrap();
    // 2000 * 0.495^16 = 0.02598; below 1 from r = 4 on.
    assert_relative_eq!(b4, 2000.0 * 0.495f64.powi(16), max_relative = 1e-12);
    assert!((b4 - 0.02598).abs() < 1e-5, "{b4}");
    let mut prev = f64::INFINITY;
    for r in 0..6 {
        let v = correlated_bad_bound(2.0, 1e3, 100, 1, 1e-4, r).unwrap();
        assert!(v < prev);
        prev = v;
    }
    assert_relative_eq!(correlated_bad_bound(1.0, 1.0, 100, 1, 1e-4, 0).unwrap(), 0.495, max_relative = 1e-12);
    assert!(matches!(correlated_bad_bound(1.0, 1.0, 100, 1, 1e-3, 1), Err(Error::AboveThreshold)));
}

#[test]
fn monte_carlo_matches_binomial() {
    let tree = RectangleTree::uniform(20, 1, 1);
    let mc = monte_carlo_sparseness(&tree, 0.01, 1, 100_000, 7, NoiseKind::Iid).unwrap();
    let exact = 1.0 - 0.99f64.powi(20) - 20.0 * 0.01 * 0.99f64.powi(19);
    assert!((exact - 0.01686).abs() < 1e-5);
    assert!(((1.0 - mc.estimate) - exact).abs() < 3.0 * mc.stderr, "{mc:?}");
    assert_eq!(mc.blocks.len(), 10);
    let zero = monte_carlo_sparseness(&tree, 0.0, 1, 1000, 1, NoiseKind::Iid).unwrap();
    assert_eq!(zero.estimate, 1.0);
    assert!(monte_carlo_sparseness(&tree, 0.01, 1, 999, 1, NoiseKind::Iid).is_err());
}

#[test]
fn monte_carlo_respects_bound_and_seed() {
    let tree = RectangleTree::uniform(6, 2, 1);
    let eta = 0.01;
    let d = delta_for(eta, 6, 1).unwrap();
    let mc = monte_carlo_sparseness(&tree, eta, 1, 20_000, 3, NoiseKind::Iid).unwrap();
    assert!(mc.estimate >= sparse_prob_bound(eta, d, 2) - 3.0 * mc.stderr);
    let again = monte_carlo_sparseness(&tree, eta, 1, 20_000, 3, NoiseKind::Iid).unwrap();
    assert_eq!(mc, again);
    let burst = monte_carlo_sparseness(&tree, eta, 1, 20_000, 3, NoiseKind::Burst { mean_burst: 4.0 }).unwrap();
    assert!(burst.estimate < mc.estimate, "{burst:?} vs {mc:?}");
}

proptest! {
    #[test]
    fn threshold_condition_equivalence(a in 2u64..2000, le in -9.0f64..-0.5) {
        let eta = 10f64.powf(le);
        let c = ln_binom(a, 2).exp();
        let below = eta < eta_c(a, 1).unwrap();
        let contracts = c * eta * eta < eta;
        prop_assume!((eta * c - 1.0).abs() > 1e-9);
        prop_assert_eq!(below, contracts);
    }

    #[test]
    fn effective_rate_decreases_iff_below(a in 3u64..500, k in 1u64..3, f in 0.05f64..3.0) {
        prop_assume!((f - 1.0).abs() > 1e-3);
        let fp = threshold_fixed_point(a, k).unwrap();
        let eps0 = f * fp;
        prop_assume!(eps0 < 1.0);
        let e = effective_rate(eps0, a, k, 1)[0];
        prop_assert_eq!(e < eps0, f < 1.0);
    }

    #[test]
    fn delta_bisection_matches_closed_form(a in 2u64..300, le in -9.0f64..-1.0) {
        let eta = 10f64.powf(le);
        prop_assume!(eta < eta_c(a, 1).unwrap());
        let d = delta_for(eta, a, 1).unwrap();
        prop_assert!((d - delta_closed_form(eta, a, 1)).abs() < 1e-8);
    }
}
