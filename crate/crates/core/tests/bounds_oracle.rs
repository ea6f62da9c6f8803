//! Bound arithmetic against direct evaluation.

use pac_core::bounds::{
    beta_select, epsilon_margin, expected_c1_bound, pareto_ccdf_bound, wrong_path_bound,
};
use pac_core::metric::build_bias;
use pac_core::rate_profile::{partial_rates, CodeSpec};
use pac_core::{BiasRule, BitChannelTable, SnrSpec};

fn setup() -> (CodeSpec, BitChannelTable) {
    let spec = CodeSpec::reed_muller(128, 64, None).unwrap();
    let table = BitChannelTable::build(&SnrSpec::ebn0(2.5, 0.5).unwrap(), 128).unwrap();
    (spec, table)
}

#[test]
fn epsilon_by_prefix_sums() {
    let (spec, table) = setup();
    let bias = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.0).unwrap();
    let rates = partial_rates(&spec.info_set, 128);

    // Running sums, one prefix at a time.
    let mut best = f64::INFINITY;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for l in 1..=128 {
        let lambda = spec.info_set.iter().filter(|&&i| i <= l).count();
        assert_eq!(rates.lambda[l - 1], lambda);
        let r_l = lambda as f64 / l as f64;
        lhs += r_l;
        rhs += 0.5 * (table.cutoff[l - 1] + bias.b[l - 1]);
        best = best.min(rhs - lhs);
    }
    let got = epsilon_margin(0.5, &bias, &table, &rates).unwrap();
    assert!((got.epsilon - best).abs() < 1e-12);
    assert_eq!(got.valid, best > 0.0);

    // At r = 1/2 with b = E0 the margin is min_l sum (E0_i - R_i).
    let mut acc = 0.0;
    let mut reduced = f64::INFINITY;
    for l in 0..128 {
        acc += table.cutoff[l] - rates.rate[l];
        reduced = reduced.min(acc);
    }
    assert!((got.epsilon - reduced).abs() < 1e-12);
}

#[test]
fn wrong_path_exponent_is_cutoff_sum() {
    let (spec, table) = setup();
    let bias = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.0).unwrap();
    for l in [40, 64, 100, 128] {
        let sum: f64 = table.cutoff[..l].iter().sum();
        let want = ((l + 1) as f64 * (-sum).exp2()).min(1.0);
        let got = wrong_path_bound(l, 0.0, 0.5, &bias, &table).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "l = {l}");
    }
}

#[test]
fn beta_for_small_rm_profile_by_enumeration() {
    let rates = partial_rates(&[4, 6, 7, 8], 8);
    let r = [
        0.0,
        0.0,
        0.0,
        1.0 / 4.0,
        1.0 / 5.0,
        2.0 / 6.0,
        3.0 / 7.0,
        4.0 / 8.0,
    ];
    let mut want = f64::INFINITY;
    for l in 4..=8 {
        let s: f64 = r[..l].iter().sum();
        want = want.min(s / (l as f64 * r[l - 1]));
    }
    assert!((beta_select(&rates).unwrap() - want).abs() < 1e-15);
}

#[test]
fn pareto_and_c1_arithmetic() {
    // (4 / (100 (1 - 2^-0.5)^2))^2, evaluated separately.
    assert!((pareto_ccdf_bound(100.0, 2.0, 1.0).unwrap() - 0.217_411_601_590_253_9).abs() < 1e-12);
    assert_eq!(expected_c1_bound(1.0).unwrap(), 16.0);
    // Markov consistency: at L = E[C1] bound with beta = 1 + tiny, the Pareto bound is at most 1.
    let e = expected_c1_bound(0.8).unwrap();
    assert!(pareto_ccdf_bound(e, 1.000_001, 0.8).unwrap() <= 1.0);
}
