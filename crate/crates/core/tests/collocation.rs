mod common;

use approx::assert_relative_eq;
use common::spec_strategy;
use ebsampling::collocation::{
    collocation_matrix, commutator_sides, hermite_solve, l_operator_translate, ls_factorization_check,
    schoenberg_whitney, schoenberg_whitney_for_translates, weight_exponents,
};
use ebsampling::points::expand_points;
use ebsampling::{Error, ExpPolySpline, PointConfig, SplineSpec};
use proptest::prelude::*;

fn cfg(x: &[f64], mu: &[usize]) -> PointConfig {
    PointConfig::new(x.to_vec(), mu.to_vec()).unwrap()
}

fn poly(m: usize) -> ExpPolySpline {
    ExpPolySpline::build(&SplineSpec::polynomial(m)).unwrap()
}

#[test]
fn expansion_examples() {
    let e = expand_points(&cfg(&[0.5, 4.0, 7.7], &[1, 0, 2]));
    assert_eq!(e.t, vec![0.5, 0.5, 4.0, 7.7, 7.7, 7.7]);
    assert_eq!(e.d, vec![0, 1, 0, 0, 1, 2]);
    let e = expand_points(&cfg(&[1.0], &[0]));
    assert_eq!((e.t, e.d), (vec![1.0], vec![0]));
    let e = expand_points(&cfg(&[0.0, 1.0], &[2, 0]));
    assert_eq!((e.t, e.d), (vec![0.0, 0.0, 0.0, 1.0], vec![0, 1, 2, 0]));
}

#[test]
fn interlacing_examples() {
    let bad = schoenberg_whitney(&cfg(&[0.5, 4.0, 7.7], &[1, 0, 2]), 0, 5).unwrap();
    assert!(!bad.sw_ok);
    assert_eq!(bad.violations.len(), 1);
    let v = bad.violations[0];
    assert_eq!((v.index, v.lower, v.upper, v.closed_left), (1, 1.0, 5.0, false));
    assert!(schoenberg_whitney(&cfg(&[1.5, 4.0, 7.7], &[1, 0, 2]), 0, 5).unwrap().sw_ok);
    assert!(schoenberg_whitney(&cfg(&[0.5], &[0]), 0, 2).unwrap().sw_ok);
    assert!(matches!(
        schoenberg_whitney_for_translates(&cfg(&[0.5], &[0]), 0, 2, 2),
        Err(Error::DimensionMismatch { expected: 2, found: 1 })
    ));
}

#[test]
fn maximal_multiplicity_is_closed_on_the_left() {
    // μ = m - 1 at the lower endpoint is admissible, just below is not
    assert!(schoenberg_whitney(&cfg(&[1.0], &[1]), 0, 2).unwrap().sw_ok);
    assert!(!schoenberg_whitney(&cfg(&[0.999], &[1]), 0, 2).unwrap().sw_ok);
    let cm = collocation_matrix(&poly(2), &cfg(&[1.0], &[1]), 0).unwrap();
    assert!(cm.determinant().abs() > 0.1);
}

#[test]
fn failing_example_has_a_zero_block() {
    let cm = collocation_matrix(&poly(5), &cfg(&[0.5, 4.0, 7.7], &[1, 0, 2]), 0).unwrap();
    // only T_0 φ is alive at 0.5
    for row in 0..2 {
        assert!(cm.entries[(row, 0)] != 0.0);
        for col in 1..6 {
            assert_eq!(cm.entries[(row, col)], 0.0);
        }
    }
    let (scaled, _) = cm.scaled_determinant();
    assert!(scaled.abs() <= 1e-10);
    assert!(cm.is_numerically_singular());

    let good = collocation_matrix(&poly(5), &cfg(&[1.5, 4.0, 7.7], &[1, 0, 2]), 0).unwrap();
    assert!(good.determinant() > 0.0);

    let one = collocation_matrix(&poly(2), &cfg(&[0.5], &[0]), 0).unwrap();
    assert_eq!(one.dim(), 1);
    assert_relative_eq!(one.entries[(0, 0)], 0.5, epsilon = 1e-15);
}

#[test]
fn derivative_order_is_checked() {
    assert!(collocation_matrix(&poly(2), &cfg(&[0.5], &[2]), 0).is_err());
}

#[test]
fn hermite_examples() {
    let s = poly(5);
    let good = cfg(&[1.5, 4.0, 7.7], &[1, 0, 2]);
    let zero = hermite_solve(&s, &good, 0, &[0.0; 6]).unwrap();
    assert!(zero.coefficients.iter().all(|&c| c == 0.0));

    let one = hermite_solve(&poly(2), &cfg(&[0.5], &[0]), 0, &[1.0]).unwrap();
    assert_relative_eq!(one.coefficients[0], 2.0, epsilon = 1e-14);

    let bad = cfg(&[0.5, 4.0, 7.7], &[1, 0, 2]);
    assert!(matches!(hermite_solve(&s, &bad, 0, &[1.0; 6]), Err(Error::Singular { index: 1, .. })));
    assert!(matches!(hermite_solve(&s, &good, 0, &[1.0; 5]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn factorization_examples() {
    let c = cfg(&[0.7, 2.2, 3.9], &[2, 1, 0]);
    let flat = ls_factorization_check(&SplineSpec::polynomial(3), &c, -1).unwrap();
    assert!(flat.max_deviation <= 1e-14);
    let spec = SplineSpec::new(3, vec![1.0, 0.0, -1.0]).unwrap();
    assert!(ls_factorization_check(&spec, &c, -1).unwrap().max_deviation <= 1e-9);
}

/// Random configuration on the 1/8 grid with `D ≤ 12`.
fn config_strategy() -> impl Strategy<Value = (usize, i64, PointConfig)> {
    (1usize..=5, -3i64..=3).prop_flat_map(|(m, l0)| {
        let hi = 8 * (12 + m as i64);
        prop::collection::vec((0..=hi, 0..m), 1..=6).prop_filter_map("D <= 12", move |raw| {
            let mut raw = raw;
            raw.sort();
            raw.dedup_by_key(|p| p.0);
            let d: usize = raw.iter().map(|p| 1 + p.1).sum();
            if d > 12 {
                return None;
            }
            let x = raw.iter().map(|p| l0 as f64 + p.0 as f64 / 8.0).collect();
            let mu = raw.iter().map(|p| p.1).collect();
            Some((m, l0, PointConfig::new(x, mu).unwrap()))
        })
    })
}

/// Configuration satisfying the interlacing condition: each point drawn on
/// the 1/8 grid inside its own admissible interval.
fn sw_config_strategy() -> impl Strategy<Value = (usize, i64, PointConfig)> {
    (1usize..=5, -3i64..=3).prop_flat_map(|(m, l0)| {
        prop::collection::vec((0..m, 1u32..8), 1..=6).prop_filter_map("increasing, D <= 12", move |raw| {
            let (mut x, mut mu) = (Vec::new(), Vec::new());
            let mut offset = l0;
            let mut prev = f64::NEG_INFINITY;
            for (k, frac) in raw {
                if mu.iter().map(|u| 1 + u).sum::<usize>() + 1 + k > 12 {
                    break;
                }
                let lower = (k as i64 + offset) as f64;
                let width = (m - k) as f64;
                let p = (lower + (frac as f64 / 8.0 * width * 8.0).floor() / 8.0).max(prev + 0.125);
                if p >= lower + width {
                    return None;
                }
                x.push(p);
                mu.push(k);
                prev = p;
                offset += 1 + k as i64;
            }
            Some((m, l0, PointConfig::new(x, mu).ok()?))
        })
    })
}

fn spline_of_order(m: usize, rates: &[f64]) -> ExpPolySpline {
    ExpPolySpline::build(&SplineSpec::new(m, rates[..m].to_vec()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn interlacing_iff_nonsingular(
        (m, l0, c) in config_strategy(),
        rates in prop::collection::vec(-2.0f64..=2.0, 5),
    ) {
        let s = spline_of_order(m, &rates);
        let sw = schoenberg_whitney(&c, l0, m).unwrap().sw_ok;
        let cm = collocation_matrix(&s, &c, l0).unwrap();
        let (scaled, _) = cm.scaled_determinant();
        prop_assert_eq!(sw, scaled > 1e-9, "scaled det {}", scaled);
        prop_assert!(scaled >= -1e-9);
    }

    #[test]
    fn hermite_is_linear(
        (m, l0, c) in sw_config_strategy(),
        rates in prop::collection::vec(-2.0f64..=2.0, 5),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in prop::collection::vec(-1.0f64..=1.0, 24),
    ) {
        prop_assert!(schoenberg_whitney(&c, l0, m).unwrap().sw_ok);
        let s = spline_of_order(m, &rates);
        let d = c.data_count();
        let (d1, d2) = (&seed[..d], &seed[12..12 + d]);
        let mix: Vec<f64> = d1.iter().zip(d2).map(|(x, y)| a * x + b * y).collect();
        let s1 = hermite_solve(&s, &c, l0, d1).unwrap();
        let s2 = hermite_solve(&s, &c, l0, d2).unwrap();
        let sm = hermite_solve(&s, &c, l0, &mix).unwrap();
        prop_assume!(sm.warning.is_none());
        let combo: Vec<f64> = s1.coefficients.iter().zip(&s2.coefficients).map(|(x, y)| a * x + b * y).collect();
        let scale = combo.iter().chain(&sm.coefficients).fold(1e-300f64, |acc, v| acc.max(v.abs()));
        for (x, y) in combo.iter().zip(&sm.coefficients) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
        let norm = mix.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        prop_assert!(sm.residual <= 1e-10 * norm.max(1e-300));
    }

    #[test]
    fn hermite_round_trip(
        (m, l0, c) in sw_config_strategy(),
        rates in prop::collection::vec(-2.0f64..=2.0, 5),
        truth in prop::collection::vec(-1.0f64..=1.0, 12),
    ) {
        prop_assert!(schoenberg_whitney(&c, l0, m).unwrap().sw_ok);
        let s = spline_of_order(m, &rates);
        let d = c.data_count();
        let cm = collocation_matrix(&s, &c, l0).unwrap();
        prop_assume!(cm.condition_estimate() < 1e6);
        let truth = &truth[..d];
        let data: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| cm.entries[(i, j)] * truth[j]).sum())
            .collect();
        let sol = hermite_solve(&s, &c, l0, &data).unwrap();
        let scale = truth.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (x, y) in sol.coefficients.iter().zip(truth) {
            prop_assert!((x - y).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn local_combinations_have_few_zeros(
        spec in spec_strategy(1..=5, 2.0),
        coeffs in prop::collection::vec(-1.0f64..=1.0, 5),
    ) {
        // on [0, 1) the translates T_{1-m}, …, T_0 span the local space
        let s = ExpPolySpline::build(&spec).unwrap();
        let m = spec.order;
        prop_assume!(coeffs[..m].iter().any(|c| c.abs() > 1e-3));
        let f = |x: f64| {
            (0..m).map(|i| coeffs[i] * s.evaluate(x + (m - 1 - i) as f64, 0).unwrap()).sum::<f64>()
        };
        let grid: Vec<f64> = (0..=2000).map(|i| f(i as f64 / 2000.0 * 0.999_999)).collect();
        let changes = grid.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        prop_assert!(changes < m, "{changes} sign changes for m = {m}");
    }

    #[test]
    fn factorization_and_commutator(
        spec in spec_strategy(2..=5, 2.0),
        (_, l0, c) in config_strategy(),
        shift in -5i64..=5,
        x in -6.0f64..12.0,
    ) {
        prop_assume!(c.max_multiplicity() < spec.order);
        let check = ls_factorization_check(&spec, &c, l0).unwrap();
        prop_assert!(check.max_deviation <= 1e-9, "deviation {}", check.max_deviation);

        let s = ExpPolySpline::build(&spec).unwrap();
        let gammas = weight_exponents(&spec.rates);
        for order in 0..spec.order {
            let (lhs, rhs) = commutator_sides(&s, order, shift, x);
            let total: f64 = gammas.iter().take(order).sum();
            let sup = (0..=400 * spec.order)
                .map(|i| l_operator_translate(&s, order, 0, i as f64 / 400.0).abs())
                .fold(0.0, f64::max);
            let scale = (-(shift as f64) * total).exp() * sup;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale);
        }
    }
}
