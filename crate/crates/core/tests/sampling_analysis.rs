mod common;

use approx::assert_relative_eq;
use ebsampling::analysis::{
    beurling_density, check_interval_selection, combinatorial_selection, empirical_frame_ratio,
    frame_ratio, lower_frame_bound_estimate, max_gap, maxgap_sampling_decision, necessary_condition,
    select_interval_points, verify_thm_compact, weighted_max_gap, CertificateParams, Decision,
    IntervalSelection,
};
use ebsampling::collocation::{collocation_matrix, hermite_solve, schoenberg_whitney};
use ebsampling::{Error, Execution, ExpPolySpline, PointConfig, SampledSet, SplineSpec};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn lattice(alpha: f64, offset: f64, window: (f64, f64), mu: impl Fn(i64) -> usize) -> SampledSet {
    SampledSet::lattice(alpha, offset, window, mu).unwrap()
}

fn cfg(x: &[f64], mu: &[usize]) -> PointConfig {
    PointConfig::new(x.to_vec(), mu.to_vec()).unwrap()
}

fn poly(m: usize) -> ExpPolySpline {
    ExpPolySpline::build(&SplineSpec::polynomial(m)).unwrap()
}

#[test]
fn gap_examples() {
    assert_relative_eq!(max_gap(&lattice(0.7, 0.0, (0.0, 100.0), |_| 0).config).unwrap(), 0.7, epsilon = 1e-12);
    assert_relative_eq!(max_gap(&cfg(&[0.0, 0.3, 1.0], &[0, 0, 0])).unwrap(), 0.7, epsilon = 1e-15);
    assert_eq!(max_gap(&lattice(1.0, 0.0, (0.0, 10.0), |_| 0).config).unwrap(), 1.0);
    assert!(max_gap(&cfg(&[1.0], &[0])).is_err());

    for s in 0..3 {
        let set = lattice(0.9, 0.0, (0.0, 50.0), |_| s);
        assert_relative_eq!(weighted_max_gap(&set.config).unwrap(), 0.9 / (s + 1) as f64, epsilon = 1e-12);
    }
    let alternating = lattice(0.8, 0.0, (0.0, 40.0), |j| (j.rem_euclid(2) == 0) as usize);
    assert_relative_eq!(weighted_max_gap(&alternating.config).unwrap(), 0.8, epsilon = 1e-12);
    assert_eq!(weighted_max_gap(&cfg(&[0.0, 1.0], &[0, 0])).unwrap(), 1.0);
}

#[test]
fn density_examples() {
    for (alpha, s) in [(0.7, 0usize), (1.3, 1), (2.5, 2)] {
        let set = lattice(alpha, 0.0, (0.0, 60.0 * alpha), |_| s).with_period(alpha).unwrap();
        let d = beurling_density(&set, None).unwrap();
        assert!(d.exact);
        assert_relative_eq!(d.value, (s + 1) as f64 / alpha, max_relative = 1e-12);
    }
    let alpha = 0.8;
    let alternating = lattice(alpha, 0.0, (0.0, 40.0), |j| (j.rem_euclid(2) == 0) as usize)
        .with_period(2.0 * alpha)
        .unwrap();
    assert_relative_eq!(beurling_density(&alternating, None).unwrap().value, 3.0 / (2.0 * alpha), max_relative = 1e-12);
    let z = lattice(1.0, 0.0, (0.0, 100.0), |_| 0);
    assert_relative_eq!(beurling_density(&z, None).unwrap().value, 1.0, epsilon = 1e-12);
    assert!(matches!(beurling_density(&z, Some(80.0)), Err(Error::InsufficientData(_))));
}

#[test]
fn necessary_condition_examples() {
    let sparse = lattice(1.1, 0.0, (0.0, 110.0), |_| 0).with_period(1.1).unwrap();
    let check = necessary_condition(&sparse).unwrap();
    assert!(!check.pass);
    assert_relative_eq!(check.density.value, 1.0 / 1.1, max_relative = 1e-12);
    assert!(necessary_condition(&lattice(1.0, 0.0, (0.0, 100.0), |_| 0)).unwrap().pass);
    let doubled = lattice(2.0, 0.0, (0.0, 100.0), |_| 1).with_period(2.0).unwrap();
    assert!(necessary_condition(&doubled).unwrap().pass);
}

#[test]
fn interval_selection_examples() {
    for m in 2..=5 {
        let alpha = 1.0 / (m + 1) as f64;
        let set = lattice(alpha, 0.0, (0.0, 20.0), |_| m - 1);
        for (base, l) in [(0, 3), (5, 4), (11, 7)] {
            let sel = select_interval_points(&set.config, m, 0, base, l, alpha).expect("dense lattice");
            assert_eq!(check_interval_selection(&sel, &set.config, m, l, alpha), Ok(()));
            assert!(schoenberg_whitney(&sel.as_config(), base - m as i64 + 1, m).unwrap().sw_ok);
        }
    }
    let gappy = cfg(&[0.5, 1.0, 9.5], &[0, 0, 0]);
    assert!(select_interval_points(&gappy, 2, 0, 3, 3, 0.1).is_none());

    let half = lattice(0.5, 0.0, (0.0, 10.0), |_| 0);
    let sel = select_interval_points(&half.config, 2, 0, 0, 3, 0.1).unwrap();
    assert_eq!(sel.data_count(), 4);
    assert_eq!(check_interval_selection(&sel, &half.config, 2, 3, 0.1), Ok(()));
    // the hand-enumerated selection is valid as well
    let pts = [0.5, 1.0, 1.5, 2.5];
    let hand = IntervalSelection {
        k: 0,
        base: 0,
        indices: pts.iter().map(|&x| half.config.find(x).unwrap()).collect(),
        points: pts.to_vec(),
        theta: vec![0; 4],
        sigma: vec![0, 1, 2, 3],
    };
    assert_eq!(check_interval_selection(&hand, &half.config, 2, 3, 0.1), Ok(()));
}

#[test]
fn maxgap_examples() {
    let m = 4;
    for s in 0..m - 1 {
        let alpha = 0.9 * (s + 1) as f64;
        let set = lattice(alpha, 0.3, (0.0, 80.0 * alpha), |_| s);
        assert_eq!(maxgap_sampling_decision(&set, m).unwrap().status, Decision::Certified);
        let alpha = 1.05 * (s + 1) as f64;
        let set = lattice(alpha, 0.3, (0.0, 80.0 * alpha), |_| s).with_period(alpha).unwrap();
        assert_eq!(maxgap_sampling_decision(&set, m).unwrap().status, Decision::DensityViolation);
    }
    let shifted = lattice(1.0, 0.5, (0.0, 50.0), |_| 0);
    assert_eq!(maxgap_sampling_decision(&shifted, 2).unwrap().status, Decision::Inconclusive);
    // maximal multiplicity on the knots breaks the distance hypothesis
    let on_knots = lattice(1.0, 0.0, (0.0, 50.0), |_| 1);
    assert_eq!(maxgap_sampling_decision(&on_knots, 2).unwrap().status, Decision::Inconclusive);
}

/// `(1/n)Z + 1/(2n)` with `μ ≡ 1`, with one unit cell `[M+kL, M+kL+1)`
/// emptied for every geometry the default scan tries at `m = 3`.
fn punched_lattice() -> SampledSet {
    let m = 3;
    let n = 4;
    let mut cells = Vec::new();
    let mut next = 0i64;
    for l in 2..=4 * m as i64 {
        for shift in 0..l {
            let mut c = next.max(shift);
            while (c - shift).rem_euclid(l) != 0 {
                c += 1;
            }
            cells.push(c);
            next = c + l + 3;
        }
    }
    let end = next as f64 + 20.0;
    let pts: Vec<f64> = (0..(end as i64 * n))
        .map(|i| (i as f64 + 0.5) / n as f64)
        .filter(|&x| !cells.contains(&(x.floor() as i64)))
        .collect();
    let mus = vec![1; pts.len()];
    SampledSet::new(PointConfig::new(pts, mus).unwrap(), (0.0, end), None).unwrap()
}

#[test]
fn punched_lattice_needs_the_gap_criterion() {
    let set = punched_lattice();
    let m = 3;
    let mg = weighted_max_gap(&set.config).unwrap();
    assert_relative_eq!(mg, 1.25 / 2.0, epsilon = 1e-12);
    assert_eq!(maxgap_sampling_decision(&set, m).unwrap().status, Decision::Certified);
    let cert = verify_thm_compact(&poly(m), &set, &CertificateParams::default(), Execution::default()).unwrap();
    assert_eq!(cert.status, Decision::Inconclusive);
    assert_eq!(cert.tried, 2 * (2..=12).sum::<usize>());
}

#[test]
fn certificate_verdicts() {
    let sparse = lattice(1.1, 0.0, (0.0, 110.0), |_| 0);
    let cert = verify_thm_compact(&poly(2), &sparse, &CertificateParams::default(), Execution::default()).unwrap();
    assert_eq!(cert.status, Decision::DensityViolation);
    assert!(matches!(lower_frame_bound_estimate(&poly(2), &cert), Err(Error::InvalidArgument(_))));

    let half = lattice(0.5, 0.25, (0.0, 40.0), |_| 0);
    let cert = verify_thm_compact(&poly(2), &half, &CertificateParams::default(), Execution::default()).unwrap();
    assert_eq!(cert.status, Decision::Certified);
    let a2 = lower_frame_bound_estimate(&poly(2), &cert).unwrap().a2_coefficients;
    assert!(a2 > 0.0);
    let (lo, _) = empirical_frame_ratio(&poly(2), &half.config, cert.coefficient_range().unwrap(), 100, 5, Execution::default()).unwrap();
    assert!(lo >= a2 * (1.0 - 1e-9));
    assert!(matches!(frame_ratio(&poly(2), &half.config, &[0.0; 4], 2), Err(Error::InvalidArgument(_))));
}

#[test]
fn combinatorial_examples() {
    let set = lattice(0.6, 0.0, (0.0, 30.0), |_| 0);
    let sel = combinatorial_selection(&set.config, 3, 0.6).unwrap();
    assert_eq!((sel.n, sel.l), (4, 2));
    assert_eq!(sel.theta, vec![0; 4]);
    for (got, want) in sel.points.iter().zip([0.0, 0.6, 1.2, 1.8]) {
        assert_relative_eq!(*got, want, epsilon = 1e-12);
    }

    let set = lattice(1.0, 0.25, (0.0, 40.0), |_| 1);
    let sel = combinatorial_selection(&set.config, 2, 0.25).unwrap();
    assert_eq!(sel.n0, 7);
    assert!(sel.n <= 7);
    assert!(schoenberg_whitney(&sel.as_config(), sel.base - 1, 2).unwrap().sw_ok);
}

/// Smallest `sample energy / ‖f‖²` over coefficients supported on `0..n`.
fn min_ratio(spline: &ExpPolySpline, set: &SampledSet, n: usize) -> f64 {
    let m = spline.order() as i64;
    let rows: Vec<f64> = set.points().iter().copied().filter(|&x| x < (n as i64 + m) as f64).collect();
    let a = DMatrix::from_fn(rows.len(), n, |i, j| spline.evaluate(rows[i] - j as f64, 0).unwrap());
    let g = DMatrix::from_fn(n, n, |i, j| spline.gram_entry(i as i64 - j as i64));
    let l = g.cholesky().unwrap().l();
    let linv = l.clone().try_inverse().unwrap();
    let sym = &linv * a.transpose() * &a * linv.transpose();
    let eig = SymmetricEigen::new(sym);
    let (k, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let c = linv.transpose() * eig.eigenvectors.column(k);
    frame_ratio(spline, &set.config, c.as_slice(), 0).unwrap()
}

#[test]
fn sub_critical_lattice_has_vanishing_ratio() {
    let hat = poly(2);
    let set = lattice(1.1, 0.0, (0.0, 200.0), |_| 0);
    let ratios: Vec<f64> = [4, 8, 16, 32, 64].iter().map(|&n| min_ratio(&hat, &set, n)).collect();
    for w in ratios.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15, "{ratios:?}");
    }
    assert!(*ratios.last().unwrap() < 1e-12, "{ratios:?}");
}

/// A periodic set: a random pattern on `[0, p)` repeated.
fn periodic_strategy() -> impl Strategy<Value = (SampledSet, f64)> {
    (1usize..=4, 0.5f64..3.0).prop_flat_map(|(n, p)| {
        (prop::collection::vec((0.0f64..1.0, 0usize..3), n), Just(p)).prop_filter_map("distinct", move |(raw, p)| {
            let mut raw = raw;
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            if raw.windows(2).any(|w| w[1].0 - w[0].0 < 0.01) || 1.0 - raw.last()?.0 + raw[0].0 < 0.01 {
                return None;
            }
            let periods = (40.0 / p).ceil() as usize;
            let (mut x, mut mu) = (Vec::new(), Vec::new());
            for k in 0..periods {
                for &(t, u) in &raw {
                    x.push((k as f64 + t) * p);
                    mu.push(u);
                }
            }
            let end = periods as f64 * p;
            let set = SampledSet::new(PointConfig::new(x, mu).ok()?, (0.0, end), Some(p)).ok()?;
            Some((set, p))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_gap_bounds(
        raw in prop::collection::vec((0.0f64..20.0, 0usize..3), 2..30),
    ) {
        let mut raw = raw;
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        raw.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
        prop_assume!(raw.len() >= 2);
        let c = PointConfig::new(raw.iter().map(|p| p.0).collect(), raw.iter().map(|p| p.1).collect()).unwrap();
        let (g, w) = (max_gap(&c).unwrap(), weighted_max_gap(&c).unwrap());
        prop_assert!(w <= g);
        let mins: Vec<usize> = c.multiplicities().windows(2).map(|p| p[0].min(p[1])).collect();
        if mins.iter().all(|&u| u == 0) {
            prop_assert_eq!(w, g);
        }
        if mins.iter().all(|&u| u > 0) {
            prop_assert!(w < g);
        }
    }

    #[test]
    fn density_dominates_inverse_weighted_gap((set, _) in periodic_strategy()) {
        let d = beurling_density(&set, None).unwrap();
        prop_assert!(d.exact);
        let mg = weighted_max_gap(&set.config).unwrap();
        prop_assert!(d.value >= 1.0 / mg * (1.0 - 1e-12));
    }

    #[test]
    fn combinatorial_selection_replays(
        m in 2usize..=5,
        alpha in 0.2f64..1.0,
        offset in 0.0f64..1.0,
        pattern in prop::collection::vec(0usize..5, 1..4),
        start in 0usize..10,
    ) {
        let set = lattice(alpha, offset * alpha, (0.0, 200.0), |k| pattern[k.rem_euclid(pattern.len() as i64) as usize].min(m - 1));
        let mg = weighted_max_gap(&set.config).unwrap();
        prop_assume!(mg < 1.0);
        let x = set.points()[start];
        let sel = combinatorial_selection(&set.config, m, x).unwrap();
        prop_assert!(sel.n <= sel.n0);
        prop_assert!(sel.l <= sel.l_bound(m));
        prop_assert_eq!(sel.theta.iter().map(|t| 1 + t).sum::<usize>(), sel.l + m - 1);
        prop_assert!(schoenberg_whitney(&sel.as_config(), sel.base - m as i64 + 1, m).unwrap().sw_ok);
    }

    #[test]
    fn certified_intervals_round_trip(
        m in 2usize..=4,
        alpha in 0.3f64..0.8,
        rates in prop::collection::vec(-1.5f64..1.5, 4),
        truth in prop::collection::vec(-1.0f64..=1.0, 32),
    ) {
        let spline = ExpPolySpline::build(&SplineSpec::new(m, rates[..m].to_vec()).unwrap()).unwrap();
        let set = lattice(alpha, 0.1, (0.0, 24.0), |k| (k.rem_euclid(2) as usize).min(m - 1));
        let cert = verify_thm_compact(&spline, &set, &CertificateParams::default(), Execution::Sequential).unwrap();
        prop_assume!(cert.status == Decision::Certified);
        for sel in &cert.selections {
            let c = sel.as_config();
            let l0 = sel.base - m as i64 + 1;
            let cm = collocation_matrix(&spline, &c, l0).unwrap();
            let d = cm.dim();
            let data: Vec<f64> = (0..d).map(|i| (0..d).map(|j| cm.entries[(i, j)] * truth[j]).sum()).collect();
            let sol = hermite_solve(&spline, &c, l0, &data).unwrap();
            let bound = 1e-12 * cm.condition_estimate().max(1.0);
            for (x, y) in sol.coefficients.iter().zip(&truth) {
                prop_assert!((x - y).abs() <= bound, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn raising_multiplicities_keeps_certification(
        m in 2usize..=5,
        raw in prop::collection::vec((0.05f64..0.95, 0usize..4), 30..60),
        bumps in prop::collection::vec((0usize..60, 1usize..3), 1..8),
    ) {
        // two points per unit cell, away from the integers, gaps below 1
        let x: Vec<f64> = raw.iter().enumerate().map(|(i, p)| 0.5 * i as f64 + 0.05 + 0.4 * p.0).collect();
        let mu: Vec<usize> = raw.iter().map(|p| p.1.min(m - 1)).collect();
        let n = x.len();
        let set = SampledSet::new(PointConfig::new(x.clone(), mu.clone()).unwrap(), (0.0, 0.5 * n as f64), None).unwrap();
        let before = maxgap_sampling_decision(&set, m).unwrap();
        prop_assume!(before.status == Decision::Certified);
        let mut raised = mu.clone();
        for (i, b) in bumps {
            let i = i % n;
            raised[i] = (raised[i] + b).min(m - 1);
        }
        let set = SampledSet::new(PointConfig::new(x, raised).unwrap(), (0.0, 0.5 * n as f64), None).unwrap();
        prop_assert_eq!(maxgap_sampling_decision(&set, m).unwrap().status, Decision::Certified);
    }

    #[test]
    fn adding_dominant_points_keeps_certification(
        m in 2usize..=5,
        raw in prop::collection::vec((0.05f64..0.95, 0usize..4), 30..60),
        extra in prop::collection::vec((0usize..59, 0.1f64..0.9), 1..8),
    ) {
        let mut pts: Vec<(f64, usize)> = raw.iter().enumerate().map(|(i, p)| (0.5 * i as f64 + 0.05 + 0.4 * p.0, p.1.min(m - 1))).collect();
        let n = pts.len();
        let build = |pts: &[(f64, usize)]| {
            let c = PointConfig::new(pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect()).unwrap();
            SampledSet::new(c, (0.0, 0.5 * n as f64), None).unwrap()
        };
        prop_assume!(maxgap_sampling_decision(&build(&pts), m).unwrap().status == Decision::Certified);
        for (i, t) in extra {
            let i = i % (pts.len() - 1);
            let (a, b) = (pts[i], pts[i + 1]);
            let x = a.0 + t * (b.0 - a.0);
            // at least both neighbours' multiplicity, and never on a knot at m - 1
            let mu = a.1.max(b.1);
            if (b.0 - a.0) < 1e-3 || (mu + 1 == m && (x - x.round()).abs() < 0.01) {
                continue;
            }
            pts.insert(i + 1, (x, mu));
        }
        prop_assert_eq!(maxgap_sampling_decision(&build(&pts), m).unwrap().status, Decision::Certified);
    }
}

#[test]
fn inserting_a_value_sample_can_raise_the_weighted_gap() {
    // gap 2.7 between double points weighs 0.9; a plain point in the middle
    // leaves two gaps of 1.35 that weigh 1.35
    let before = cfg(&[0.2, 2.9, 5.6, 8.3], &[2, 2, 2, 2]);
    let after = cfg(&[0.2, 2.9, 4.25, 5.6, 8.3], &[2, 2, 0, 2, 2]);
    assert!(weighted_max_gap(&before).unwrap() < 1.0);
    assert!(weighted_max_gap(&after).unwrap() > 1.0);
}
