//! Independent oracles shared by the integration tests. Nothing here uses
//! the library's exp-poly algebra or quadrature.
#![allow(dead_code)]

use ebsampling::SplineSpec;
use proptest::prelude::*;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫_a^b f` with `rule` on `[a, b]` split at every breakpoint inside.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], rule: &[(f64, f64)]) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            let (h, c) = ((w[1] - w[0]) / 2.0, (w[1] + w[0]) / 2.0);
            rule.iter().map(|&(x, wt)| wt * h * f(c + h * x)).sum::<f64>()
        })
        .sum()
}

/// `φ(x)` by nested numerical convolution:
/// `φ_m(x) = ∫_0^1 e^{α_m t} φ_{m-1}(x - t) dt`.
pub fn convolution_oracle(rates: &[f64], x: f64) -> f64 {
    let rule = gauss(10);
    fn go(rates: &[f64], x: f64, rule: &[(f64, f64)]) -> f64 {
        let m = rates.len();
        if !(x >= 0.0 && x < m as f64) {
            return 0.0;
        }
        let a = rates[m - 1];
        if m == 1 {
            return (a * x).exp();
        }
        // kinks of the inner factor sit where x - t is an integer
        let breaks: Vec<f64> = (0..=m as i64).map(|k| x - k as f64).collect();
        integrate(&|t| (a * t).exp() * go(&rates[..m - 1], x - t, rule), 0.0, 1.0, &breaks, rule)
    }
    go(rates, x, &rule)
}

/// Random spec of order in `orders` with rates in `[-bound, bound]`.
pub fn spec_strategy(orders: std::ops::RangeInclusive<usize>, bound: f64) -> impl Strategy<Value = SplineSpec> {
    orders.prop_flat_map(move |m| {
        prop::collection::vec(-bound..=bound, m).prop_map(move |r| SplineSpec::new(m, r).unwrap())
    })
}
