//! Gauss-Legendre quadrature, fixed order and adaptive.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order rule applied on `[a, b]`.
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Bisection depth limit.
const MAX_DEPTH: usize = 30;

/// Adaptive bisection driven by the disagreement of a 10- and a 20-point rule.
///
/// A segment is accepted when the disagreement is within its share of `tol`,
/// below the roundoff level of `|f|`, or no longer shrinking under
/// bisection (the integrand is noisy at that scale).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let coarse = gauss_legendre(10);
    let fine = gauss_legendre(20);
    adaptive_step(f, a, b, tol, &coarse, &fine, 0, f64::INFINITY)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    coarse: &(Vec<f64>, Vec<f64>),
    fine: &(Vec<f64>, Vec<f64>),
    depth: usize,
    parent_err: f64,
) -> f64 {
    let c = integrate_fixed(f, a, b, coarse);
    let r = integrate_fixed(f, a, b, fine);
    let err = (r - c).abs();
    let floor = 8.0 * f64::EPSILON * integrate_fixed(&|x| f(x).abs(), a, b, fine);
    let stalled = depth >= 4 && err > 0.5 * parent_err;
    if err <= tol.max(floor) || stalled || depth >= MAX_DEPTH {
        return r;
    }
    let m = 0.5 * (a + b);
    adaptive_step(f, a, m, 0.5 * tol, coarse, fine, depth + 1, err)
        + adaptive_step(f, m, b, 0.5 * tol, coarse, fine, depth + 1, err)
}

/// Adaptive integral of a complex-valued integrand, split into real parts.
pub fn integrate_adaptive_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    let re = integrate_adaptive(&|x| f(x).re, a, b, tol);
    let im = integrate_adaptive(&|x| f(x).im, a, b, tol);
    Complex64::new(re, im)
}
