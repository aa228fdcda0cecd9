//! Exponential B-splines built exactly as piecewise exponential polynomials.
//!
//! An EB-spline of order `m` with rates `α_1, …, α_m` is the `m`-fold
//! convolution of the cutoffs `exp(α_s x) χ_[0,1)(x)`. It is supported on
//! `[0, m]`, strictly positive inside, and `C^{m-2}` across the integer knots.
//! Each piece `j` (valid on `[j, j+1)`) is stored in the local coordinate
//! `u = x - j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::expoly::{ExpPoly, RATE_COALESCE_TOL};

/// Rate gaps in `(RATE_COALESCE_TOL, NEAR_RATE_WARN]` lose precision.
pub const NEAR_RATE_WARN: f64 = 1e-6;

/// Below this modulus `(e^z - 1)/z` is evaluated from its Taylor series.
pub const TAYLOR_SWITCH: f64 = 1e-4;

/// Target relative size of the truncated tail in [`periodization`].
pub const PERIODIZATION_TAIL_TOL: f64 = 1e-12;

/// Largest truncation index tried before switching to the Gram symbol.
const PERIODIZATION_MAX_TERMS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSpec {
    pub order: usize,
    pub rates: Vec<f64>,
}

impl SplineSpec {
    pub fn new(order: usize, rates: Vec<f64>) -> Result<Self> {
        let spec = SplineSpec { order, rates };
        spec.validate()?;
        Ok(spec)
    }

    /// The classical polynomial B-spline of order `m`.
    pub fn polynomial(order: usize) -> Self {
        SplineSpec {
            order,
            rates: vec![0.0; order],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidSpec("order must be at least 1".into()));
        }
        if self.rates.len() != self.order {
            return Err(Error::InvalidSpec(format!(
                "expected {} rates, got {}",
                self.order,
                self.rates.len()
            )));
        }
        if let Some(r) = self.rates.iter().find(|r| !r.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite rate {r}")));
        }
        Ok(())
    }

    /// Pairs of distinct rates whose gap is small enough to cause cancellation.
    pub fn near_coincident_rates(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.rates.len() {
            for j in i + 1..self.rates.len() {
                let (a, b) = (self.rates[i], self.rates[j]);
                let gap = (a - b).abs();
                let scale = 1f64.max(a.abs()).max(b.abs());
                if gap > RATE_COALESCE_TOL * scale && gap <= NEAR_RATE_WARN {
                    out.push((i, j, gap));
                }
            }
        }
        out
    }

    /// Integral of the spline, `prod (e^{α}-1)/α`.
    pub fn integral(&self) -> f64 {
        self.rates.iter().map(|&a| exp_ratio(a)).product()
    }
}

/// `(e^a - 1)/a` with the removable singularity filled in.
fn exp_ratio(a: f64) -> f64 {
    if a.abs() < TAYLOR_SWITCH {
        1.0 + a * (1.0 / 2.0 + a * (1.0 / 6.0 + a * (1.0 / 24.0 + a * (1.0 / 120.0 + a / 720.0))))
    } else {
        a.exp_m1() / a
    }
}

/// `(e^z - 1)/z` for complex `z`, switching to a 6-term Taylor sum near 0.
pub fn exp_ratio_complex(z: Complex64) -> Complex64 {
    if z.norm() < TAYLOR_SWITCH {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..6 {
            term = term * z / (k + 1) as f64;
            sum += term;
        }
        sum
    } else {
        // e^z - 1 without cancellation for small |z|
        let (x, y) = (z.re, z.im);
        let half = (0.5 * y).sin();
        let num = Complex64::new(
            x.exp_m1() * y.cos() - 2.0 * half * half,
            x.exp() * y.sin(),
        );
        num / z
    }
}

/// An EB-spline in exact piecewise exponential-polynomial form.
///
/// Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpPolySpline {
    spec: SplineSpec,
    /// `derivs[s][j]` is the `s`-th derivative of piece `j`.
    derivs: Vec<Vec<ExpPoly>>,
}

impl ExpPolySpline {
    pub fn build(spec: &SplineSpec) -> Result<Self> {
        spec.validate()?;
        let mut pieces = vec![ExpPoly::exponential(spec.rates[0])];
        for &a in &spec.rates[1..] {
            pieces = convolve_with_cutoff(&pieces, a);
        }
        let m = spec.order;
        let mut derivs = Vec::with_capacity(m);
        derivs.push(pieces);
        for s in 1..m {
            let next = derivs[s - 1].iter().map(ExpPoly::derivative).collect();
            derivs.push(next);
        }
        Ok(ExpPolySpline {
            spec: spec.clone(),
            derivs,
        })
    }

    pub fn spec(&self) -> &SplineSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order
    }

    pub fn rates(&self) -> &[f64] {
        &self.spec.rates
    }

    /// Piece `j` of the spline itself (local coordinate).
    pub fn piece(&self, j: usize) -> &ExpPoly {
        &self.derivs[0][j]
    }

    /// Piece `j` of the `s`-th derivative.
    pub fn derivative_piece(&self, s: usize, j: usize) -> &ExpPoly {
        &self.derivs[s][j]
    }

    /// `s`-th derivative at `x` with right limits at the knots; zero outside
    /// `[0, m)`.
    pub fn evaluate(&self, x: f64, s: usize) -> Result<f64> {
        let m = self.order();
        if s >= m {
            return Err(Error::DerivativeOrder { order: s, m });
        }
        Ok(self.eval_unchecked(x, s))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, s: usize) -> f64 {
        let m = self.order();
        if !(x >= 0.0 && x < m as f64) {
            return 0.0;
        }
        let j = (x.floor() as usize).min(m - 1);
        self.derivs[s][j].eval(x - j as f64)
    }

    /// `s`-th derivative of `Σ_i c_i φ(· - first_shift - i)` at `x`, summing
    /// only the translates whose support contains `x`.
    pub fn series_value(&self, coefficients: &[f64], first_shift: i64, x: f64, s: usize) -> f64 {
        let m = self.order() as i64;
        let n = coefficients.len() as i64;
        let top = x.floor() as i64;
        let lo = (top - m + 1 - first_shift).max(0);
        let hi = (top - first_shift).min(n - 1);
        (lo..=hi)
            .map(|i| {
                coefficients[i as usize] * self.eval_unchecked(x - (first_shift + i) as f64, s)
            })
            .sum()
    }

    /// `s`-th derivative of the translate `T_ℓ φ = φ(· - ℓ)` at `x`.
    pub fn evaluate_translate(&self, shift: i64, x: f64, s: usize) -> Result<f64> {
        self.evaluate(x - shift as f64, s)
    }

    /// Left limit of the `s`-th derivative at `x`.
    pub fn evaluate_left(&self, x: f64, s: usize) -> Result<f64> {
        let m = self.order();
        if s >= m {
            return Err(Error::DerivativeOrder { order: s, m });
        }
        if !(x > 0.0 && x <= m as f64) {
            return Ok(0.0);
        }
        let j = ((x.ceil() as usize).max(1) - 1).min(m - 1);
        Ok(self.derivs[s][j].eval(x - j as f64))
    }

    /// Sup-norm of the spline estimated on a fine grid.
    pub fn sup_norm(&self) -> f64 {
        let m = self.order();
        let n = 64 * m;
        (0..=n)
            .map(|i| self.eval_unchecked(i as f64 * m as f64 / n as f64, 0).abs())
            .fold(0.0, f64::max)
    }

    /// `∫ φ(x) φ(x - k) dx`, exact from the piece representation.
    pub fn gram_entry(&self, k: i64) -> f64 {
        let m = self.order() as i64;
        let k = k.abs();
        if k >= m {
            return 0.0;
        }
        (k..m)
            .map(|j| {
                self.piece(j as usize)
                    .mul(self.piece((j - k) as usize))
                    .integrate(0.0, 1.0)
            })
            .sum()
    }

    /// Gram symbol `Σ_k G(k) e^{2πikω}`; equals the periodization of `|φ̂|²`.
    pub fn gram_symbol(&self, omega: f64) -> f64 {
        let m = self.order() as i64;
        let mut sum = self.gram_entry(0);
        for k in 1..m {
            sum += 2.0 * self.gram_entry(k) * (2.0 * std::f64::consts::PI * k as f64 * omega).cos();
        }
        sum
    }

    /// Upper Riesz bound of the integer translates: `Σ_k |G(k)|`.
    pub fn riesz_upper_bound(&self) -> f64 {
        let m = self.order() as i64;
        (-(m - 1)..m).map(|k| self.gram_entry(k).abs()).sum()
    }

    /// `‖Σ c_ℓ φ(· - ℓ)‖₂²` computed exactly from Gram entries.
    pub fn l2_norm_squared(&self, coefficients: &[f64]) -> f64 {
        let m = self.order();
        let gram: Vec<f64> = (0..m as i64).map(|k| self.gram_entry(k)).collect();
        let n = coefficients.len();
        let mut total = 0.0;
        for i in 0..n {
            total += coefficients[i] * coefficients[i] * gram[0];
            for k in 1..m.min(n - i) {
                total += 2.0 * coefficients[i] * coefficients[i + k] * gram[k];
            }
        }
        total
    }
}

/// One convolution step: pieces of `ψ = φ * (e^{a x} χ_[0,1))`.
///
/// For `x = j + u`, `ψ(x) = e^{au} [ e^{a} (A_{j-1}(1) - A_{j-1}(u)) + A_j(u) - A_j(0) ]`
/// where `A_j` is an antiderivative of `P_j(v) e^{-av}`.
fn convolve_with_cutoff(pieces: &[ExpPoly], a: f64) -> Vec<ExpPoly> {
    let k = pieces.len();
    let antis: Vec<ExpPoly> = pieces
        .iter()
        .map(|p| p.shift_rate(-a).antiderivative())
        .collect();
    let ea = a.exp();
    (0..=k)
        .map(|j| {
            let mut bracket = ExpPoly::zero();
            if j >= 1 {
                let prev = &antis[j - 1];
                bracket.add(&ExpPoly::constant(ea * prev.eval(1.0)));
                bracket.add(&prev.scaled(-ea));
            }
            if j < k {
                let cur = &antis[j];
                bracket.add(cur);
                bracket.add(&ExpPoly::constant(-cur.eval(0.0)));
            }
            bracket.shift_rate(a)
        })
        .collect()
}

pub fn build_ebspline(spec: &SplineSpec) -> Result<ExpPolySpline> {
    ExpPolySpline::build(spec)
}

/// Closed-form Fourier transform `Π (e^{α_s - 2πiω} - 1)/(α_s - 2πiω)`.
pub fn fourier_transform(spec: &SplineSpec, omega: f64) -> Result<Complex64> {
    spec.validate()?;
    if !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite frequency {omega}")));
    }
    Ok(fourier_unchecked(&spec.rates, omega))
}

fn fourier_unchecked(rates: &[f64], omega: f64) -> Complex64 {
    let w = Complex64::new(0.0, -2.0 * std::f64::consts::PI * omega);
    rates
        .iter()
        .map(|&a| exp_ratio_complex(Complex64::new(a, 0.0) + w))
        .product()
}

/// Truncated sum `Σ_ℓ |φ̂(ω+ℓ)|²`, or `None` when the tail bound does not
/// certify the requested accuracy within `max_terms` on each side.
pub fn periodization_series(spec: &SplineSpec, omega: f64, max_terms: usize) -> Option<f64> {
    let m = spec.order as i32;
    if m < 2 {
        return None;
    }
    // |φ̂(ξ)| <= C / |ξ|^m with C = Π (e^{α}+1)/(2π)
    let c: f64 = spec
        .rates
        .iter()
        .map(|&a| (a.exp() + 1.0) / (2.0 * std::f64::consts::PI))
        .product();
    let tail = |n: f64| 2.0 * c * c * (n.powi(-2 * m) + n.powi(1 - 2 * m) / (2 * m - 1) as f64);
    let mut sum = fourier_unchecked(&spec.rates, omega).norm_sqr();
    let mut done = 0usize;
    let mut cutoff = 16usize;
    loop {
        for l in done + 1..=cutoff {
            sum += fourier_unchecked(&spec.rates, omega + l as f64).norm_sqr();
            sum += fourier_unchecked(&spec.rates, omega - l as f64).norm_sqr();
        }
        done = cutoff;
        if tail(cutoff as f64) < PERIODIZATION_TAIL_TOL * sum {
            return Some(sum);
        }
        if cutoff >= max_terms {
            return None;
        }
        cutoff = (cutoff * 2).min(max_terms);
    }
}

/// `Σ_ℓ |φ̂(ω+ℓ)|²` for `ω ∈ [0, 1)`.
///
/// Summed directly while the tail bound certifies a relative remainder below
/// `1e-12`; otherwise (order 1, slowly decaying order 2) the identical value
/// is obtained from the finite Gram symbol via Poisson summation.
pub fn periodization(spec: &SplineSpec, omega: f64) -> Result<f64> {
    spec.validate()?;
    if let Some(v) = periodization_series(spec, omega, PERIODIZATION_MAX_TERMS) {
        return Ok(v);
    }
    Ok(ExpPolySpline::build(spec)?.gram_symbol(omega))
}

/// Minimum of [`periodization`] over the uniform grid `{i / grid_size}`.
pub fn stability_margin(spec: &SplineSpec, grid_size: usize) -> Result<f64> {
    stability_margin_with(spec, grid_size, Execution::default())
}

pub fn stability_margin_with(spec: &SplineSpec, grid_size: usize, exec: Execution) -> Result<f64> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid size must be at least 2".into()));
    }
    spec.validate()?;
    let values = exec::map_range(grid_size, exec, |i| {
        periodization(spec, i as f64 / grid_size as f64)
    });
    let mut min = f64::INFINITY;
    for v in values {
        min = min.min(v?);
    }
    Ok(min)
}
