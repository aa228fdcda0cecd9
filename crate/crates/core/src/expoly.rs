//! Exponential polynomials: finite sums of `p(u) * exp(rate * u)`.
//!
//! These are the building blocks of exponential B-spline pieces. Every
//! operation needed by the convolution recursion (products, derivatives,
//! antiderivatives, rate shifts) stays closed in this representation.

use serde::{Deserialize, Serialize};

/// Relative tolerance under which two rates are merged into one.
pub const RATE_COALESCE_TOL: f64 = 1e-12;

/// Up to this magnitude a rate is integrated through its Taylor series;
/// the Taylor terms stay below `8^8/8!` in size.
pub const SERIES_RATE: f64 = 8.0;

/// Whether two exponential rates are treated as identical.
pub fn rates_coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= RATE_COALESCE_TOL * 1f64.max(a.abs()).max(b.abs())
}

/// A single term `(c_0 + c_1 u + ... + c_d u^d) * exp(rate * u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm {
    pub rate: f64,
    /// Polynomial coefficients in ascending degree.
    pub coeffs: Vec<f64>,
}

impl ExpPolyTerm {
    pub fn new(rate: f64, coeffs: Vec<f64>) -> Self {
        let mut t = ExpPolyTerm { rate, coeffs };
        t.trim();
        t
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    fn poly(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.poly(u) * (self.rate * u).exp()
    }

    /// `(p' + rate * p) * exp(rate * u)`.
    pub fn derivative(&self) -> ExpPolyTerm {
        let d = self.coeffs.len();
        let mut out = vec![0.0; d];
        for k in 0..d {
            out[k] = self.rate * self.coeffs[k];
            if k + 1 < d {
                out[k] += (k + 1) as f64 * self.coeffs[k + 1];
            }
        }
        ExpPolyTerm::new(self.rate, out)
    }

    /// An antiderivative. For `|rate| > SERIES_RATE` this is
    /// `q(u) exp(rate u)` with `q = sum_k (-1)^k p^(k) / rate^(k+1)`.
    /// Smaller rates make `q` and the other terms of a piece cancel, so `exp(rate u)` is
    /// replaced by its Taylor polynomial, accurate to roundoff for
    /// `|u| <= 1`, and the result is a polynomial vanishing at 0.
    pub fn antiderivative(&self) -> ExpPolyTerm {
        if rates_coincide(self.rate, 0.0) {
            return self.polynomial_antiderivative();
        }
        if self.rate.abs() <= SERIES_RATE {
            return self.series_antiderivative();
        }
        self.closed_antiderivative()
    }

    fn series_antiderivative(&self) -> ExpPolyTerm {
        let r = self.rate;
        let mut taylor = vec![1.0];
        loop {
            let next = taylor.last().unwrap() * r / taylor.len() as f64;
            if next.abs() <= 1e-18 {
                break;
            }
            taylor.push(next);
        }
        let mut prod = vec![0.0; self.coeffs.len() + taylor.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in taylor.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let mut out = ExpPolyTerm::new(0.0, prod).polynomial_antiderivative();
        // drop a tail that cannot matter on [-1, 1]
        let total: f64 = out.coeffs.iter().map(|c| c.abs()).sum();
        let mut tail = 0.0;
        while out.coeffs.len() > 1 {
            tail += out.coeffs.last().unwrap().abs();
            if tail > 1e-18 * total {
                break;
            }
            out.coeffs.pop();
        }
        out
    }

    fn polynomial_antiderivative(&self) -> ExpPolyTerm {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] = c / (k + 1) as f64;
        }
        ExpPolyTerm::new(0.0, out)
    }

    fn closed_antiderivative(&self) -> ExpPolyTerm {
        let mut q = vec![0.0; self.coeffs.len()];
        let mut deriv = self.coeffs.clone();
        let mut sign_pow = 1.0 / self.rate;
        while !deriv.is_empty() {
            for (k, &c) in deriv.iter().enumerate() {
                q[k] += sign_pow * c;
            }
            deriv = deriv
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect();
            sign_pow *= -1.0 / self.rate;
        }
        ExpPolyTerm::new(self.rate, q)
    }
}

/// A finite sum of [`ExpPolyTerm`]s with pairwise distinct rates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn exponential(rate: f64) -> Self {
        ExpPoly {
            terms: vec![ExpPolyTerm::new(rate, vec![1.0])],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = ExpPoly::zero();
        p.add_term(ExpPolyTerm::new(0.0, vec![c]));
        p
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(ExpPolyTerm::is_zero)
    }

    /// Adds a term, merging its polynomial into an existing term whose rate
    /// coincides.
    pub fn add_term(&mut self, term: ExpPolyTerm) {
        if term.is_zero() {
            return;
        }
        if let Some(existing) = self
            .terms
            .iter_mut()
            .find(|t| rates_coincide(t.rate, term.rate))
        {
            if existing.coeffs.len() < term.coeffs.len() {
                existing.coeffs.resize(term.coeffs.len(), 0.0);
            }
            for (a, b) in existing.coeffs.iter_mut().zip(&term.coeffs) {
                *a += b;
            }
            existing.trim();
        } else {
            self.terms.push(term);
        }
    }

    pub fn add(&mut self, other: &ExpPoly) {
        for t in &other.terms {
            self.add_term(t.clone());
        }
    }

    pub fn scaled(&self, factor: f64) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| ExpPolyTerm::new(t.rate, t.coeffs.iter().map(|c| c * factor).collect()))
                .filter(|t| !t.is_zero())
                .collect(),
        }
    }

    /// Multiplication by `exp(beta * u)`.
    pub fn shift_rate(&self, beta: f64) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            let rate = if rates_coincide(t.rate, -beta) {
                0.0
            } else {
                t.rate + beta
            };
            out.add_term(ExpPolyTerm::new(rate, t.coeffs.clone()));
        }
        out
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(u)).sum()
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            out.add_term(t.derivative());
        }
        out
    }

    pub fn antiderivative(&self) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            out.add_term(t.antiderivative());
        }
        out
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                let mut coeffs = vec![0.0; a.coeffs.len() + b.coeffs.len() - 1];
                for (i, &ca) in a.coeffs.iter().enumerate() {
                    for (j, &cb) in b.coeffs.iter().enumerate() {
                        coeffs[i + j] += ca * cb;
                    }
                }
                out.add_term(ExpPolyTerm::new(a.rate + b.rate, coeffs));
            }
        }
        out
    }

    /// Exact definite integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(ExpPolyTerm::degree).max().unwrap_or(0)
    }
}
