//! Dense and banded LU with partial pivoting, scale-invariant determinants,
//! and singular-value summaries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Matrices larger than this are factored with band-limited elimination.
pub const BANDED_THRESHOLD: usize = 64;

/// Lower and upper bandwidth of the nonzero pattern.
pub fn bandwidths(a: &DMatrix<f64>) -> (usize, usize) {
    let mut kl = 0;
    let mut ku = 0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)] != 0.0 {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
    }
    (kl, ku)
}

/// LU factors with the row interchanges recorded per elimination step;
/// multipliers stay where they were computed.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DMatrix<f64>,
    pivots: Vec<usize>,
    kl: usize,
    reach: usize,
    sign: f64,
}

impl LuFactors {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let (kl, ku) = if n > BANDED_THRESHOLD {
            bandwidths(a)
        } else {
            (n, n)
        };
        // Row swaps widen the upper band to kl + ku.
        let reach = kl + ku;
        let mut lu = a.clone();
        let mut pivots = Vec::with_capacity(n);
        let mut sign = 1.0;
        for k in 0..n {
            let rmax = (k + kl).min(n.saturating_sub(1));
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..=rmax {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular {
                    index: k,
                    x: f64::NAN,
                });
            }
            let cmax = (k + reach).min(n - 1);
            pivots.push(p);
            if p != k {
                for j in k..=cmax {
                    lu.swap((p, j), (k, j));
                }
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..=rmax {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=cmax {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(LuFactors {
            lu,
            pivots,
            kl,
            reach,
            sign,
        })
    }

    pub fn determinant(&self) -> f64 {
        self.sign * (0..self.lu.nrows()).map(|i| self.lu[(i, i)]).product::<f64>()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = b.clone();
        for k in 0..n {
            x.swap_rows(k, self.pivots[k]);
            let rmax = (k + self.kl).min(n.saturating_sub(1));
            let xk = x[k];
            for i in k + 1..=rmax {
                x[i] -= self.lu[(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let cmax = (i + self.reach).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=cmax {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(LuFactors::new(a)?.solve(b))
}

/// Determinant of `a` divided by the product of its row max-norms, together
/// with that product. The ratio is invariant under row scaling.
pub fn scaled_determinant(a: &DMatrix<f64>) -> (f64, f64) {
    let n = a.nrows();
    let mut normalized = a.clone();
    let mut scale = 1.0;
    for i in 0..n {
        let r = (0..a.ncols()).map(|j| a[(i, j)].abs()).fold(0.0, f64::max);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        scale *= r;
        for j in 0..a.ncols() {
            normalized[(i, j)] /= r;
        }
    }
    match LuFactors::new(&normalized) {
        Ok(f) => (f.determinant(), scale),
        Err(_) => (0.0, scale),
    }
}

/// Smallest and largest singular value. A matrix with fewer rows than columns
/// (or no rows) is not bounded below and reports `σ_min = 0`.
pub fn singular_value_range(a: &DMatrix<f64>) -> (f64, f64) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0.0, 0.0);
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = if a.nrows() < a.ncols() {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    (min, max)
}

/// 2-norm condition number `σ_max / σ_min` (infinite when singular).
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let (lo, hi) = singular_value_range(a);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
