//! Forward sampling of functions in the spline space and recovery of their
//! coefficients from certified sampling data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::{Decision, SamplingCertificate};
use crate::collocation::collocation_matrix;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, LuFactors};
use crate::points::PointConfig;
use crate::spline::ExpPolySpline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub x: f64,
    pub s: usize,
    pub value: f64,
}

/// `f^{(s)}(x)` for every point and every `s ≤ μ(x)`, in expanded-node order,
/// where `f = Σ_i c_i φ(· - first_shift - i)`.
pub fn sample_function(
    spline: &ExpPolySpline,
    coefficients: &[f64],
    first_shift: i64,
    config: &PointConfig,
) -> Result<Vec<SampleRecord>> {
    config.check_order(spline.order())?;
    let nodes = config.expand();
    Ok(nodes
        .t
        .iter()
        .zip(&nodes.d)
        .map(|(&x, &s)| SampleRecord {
            x,
            s,
            value: spline.series_value(coefficients, first_shift, x, s),
        })
        .collect())
}

/// A single sample `f^{(s)}(x)`; `s` may not exceed `μ(x)` of `config`.
pub fn sample_at(
    spline: &ExpPolySpline,
    coefficients: &[f64],
    first_shift: i64,
    config: &PointConfig,
    x: f64,
    s: usize,
) -> Result<f64> {
    let i = config
        .find(x)
        .ok_or_else(|| Error::InvalidPoints(format!("{x} is not a sampling point")))?;
    let mu = config.multiplicities()[i];
    if s > mu {
        return Err(Error::DerivativeOrder { order: s, m: mu + 1 });
    }
    Ok(spline.series_value(coefficients, first_shift, x, s))
}

/// Pointwise values of the `s`-th derivative of the series on `grid`.
pub fn evaluate_model(
    spline: &ExpPolySpline,
    coefficients: &[f64],
    first_shift: i64,
    grid: &[f64],
    s: usize,
) -> Result<Vec<f64>> {
    let m = spline.order();
    if s >= m {
        return Err(Error::DerivativeOrder { order: s, m });
    }
    Ok(grid
        .iter()
        .map(|&x| spline.series_value(coefficients, first_shift, x, s))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionMode {
    /// Blockwise collocation solves on the certificate's selections.
    #[default]
    Exact,
    /// Global least squares over every sample in the covered range.
    LeastSquares,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub mode: ReconstructionMode,
    /// Error out when overlapping blocks disagree by more than this.
    pub strict_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSolve {
    pub k: i64,
    pub residual: f64,
    /// `1/σ_min` of the interval matrix: data errors are amplified at most
    /// by this factor.
    pub inverse_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Samples not used by the selections but inside the covered range.
    pub checked: usize,
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub mode: ReconstructionMode,
    /// Shift index of `coefficients[0]`.
    pub first_shift: i64,
    pub coefficients: Vec<f64>,
    pub intervals: Vec<IntervalSolve>,
    /// Largest disagreement between blocks sharing a coefficient.
    pub overlap_mismatch: f64,
    pub max_residual: f64,
    pub consistency: ConsistencyReport,
    /// Root-mean-square residual of the global fit (least-squares mode).
    pub ls_rms: Option<f64>,
}

impl ReconstructionResult {
    pub fn coefficient(&self, shift: i64) -> Option<f64> {
        let i = shift - self.first_shift;
        (i >= 0).then(|| self.coefficients.get(i as usize).copied()).flatten()
    }

    /// `(shift index, value)` pairs in ascending order.
    pub fn pairs(&self) -> Vec<(i64, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.first_shift + i as i64, c))
            .collect()
    }
}

/// Samples sorted by `(x, s)` with tolerant lookup.
struct SampleIndex<'a> {
    sorted: Vec<&'a SampleRecord>,
}

impl<'a> SampleIndex<'a> {
    fn new(samples: &'a [SampleRecord]) -> Self {
        let mut sorted: Vec<&SampleRecord> = samples.iter().collect();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.s.cmp(&b.s)));
        SampleIndex { sorted }
    }

    fn get(&self, x: f64, s: usize) -> Option<f64> {
        let tol = 1e-12 * x.abs().max(1.0);
        let lo = self.sorted.partition_point(|r| r.x < x - tol);
        self.sorted[lo..]
            .iter()
            .take_while(|r| r.x <= x + tol)
            .find(|r| r.s == s)
            .map(|r| r.value)
    }
}

/// Recovers the coefficients on the certificate's covered range.
pub fn reconstruct(
    spline: &ExpPolySpline,
    certificate: &SamplingCertificate,
    samples: &[SampleRecord],
    options: &ReconstructOptions,
    exec: Execution,
) -> Result<ReconstructionResult> {
    if certificate.status != Decision::Certified {
        return Err(Error::InvalidArgument(
            "reconstruction needs a certified sampling set".into(),
        ));
    }
    let m = spline.order();
    if let Some(r) = samples.iter().find(|r| r.s >= m) {
        return Err(Error::DerivativeOrder { order: r.s, m });
    }
    let (first_shift, last_shift) = certificate
        .coefficient_range()
        .ok_or_else(|| Error::Invariant("certified certificate without coverage".into()))?;
    let index = SampleIndex::new(samples);

    let mut missing = Vec::new();
    let mut data = Vec::with_capacity(certificate.selections.len());
    for sel in &certificate.selections {
        let mut d = Vec::with_capacity(sel.data_count());
        for (&x, &t) in sel.points.iter().zip(&sel.theta) {
            for s in 0..=t {
                match index.get(x, s) {
                    Some(v) => d.push(v),
                    None => missing.push((x, s)),
                }
            }
        }
        data.push(d);
    }
    if !missing.is_empty() {
        return Err(Error::MissingSamples(missing));
    }

    let mi = m as i64;
    let solves = exec::map_range(certificate.selections.len(), exec, |i| {
        let sel = &certificate.selections[i];
        let l0 = sel.base - mi + 1;
        let cm = collocation_matrix(spline, &sel.as_config(), l0)?;
        let lu = LuFactors::new(&cm.entries).map_err(|_| {
            Error::Invariant(format!("interval {} collocation matrix is singular", sel.k))
        })?;
        let b = DVector::from_column_slice(&data[i]);
        let c = lu.solve(&b);
        let residual = (&cm.entries * &c - &b).amax();
        let smin = linalg::singular_value_range(&cm.entries).0;
        Ok::<_, Error>((l0, c, IntervalSolve { k: sel.k, residual, inverse_norm: 1.0 / smin }))
    });

    let n = (last_shift - first_shift + 1) as usize;
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut intervals = Vec::with_capacity(solves.len());
    for r in solves {
        let (l0, c, info): (i64, DVector<f64>, IntervalSolve) = r?;
        for (j, &v) in c.iter().enumerate() {
            let idx = (l0 + j as i64 - first_shift) as usize;
            sum[idx] += v;
            count[idx] += 1;
            lo[idx] = lo[idx].min(v);
            hi[idx] = hi[idx].max(v);
        }
        intervals.push(info);
    }
    let mut coefficients: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    let overlap_mismatch = lo
        .iter()
        .zip(&hi)
        .zip(&count)
        .filter(|(_, &c)| c > 1)
        .map(|((&a, &b), _)| b - a)
        .fold(0.0, f64::max);
    if let Some(tol) = options.strict_tol {
        if overlap_mismatch > tol {
            return Err(Error::Inconsistent(format!(
                "overlapping blocks disagree by {overlap_mismatch:.3e} (tolerance {tol:.3e})"
            )));
        }
    }
    let max_residual = intervals.iter().map(|i| i.residual).fold(0.0, f64::max);

    let (cov_lo, cov_hi) = certificate.covered.unwrap();
    let in_range: Vec<&SampleRecord> = samples
        .iter()
        .filter(|r| r.x >= cov_lo as f64 && r.x < cov_hi as f64)
        .collect();

    let mut ls_rms = None;
    if options.mode == ReconstructionMode::LeastSquares {
        let (c, rms) = least_squares(spline, &in_range, first_shift, n)?;
        coefficients = c;
        ls_rms = Some(rms);
    }

    let selected: Vec<(f64, usize)> = certificate
        .selections
        .iter()
        .flat_map(|sel| {
            sel.points
                .iter()
                .zip(&sel.theta)
                .flat_map(|(&x, &t)| (0..=t).map(move |s| (x, s)))
        })
        .collect();
    let is_selected = |r: &SampleRecord| {
        let tol = 1e-12 * r.x.abs().max(1.0);
        selected.iter().any(|&(x, s)| s == r.s && (x - r.x).abs() <= tol)
    };
    let mut consistency = ConsistencyReport {
        checked: 0,
        max_discrepancy: 0.0,
    };
    for r in in_range.iter().filter(|r| !is_selected(r)) {
        let v = spline.series_value(&coefficients, first_shift, r.x, r.s);
        consistency.checked += 1;
        consistency.max_discrepancy = consistency.max_discrepancy.max((v - r.value).abs());
    }

    Ok(ReconstructionResult {
        mode: options.mode,
        first_shift,
        coefficients,
        intervals,
        overlap_mismatch,
        max_residual,
        consistency,
        ls_rms,
    })
}

/// Normal equations `AᵀA c = Aᵀb` of the banded sampling matrix.
fn least_squares(
    spline: &ExpPolySpline,
    samples: &[&SampleRecord],
    first_shift: i64,
    n: usize,
) -> Result<(Vec<f64>, f64)> {
    let m = spline.order() as i64;
    let mut ata = DMatrix::zeros(n, n);
    let mut atb = DVector::zeros(n);
    let row = |r: &SampleRecord| {
        let top = r.x.floor() as i64;
        (top - m + 1..=top)
            .filter(|l| *l >= first_shift && *l < first_shift + n as i64)
            .map(|l| ((l - first_shift) as usize, spline.eval_unchecked(r.x - l as f64, r.s)))
            .collect::<Vec<_>>()
    };
    for r in samples {
        let entries = row(r);
        for &(i, a) in &entries {
            atb[i] += a * r.value;
            for &(j, b) in &entries {
                ata[(i, j)] += a * b;
            }
        }
    }
    let c = LuFactors::new(&ata)
        .map_err(|_| Error::Invariant("least-squares normal matrix is singular".into()))?
        .solve(&atb);
    let c: Vec<f64> = c.iter().copied().collect();
    let sq: f64 = samples
        .iter()
        .map(|r| {
            let v = spline.series_value(&c, first_shift, r.x, r.s) - r.value;
            v * v
        })
        .sum();
    let rms = if samples.is_empty() { 0.0 } else { (sq / samples.len() as f64).sqrt() };
    Ok((c, rms))
}
