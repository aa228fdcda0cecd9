use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::certificate::SamplingCertificate;
use super::Decision;
use crate::collocation::collocation_matrix;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg;
use crate::points::PointConfig;
use crate::spline::ExpPolySpline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    /// Smallest singular value over all interval collocation matrices.
    pub sigma_min: f64,
    /// `sample energy ≥ a2_coefficients · ‖c‖²` on the covered range.
    pub a2_coefficients: f64,
    /// `sample energy ≥ a2_function · ‖f‖₂²`, using `‖f‖₂² ≤ riesz_upper ‖c‖²`.
    pub a2_function: f64,
    pub riesz_upper: f64,
    /// Interval index attaining `sigma_min`.
    pub worst_interval: i64,
}

/// Lower frame bound from the certificate's interval matrices.
///
/// The selected data of interval `k` determine the coefficient block
/// `c_{base-m+1}, …, c_{base+L-1}` through a collocation matrix with smallest
/// singular value `σ_k`. The blocks cover every coefficient of the covered
/// range, so the selected sample energy is at least `min_k σ_k² ‖c‖²`.
pub fn lower_frame_bound_estimate(
    spline: &ExpPolySpline,
    certificate: &SamplingCertificate,
) -> Result<FrameBounds> {
    lower_frame_bound_estimate_with(spline, certificate, Execution::default())
}

pub fn lower_frame_bound_estimate_with(
    spline: &ExpPolySpline,
    certificate: &SamplingCertificate,
    exec: Execution,
) -> Result<FrameBounds> {
    if certificate.status != Decision::Certified || certificate.selections.is_empty() {
        return Err(Error::InvalidArgument(
            "frame bound requested for a certificate that is not certified".into(),
        ));
    }
    let m = spline.order() as i64;
    let sigmas = exec::map_slice(&certificate.selections, exec, |sel| {
        collocation_matrix(spline, &sel.as_config(), sel.base - m + 1)
            .map(|cm| (linalg::singular_value_range(&cm.entries).0, sel.k))
    });
    let mut sigma_min = f64::INFINITY;
    let mut worst_interval = 0;
    for r in sigmas {
        let (s, k) = r?;
        if s < sigma_min {
            sigma_min = s;
            worst_interval = k;
        }
    }
    let riesz_upper = spline.riesz_upper_bound();
    let a2 = sigma_min * sigma_min;
    Ok(FrameBounds {
        sigma_min,
        a2_coefficients: a2,
        a2_function: a2 / riesz_upper,
        riesz_upper,
        worst_interval,
    })
}

/// `Σ_x Σ_{s ≤ μ(x)} |f^{(s)}(x)|²` for `f = Σ_i c_i φ(· - first_shift - i)`.
pub fn sample_energy(
    spline: &ExpPolySpline,
    config: &PointConfig,
    coefficients: &[f64],
    first_shift: i64,
) -> f64 {
    let m = spline.order();
    let lo = first_shift as f64;
    let hi = (first_shift + coefficients.len() as i64 + m as i64) as f64;
    let mut energy = 0.0;
    for i in config.range_half_open(lo, hi) {
        let x = config.points()[i];
        for s in 0..=config.multiplicities()[i].min(m - 1) {
            let v = spline.series_value(coefficients, first_shift, x, s);
            energy += v * v;
        }
    }
    energy
}

/// Sample energy divided by `‖f‖₂²`.
pub fn frame_ratio(
    spline: &ExpPolySpline,
    config: &PointConfig,
    coefficients: &[f64],
    first_shift: i64,
) -> Result<f64> {
    let norm = spline.l2_norm_squared(coefficients);
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("zero coefficient vector has zero norm".into()));
    }
    Ok(sample_energy(spline, config, coefficients, first_shift) / norm)
}

/// Min and max of [`frame_ratio`] over `trials` random coefficient vectors
/// supported on the shifts `first..=last`, entries uniform in `[-1, 1]`.
/// Trial `t` draws from a generator seeded with `seed + t`, so the result does
/// not depend on the execution mode.
pub fn empirical_frame_ratio(
    spline: &ExpPolySpline,
    config: &PointConfig,
    shifts: (i64, i64),
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<(f64, f64)> {
    let (first, last) = shifts;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial required".into()));
    }
    if last < first {
        return Err(Error::InvalidArgument(format!("empty shift range {first}..={last}")));
    }
    let n = (last - first + 1) as usize;
    let ratios = exec::map_range(trials, exec, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        frame_ratio(spline, config, &c, first)
    });
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for r in ratios {
        let r = r?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Upper bound `B₂` with `sample energy ≤ B₂ ‖c‖²`, from the Schur test on
/// the sampling matrix `(φ^{(s)}(x - ℓ))`: max row sum times max column sum.
pub fn upper_frame_bound(spline: &ExpPolySpline, config: &PointConfig) -> f64 {
    let m = spline.order() as i64;
    if config.is_empty() {
        return 0.0;
    }
    let pts = config.points();
    let mus = config.multiplicities();
    let mut max_row: f64 = 0.0;
    let first = pts[0].floor() as i64 - m + 1;
    let last = pts[pts.len() - 1].floor() as i64;
    let mut cols = vec![0.0; (last - first + 1) as usize];
    for (&x, &mu) in pts.iter().zip(mus) {
        let top = x.floor() as i64;
        for s in 0..=(mu as i64).min(m - 1) as usize {
            let mut row = 0.0;
            for l in top - m + 1..=top {
                let v = spline.eval_unchecked(x - l as f64, s).abs();
                row += v;
                cols[(l - first) as usize] += v;
            }
            max_row = max_row.max(row);
        }
    }
    max_row * cols.iter().copied().fold(0.0, f64::max)
}
