use serde::{Deserialize, Serialize};

use super::density::{necessary_condition, DensityEstimate};
use super::frame::{lower_frame_bound_estimate_with, FrameBounds};
use super::selection::{select_interval_points, IntervalSelection};
use super::Decision;
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::points::SampledSet;
use crate::spline::ExpPolySpline;

/// Interval geometry; unset fields are scanned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    /// Offset `M` of the partition `I(k) = [M + kL, M + kL + L)`.
    pub shift: Option<i64>,
    /// Interval length `L`.
    pub length: Option<usize>,
    /// Margin `ε ∈ (0, 1/2)`.
    pub eps: Option<f64>,
    /// Largest `L` scanned when `length` is unset (default `4m`).
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGeometry {
    pub shift: i64,
    pub length: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingCertificate {
    pub m: usize,
    pub status: Decision,
    /// The certifying geometry, if any.
    pub geometry: Option<IntervalGeometry>,
    pub window: (f64, f64),
    /// `[first base, last base + L)` covered by the selections.
    pub covered: Option<(i64, i64)>,
    pub selections: Vec<IntervalSelection>,
    pub density: Option<DensityEstimate>,
    pub frame: Option<FrameBounds>,
    /// Number of `(M, L, ε)` triples tried.
    pub tried: usize,
}

impl SamplingCertificate {
    /// Coefficient shifts determined by the selections.
    pub fn coefficient_range(&self) -> Option<(i64, i64)> {
        self.covered
            .map(|(lo, hi)| (lo - self.m as i64 + 1, hi - 1))
    }
}

fn eps_candidates(set: &SampledSet, given: Option<f64>) -> Vec<f64> {
    if let Some(e) = given {
        return vec![e];
    }
    let delta = set.config.separation();
    let quarter = if delta.is_finite() { (0.25 * delta).min(0.49) } else { 0.1 };
    if (quarter - 0.1).abs() < 1e-15 {
        vec![0.1]
    } else {
        vec![quarter, 0.1]
    }
}

/// Interval indices `k` whose interval lies inside the window.
fn interval_range(window: (f64, f64), shift: i64, length: usize) -> std::ops::Range<i64> {
    let l = length as f64;
    let first = ((window.0 - shift as f64) / l).ceil() as i64;
    let end = ((window.1 - shift as f64) / l).floor() as i64;
    first..end.max(first)
}

/// Tries one geometry; all intervals inside the window must admit a
/// selection.
fn try_geometry(
    set: &SampledSet,
    m: usize,
    g: IntervalGeometry,
    exec: Execution,
) -> Option<Vec<IntervalSelection>> {
    let ks = interval_range(set.window, g.shift, g.length);
    if ks.is_empty() {
        return None;
    }
    let select = |k: i64| {
        let base = g.shift + k * g.length as i64;
        select_interval_points(&set.config, m, k, base, g.length, g.eps)
    };
    // cheap rejection before fanning out
    let first = select(ks.start)?;
    let rest = exec::map_range((ks.end - ks.start - 1) as usize, exec, |i| {
        select(ks.start + 1 + i as i64)
    });
    let mut out = vec![first];
    for r in rest {
        out.push(r?);
    }
    Some(out)
}

/// Checks the uniform-collocation sampling criterion on the window of `set`.
///
/// The density test runs first; a failure is reported as a violation. Then
/// the given geometry, or the scan `L ∈ 2..=l_max`, `M ∈ 0..L`,
/// `ε ∈ {δ/4, 0.1}`, is tried in that order and the first certifying triple
/// is kept.
pub fn verify_thm_compact(
    spline: &ExpPolySpline,
    set: &SampledSet,
    params: &CertificateParams,
    exec: Execution,
) -> Result<SamplingCertificate> {
    let m = spline.order();
    set.config.check_order(m)?;
    let density = necessary_condition(set).ok();
    let mut cert = SamplingCertificate {
        m,
        status: Decision::Inconclusive,
        geometry: None,
        window: set.window,
        covered: None,
        selections: Vec::new(),
        density: density.map(|d| d.density),
        frame: None,
        tried: 0,
    };
    if density.is_some_and(|d| !d.pass) {
        cert.status = Decision::DensityViolation;
        return Ok(cert);
    }
    let lengths: Vec<usize> = match params.length {
        Some(l) => vec![l],
        None => (2..=params.l_max.unwrap_or(4 * m)).collect(),
    };
    let epsilons = eps_candidates(set, params.eps);
    for &length in &lengths {
        if length == 0 {
            continue;
        }
        let shifts: Vec<i64> = match params.shift {
            Some(s) => vec![s],
            None => (0..length as i64).collect(),
        };
        for &shift in &shifts {
            for &eps in &epsilons {
                cert.tried += 1;
                let g = IntervalGeometry { shift, length, eps };
                if let Some(selections) = try_geometry(set, m, g, exec) {
                    let lo = selections[0].base;
                    let hi = selections.last().unwrap().base + length as i64;
                    cert.status = Decision::Certified;
                    cert.geometry = Some(g);
                    cert.covered = Some((lo, hi));
                    cert.selections = selections;
                    cert.frame = Some(lower_frame_bound_estimate_with(spline, &cert, exec)?);
                    return Ok(cert);
                }
            }
        }
    }
    Ok(cert)
}
