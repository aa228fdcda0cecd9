//! Semi-regular Gabor frames `G(φ, (-X) × Z)` decided through sampling in
//! the spline space, plus finite sections of the pre-Gramian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    maxgap_sampling_decision, verify_thm_compact, CertificateParams, Decision,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg;
use crate::points::{PointConfig, SampledSet};
use crate::spline::{stability_margin, ExpPolySpline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameAnswer {
    Yes,
    No,
    Inconclusive,
}

impl FrameAnswer {
    pub fn exit_code(self) -> i32 {
        match self {
            FrameAnswer::Yes => 0,
            FrameAnswer::No => 1,
            FrameAnswer::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRoute {
    MaxGap,
    Certificate,
    Density,
    Lattice,
    Undecided,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaborDecision {
    pub frame: FrameAnswer,
    pub route: DecisionRoute,
    /// The time-frequency set the answer refers to.
    pub frame_set: String,
    /// Whether the window of `X` is symmetric, so that `(-X) × Z = X × Z`.
    pub symmetric: bool,
    pub stability_margin: f64,
    pub sections: Vec<SectionSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSummary {
    pub k0: i64,
    pub k1: i64,
    pub rows: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

#[derive(Debug, Clone)]
pub struct PreGramianSection {
    pub matrix: DMatrix<f64>,
    pub points: Vec<f64>,
    pub summary: SectionSummary,
}

/// Rows `x ∈ X ∩ [k0, k1 + m]`, columns `k0..=k1`, entries `φ(x - k)`.
pub fn pre_gramian_section(
    spline: &ExpPolySpline,
    config: &PointConfig,
    k0: i64,
    k1: i64,
) -> Result<PreGramianSection> {
    if k1 < k0 {
        return Err(Error::InvalidArgument(format!("empty section {k0}:{k1}")));
    }
    let m = spline.order() as i64;
    let range = config.range_closed(k0 as f64, (k1 + m) as f64);
    let points: Vec<f64> = config.points()[range].to_vec();
    let cols = (k1 - k0 + 1) as usize;
    let matrix = DMatrix::from_fn(points.len(), cols, |i, j| {
        spline.eval_unchecked(points[i] - (k0 + j as i64) as f64, 0)
    });
    let (sigma_min, sigma_max) = linalg::singular_value_range(&matrix);
    Ok(PreGramianSection {
        summary: SectionSummary {
            k0,
            k1,
            rows: points.len(),
            sigma_min,
            sigma_max,
        },
        matrix,
        points,
    })
}

/// Section summaries for several windows, computed independently.
pub fn pre_gramian_sections(
    spline: &ExpPolySpline,
    config: &PointConfig,
    windows: &[(i64, i64)],
    exec: Execution,
) -> Result<Vec<SectionSummary>> {
    exec::map_slice(windows, exec, |&(k0, k1)| {
        pre_gramian_section(spline, config, k0, k1).map(|s| s.summary)
    })
    .into_iter()
    .collect()
}

/// `G(φ, αZ × Z)` is a frame exactly when `α < 1`.
pub fn lattice_gabor_decision(alpha: f64) -> Result<FrameAnswer> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("lattice step must be positive, got {alpha}")));
    }
    Ok(if alpha < 1.0 {
        FrameAnswer::Yes
    } else {
        FrameAnswer::No
    })
}

fn is_symmetric(set: &SampledSet) -> bool {
    let pts = set.points();
    pts.iter().all(|&x| set.config.find(-x).is_some())
}

/// Frame decision for `G(φ, (-X) × Z)` from the sampling decisions for `X`
/// (values only): maximum gap first, then the interval certificate.
pub fn gabor_frame_decision(
    spline: &ExpPolySpline,
    set: &SampledSet,
    sections: &[(i64, i64)],
    exec: Execution,
) -> Result<GaborDecision> {
    if set.multiplicities().iter().any(|&mu| mu != 0) {
        return Err(Error::InvalidPoints(
            "the Gabor bridge applies to value samples only (all multiplicities 0)".into(),
        ));
    }
    let margin = stability_margin(spline.spec(), 256)?;
    if !(margin > 0.0) {
        return Err(Error::InvalidArgument("generator translates are not stable".into()));
    }
    let m = spline.order();
    let (frame, route) = match set.points().len() {
        0 | 1 => (FrameAnswer::Inconclusive, DecisionRoute::Undecided),
        _ => {
            let mg = maxgap_sampling_decision(set, m)?;
            match mg.status {
                Decision::Certified => (FrameAnswer::Yes, DecisionRoute::MaxGap),
                Decision::DensityViolation => (FrameAnswer::No, DecisionRoute::Density),
                Decision::Inconclusive => {
                    let cert = verify_thm_compact(spline, set, &CertificateParams::default(), exec)?;
                    match cert.status {
                        Decision::Certified => (FrameAnswer::Yes, DecisionRoute::Certificate),
                        Decision::DensityViolation => (FrameAnswer::No, DecisionRoute::Density),
                        Decision::Inconclusive => {
                            (FrameAnswer::Inconclusive, DecisionRoute::Undecided)
                        }
                    }
                }
            }
        }
    };
    Ok(GaborDecision {
        frame,
        route,
        frame_set: "(-X) x Z".into(),
        symmetric: is_symmetric(set),
        stability_margin: margin,
        sections: pre_gramian_sections(spline, &set.config, sections, exec)?,
    })
}
