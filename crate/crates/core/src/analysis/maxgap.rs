use serde::{Deserialize, Serialize};

use super::density::{necessary_condition, DensityEstimate};
use super::gaps::weighted_max_gap;
use super::Decision;
use crate::error::Result;
use crate::points::SampledSet;

/// The weighted gap must be below `1 - MAXGAP_TOL`.
pub const MAXGAP_TOL: f64 = 1e-12;

/// Points of maximal multiplicity must stay this far from the integers.
pub const KNOT_DISTANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxGapDecision {
    pub status: Decision,
    pub weighted_max_gap: f64,
    /// Distance to `Z` of the points with `μ = m - 1`; `None` if there are
    /// none.
    pub knot_distance: Option<f64>,
    pub density: Option<DensityEstimate>,
}

/// Weighted maximum gap criterion: certified when the gap is below one and
/// points of multiplicity `m - 1` avoid the integers.
pub fn maxgap_sampling_decision(set: &SampledSet, m: usize) -> Result<MaxGapDecision> {
    set.config.check_order(m)?;
    let mg = weighted_max_gap(&set.config)?;
    let knot_distance = set
        .points()
        .iter()
        .zip(set.multiplicities())
        .filter(|(_, &mu)| mu + 1 == m)
        .map(|(&x, _)| (x - x.round()).abs())
        .reduce(f64::min);
    let necessary = necessary_condition(set).ok();
    let status = if necessary.is_some_and(|n| !n.pass) {
        Decision::DensityViolation
    } else if mg < 1.0 - MAXGAP_TOL && knot_distance.is_none_or(|d| d >= KNOT_DISTANCE_FLOOR) {
        Decision::Certified
    } else {
        Decision::Inconclusive
    };
    Ok(MaxGapDecision {
        status,
        weighted_max_gap: mg,
        knot_distance,
        density: necessary.map(|n| n.density),
    })
}
