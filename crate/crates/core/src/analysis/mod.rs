//! Gap and density statistics, the two sufficient sampling criteria, and
//! frame-bound estimates.

mod certificate;
mod combinatorial;
mod density;
mod frame;
mod gaps;
mod selection;

use serde::{Deserialize, Serialize};

pub use certificate::{
    verify_thm_compact, CertificateParams, IntervalGeometry, SamplingCertificate,
};
pub use combinatorial::{combinatorial_selection, CombinatorialSelection, SelectionCase};
pub use density::{
    beurling_density, default_radius, necessary_condition, DensityEstimate, NecessaryCheck,
    DENSITY_TOL,
};
pub use frame::{
    lower_frame_bound_estimate_with,
    empirical_frame_ratio, frame_ratio, lower_frame_bound_estimate, sample_energy,
    upper_frame_bound, FrameBounds,
};
pub use gaps::{max_gap, weighted_max_gap};
pub use selection::{
    check_interval_selection, select_interval_points, IntervalSelection, MARGIN_SLACK,
    NODE_CAP,
};

mod maxgap;
pub use maxgap::{maxgap_sampling_decision, MaxGapDecision, KNOT_DISTANCE_FLOOR, MAXGAP_TOL};

/// Outcome of a sufficient-condition test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Certified,
    DensityViolation,
    Inconclusive,
}

impl Decision {
    /// CLI exit code: 0 certified, 1 violation, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Decision::Certified => 0,
            Decision::DensityViolation => 1,
            Decision::Inconclusive => 2,
        }
    }
}
