use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::SampledSet;

/// Densities below `1 - DENSITY_TOL` violate the necessary condition.
pub const DENSITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    /// Per-period count of a periodic set (exact), or a windowed infimum.
    pub exact: bool,
    pub radius: Option<f64>,
}

/// Half of the largest integer not exceeding half the window length, so that
/// windows `[y-R, y+R]` have integer length whenever the window allows it.
pub fn default_radius(window: (f64, f64)) -> f64 {
    let half = (window.1 - window.0) / 2.0;
    if half >= 1.0 {
        half.floor() / 2.0
    } else {
        half / 2.0
    }
}

/// Weighted lower Beurling density `inf_y (1/2R) Σ_{x ∈ [y-R, y+R]} (1 + μ(x))`.
///
/// With a period hint the exact per-period average is returned and `radius`
/// is ignored.
pub fn beurling_density(set: &SampledSet, radius: Option<f64>) -> Result<DensityEstimate> {
    let (a, b) = set.window;
    let pts = set.points();
    let weights: Vec<f64> = set.multiplicities().iter().map(|&mu| (1 + mu) as f64).collect();
    if let Some(p) = set.periodic_hint {
        if b - a < p * (1.0 - 1e-12) {
            return Err(Error::InsufficientData(format!(
                "window [{a}, {b}] shorter than the period {p}"
            )));
        }
        let tol = 1e-9 * p;
        let r = set.config.range_half_open(a - tol, a + p - tol);
        let count: f64 = weights[r].iter().sum();
        return Ok(DensityEstimate {
            value: count / p,
            exact: true,
            radius: None,
        });
    }
    let r = radius.unwrap_or_else(|| default_radius(set.window));
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if 2.0 * r > (b - a) * (1.0 + 1e-12) {
        return Err(Error::InsufficientData(format!(
            "window [{a}, {b}] too small for radius {r}"
        )));
    }
    let mut prefix = vec![0.0];
    for w in &weights {
        prefix.push(prefix.last().unwrap() + w);
    }
    let count = |y: f64| {
        let lo = pts.partition_point(|&x| x < y - r);
        let hi = pts.partition_point(|&x| x <= y + r);
        prefix[hi.max(lo)] - prefix[lo]
    };
    let (ylo, yhi) = (a + r, (b - r).max(a + r));
    let mut events: Vec<f64> = pts
        .iter()
        .flat_map(|&x| [x - r, x + r])
        .filter(|&e| e > ylo && e < yhi)
        .collect();
    events.push(ylo);
    events.push(yhi);
    events.sort_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for w in events.windows(2) {
        best = best.min(count(w[0])).min(count(0.5 * (w[0] + w[1])));
    }
    best = best.min(count(yhi));
    Ok(DensityEstimate {
        value: best / (2.0 * r),
        exact: false,
        radius: Some(r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NecessaryCheck {
    pub density: DensityEstimate,
    /// False means the set is certifiably not sampling.
    pub pass: bool,
}

/// Fails exactly when the weighted density is below `1 - DENSITY_TOL`.
pub fn necessary_condition(set: &SampledSet) -> Result<NecessaryCheck> {
    let density = beurling_density(set, None)?;
    Ok(NecessaryCheck {
        density,
        pass: density.value >= 1.0 - DENSITY_TOL,
    })
}
