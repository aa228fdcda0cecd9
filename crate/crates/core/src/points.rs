//! Sampling point configurations with multiplicities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing points, each carrying the number of extra derivatives
/// sampled there (`0` = value only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    points: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl PointConfig {
    pub fn new(points: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if points.len() != multiplicities.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: multiplicities.len(),
            });
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidPoints(format!("non-finite point {x}")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidPoints(format!(
                    "points must be strictly increasing (index {} has {} after {})",
                    i + 1,
                    w[1],
                    w[0]
                )));
            }
        }
        Ok(PointConfig {
            points,
            multiplicities,
        })
    }

    /// Points without derivatives.
    pub fn values_only(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        PointConfig::new(points, vec![0; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimum consecutive gap; `+∞` for fewer than two points.
    pub fn separation(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }

    /// Number of data `Σ (1 + μ_j)`.
    pub fn data_count(&self) -> usize {
        self.multiplicities.iter().map(|m| 1 + m).sum()
    }

    pub fn check_order(&self, m: usize) -> Result<()> {
        if let Some((j, &mu)) = self.multiplicities.iter().enumerate().find(|(_, &mu)| mu >= m) {
            return Err(Error::InvalidPoints(format!(
                "multiplicity {mu} at point {j} exceeds m - 1 = {}",
                m.saturating_sub(1)
            )));
        }
        Ok(())
    }

    pub fn expand(&self) -> ExpandedNodes {
        expand_points(self)
    }

    /// Sub-configuration of the points whose indices are listed.
    pub fn select(&self, indices: &[usize], multiplicities: &[usize]) -> Result<PointConfig> {
        PointConfig::new(
            indices.iter().map(|&i| self.points[i]).collect(),
            multiplicities.to_vec(),
        )
    }

    /// Index of the point equal to `x` up to a relative `1e-12`.
    pub fn find(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * 1f64.max(x.abs());
        let i = self.points.partition_point(|&p| p < x - tol);
        (i < self.points.len() && (self.points[i] - x).abs() <= tol).then_some(i)
    }

    /// Indices of points in the half-open range `[a, b)`.
    pub fn range_half_open(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.points.partition_point(|&p| p < a);
        let hi = self.points.partition_point(|&p| p < b);
        lo..hi.max(lo)
    }

    /// Indices of points in the closed range `[a, b]`.
    pub fn range_closed(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.points.partition_point(|&p| p < a);
        let hi = self.points.partition_point(|&p| p <= b);
        lo..hi.max(lo)
    }
}

/// Points repeated `1 + μ_j` times, with derivative orders `d_i` counting the
/// earlier repetitions of the same point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedNodes {
    pub t: Vec<f64>,
    pub d: Vec<usize>,
    /// Index of the originating point for every node.
    pub point_index: Vec<usize>,
}

impl ExpandedNodes {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

pub fn expand_points(config: &PointConfig) -> ExpandedNodes {
    let total = config.data_count();
    let mut t = Vec::with_capacity(total);
    let mut d = Vec::with_capacity(total);
    let mut point_index = Vec::with_capacity(total);
    for (j, (&x, &mu)) in config.points.iter().zip(&config.multiplicities).enumerate() {
        for s in 0..=mu {
            t.push(x);
            d.push(s);
            point_index.push(j);
        }
    }
    ExpandedNodes { t, d, point_index }
}

/// A (window of a possibly infinite) sampling set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSet {
    pub config: PointConfig,
    /// Closed range `[a, b]` represented by `config`.
    pub window: (f64, f64),
    /// Integer-free period `P` such that `X + P = X` (with multiplicities).
    pub periodic_hint: Option<f64>,
}

impl SampledSet {
    pub fn new(config: PointConfig, window: (f64, f64), periodic_hint: Option<f64>) -> Result<Self> {
        let (a, b) = window;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("invalid window [{a}, {b}]")));
        }
        if let Some(x) = config.points().iter().find(|&&x| x < a || x > b) {
            return Err(Error::InvalidPoints(format!("point {x} outside window [{a}, {b}]")));
        }
        if let Some(p) = periodic_hint {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid period {p}")));
            }
        }
        let set = SampledSet {
            config,
            window,
            periodic_hint,
        };
        if set.periodic_hint.is_some() && !set.is_consistent_with_period() {
            return Err(Error::InvalidPoints(
                "points do not repeat with the stated period".into(),
            ));
        }
        Ok(set)
    }

    /// Window spanned by the points themselves.
    pub fn from_config(config: PointConfig) -> Result<Self> {
        if config.is_empty() {
            return Err(Error::InsufficientData("empty point set".into()));
        }
        let a = config.points()[0];
        let b = *config.points().last().unwrap();
        let b = if b > a { b } else { a + 1.0 };
        SampledSet::new(config, (a, b), None)
    }

    /// `offset + αk` for all `k` landing in `[a, b]`, with multiplicity
    /// `mult(k)`.
    pub fn lattice(
        alpha: f64,
        offset: f64,
        window: (f64, f64),
        mult: impl Fn(i64) -> usize,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("lattice step must be positive, got {alpha}")));
        }
        let (a, b) = window;
        let k0 = ((a - offset) / alpha).ceil() as i64;
        let k1 = ((b - offset) / alpha).floor() as i64;
        let mut pts = Vec::new();
        let mut mus = Vec::new();
        for k in k0..=k1 {
            let x = offset + alpha * k as f64;
            if x >= a && x <= b {
                pts.push(x);
                mus.push(mult(k));
            }
        }
        SampledSet::new(PointConfig::new(pts, mus)?, window, None)
    }

    pub fn with_period(mut self, period: f64) -> Result<Self> {
        self.periodic_hint = Some(period);
        SampledSet::new(self.config, self.window, self.periodic_hint)
    }

    fn is_consistent_with_period(&self) -> bool {
        let Some(p) = self.periodic_hint else {
            return true;
        };
        let b = self.window.1;
        let pts = self.config.points();
        let mus = self.config.multiplicities();
        pts.iter().zip(mus).all(|(&x, &mu)| {
            // a shift landing on the window end within roundoff may be absent
            if x + p > b - 1e-9 * 1f64.max(b.abs()) {
                return true;
            }
            match self.config.find(x + p) {
                Some(i) => mus[i] == mu,
                None => {
                    // tolerate representation error in the shifted value
                    let tol = 1e-9 * 1f64.max(x.abs());
                    let r = self.config.range_closed(x + p - tol, x + p + tol);
                    r.into_iter().any(|i| mus[i] == mu)
                }
            }
        })
    }

    pub fn points(&self) -> &[f64] {
        self.config.points()
    }

    pub fn multiplicities(&self) -> &[usize] {
        self.config.multiplicities()
    }
}
