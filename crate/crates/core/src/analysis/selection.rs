use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::points::PointConfig;

/// Search nodes allowed per interval before giving up.
pub const NODE_CAP: usize = 10_000;

/// Relative slack on the closed margin inequalities.
pub const MARGIN_SLACK: f64 = 1e-12;

/// Points of one interval `I(k) = [base, base + L)` with sub-multiplicities
/// `ϑ_j` and prefix sums `σ_j = Σ_{n<j} (1 + ϑ_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSelection {
    pub k: i64,
    pub base: i64,
    pub indices: Vec<usize>,
    pub points: Vec<f64>,
    pub theta: Vec<usize>,
    pub sigma: Vec<usize>,
}

impl IntervalSelection {
    pub fn data_count(&self) -> usize {
        self.theta.iter().map(|t| 1 + t).sum()
    }

    /// The selected points with their sub-multiplicities.
    pub fn as_config(&self) -> PointConfig {
        PointConfig::new(self.points.clone(), self.theta.clone())
            .expect("selected points are strictly increasing")
    }

    fn from_path(k: i64, base: i64, config: &PointConfig, path: &[(usize, usize)]) -> Self {
        let mut sigma = Vec::with_capacity(path.len());
        let mut acc = 0;
        for &(_, t) in path {
            sigma.push(acc);
            acc += 1 + t;
        }
        IntervalSelection {
            k,
            base,
            indices: path.iter().map(|p| p.0).collect(),
            points: path.iter().map(|p| config.points()[p.0]).collect(),
            theta: path.iter().map(|p| p.1).collect(),
            sigma,
        }
    }
}

fn slack(x: f64) -> f64 {
    MARGIN_SLACK * x.abs().max(1.0)
}

/// Position test for one point. With `eps > 0` this is the margin form
/// `x ∈ [ϑ - m + 1 + ε, 1 - ε] + σ + base`; with `eps == 0` it is the open
/// interlacing interval `(ϑ - m + 1, 1) + σ + base`, closed on the left when
/// `ϑ = m - 1`.
pub(crate) fn admissible(x: f64, theta: usize, sigma: usize, m: usize, base: f64, eps: f64) -> bool {
    let left = base + (theta + sigma) as f64 - m as f64 + 1.0;
    let right = base + sigma as f64 + 1.0;
    if eps > 0.0 {
        x >= left + eps - slack(x) && x <= right - eps + slack(x)
    } else {
        let above = if theta + 1 == m { x >= left } else { x > left };
        above && x < right
    }
}

pub(crate) struct Search<'a> {
    pub config: &'a PointConfig,
    pub m: usize,
    pub base: f64,
    pub eps: f64,
    pub target: usize,
    /// Candidate indices (contiguous range of points).
    pub candidates: std::ops::Range<usize>,
    /// Extra acceptance test for the final point.
    pub accept_last: &'a dyn Fn(f64, usize) -> bool,
}

pub(crate) enum SearchOutcome {
    Found(Vec<(usize, usize)>),
    Exhausted,
    Capped,
}

impl Search<'_> {
    /// Depth-first search over `(next index, σ)`, leftmost point and largest
    /// sub-multiplicity first, memoizing dead states.
    pub fn run(&self, cap: usize) -> SearchOutcome {
        let mut dead = HashSet::new();
        let mut path = Vec::new();
        let mut nodes = 0;
        match self.dfs(self.candidates.start, 0, &mut path, &mut dead, &mut nodes, cap) {
            Some(true) => SearchOutcome::Found(path),
            Some(false) => SearchOutcome::Exhausted,
            None => SearchOutcome::Capped,
        }
    }

    fn dfs(
        &self,
        start: usize,
        sigma: usize,
        path: &mut Vec<(usize, usize)>,
        dead: &mut HashSet<(usize, usize)>,
        nodes: &mut usize,
        cap: usize,
    ) -> Option<bool> {
        if dead.contains(&(start, sigma)) {
            return Some(false);
        }
        *nodes += 1;
        if *nodes > cap {
            return None;
        }
        let pts = self.config.points();
        let mus = self.config.multiplicities();
        let right = self.base + sigma as f64 + 1.0 - self.eps;
        for i in start..self.candidates.end {
            let x = pts[i];
            if x > right + slack(x) {
                break;
            }
            let top = mus[i].min(self.m - 1).min(self.target - sigma - 1);
            for theta in (0..=top).rev() {
                if !admissible(x, theta, sigma, self.m, self.base, self.eps) {
                    continue;
                }
                let next = sigma + 1 + theta;
                path.push((i, theta));
                if next == self.target {
                    if (self.accept_last)(x, theta) {
                        return Some(true);
                    }
                } else {
                    match self.dfs(i + 1, next, path, dead, nodes, cap) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => return None,
                    }
                }
                path.pop();
            }
        }
        dead.insert((start, sigma));
        Some(false)
    }
}

/// Points of `X ∩ [base, base + L)` with sub-multiplicities satisfying the
/// dimension count `Σ (1 + ϑ_j) = L + m - 1` and the margin conditions
/// `x_j ∈ [ϑ_j - m + 1 + ε, 1 - ε] + base + σ_j`. `None` when the search
/// space is exhausted or the node cap is hit.
pub fn select_interval_points(
    config: &PointConfig,
    m: usize,
    k: i64,
    base: i64,
    l: usize,
    eps: f64,
) -> Option<IntervalSelection> {
    if m == 0 || l == 0 || !(eps > 0.0 && eps < 0.5) {
        return None;
    }
    let b = base as f64;
    let accept = |_: f64, _: usize| true;
    let search = Search {
        config,
        m,
        base: b,
        eps,
        target: l + m - 1,
        candidates: config.range_half_open(b, b + l as f64),
        accept_last: &accept,
    };
    match search.run(NODE_CAP) {
        SearchOutcome::Found(path) => Some(IntervalSelection::from_path(k, base, config, &path)),
        _ => None,
    }
}

/// Independent validity check of a selection; returns the first defect.
pub fn check_interval_selection(
    sel: &IntervalSelection,
    config: &PointConfig,
    m: usize,
    l: usize,
    eps: f64,
) -> Result<(), String> {
    let n = sel.points.len();
    if n == 0 || sel.theta.len() != n || sel.indices.len() != n || sel.sigma.len() != n {
        return Err("inconsistent selection lengths".into());
    }
    if sel.data_count() != l + m - 1 {
        return Err(format!("data count {} != L + m - 1 = {}", sel.data_count(), l + m - 1));
    }
    let b = sel.base as f64;
    let mut sigma = 0;
    for j in 0..n {
        let i = sel.indices[j];
        let x = sel.points[j];
        if i >= config.len() || config.points()[i] != x {
            return Err(format!("point {x} is not point {i} of the set"));
        }
        if j > 0 && sel.points[j - 1] >= x {
            return Err("points not strictly increasing".into());
        }
        if sel.theta[j] > config.multiplicities()[i] {
            return Err(format!("sub-multiplicity exceeds μ at x = {x}"));
        }
        if !(x >= b && x < b + l as f64) {
            return Err(format!("x = {x} outside [{b}, {})", b + l as f64));
        }
        if sel.sigma[j] != sigma {
            return Err("wrong prefix sum".into());
        }
        if !admissible(x, sel.theta[j], sigma, m, b, eps) {
            return Err(format!("margin condition fails at x = {x}"));
        }
        sigma += 1 + sel.theta[j];
    }
    Ok(())
}
