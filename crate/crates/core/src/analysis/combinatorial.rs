use serde::{Deserialize, Serialize};

use super::gaps::weighted_max_gap;
use super::selection::{Search, SearchOutcome, NODE_CAP};
use crate::collocation::schoenberg_whitney;
use crate::error::{Error, Result};
use crate::points::PointConfig;

/// Which branch of the case analysis produced a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionCase {
    /// `K > 1`, `x_K > 1`: the first `K` points.
    Generic,
    /// `x_K ≥ 1` an integer carrying `ϑ_K = m - 1`: one more point.
    IntegerEnd,
    /// `K > 1`, `x_K ≤ 1`: add the first point beyond 1.
    ShortStart,
    /// `K = 1`, `0 < x_1 < 1`.
    SingleInterior,
    /// `K = 1`, `x_1 = 0`, `x_2 ≤ 1`.
    KnotWithNeighbour,
    /// `K = 1`, `x_1 = 0`, `x_2 > 1`.
    KnotAlone,
    /// The case analysis failed its replay; found by exhaustive search.
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinatorialSelection {
    /// `⌊x⌋`.
    pub base: i64,
    pub n: usize,
    pub l: usize,
    pub indices: Vec<usize>,
    pub points: Vec<f64>,
    pub theta: Vec<usize>,
    pub case: SelectionCase,
    /// Set when `x_1 = ⌊x⌋` with `μ(x_1) < m - 1`, a branch the literal case
    /// analysis does not anticipate.
    pub literal_divergence: bool,
    /// `1 + ⌈(m+1)/(1 - mg)⌉`.
    pub n0: usize,
}

impl CombinatorialSelection {
    pub fn as_config(&self) -> PointConfig {
        PointConfig::new(self.points.clone(), self.theta.clone())
            .expect("selected points are strictly increasing")
    }

    pub fn l_bound(&self, m: usize) -> usize {
        m * (self.n0 + m + 2)
    }
}

/// `y` snapped to the nearest integer when within `1e-9` of it.
fn snap(y: f64) -> f64 {
    let r = y.round();
    if (y - r).abs() <= 1e-9 * y.abs().max(1.0) {
        r
    } else {
        y
    }
}

fn ceil_i(y: f64) -> i64 {
    snap(y).ceil() as i64
}

fn is_integer(y: f64) -> bool {
    snap(y).fract() == 0.0
}

/// Constructive selection of points right of `⌊x⌋` satisfying the dimension
/// count, the interlacing conditions for the translates
/// `⌊x⌋ - m + 1, …, ⌊x⌋ + L - 1`, and `X ∩ [⌊x⌋ + L - 1, ⌊x⌋ + L] ≠ ∅`.
/// Every result is replayed through [`schoenberg_whitney`].
pub fn combinatorial_selection(
    config: &PointConfig,
    m: usize,
    x: f64,
) -> Result<CombinatorialSelection> {
    if m < 2 {
        return Err(Error::InvalidArgument("the combinatorial selection needs m >= 2".into()));
    }
    config.check_order(m)?;
    if config.find(x).is_none() {
        return Err(Error::InvalidArgument(format!("{x} is not a point of the set")));
    }
    let mg = weighted_max_gap(config)?;
    if !(mg < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "weighted maximum gap {mg} is not below 1"
        )));
    }
    let n0 = 1 + ((m as f64 + 1.0) / (1.0 - mg)).ceil() as usize;
    let a = snap(x).floor() as i64;
    let af = a as f64;
    let pts = config.points();
    let mus = config.multiplicities();
    let i1 = pts.partition_point(|&p| p < af - 1e-12 * af.abs().max(1.0));
    let y = |i: usize| snap(pts[i] - af);
    let exhausted = |what: &str| {
        Error::InsufficientData(format!(
            "window ends before {what}; points right of {a} up to at least {} are needed",
            a + (m * (n0 + m + 2)) as i64
        ))
    };

    // K: first index with ⌈y_K⌉ + m - 1 ≤ Σ_{j ≤ K} (1 + μ_j)
    let mut total = 0i64;
    let mut big_k = None;
    for i in i1..pts.len() {
        total += 1 + mus[i] as i64;
        if ceil_i(y(i)) + m as i64 - 1 <= total {
            big_k = Some(i);
            break;
        }
    }
    let k_idx = big_k.ok_or_else(|| exhausted("the dimension count is reached"))?;
    let first_beyond_one = || {
        (i1..pts.len())
            .find(|&i| y(i) > 1.0)
            .ok_or_else(|| exhausted("a point beyond ⌊x⌋ + 1"))
    };

    let mi = m as i64;
    let mut picks: Vec<(usize, i64)> = Vec::new();
    let mut literal_divergence = false;
    let case;
    if k_idx > i1 {
        let mut before = 0i64;
        for i in i1..k_idx {
            picks.push((i, mus[i] as i64));
            before += 1 + mus[i] as i64;
        }
        let yk = y(k_idx);
        let theta_k = ceil_i(yk) + mi - 2 - before;
        picks.push((k_idx, theta_k));
        if yk >= 1.0 && is_integer(yk) && theta_k == mi - 1 {
            let next = k_idx + 1;
            if next >= pts.len() {
                return Err(exhausted("the point after x_K"));
            }
            picks.push((next, ceil_i(y(next)) - yk as i64 - 1));
            case = SelectionCase::IntegerEnd;
        } else if yk > 1.0 {
            case = SelectionCase::Generic;
        } else {
            let kt = first_beyond_one()?;
            picks.push((kt, ceil_i(y(kt)) - 2));
            case = SelectionCase::ShortStart;
        }
    } else {
        let y1 = y(i1);
        if y1 > 0.0 {
            picks.push((i1, mi - 1));
            let kt = first_beyond_one()?;
            picks.push((kt, ceil_i(y(kt)) - 2));
            case = SelectionCase::SingleInterior;
        } else {
            literal_divergence = mus[i1] + 1 != m;
            if literal_divergence {
                log::info!(
                    "x_1 = {} is an integer with multiplicity {} < m - 1; using the replay-checked branch",
                    pts[i1],
                    mus[i1]
                );
            }
            let second = i1 + 1;
            if second >= pts.len() {
                return Err(exhausted("the second point"));
            }
            if y(second) <= 1.0 {
                picks.push((i1, mi - 2));
                picks.push((second, 0));
                let kt = first_beyond_one()?;
                picks.push((kt, ceil_i(y(kt)) - 2));
                case = SelectionCase::KnotWithNeighbour;
            } else {
                let t1 = (mus[i1] as i64).min(mi - 1);
                picks.push((i1, t1));
                picks.push((second, ceil_i(y(second)) + mi - 3 - t1));
                case = SelectionCase::KnotAlone;
            }
        }
    }
    let last = picks.last().unwrap().0;
    let l = ceil_i(y(last));
    let sel = assemble(config, a, l, picks, case, literal_divergence, n0);
    if let Some(sel) = sel.filter(|s| replay(config, m, s)) {
        return Ok(sel);
    }
    log::warn!("case analysis at x = {x} failed its replay; searching");
    search_fallback(config, m, a, n0, literal_divergence)
}

fn assemble(
    config: &PointConfig,
    a: i64,
    l: i64,
    picks: Vec<(usize, i64)>,
    case: SelectionCase,
    literal_divergence: bool,
    n0: usize,
) -> Option<CombinatorialSelection> {
    if l < 2 || picks.iter().any(|p| p.1 < 0) {
        return None;
    }
    Some(CombinatorialSelection {
        base: a,
        n: picks.len(),
        l: l as usize,
        indices: picks.iter().map(|p| p.0).collect(),
        points: picks.iter().map(|p| config.points()[p.0]).collect(),
        theta: picks.iter().map(|p| p.1 as usize).collect(),
        case,
        literal_divergence,
        n0,
    })
}

/// All stated properties, with interlacing checked by [`schoenberg_whitney`].
fn replay(config: &PointConfig, m: usize, s: &CombinatorialSelection) -> bool {
    let af = s.base as f64;
    let end = af + s.l as f64;
    let mus = config.multiplicities();
    let ok_points = s.indices.windows(2).all(|w| w[0] < w[1])
        && s.indices.iter().zip(&s.theta).all(|(&i, &t)| t <= mus[i] && t < m)
        && s.points.iter().all(|&p| p >= af && p <= end);
    let count: usize = s.theta.iter().map(|t| 1 + t).sum();
    if !ok_points || count != s.l + m - 1 || s.n < 2 || s.l < 2 {
        return false;
    }
    let last = *s.points.last().unwrap();
    if last == end && *s.theta.last().unwrap() + 2 > m {
        return false;
    }
    if config.range_closed(end - 1.0, end).is_empty() {
        return false;
    }
    match PointConfig::new(s.points.clone(), s.theta.clone()) {
        Ok(c) => schoenberg_whitney(&c, s.base - m as i64 + 1, m).is_ok_and(|r| r.sw_ok),
        Err(_) => false,
    }
}

fn search_fallback(
    config: &PointConfig,
    m: usize,
    a: i64,
    n0: usize,
    literal_divergence: bool,
) -> Result<CombinatorialSelection> {
    let af = a as f64;
    let l_cap = m * (n0 + m + 2);
    for l in 2..=l_cap {
        let end = af + l as f64;
        let accept = |x: f64, theta: usize| x < end || theta + 2 <= m;
        let search = Search {
            config,
            m,
            base: af,
            eps: 0.0,
            target: l + m - 1,
            candidates: config.range_closed(af, end),
            accept_last: &accept,
        };
        if let SearchOutcome::Found(path) = search.run(NODE_CAP) {
            let picks = path.into_iter().map(|(i, t)| (i, t as i64)).collect();
            if let Some(sel) = assemble(
                config,
                a,
                l as i64,
                picks,
                SelectionCase::Search,
                literal_divergence,
                n0,
            )
            .filter(|s| replay(config, m, s))
            {
                return Ok(sel);
            }
        }
    }
    Err(Error::InsufficientData(format!(
        "no admissible selection right of {a} with L <= {l_cap}"
    )))
}
