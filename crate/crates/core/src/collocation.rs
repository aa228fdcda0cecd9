//! Hermite collocation matrices for integer translates of an EB-spline and
//! the Schoenberg-Whitney interlacing test that decides their invertibility.
//!
//! Point indices in reports and errors are 1-based, matching the usual
//! `x_1 < … < x_N` numbering of a configuration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::linalg::{self, LuFactors};
use crate::points::{ExpandedNodes, PointConfig};
use crate::spline::{ExpPolySpline, SplineSpec};

/// `|det| <= SINGULAR_TOL * Π(row max-norms)` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Condition numbers above this attach a warning to a Hermite solve.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Admissible interval of one point: `(lower, upper)`, or `[lower, upper)`
/// when `closed_left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwViolation {
    pub index: usize,
    pub x: f64,
    pub lower: f64,
    pub upper: f64,
    pub closed_left: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwReport {
    pub sw_ok: bool,
    pub violations: Vec<SwViolation>,
}

/// Decides whether the Hermite problem on the translates
/// `T_{ℓ0}φ, …, T_{ℓ0+D-1}φ` is uniquely solvable: every `x_j` must lie in
/// `(μ_j + ℓ0, m + ℓ0) + Σ_{n<j} (1 + μ_n)`, closed on the left when
/// `μ_j = m - 1`.
pub fn schoenberg_whitney(config: &PointConfig, l0: i64, m: usize) -> Result<SwReport> {
    config.check_order(m)?;
    let mut offset = l0;
    let mut violations = Vec::new();
    for (j, (&x, &mu)) in config
        .points()
        .iter()
        .zip(config.multiplicities())
        .enumerate()
    {
        let lower = (mu as i64 + offset) as f64;
        let upper = (m as i64 + offset) as f64;
        let closed_left = mu + 1 == m;
        let above = if closed_left { x >= lower } else { x > lower };
        if !(above && x < upper) {
            violations.push(SwViolation {
                index: j + 1,
                x,
                lower,
                upper,
                closed_left,
            });
        }
        offset += 1 + mu as i64;
    }
    Ok(SwReport {
        sw_ok: violations.is_empty(),
        violations,
    })
}

/// As [`schoenberg_whitney`], but first checks that the data count matches
/// the number of translates.
pub fn schoenberg_whitney_for_translates(
    config: &PointConfig,
    l0: i64,
    m: usize,
    translates: usize,
) -> Result<SwReport> {
    let d = config.data_count();
    if d != translates {
        return Err(Error::DimensionMismatch {
            expected: translates,
            found: d,
        });
    }
    schoenberg_whitney(config, l0, m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollocationMatrix {
    #[serde(with = "matrix_rows")]
    pub entries: DMatrix<f64>,
    pub nodes: ExpandedNodes,
    pub base_shift: i64,
    pub order: usize,
}

impl CollocationMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `(det / Π row max-norms, Π row max-norms)`.
    pub fn scaled_determinant(&self) -> (f64, f64) {
        linalg::scaled_determinant(&self.entries)
    }

    pub fn determinant(&self) -> f64 {
        let (d, s) = self.scaled_determinant();
        d * s
    }

    pub fn is_numerically_singular(&self) -> bool {
        self.scaled_determinant().0 <= SINGULAR_TOL
    }

    pub fn condition_estimate(&self) -> f64 {
        linalg::condition_number(&self.entries)
    }

    pub fn min_singular_value(&self) -> f64 {
        linalg::singular_value_range(&self.entries).0
    }
}

/// Entry `(i, ℓ)` is `φ^{(d_i)}(t_i - ℓ0 - ℓ)` (right limits at knots).
pub fn collocation_matrix(
    spline: &ExpPolySpline,
    config: &PointConfig,
    l0: i64,
) -> Result<CollocationMatrix> {
    let m = spline.order();
    config.check_order(m)?;
    let nodes = config.expand();
    let d = nodes.len();
    let mut entries = DMatrix::zeros(d, d);
    for i in 0..d {
        let (t, s) = (nodes.t[i], nodes.d[i]);
        // only translates whose support [ℓ, ℓ+m) contains t contribute
        let first = ((t - m as f64).floor() as i64 + 1 - l0).max(0);
        let last = ((t.floor() as i64) - l0).min(d as i64 - 1);
        for col in first..=last {
            entries[(i, col as usize)] = spline.eval_unchecked(t - (l0 + col) as f64, s);
        }
    }
    Ok(CollocationMatrix {
        entries,
        nodes,
        base_shift: l0,
        order: m,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermiteSolution {
    /// Coefficient of `T_{first_shift + i} φ` at position `i`.
    pub coefficients: Vec<f64>,
    pub first_shift: i64,
    pub residual: f64,
    pub cond_estimate: f64,
    pub warning: Option<String>,
}

/// Solves `Σ c_ℓ T_ℓ φ` with `f^{(s)}(x_j) = ξ_{j,s}`, data in expanded-node
/// order (derivatives ascending within each point).
pub fn hermite_solve(
    spline: &ExpPolySpline,
    config: &PointConfig,
    l0: i64,
    data: &[f64],
) -> Result<HermiteSolution> {
    let m = spline.order();
    let d = config.data_count();
    if data.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: data.len(),
        });
    }
    let report = schoenberg_whitney(config, l0, m)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::Singular {
            index: v.index,
            x: v.x,
        });
    }
    let cm = collocation_matrix(spline, config, l0)?;
    let b = DVector::from_column_slice(data);
    let lu = LuFactors::new(&cm.entries)
        .map_err(|_| Error::Invariant("collocation matrix singular although interlacing holds".into()))?;
    let c = lu.solve(&b);
    let residual = (&cm.entries * &c - &b).amax();
    let cond_estimate = cm.condition_estimate();
    let warning = (cond_estimate > ILL_CONDITIONED)
        .then(|| format!("ill-conditioned collocation system (condition estimate {cond_estimate:.3e})"));
    Ok(HermiteSolution {
        coefficients: c.iter().copied().collect(),
        first_shift: l0,
        residual,
        cond_estimate,
        warning,
    })
}

/// Weight exponents `γ_1 = α_1`, `γ_s = α_s - α_{s-1}` of the EB-spline's
/// extended complete Chebyshev system.
pub fn weight_exponents(rates: &[f64]) -> Vec<f64> {
    rates
        .iter()
        .enumerate()
        .map(|(s, &a)| if s == 0 { a } else { a - rates[s - 1] })
        .collect()
}

/// `L_s (T_shift φ)(x)` with `L_s = D_s ⋯ D_1`, `D_s f = (e^{-γ_s x} f)'`,
/// applied symbolically to the exp-poly piece containing `x - shift`.
pub fn l_operator_translate(spline: &ExpPolySpline, s: usize, shift: i64, x: f64) -> f64 {
    let m = spline.order();
    let y = x - shift as f64;
    if !(y >= 0.0 && y < m as f64) {
        return 0.0;
    }
    let j = (y.floor() as usize).min(m - 1);
    let u = y - j as f64;
    let gammas = weight_exponents(spline.rates());
    let origin = (shift + j as i64) as f64;
    let mut g: ExpPoly = spline.piece(j).clone();
    for &gamma in gammas.iter().take(s) {
        g = g
            .shift_rate(-gamma)
            .scaled((-gamma * origin).exp())
            .derivative();
    }
    g.eval(u)
}

/// Lower-triangular coefficients `p_{s,k}` relating `L_s` to ordinary
/// derivatives: `L_s f = v_s (f^{(s)} + Σ_{k<s} p_{s,k} f^{(k)})`.
/// For constant weights `p_{s+1,k} = p_{s,k-1} - α_{s+1} p_{s,k}`.
pub fn ls_coefficients(rates: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![1.0]];
    for s in 0..max_order {
        let prev = &p[s];
        let a = rates[s];
        let mut next = vec![0.0; s + 2];
        for (k, slot) in next.iter_mut().enumerate() {
            let left = if k >= 1 { prev[k - 1] } else { 0.0 };
            let own = if k <= s { prev[k] } else { 0.0 };
            *slot = left - a * own;
        }
        p.push(next);
    }
    p
}

/// How the diagonal factor `v_s` is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VIndexing {
    /// `v_s = Π_{k=1}^{s} 1/w_k = e^{-α_s x}`, consistent with `L_1 f = (f/w_1)'`.
    ThroughS,
    /// `v_s = Π_{k=1}^{s-1} 1/w_k = e^{-α_{s-1} x}`.
    ThroughSMinusOne,
}

fn v_factor(rates: &[f64], s: usize, x: f64, indexing: VIndexing) -> f64 {
    let idx = match indexing {
        VIndexing::ThroughS => s,
        VIndexing::ThroughSMinusOne => s.saturating_sub(1),
    };
    if idx == 0 {
        1.0
    } else {
        (-rates[idx - 1] * x).exp()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsFactorizationCheck {
    /// Max row-relative deviation between the symbolic L-collocation matrix
    /// and `V·P·M` with `v_s` indexed through `s`.
    pub max_deviation: f64,
    /// Same, with `v_s` indexed through `s - 1`.
    pub max_deviation_alt_indexing: f64,
}

/// Builds the L-collocation matrix `(L_{d_i} T_{ℓ0+ℓ} φ (t_i))` exactly and
/// via the factorization `V(t) P(t) M`, and reports their deviation.
pub fn ls_factorization_check(
    spec: &SplineSpec,
    config: &PointConfig,
    l0: i64,
) -> Result<LsFactorizationCheck> {
    let spline = ExpPolySpline::build(spec)?;
    let m = spline.order();
    let cm = collocation_matrix(&spline, config, l0)?;
    let nodes = &cm.nodes;
    let d = nodes.len();
    let exact = DMatrix::from_fn(d, d, |i, col| {
        l_operator_translate(&spline, nodes.d[i], l0 + col as i64, nodes.t[i])
    });
    let p = ls_coefficients(spline.rates(), m - 1);
    let factorized = |indexing: VIndexing| {
        DMatrix::from_fn(d, d, |i, col| {
            let s = nodes.d[i];
            let block_start = i - s;
            let inner: f64 = (0..=s)
                .map(|k| p[s][k] * cm.entries[(block_start + k, col)])
                .sum();
            v_factor(spline.rates(), s, nodes.t[i], indexing) * inner
        })
    };
    Ok(LsFactorizationCheck {
        max_deviation: row_relative_deviation(&exact, &factorized(VIndexing::ThroughS)),
        max_deviation_alt_indexing: row_relative_deviation(
            &exact,
            &factorized(VIndexing::ThroughSMinusOne),
        ),
    })
}

fn row_relative_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        let scale = (0..a.ncols())
            .map(|j| a[(i, j)].abs().max(b[(i, j)].abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// `(L_s T_ℓ φ(x), e^{-ℓ α_s} (L_s φ)(x - ℓ))`: both sides of the
/// commutator rule.
pub fn commutator_sides(spline: &ExpPolySpline, s: usize, shift: i64, x: f64) -> (f64, f64) {
    let lhs = l_operator_translate(spline, s, shift, x);
    let total: f64 = weight_exponents(spline.rates()).iter().take(s).sum();
    let rhs = (-(shift as f64) * total).exp() * l_operator_translate(spline, s, 0, x - shift as f64);
    (lhs, rhs)
}

mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Ok(DMatrix::from_fn(n, c, |i, j| rows[i][j]))
    }
}
