//! Lattice sampling sets with prescribed multiplicity patterns whose weighted
//! density approaches the critical value 1.

use serde::{Deserialize, Serialize};

use crate::analysis::{verify_thm_compact, CertificateParams, Decision, SamplingCertificate};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::points::{PointConfig, SampledSet};
use crate::spline::{ExpPolySpline, SplineSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub m: usize,
    /// Density excess: the output has weighted density below `1 + ν`.
    pub nu: f64,
    /// Multiplicities repeated from the start of every block.
    pub pattern: Vec<usize>,
    pub blocks: usize,
}

impl ConstructionParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidArgument("construction needs m >= 2".into()));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("ν must be positive, got {}", self.nu)));
        }
        if self.pattern.is_empty() {
            return Err(Error::InvalidArgument("empty multiplicity pattern".into()));
        }
        if let Some(&p) = self.pattern.iter().find(|&&p| p >= self.m) {
            return Err(Error::InvalidPoints(format!(
                "pattern value {p} exceeds m - 1 = {}",
                self.m - 1
            )));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidArgument("at least one block required".into()));
        }
        Ok(())
    }

    /// Lattice step `α = 1/(m+1)`, also used as margin `ε`.
    pub fn alpha(&self) -> f64 {
        1.0 / (self.m + 1) as f64
    }

    /// Smallest `L` with `(2m - 2)/L < ν`.
    pub fn block_length(&self) -> usize {
        let need = (2 * self.m - 2) as f64 / self.nu;
        let l = need.floor() as usize + 1;
        l.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub k: usize,
    /// Lattice indices `q` of the points `q/(m+1)`.
    pub lattice_indices: Vec<i64>,
    pub points: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub theta: Vec<usize>,
    /// `Σ (1 + μ_j) / L` over the block.
    pub density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Construction {
    pub params: ConstructionParams,
    pub alpha: f64,
    pub eps: f64,
    pub l: usize,
    pub n: usize,
    pub set: SampledSet,
    pub blocks: Vec<BlockReport>,
    pub density: f64,
    pub certificate: SamplingCertificate,
}

/// Sub-multiplicities of one block: `ϑ_j = μ_j` before the last point, and
/// the last one trimmed so that `Σ (1 + ϑ_j) = L + m - 1`.
fn block_pattern(params: &ConstructionParams, l: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let target = l + params.m - 1;
    let mut mus = Vec::new();
    let mut total = 0;
    let mut j = 0;
    while total < target {
        let mu = params.pattern[j % params.pattern.len()];
        mus.push(mu);
        total += 1 + mu;
        j += 1;
    }
    let before: usize = mus[..mus.len() - 1].iter().map(|m| 1 + m).sum();
    let last = (target - before)
        .checked_sub(1)
        .ok_or_else(|| Error::Invariant("negative final sub-multiplicity".into()))?;
    let mut theta = mus.clone();
    *theta.last_mut().unwrap() = last;
    Ok((mus, theta))
}

/// Greedy lattice picks for one block starting at 0: the least lattice
/// point `q/(m+1)` in `[ℓ + ε, ℓ + 1 - ε]` beyond the previous pick, where
/// `ℓ = max(0, ϑ_j - m + 1 + σ_j)`.
fn greedy_indices(m: usize, theta: &[usize]) -> Result<Vec<i64>> {
    let step = (m + 1) as i64;
    let mut out: Vec<i64> = Vec::with_capacity(theta.len());
    let mut sigma = 0i64;
    for &t in theta {
        let ell = (t as i64 - m as i64 + 1 + sigma).max(0);
        let lo = step * ell + 1;
        let hi = step * ell + m as i64;
        let q = out.last().map_or(lo, |&p| lo.max(p + 1));
        if q > hi {
            return Err(Error::Invariant(format!(
                "no free lattice point in unit interval {ell}"
            )));
        }
        out.push(q);
        sigma += 1 + t as i64;
    }
    Ok(out)
}

/// Builds `blocks` copies of one block on `[kL, (k+1)L)` and replays the
/// result through the certificate check with `M = 0`, `ε = α`. The interval
/// conditions depend only on `m`, so the replay uses the polynomial spline.
pub fn construct_near_optimal(params: &ConstructionParams, exec: Execution) -> Result<Construction> {
    params.validate()?;
    let m = params.m;
    let l = params.block_length();
    let alpha = params.alpha();
    let (mus, theta) = block_pattern(params, l)?;
    let base_q = greedy_indices(m, &theta)?;
    let step = (m + 1) as i64;
    let block_data: usize = mus.iter().map(|m| 1 + m).sum();
    let mut blocks = Vec::with_capacity(params.blocks);
    let mut pts = Vec::new();
    let mut all_mus = Vec::new();
    for k in 0..params.blocks {
        let q: Vec<i64> = base_q.iter().map(|&q| q + k as i64 * l as i64 * step).collect();
        let points: Vec<f64> = q.iter().map(|&q| q as f64 / step as f64).collect();
        pts.extend_from_slice(&points);
        all_mus.extend_from_slice(&mus);
        blocks.push(BlockReport {
            k,
            lattice_indices: q,
            points,
            multiplicities: mus.clone(),
            theta: theta.clone(),
            density: block_data as f64 / l as f64,
        });
    }
    let window = (0.0, (params.blocks * l) as f64);
    let set = SampledSet::new(PointConfig::new(pts, all_mus)?, window, Some(l as f64))?;
    let density = density_report(&set, l, m)?;
    let spline = ExpPolySpline::build(&SplineSpec::polynomial(m))?;
    let cp = CertificateParams {
        shift: Some(0),
        length: Some(l),
        eps: Some(alpha),
        l_max: None,
    };
    let certificate = verify_thm_compact(&spline, &set, &cp, exec)?;
    if certificate.status != Decision::Certified {
        return Err(Error::Invariant(format!(
            "constructed set failed its own certificate ({:?})",
            certificate.status
        )));
    }
    Ok(Construction {
        params: params.clone(),
        alpha,
        eps: alpha,
        l,
        n: theta.len(),
        set,
        blocks,
        density,
        certificate,
    })
}

/// Weighted density of a block-periodic set, the least data count over the
/// blocks `[kL, (k+1)L)` inside the window divided by `L`. Errors when it
/// exceeds `1 + (2m - 2)/L`.
pub fn density_report(set: &SampledSet, l: usize, m: usize) -> Result<f64> {
    let lf = l as f64;
    let blocks = ((set.window.1 - set.window.0) / lf + 1e-9).floor() as usize;
    if blocks == 0 {
        return Err(Error::InsufficientData("window shorter than one block".into()));
    }
    let mus = set.multiplicities();
    let density = (0..blocks)
        .map(|k| {
            let a = set.window.0 + k as f64 * lf;
            set.config
                .range_half_open(a, a + lf)
                .map(|i| 1 + mus[i])
                .sum::<usize>() as f64
                / lf
        })
        .fold(f64::INFINITY, f64::min);
    let bound = 1.0 + (2 * m - 2) as f64 / lf;
    if density > bound + 1e-12 {
        return Err(Error::Invariant(format!(
            "block density {density} exceeds 1 + (2m-2)/L = {bound}"
        )));
    }
    Ok(density)
}
