use crate::error::{Error, Result};
use crate::points::PointConfig;

fn need_two(config: &PointConfig) -> Result<()> {
    if config.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "gap statistics need at least 2 points, got {}",
            config.len()
        )));
    }
    Ok(())
}

/// `sup_j (x_{j+1} - x_j)`.
pub fn max_gap(config: &PointConfig) -> Result<f64> {
    need_two(config)?;
    Ok(config
        .points()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max))
}

/// `sup_j (x_{j+1} - x_j) / (1 + min(μ(x_j), μ(x_{j+1})))`.
pub fn weighted_max_gap(config: &PointConfig) -> Result<f64> {
    need_two(config)?;
    let mus = config.multiplicities();
    Ok(config
        .points()
        .windows(2)
        .zip(mus.windows(2))
        .map(|(w, m)| (w[1] - w[0]) / (1 + m[0].min(m[1])) as f64)
        .fold(0.0, f64::max))
}
