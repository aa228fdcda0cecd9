use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "ebsample",
    version,
    about = "Sampling with derivatives in spaces spanned by translates of an exponential B-spline"
)]
pub struct Cli {
    /// Emit JSON. Reports are JSON already; for `plotdata` this replaces
    /// the CSV stream.
    #[arg(long, global = true)]
    pub json: bool,

    /// Primary output file: the JSON report, or the CSV of `construct`,
    /// `reconstruct` and `plotdata` (their report then goes to stdout).
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Run everything on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Build the generator and report its invariants.
    Spline(SplineCmd),
    /// Schoenberg-Whitney check of a Hermite collocation problem.
    Swcheck(SwCmd),
    /// Interval-collocation certificate for a sampling set.
    Verify(VerifyCmd),
    /// Maximum-gap criterion, then the interval certificate.
    Decide(VerifyCmd),
    /// Weighted maximum-gap criterion alone.
    Maxgap(MaxGapCmd),
    /// Weighted lower Beurling density.
    Density(DensityCmd),
    /// Near-density-optimal sampling set on a lattice.
    Construct(ConstructCmd),
    /// Coefficients from derivative samples.
    Reconstruct(ReconstructCmd),
    /// Lower and upper frame bounds with a Monte Carlo check.
    Frame(FrameCmd),
    /// Semi-regular Gabor frame decision.
    Gabor(GaborCmd),
    /// Curve data for the generator or a coefficient series.
    Plotdata(PlotCmd),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplineArgs {
    /// Spec file with `order = m` and `rates = a1, ..., am`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["order", "rates"])]
    pub spline: Option<PathBuf>,

    /// Order m; rates default to zero (the polynomial B-spline).
    #[arg(long)]
    pub order: Option<usize>,

    /// Comma-separated rates; the order defaults to their count.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PointArgs {
    /// CSV with lines `x[,multiplicity]`.
    #[arg(long, value_name = "FILE")]
    pub points: PathBuf,

    /// Window `a,b` the points represent; defaults to their hull.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,

    /// Period of the set, when it is periodic.
    #[arg(long, alias = "periodic")]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GeometryArgs {
    /// Partition offset M.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<i64>,
    /// Interval length L.
    #[arg(long)]
    pub length: Option<usize>,
    /// Margin ε in (0, 1/2).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest L scanned when --length is unset (default 4m).
    #[arg(long)]
    pub l_max: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SplineCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    /// Grid size of the stability margin.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Points at which to evaluate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Vec<f64>,
    /// Derivative order for --at.
    #[arg(long, default_value_t = 0)]
    pub deriv: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SwCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    /// First translate index.
    #[arg(long, allow_hyphen_values = true)]
    pub l0: i64,
    #[arg(long, value_name = "FILE")]
    pub points: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct MaxGapCmd {
    #[arg(long)]
    pub order: usize,
    #[command(flatten)]
    pub points: PointArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityCmd {
    #[command(flatten)]
    pub points: PointArgs,
    /// Half-width of the sliding windows (non-periodic sets).
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructCmd {
    #[arg(long)]
    pub order: usize,
    /// Density excess ν > 0.
    #[arg(long)]
    pub nu: f64,
    /// Multiplicity pattern repeated inside each block.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub pattern: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    LeastSquares,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    /// CSV with lines `x,deriv_order,value`.
    #[arg(long, value_name = "FILE")]
    pub samples: PathBuf,
    /// Sampling set; defaults to the sample abscissae with the highest
    /// derivative seen at each.
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Fail when overlapping blocks disagree by more than this.
    #[arg(long)]
    pub strict: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct FrameCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Random coefficient vectors for the empirical ratio.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct GaborCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    /// Lattice step α of X = αZ.
    #[arg(long, conflicts_with = "points", required_unless_present = "points")]
    pub alpha: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    /// Window for the set; the lattice default is -32,32.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
    /// Pre-Gramian sections `k0:k1`, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_section, allow_hyphen_values = true)]
    pub sections: Vec<(i64, i64)>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotCmd {
    #[command(flatten)]
    pub spline: SplineArgs,
    /// Coefficient CSV `shift_index,value`; plots the series instead of
    /// the generator.
    #[arg(long, value_name = "FILE")]
    pub coefficients: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Adds a column with this derivative.
    #[arg(long)]
    pub deriv: Option<usize>,
    /// Plot range `a,b`; defaults to the support.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub range: Option<(f64, f64)>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'a,b', found '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("expected finite a < b, found {a},{b}"));
    }
    Ok((a, b))
}

fn parse_section(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected 'k0:k1', found '{s}'"))?;
    let a: i64 = a.trim().parse().map_err(|_| format!("bad index '{a}'"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad index '{b}'"))?;
    if b < a {
        return Err(format!("empty section {a}:{b}"));
    }
    Ok((a, b))
}
