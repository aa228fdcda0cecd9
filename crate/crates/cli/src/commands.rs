use std::fs;
use std::path::Path;

use ebsampling::analysis::{
    beurling_density, empirical_frame_ratio, lower_frame_bound_estimate_with, maxgap_sampling_decision,
    necessary_condition, upper_frame_bound, verify_thm_compact, CertificateParams, Decision,
    SamplingCertificate,
};
use ebsampling::collocation::{collocation_matrix, schoenberg_whitney};
use ebsampling::construction::{construct_near_optimal, ConstructionParams};
use ebsampling::gabor::{gabor_frame_decision, lattice_gabor_decision};
use ebsampling::io;
use ebsampling::reconstruction::{
    evaluate_model, reconstruct, ReconstructOptions, ReconstructionMode, SampleRecord,
};
use ebsampling::spline::stability_margin_with;
use ebsampling::{Execution, ExpPolySpline, PointConfig, SampledSet, SplineSpec};
use serde_json::{json, Value};

use crate::args::*;
use crate::CliError;

/// What a subcommand produced: the exit code, the report body, the
/// resolved inputs and an optional CSV payload.
pub struct Outcome {
    pub code: i32,
    pub result: Value,
    pub resolved: Value,
    pub csv: Option<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(code: i32, result: Value) -> Self {
        Outcome {
            code,
            result,
            resolved: Value::Null,
            csv: None,
            warnings: Vec::new(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Attaches the file name to parse errors.
fn in_file<T>(path: &Path, r: ebsampling::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(e).context(&path.display().to_string()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn resolve_spec(args: &SplineArgs) -> Result<SplineSpec, CliError> {
    if let Some(path) = &args.spline {
        return in_file(path, io::parse_spec(&read(path)?));
    }
    let order = match (args.order, &args.rates) {
        (Some(m), _) => m,
        (None, Some(r)) => r.len(),
        (None, None) => {
            return Err(CliError::Usage(
                "a generator is required: --spline FILE, --order m or --rates a1,...".into(),
            ))
        }
    };
    let rates = args.rates.clone().unwrap_or_else(|| vec![0.0; order]);
    SplineSpec::new(order, rates).map_err(|e| CliError::Usage(e.to_string()))
}

/// Builds the generator and collects the near-coincident-rate warnings.
fn build_spline(args: &SplineArgs, warnings: &mut Vec<String>) -> Result<ExpPolySpline, CliError> {
    let spec = resolve_spec(args)?;
    for (i, j, gap) in spec.near_coincident_rates() {
        let msg = format!(
            "rates {i} and {j} differ by {gap:.3e}; expect cancellation in the exact construction"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    ExpPolySpline::build(&spec).map_err(CliError::from_core)
}

fn load_points(path: &Path) -> Result<PointConfig, CliError> {
    in_file(path, io::parse_points(&read(path)?))
}

fn sampled_set(
    config: PointConfig,
    window: Option<(f64, f64)>,
    period: Option<f64>,
) -> Result<SampledSet, CliError> {
    let set = match window {
        Some(w) => SampledSet::new(config, w, None),
        None => SampledSet::from_config(config),
    }
    .map_err(CliError::from_core)?;
    match period {
        Some(p) => set.with_period(p).map_err(CliError::from_core),
        None => Ok(set),
    }
}

fn load_set(args: &PointArgs) -> Result<SampledSet, CliError> {
    sampled_set(load_points(&args.points)?, args.window, args.period)
}

fn cert_params(g: &GeometryArgs) -> CertificateParams {
    CertificateParams {
        shift: g.shift,
        length: g.length,
        eps: g.eps,
        l_max: g.l_max,
    }
}

fn certify(
    spline: &ExpPolySpline,
    set: &SampledSet,
    g: &GeometryArgs,
    exec: Execution,
) -> Result<SamplingCertificate, CliError> {
    verify_thm_compact(spline, set, &cert_params(g), exec).map_err(CliError::from_core)
}

fn resolved_set(spline: Option<&ExpPolySpline>, set: &SampledSet) -> Value {
    json!({
        "spline": spline.map(|s| to_value(s.spec())),
        "window": set.window,
        "period": set.periodic_hint,
        "points": set.points().len(),
        "data_count": set.config.data_count(),
    })
}

pub fn run(cmd: &Command, json_out: bool, exec: Execution) -> Result<Outcome, CliError> {
    match cmd {
        Command::Spline(c) => spline(c, exec),
        Command::Swcheck(c) => swcheck(c),
        Command::Verify(c) => verify(c, exec),
        Command::Decide(c) => decide(c, exec),
        Command::Maxgap(c) => maxgap(c),
        Command::Density(c) => density(c),
        Command::Construct(c) => construct(c, exec),
        Command::Reconstruct(c) => reconstruct_cmd(c, exec),
        Command::Frame(c) => frame(c, exec),
        Command::Gabor(c) => gabor(c, exec),
        Command::Plotdata(c) => plotdata(c, json_out),
    }
}

fn spline(c: &SplineCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let spec = s.spec();
    let m = s.order();
    let margin = stability_margin_with(spec, c.grid, exec).map_err(CliError::from_core)?;
    let values: Vec<Value> = c
        .at
        .iter()
        .map(|&x| s.evaluate(x, c.deriv).map(|v| json!({ "x": x, "value": v })))
        .collect::<Result<_, _>>()
        .map_err(CliError::from_core)?;
    let gram: Vec<f64> = (0..m as i64).map(|k| s.gram_entry(k)).collect();
    let mut out = Outcome::new(
        0,
        json!({
            "order": m,
            "rates": s.rates(),
            "support": [0.0, m as f64],
            "smoothness": if m >= 2 { Some(m - 2) } else { None },
            "integral": spec.integral(),
            "sup_norm": s.sup_norm(),
            "gram_entries": gram,
            "riesz_upper": s.riesz_upper_bound(),
            "stability_margin": margin,
            "stable": margin > 0.0,
            "values": values,
        }),
    );
    out.resolved = json!({ "spline": to_value(spec) });
    out.warnings = warnings;
    Ok(out)
}

fn swcheck(c: &SwCmd) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let config = load_points(&c.points)?;
    let m = s.order();
    let sw = schoenberg_whitney(&config, c.l0, m).map_err(CliError::from_core)?;
    let cm = collocation_matrix(&s, &config, c.l0).map_err(CliError::from_core)?;
    let (scaled, scale) = cm.scaled_determinant();
    let mut out = Outcome::new(
        if sw.sw_ok { 0 } else { 1 },
        json!({
            "sw_ok": sw.sw_ok,
            "violations": sw.violations,
            "det": scaled * scale,
            "scaled_det": scaled,
            "numerically_singular": cm.is_numerically_singular(),
            "cond_estimate": cm.condition_estimate(),
            "translates": [c.l0, c.l0 + cm.dim() as i64 - 1],
        }),
    );
    out.resolved = json!({ "spline": to_value(s.spec()), "data_count": config.data_count() });
    out.warnings = warnings;
    Ok(out)
}

fn verify(c: &VerifyCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let set = load_set(&c.points)?;
    let cert = certify(&s, &set, &c.geometry, exec)?;
    let mut out = Outcome::new(cert.status.exit_code(), to_value(&cert));
    out.resolved = resolved_set(Some(&s), &set);
    out.warnings = warnings;
    Ok(out)
}

fn decide(c: &VerifyCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let set = load_set(&c.points)?;
    let mg = maxgap_sampling_decision(&set, s.order()).map_err(CliError::from_core)?;
    let (status, route, cert) = match mg.status {
        Decision::Inconclusive => {
            let cert = certify(&s, &set, &c.geometry, exec)?;
            (cert.status, "certificate", Some(cert))
        }
        Decision::DensityViolation => (mg.status, "density", None),
        Decision::Certified => (mg.status, "maxgap", None),
    };
    let mut out = Outcome::new(
        status.exit_code(),
        json!({
            "status": status,
            "route": route,
            "maxgap": mg,
            "certificate": cert,
        }),
    );
    out.resolved = resolved_set(Some(&s), &set);
    out.warnings = warnings;
    Ok(out)
}

fn maxgap(c: &MaxGapCmd) -> Result<Outcome, CliError> {
    let set = load_set(&c.points)?;
    let d = maxgap_sampling_decision(&set, c.order).map_err(CliError::from_core)?;
    let mut out = Outcome::new(d.status.exit_code(), to_value(&d));
    out.resolved = json!({ "order": c.order, "set": resolved_set(None, &set) });
    Ok(out)
}

fn density(c: &DensityCmd) -> Result<Outcome, CliError> {
    let set = load_set(&c.points)?;
    let d = beurling_density(&set, c.radius).map_err(CliError::from_core)?;
    let pass = necessary_condition(&set).map_err(CliError::from_core)?.pass;
    let mut out = Outcome::new(
        if d.value >= 1.0 - ebsampling::analysis::DENSITY_TOL { 0 } else { 1 },
        json!({
            "density": d.value,
            "exact": d.exact,
            "radius": d.radius,
            "necessary_condition": pass,
        }),
    );
    out.resolved = resolved_set(None, &set);
    Ok(out)
}

fn construct(c: &ConstructCmd, exec: Execution) -> Result<Outcome, CliError> {
    let params = ConstructionParams {
        m: c.order,
        nu: c.nu,
        pattern: c.pattern.clone(),
        blocks: c.blocks,
    };
    let built = construct_near_optimal(&params, exec).map_err(CliError::from_core)?;
    let blocks: Vec<Value> = built
        .blocks
        .iter()
        .map(|b| json!({ "k": b.k, "theta": b.theta, "density": b.density }))
        .collect();
    let mut out = Outcome::new(
        built.certificate.status.exit_code(),
        json!({
            "alpha": built.alpha,
            "eps": built.eps,
            "l": built.l,
            "n": built.n,
            "density": built.density,
            "density_bound": 1.0 + (2 * c.order - 2) as f64 / built.l as f64,
            "blocks": blocks,
            "certificate": {
                "status": built.certificate.status,
                "geometry": built.certificate.geometry,
                "covered": built.certificate.covered,
            },
            "points": built.set.points(),
            "multiplicities": built.set.multiplicities(),
        }),
    );
    out.resolved = to_value(&params);
    out.csv = Some(io::write_points(&built.set.config));
    Ok(out)
}

/// Distinct abscissae with the highest derivative order sampled at each.
fn points_from_samples(samples: &[SampleRecord]) -> Result<PointConfig, CliError> {
    let mut pairs: Vec<(f64, usize)> = samples.iter().map(|r| (r.x, r.s)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::new();
    let mut mus: Vec<usize> = Vec::new();
    for (x, s) in pairs {
        if xs.last() == Some(&x) {
            let mu = mus.last_mut().unwrap();
            *mu = (*mu).max(s);
        } else {
            xs.push(x);
            mus.push(s);
        }
    }
    PointConfig::new(xs, mus).map_err(CliError::from_core)
}

fn reconstruct_cmd(c: &ReconstructCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let samples = in_file(&c.samples, io::parse_samples(&read(&c.samples)?))?;
    let config = match &c.points {
        Some(p) => load_points(p)?,
        None => points_from_samples(&samples)?,
    };
    let set = sampled_set(config, c.window, None)?;
    let cert = certify(&s, &set, &c.geometry, exec)?;
    let resolved = resolved_set(Some(&s), &set);
    if cert.status != Decision::Certified {
        let mut out = Outcome::new(
            cert.status.exit_code(),
            json!({ "certificate": { "status": cert.status, "density": cert.density } }),
        );
        out.resolved = resolved;
        out.warnings = warnings;
        return Ok(out);
    }
    let options = ReconstructOptions {
        mode: match c.mode {
            Mode::Exact => ReconstructionMode::Exact,
            Mode::LeastSquares => ReconstructionMode::LeastSquares,
        },
        strict_tol: c.strict,
    };
    let r = reconstruct(&s, &cert, &samples, &options, exec).map_err(CliError::from_core)?;
    let mut out = Outcome::new(
        0,
        json!({
            "certificate": {
                "status": cert.status,
                "geometry": cert.geometry,
                "covered": cert.covered,
            },
            "reconstruction": r,
        }),
    );
    out.csv = Some(io::write_coefficients(r.first_shift, &r.coefficients));
    out.resolved = resolved;
    out.warnings = warnings;
    Ok(out)
}

fn frame(c: &FrameCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let set = load_set(&c.points)?;
    let cert = certify(&s, &set, &c.geometry, exec)?;
    let mut result = json!({
        "status": cert.status,
        "geometry": cert.geometry,
        "upper_bound": upper_frame_bound(&s, &set.config),
    });
    if cert.status == Decision::Certified {
        let bounds = lower_frame_bound_estimate_with(&s, &cert, exec).map_err(CliError::from_core)?;
        let range = cert
            .coefficient_range()
            .ok_or_else(|| CliError::Internal("certified set without coverage".into()))?;
        let (lo, hi) = empirical_frame_ratio(&s, &set.config, range, c.trials, c.seed, exec)
            .map_err(CliError::from_core)?;
        result["lower_bound"] = to_value(&bounds);
        result["empirical_ratio"] = json!({ "min": lo, "max": hi, "trials": c.trials, "seed": c.seed });
    }
    let mut out = Outcome::new(cert.status.exit_code(), result);
    out.resolved = resolved_set(Some(&s), &set);
    out.warnings = warnings;
    Ok(out)
}

/// Lattice windows are symmetric about 0, so `(-X) × Z = X × Z`.
const LATTICE_WINDOW: (f64, f64) = (-32.0, 32.0);

fn gabor(c: &GaborCmd, exec: Execution) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let (set, lattice) = match (c.alpha, &c.points) {
        (Some(a), _) => {
            let answer = lattice_gabor_decision(a).map_err(|e| CliError::Usage(e.to_string()))?;
            let set = SampledSet::lattice(a, 0.0, c.window.unwrap_or(LATTICE_WINDOW), |_| 0)
                .map_err(CliError::from_core)?;
            (set, Some(answer))
        }
        (None, Some(p)) => (sampled_set(load_points(p)?, c.window, None)?, None),
        (None, None) => return Err(CliError::Usage("--alpha or --points is required".into())),
    };
    let d = gabor_frame_decision(&s, &set, &c.sections, exec).map_err(CliError::from_core)?;
    // the lattice answer is exact, including the critical step α = 1
    let frame = lattice.unwrap_or(d.frame);
    let mut out = Outcome::new(
        frame.exit_code(),
        json!({
            "frame": frame,
            "lattice_answer": lattice,
            "sampling_decision": d,
        }),
    );
    out.resolved = resolved_set(Some(&s), &set);
    out.warnings = warnings;
    Ok(out)
}

fn grid(range: (f64, f64), step: f64) -> Result<Vec<f64>, CliError> {
    let (a, b) = range;
    if !(step > 0.0 && step.is_finite()) || !(b > a) {
        return Err(CliError::Usage(format!("zero-width grid: range {a},{b}, step {step}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

fn plotdata(c: &PlotCmd, json_out: bool) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let s = build_spline(&c.spline, &mut warnings)?;
    let m = s.order();
    let (first, coeffs) = match &c.coefficients {
        Some(p) => in_file(p, io::parse_coefficients(&read(p)?))?,
        None => (0, vec![1.0]),
    };
    if coeffs.is_empty() {
        return Err(CliError::Data("empty coefficient file".into()));
    }
    let support = (first as f64, (first + coeffs.len() as i64 - 1 + m as i64) as f64);
    let xs = grid(c.range.unwrap_or(support), c.step)?;
    let eval = |order: usize| evaluate_model(&s, &coeffs, first, &xs, order).map_err(CliError::from_core);
    let values = eval(0)?;
    let derivs = c.deriv.map(eval).transpose()?;

    // `+ 0.0` turns a negative zero into `0`
    let values: Vec<f64> = values.into_iter().map(|v| v + 0.0).collect();
    let derivs: Option<Vec<f64>> = derivs.map(|d| d.into_iter().map(|v| v + 0.0).collect());
    let mut csv = String::from(if derivs.is_some() { "x,value,deriv\n" } else { "x,value\n" });
    for (i, (x, v)) in xs.iter().zip(&values).enumerate() {
        match &derivs {
            Some(d) => csv.push_str(&format!("{x},{v},{}\n", d[i])),
            None => csv.push_str(&format!("{x},{v}\n")),
        }
    }
    let mut out = Outcome::new(
        0,
        json!({ "rows": xs.len(), "x": xs, "value": values, "deriv": derivs }),
    );
    out.resolved = json!({
        "spline": to_value(s.spec()),
        "range": [xs[0], *xs.last().unwrap()],
        "source": if c.coefficients.is_some() { "coefficients" } else { "generator" },
    });
    if !json_out {
        out.csv = Some(csv);
    }
    out.warnings = warnings;
    Ok(out)
}
