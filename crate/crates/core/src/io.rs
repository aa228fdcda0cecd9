//! Plain-text formats: point, sample and coefficient CSV files and spline
//! spec files. Blank lines and lines starting with `#` are skipped; an
//! optional header naming the columns is accepted on the first data line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::points::PointConfig;
use crate::reconstruction::SampleRecord;
use crate::spline::SplineSpec;

fn records<'a>(
    text: &'a str,
    header: &'a [&'a str],
) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    let mut first = true;
    text.lines().enumerate().filter_map(move |(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let is_header = first && fields.first().is_some_and(|f| header.contains(f));
        first = false;
        (!is_header).then_some((i + 1, fields))
    })
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what}: cannot parse '{field}' as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("{what}: non-finite value '{field}'"),
        });
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what}: cannot parse '{field}' as an integer"),
    })
}

fn arity(fields: &[&str], allowed: &[usize], line: usize) -> Result<()> {
    if allowed.contains(&fields.len()) {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            msg: format!("expected {allowed:?} fields, found {}", fields.len()),
        })
    }
}

/// Lines `x[,multiplicity]`, multiplicity defaulting to 0.
pub fn parse_points(text: &str) -> Result<PointConfig> {
    let mut pts = Vec::new();
    let mut mus = Vec::new();
    for (line, f) in records(text, &["x"]) {
        arity(&f, &[1, 2], line)?;
        let x = parse_f64(f[0], line, "x")?;
        let mu = match f.get(1) {
            Some(s) if !s.is_empty() => parse_int(s, line, "multiplicity")?,
            _ => 0,
        };
        if let Some(&prev) = pts.last() {
            if x <= prev {
                return Err(Error::Parse {
                    line,
                    msg: format!("points must be strictly increasing ({x} after {prev})"),
                });
            }
        }
        pts.push(x);
        mus.push(mu);
    }
    PointConfig::new(pts, mus)
}

/// Lines `x,deriv_order,value`.
pub fn parse_samples(text: &str) -> Result<Vec<SampleRecord>> {
    records(text, &["x"])
        .map(|(line, f)| {
            arity(&f, &[3], line)?;
            Ok(SampleRecord {
                x: parse_f64(f[0], line, "x")?,
                s: parse_int(f[1], line, "deriv_order")?,
                value: parse_f64(f[2], line, "value")?,
            })
        })
        .collect()
}

/// Lines `shift_index,value`, shifts consecutive and ascending. Returns the
/// first shift and the values.
pub fn parse_coefficients(text: &str) -> Result<(i64, Vec<f64>)> {
    let mut first = None;
    let mut values = Vec::new();
    for (line, f) in records(text, &["shift_index"]) {
        arity(&f, &[2], line)?;
        let k: i64 = parse_int(f[0], line, "shift_index")?;
        let v = parse_f64(f[1], line, "value")?;
        let start = *first.get_or_insert(k);
        if k != start + values.len() as i64 {
            return Err(Error::Parse {
                line,
                msg: format!("shift indices must be consecutive (expected {})", start + values.len() as i64),
            });
        }
        values.push(v);
    }
    Ok((first.unwrap_or(0), values))
}

/// Comma-separated reals.
pub fn parse_rates(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(s, 1, "rates"))
        .collect()
}

/// `order = m` and `rates = a1, …, am` lines (`:` also accepted).
pub fn parse_spec(text: &str) -> Result<SplineSpec> {
    let mut order = None;
    let mut rates = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = i + 1;
        let (key, value) = line
            .split_once(['=', ':'])
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', found '{line}'"),
            })?;
        match key.trim() {
            "order" => order = Some(parse_int::<usize>(value.trim(), line_no, "order")?),
            "rates" => {
                rates = Some(parse_rates(value).map_err(|e| match e {
                    Error::Parse { msg, .. } => Error::Parse { line: line_no, msg },
                    e => e,
                })?)
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown key '{other}'"),
                })
            }
        }
    }
    let order = order.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing 'order'".into(),
    })?;
    let rates = rates.unwrap_or_else(|| vec![0.0; order]);
    SplineSpec::new(order, rates)
}

pub fn write_points(config: &PointConfig) -> String {
    let mut out = String::from("x,multiplicity\n");
    for (x, mu) in config.points().iter().zip(config.multiplicities()) {
        let _ = writeln!(out, "{x},{mu}");
    }
    out
}

pub fn write_samples(samples: &[SampleRecord]) -> String {
    let mut out = String::from("x,deriv_order,value\n");
    for r in samples {
        let _ = writeln!(out, "{},{},{}", r.x, r.s, r.value);
    }
    out
}

pub fn write_coefficients(first_shift: i64, values: &[f64]) -> String {
    let mut out = String::from("shift_index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", first_shift + i as i64);
    }
    out
}
