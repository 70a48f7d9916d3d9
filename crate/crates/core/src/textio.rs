//! Plain-text superposition files and locale-independent number output.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kinematics::Superposition;
use crate::vector::Vec3;

/// Formats `x` with 17 significant digits in the style of C's `%.17g`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent in {:e} output");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..17).contains(&exponent) {
        let decimals = (16 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parses the superposition format: one `px py pz` line per component,
/// `#` comments and blank lines ignored.
pub fn parse_superposition(text: &str, path: &Path) -> Result<Superposition> {
    let mut momenta = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 momentum components, found {}",
                fields.len()
            )));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| parse_err(format!("'{field}' is not a decimal number")))?;
        }
        let p = Vec3::from(xyz);
        if !p.is_finite() {
            return Err(parse_err("momentum is not finite".into()));
        }
        if p.norm() <= 0.0 {
            return Err(parse_err("zero-magnitude component".into()));
        }
        momenta.push(p);
    }
    if momenta.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "file contains no components".into(),
        });
    }
    Superposition::from_momenta(momenta)
}

pub fn read_superposition(path: &Path) -> Result<Superposition> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_superposition(&text, path)
}

/// Serializes a superposition, preceded by `header` lines as `#` comments.
pub fn format_superposition(s: &Superposition, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    for p in s.momenta() {
        let _ = writeln!(out, "{} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z));
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
