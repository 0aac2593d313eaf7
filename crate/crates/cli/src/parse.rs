//! Shell-facing parsers: complex `a+bi` tokens, comma-separated vectors and
//! row-major matrices, and the key=value config file. Everything returns a
//! plain message string; the dispatcher wraps it into a structured error.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// One complex entry. Accepted shapes: `2`, `-1.5e-3`, `i`, `-i`, `2i`,
/// `1+2i`, `1-2e-3i`. The split between real and imaginary part is the last
/// sign that is neither leading nor part of an exponent.
pub fn parse_complex(token: &str) -> Result<Complex64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty complex entry".to_string());
    }
    let bad = |_| format!("cannot parse complex entry '{t}'");
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k];
            if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str.parse::<f64>().map_err(bad)?
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s.parse::<f64>().map_err(bad)?,
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(t.parse::<f64>().map_err(bad)?, 0.0))
    }
}

pub fn parse_complex_vector(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_real_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| format!("cannot parse real entry '{t}'"))
        })
        .collect()
}

pub fn parse_usize_vector(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .map_err(|_| format!("cannot parse index entry '{t}'"))
        })
        .collect()
}

pub fn parse_int_vector(s: &str) -> Result<Vec<i32>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<i32>()
                .map_err(|_| format!("cannot parse integer entry '{t}'"))
        })
        .collect()
}

fn square_side(len: usize) -> Result<usize, String> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(format!(
            "matrix entries must form a square; got {len} entries"
        ));
    }
    Ok(n)
}

/// Row-major square complex matrix from a flat comma-separated list.
pub fn parse_complex_square_matrix(s: &str) -> Result<DMatrix<Complex64>, String> {
    let entries = parse_complex_vector(s)?;
    let n = square_side(entries.len())?;
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

/// Row-major square real matrix from a flat comma-separated list.
pub fn parse_real_square_matrix(s: &str) -> Result<DMatrix<f64>, String> {
    let entries = parse_real_vector(s)?;
    let n = square_side(entries.len())?;
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

/// Settings a config file may carry. Flags override whatever is set here.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub no_timestamp: Option<bool>,
    pub tol_classification: Option<f64>,
    pub tol_residual: Option<f64>,
    pub tol_quadrature: Option<f64>,
}

/// key=value lines, `#` comments, blank lines ignored. Dashes and
/// underscores in keys are interchangeable. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
pub fn parse_config_file(text: &str) -> Result<FileConfig, String> {
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got '{line}'", idx + 1))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let ctx = |what: &str| format!("config line {}: bad {what} value '{value}'", idx + 1);
        match key.as_str() {
            "seed" => cfg.seed = Some(value.parse::<u64>().map_err(|_| ctx("seed"))?),
            "format" => match value {
                "json" | "csv" => cfg.format = Some(value.to_string()),
                _ => return Err(ctx("format")),
            },
            "no_timestamp" => {
                cfg.no_timestamp = Some(value.parse::<bool>().map_err(|_| ctx("no_timestamp"))?)
            }
            "tol_classification" => {
                cfg.tol_classification =
                    Some(value.parse::<f64>().map_err(|_| ctx("tol_classification"))?)
            }
            "tol_residual" => {
                cfg.tol_residual = Some(value.parse::<f64>().map_err(|_| ctx("tol_residual"))?)
            }
            "tol_quadrature" => {
                cfg.tol_quadrature = Some(value.parse::<f64>().map_err(|_| ctx("tol_quadrature"))?)
            }
            other => return Err(format!("config line {}: unknown key '{other}'", idx + 1)),
        }
    }
    Ok(cfg)
}
