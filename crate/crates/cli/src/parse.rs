//! Argument value parsers. Complex numbers are written `re,im`.

use num_complex::Complex64;

use multcrit_core::critfind::Rect;

fn floats(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = floats(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

pub fn parse_region(s: &str) -> Result<Rect, String> {
    let v = floats(s, 4)?;
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

/// `A..B` (inclusive) or a single `N`.
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let int = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok((int(a)?, int(b.trim_start_matches('='))?)),
        None => {
            let n = int(s)?;
            Ok((n, n))
        }
    }
}
