//! Static SVG scatter of critical points in the `c`-plane.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use multcrit_core::boettcher::green_m;

use crate::report;
use crate::CliError;

const PIXELS_PER_UNIT: f64 = 160.0;
const PAD: f64 = 0.25;

pub fn read_points(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let mut r = report::reader(File::open(path)?);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no {name} column", path.display())))
    };
    let (ire, iim) = (col("c_re")?, col("c_im")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| {
            rec[i].parse::<f64>().map_err(|e| CliError::Config(format!("{}: {:?}: {e}", path.display(), &rec[i])))
        };
        out.push(Complex64::new(num(ire)?, num(iim)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct View {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl View {
    fn around(points: &[Complex64]) -> Self {
        let mut v = View { x0: -2.5, x1: 1.0, y0: -1.5, y1: 1.5 };
        for p in points {
            v.x0 = v.x0.min(p.re - PAD);
            v.x1 = v.x1.max(p.re + PAD);
            v.y0 = v.y0.min(p.im - PAD);
            v.y1 = v.y1.max(p.im + PAD);
        }
        v
    }

    fn width(&self) -> f64 {
        (self.x1 - self.x0) * PIXELS_PER_UNIT
    }

    fn height(&self) -> f64 {
        (self.y1 - self.y0) * PIXELS_PER_UNIT
    }

    fn px(&self, c: Complex64) -> (f64, f64) {
        ((c.re - self.x0) * PIXELS_PER_UNIT, (self.y1 - c.im) * PIXELS_PER_UNIT)
    }
}

/// Cell centres of a `grid x grid` sampling of the view that do not escape but
/// have an escaping 4-neighbour.
fn boundary_cloud(v: &View, grid: usize) -> Vec<Complex64> {
    let at = |i: usize, j: usize| {
        Complex64::new(
            v.x0 + (i as f64 + 0.5) * (v.x1 - v.x0) / grid as f64,
            v.y0 + (j as f64 + 0.5) * (v.y1 - v.y0) / grid as f64,
        )
    };
    let inside: Vec<Vec<bool>> =
        (0..grid).into_par_iter().map(|j| (0..grid).map(|i| green_m(at(i, j)) <= 0.0).collect()).collect();
    let mut out = Vec::new();
    for j in 0..grid {
        for i in 0..grid {
            if !inside[j][i] {
                continue;
            }
            let edge = (i == 0 || !inside[j][i - 1])
                || (i + 1 == grid || !inside[j][i + 1])
                || (j == 0 || !inside[j - 1][i])
                || (j + 1 == grid || !inside[j + 1][i]);
            if edge {
                out.push(at(i, j));
            }
        }
    }
    out
}

pub fn render(points: &[Complex64], grid: usize) -> String {
    let v = View::around(points);
    let mut s = String::new();
    let (w, h) = (v.width(), v.height());
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // Axes with ticks at the integers.
    let _ = writeln!(s, r##"<g stroke="#999" stroke-width="0.8" font-family="sans-serif" font-size="11" fill="#555">"##);
    let (ox, oy) = v.px(Complex64::new(0.0, 0.0));
    if v.y0 < 0.0 && v.y1 > 0.0 {
        let _ = writeln!(s, r#"<line x1="0" y1="{oy:.2}" x2="{w:.2}" y2="{oy:.2}"/>"#);
    }
    if v.x0 < 0.0 && v.x1 > 0.0 {
        let _ = writeln!(s, r#"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{h:.2}"/>"#);
    }
    for k in v.x0.ceil() as i64..=v.x1.floor() as i64 {
        let (x, _) = v.px(Complex64::new(k as f64, 0.0));
        let y = oy.clamp(0.0, h);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, y - 4.0, y + 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" stroke="none">{k}</text>"#, x + 2.0, y + 14.0);
    }
    for k in v.y0.ceil() as i64..=v.y1.floor() as i64 {
        if k == 0 {
            continue;
        }
        let (_, y) = v.px(Complex64::new(0.0, k as f64));
        let x = ox.clamp(0.0, w);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, x - 4.0, x + 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" stroke="none">{k}i</text>"#, x + 6.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g fill="#bbb">"##);
    for c in boundary_cloud(&v, grid) {
        let (x, y) = v.px(c);
        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="1" height="1"/>"#, x - 0.5, y - 0.5);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g fill="#c01010">"##);
    for p in points {
        let (x, y) = v.px(*p);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.2"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

pub fn run(input: &Path, out: &Path, grid: usize) -> Result<(), CliError> {
    if !(16..=4096).contains(&grid) {
        return Err(CliError::Config(format!("--grid {grid} outside 16..=4096")));
    }
    let points = read_points(input)?;
    fs::write(out, render(&points, grid))?;
    Ok(())
}
