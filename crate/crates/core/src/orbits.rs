//! All period-`n` points of `f_c` at arbitrary `c`, and their orbits.
//!
//! The roots of `p(z) = f_c^n(z) - z` are found by Aberth–Ehrlich iteration
//! with `p/p'` evaluated through the orbit itself, never through coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cycle;
use crate::error::{Error, Result};

pub const MAX_PERIOD: usize = 10;
pub const ROOT_TOL: f64 = 1e-12;
pub const CLUSTER_DIST: f64 = 1e-7;
pub const NEAR_PARABOLIC: f64 = 1e-6;
const MAX_SWEEPS: usize = 1000;
/// Beyond this modulus only the ratio `z_k / D_k` is propagated.
const HUGE: f64 = 1e150;

/// Roots of `f_c^n(z) - z` with diagnostics.
#[derive(Debug, Clone)]
pub struct PeriodicPoints {
    pub c: Complex64,
    pub n: usize,
    pub points: Vec<Complex64>,
    /// Some pair of roots is closer than `CLUSTER_DIST`.
    pub clustered: bool,
}

/// A cycle of exact period `period`.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub c: Complex64,
    pub period: usize,
    pub points: Vec<Complex64>,
    pub rho: Complex64,
    /// `d rho / dc`; absent when `|1 - rho| < NEAR_PARABOLIC`.
    pub sigma: Option<Complex64>,
    pub near_parabolic: bool,
}

impl OrbitRecord {
    pub fn barycenter(&self) -> Complex64 {
        self.points.iter().sum::<Complex64>() / self.points.len() as f64
    }
}

/// `a / b` without squaring `|b|`, which overflows for the huge values met here.
fn safe_div(a: Complex64, b: Complex64) -> Complex64 {
    let m = b.norm();
    (a / m) * (b.conj() / m)
}

/// `p(z)/p'(z)` for `p = f_c^n(z) - z`.
fn newton_ratio(c: Complex64, z0: Complex64, n: usize) -> Complex64 {
    let mut z = z0;
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        if z.norm() > HUGE {
            // z_k/D_k halves at each further step, and z0, 1 are negligible.
            let q = safe_div(z, d);
            return q * 0.5f64.powi((n - k) as i32);
        }
        d = 2.0 * z * d;
        z = z * z + c;
    }
    safe_div(z - z0, d - 1.0)
}

fn check_period(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PERIOD {
        return Err(Error::OutOfRange(format!("period {n} not in 1..={MAX_PERIOD}")));
    }
    Ok(())
}

pub fn initial_guesses(c: Complex64, n: usize) -> Vec<Complex64> {
    let d = 1usize << n;
    let r = (1.0 + (1.0 + 4.0 * c.norm()).sqrt()) / 2.0 + 0.5;
    (0..d)
        .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / d as f64 + 1e-3))
        .collect()
}

/// All `2^n` roots of `f_c^n(z) - z`, from the standard starting circle.
pub fn periodic_points(c: Complex64, n: usize) -> Result<PeriodicPoints> {
    check_period(n)?;
    periodic_points_from(c, n, initial_guesses(c, n))
}

/// As [`periodic_points`], warm-started from `guesses` (e.g. the roots at a nearby `c`).
pub fn periodic_points_from(c: Complex64, n: usize, guesses: Vec<Complex64>) -> Result<PeriodicPoints> {
    check_period(n)?;
    let d = 1usize << n;
    if guesses.len() != d {
        return Err(Error::Precondition(format!("need {d} starting points, got {}", guesses.len())));
    }
    let mut z = guesses;
    let mut frozen = vec![false; d];
    let mut worst = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        worst = 0.0;
        for i in 0..d {
            if frozen[i] {
                continue;
            }
            let ratio = newton_ratio(c, z[i], n);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm_sqr() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                // Nudge coincident roots apart and try again next sweep.
                z[i] += Complex64::new(1e-9, 1e-9) * (1.0 + i as f64);
                worst = f64::INFINITY;
                continue;
            }
            z[i] -= w;
            let size = w.norm() / z[i].norm().max(1.0);
            worst = worst.max(size);
            if size < ROOT_TOL {
                frozen[i] = true;
            }
        }
        if frozen.iter().all(|f| *f) {
            return Ok(PeriodicPoints { c, n, clustered: has_cluster(&z), points: z });
        }
    }
    Err(Error::NoConvergence { what: "Aberth iteration", residual: worst })
}

fn has_cluster(z: &[Complex64]) -> bool {
    let mut sorted: Vec<Complex64> = z.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j].re - sorted[i].re >= CLUSTER_DIST {
                break;
            }
            if (sorted[j] - sorted[i]).norm() < CLUSTER_DIST {
                return true;
            }
        }
    }
    false
}

/// Assembles cycles by forward matching `f_c(z_i)` to the nearest root.
/// With `exact_only`, cycles of period smaller than `n` are dropped.
pub fn group_orbits(c: Complex64, n: usize, points: &[Complex64], exact_only: bool) -> Result<Vec<OrbitRecord>> {
    let d = points.len();
    let mut image = vec![usize::MAX; d];
    let mut hit = vec![false; d];
    for (i, z) in points.iter().enumerate() {
        let fz = z * z + c;
        let (mut best, mut d1, mut d2) = (usize::MAX, f64::INFINITY, f64::INFINITY);
        for (j, y) in points.iter().enumerate() {
            let dist = (y - fz).norm();
            if dist < d1 {
                d2 = d1;
                d1 = dist;
                best = j;
            } else if dist < d2 {
                d2 = dist;
            }
        }
        let tol = 1e-9 * fz.norm().max(1.0);
        if d1 > 1e3 * tol || d2 - d1 < 10.0 * tol || hit[best] {
            return Err(Error::MatchingAmbiguous { margin: d2 - d1 });
        }
        hit[best] = true;
        image[i] = best;
    }
    let mut seen = vec![false; d];
    let mut out = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cyc.push(points[i]);
            i = image[i];
        }
        if i != start {
            return Err(Error::MatchingAmbiguous { margin: 0.0 });
        }
        if n % cyc.len() != 0 {
            return Err(Error::MatchingAmbiguous { margin: 0.0 });
        }
        if exact_only && cyc.len() != n {
            continue;
        }
        out.push(orbit_record(c, cyc));
    }
    Ok(out)
}

/// Multiplier and `sigma` of a cycle whose points are already accurate.
pub fn orbit_record(c: Complex64, points: Vec<Complex64>) -> OrbitRecord {
    let mut points = points;
    let rho = cycle::multiplier(&points);
    let near_parabolic = (Complex64::new(1.0, 0.0) - rho).norm() < NEAR_PARABOLIC;
    if !near_parabolic {
        let mut refined = points.clone();
        if cycle::newton_refine(c, &mut refined, 4, 1e-16).is_ok() {
            points = refined;
        }
    }
    let rho = cycle::multiplier(&points);
    let sigma = if near_parabolic {
        None
    } else {
        let ones = vec![Complex64::new(1.0, 0.0); points.len()];
        cycle::solve_periodic(&points, &ones, NEAR_PARABOLIC)
            .ok()
            .map(|dz| cycle::sigma_from_variation(&points, &dz))
    };
    OrbitRecord { c, period: points.len(), points, rho, sigma, near_parabolic }
}

/// All cycles of exact period `n` at `c`.
pub fn exact_orbits(c: Complex64, n: usize) -> Result<Vec<OrbitRecord>> {
    let pp = periodic_points(c, n)?;
    group_orbits(c, n, &pp.points, true)
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthReport {
    pub n: usize,
    pub radius: f64,
    /// `max | log|rho| - (n/2) log|4c| |`.
    pub max_abs_deviation: f64,
    /// The same divided by `(n/2) log|4c|`.
    pub max_rel_deviation: f64,
}

/// Compares `|rho|` with `|4c|^{n/2}` over sixteen `c` on the circle `|c| = radius`.
pub fn rho_growth_check(n: usize, radius: f64) -> Result<GrowthReport> {
    if radius < 100.0 {
        return Err(Error::OutOfRange(format!("radius {radius} below 100")));
    }
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..16 {
        let c = Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.1) / 16.0);
        let expect = 0.5 * n as f64 * (4.0 * c).norm().ln();
        scale = expect;
        for o in exact_orbits(c, n)? {
            worst = worst.max((o.rho.norm().ln() - expect).abs());
        }
    }
    Ok(GrowthReport { n, radius, max_abs_deviation: worst, max_rel_deviation: worst / scale })
}
