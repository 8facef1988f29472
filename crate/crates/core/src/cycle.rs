//! Linear algebra of a periodic cycle `z_0 -> z_1 -> ... -> z_{n-1} -> z_0`
//! of `f_c(z) = z^2 + c`.
//!
//! Every routine here solves the same cyclic bidiagonal system
//! `x_{k+1} = 2 z_k x_k + b_k` with `x_n = x_0`, whose solution is
//! `x_0 = (sum_j b_j prod_{k>j} 2 z_k) / (1 - rho)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Guard on `|1 - rho|` for the periodic solve.
pub const PARABOLIC_SOLVE_GUARD: f64 = 1e-8;

/// Below this modulus an orbit point counts as hitting the critical point.
pub const ZERO_POINT_GUARD: f64 = 1e-12;

pub fn multiplier(points: &[Complex64]) -> Complex64 {
    points.iter().fold(Complex64::new(1.0, 0.0), |acc, z| acc * 2.0 * z)
}

/// Solves `x_{k+1} = 2 z_k x_k + b_k` periodically.
pub fn solve_periodic(points: &[Complex64], rhs: &[Complex64], guard: f64) -> Result<Vec<Complex64>> {
    let n = points.len();
    debug_assert_eq!(rhs.len(), n);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut rho = Complex64::new(1.0, 0.0);
    for k in 0..n {
        acc = acc * 2.0 * points[k] + rhs[k];
        rho *= 2.0 * points[k];
    }
    let denom = Complex64::new(1.0, 0.0) - rho;
    if denom.norm() < guard {
        return Err(Error::NearParabolic { distance: denom.norm() });
    }
    let x0 = acc / denom;
    let mut x = vec![x0; n];
    if rho.norm() > 1.0 && points.iter().all(|z| z.norm() > 0.0) {
        // Repelling cycle: the forward recursion amplifies rounding by |rho|,
        // the backward one damps it.
        let mut cur = x0;
        for k in (1..n).rev() {
            cur = (cur - rhs[k]) / (2.0 * points[k]);
            x[k] = cur;
        }
    } else {
        let mut cur = x0;
        for k in 0..n - 1 {
            cur = 2.0 * points[k] * cur + rhs[k];
            x[k + 1] = cur;
        }
    }
    Ok(x)
}

/// Largest `|z_k^2 + c - z_{k+1}|` around the cycle.
pub fn residual(c: Complex64, points: &[Complex64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| (points[k] * points[k] + c - points[(k + 1) % n]).norm())
        .fold(0.0, f64::max)
}

/// Newton refinement of the cycle equations `z_k^2 + c = z_{k+1}`.
/// Returns the size of the last correction.
pub fn newton_refine(c: Complex64, points: &mut [Complex64], max_steps: usize, tol: f64) -> Result<f64> {
    let n = points.len();
    let mut last = f64::INFINITY;
    for _ in 0..max_steps {
        let rhs: Vec<Complex64> = (0..n)
            .map(|k| points[k] * points[k] + c - points[(k + 1) % n])
            .collect();
        // Linearisation: 2 z_k d_k - d_{k+1} = -F_k, i.e. d_{k+1} = 2 z_k d_k + F_k.
        let delta = solve_periodic(points, &rhs, 1e-14)?;
        last = 0.0;
        for (z, d) in points.iter_mut().zip(&delta) {
            *z += d;
            last = f64::max(last, d.norm() / z.norm().max(1.0));
        }
        if !last.is_finite() {
            break;
        }
        if last < tol {
            return Ok(last);
        }
    }
    if last.is_finite() && last < tol.sqrt() {
        Ok(last)
    } else {
        Err(Error::NoConvergence { what: "cycle Newton refinement", residual: last })
    }
}

/// Derivatives of the cycle, the multiplier and its `c`-derivative along the
/// analytic continuation of the orbit.
#[derive(Debug, Clone)]
pub struct Variation {
    pub rho: Complex64,
    /// `dz_k/dc`.
    pub dz: Vec<Complex64>,
    /// `d(rho)/dc`.
    pub sigma: Complex64,
}

pub fn variation(points: &[Complex64], guard: f64) -> Result<Variation> {
    if points.iter().any(|z| z.norm() < ZERO_POINT_GUARD) {
        return Err(Error::ZeroOrbitPoint);
    }
    let ones = vec![Complex64::new(1.0, 0.0); points.len()];
    let dz = solve_periodic(points, &ones, guard)?;
    let rho = multiplier(points);
    let log_sum: Complex64 = dz.iter().zip(points).map(|(d, z)| d / z).sum();
    Ok(Variation { rho, sigma: rho * log_sum, dz })
}

/// `d(rho)/dc = sum_k 2 z'_k prod_{j != k} 2 z_j`, valid also when some `z_k = 0`.
pub fn sigma_from_variation(points: &[Complex64], dz: &[Complex64]) -> Complex64 {
    let n = points.len();
    let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * 2.0 * points[k];
    }
    let mut prefix = Complex64::new(1.0, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..n {
        total += 2.0 * dz[k] * prefix * suffix[k + 1];
        prefix *= 2.0 * points[k];
    }
    total
}

/// `sigma` together with `d(sigma)/dc`, from the second variational equation
/// `z''_{k+1} = 2 z_k z''_k + 2 (z'_k)^2`.
pub fn sigma_with_derivative(points: &[Complex64], guard: f64) -> Result<(Complex64, Complex64)> {
    let var = variation(points, guard)?;
    let rhs: Vec<Complex64> = var.dz.iter().map(|d| 2.0 * d * d).collect();
    let d2z = solve_periodic(points, &rhs, guard)?;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    for k in 0..points.len() {
        let q = var.dz[k] / points[k];
        first += q;
        second += d2z[k] / points[k] - q * q;
    }
    let sigma = var.rho * first;
    Ok((sigma, sigma * first + var.rho * second))
}
