//! Green's function and Böttcher coordinate of the Mandelbrot set, and the
//! degree-two covering `lambda -> c(lambda) = phi_M^{-1}(lambda^2)` of the
//! exterior of `M` by the exterior of the closed unit disk.
//!
//! `phi_M(c)` is evaluated in logarithmic form. With `z_0 = c`,
//! `z_{k+1} = z_k^2 + c` and `N` the first index with `|z_N| >= ESCAPE_RADIUS`,
//! `phi_M(c)^{2^N} = phi_c(z_N) ~ z_N`, so `log phi_M(c)` is known up to an
//! additive multiple of `2 pi i / 2^N`. The multiple is fixed by a hint (the
//! target value during Newton, or the previous value during continuation).
//! The derivative `(log phi_M)'(c) = 2^{-N} w_N / z_N` with `w = dz/dc` is
//! branch free.
//!
//! Working domain: the drivers default to `|lambda| >= 1 + DEFAULT_LAMBDA_MARGIN`.
//! The routines here only refuse `|lambda| <= 1 + LAMBDA_FLOOR`; closer to the
//! unit circle the escape counts grow and the branch spacing `2 pi / 2^N`
//! shrinks, so use there is at the caller's risk.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ESCAPE_RADIUS: f64 = 1e8;
pub const MAX_ITER: usize = 100_000;
pub const DEFAULT_LAMBDA_MARGIN: f64 = 0.02;
pub const DEFAULT_G_MIN: f64 = 0.02;
/// Hard floor on `|lambda| - 1` below which nothing is attempted.
pub const LAMBDA_FLOOR: f64 = 1e-7;
/// Principal-branch factors `(1 + c/z_k^2)` are trusted only while `|c/z_k^2|` stays below this.
pub const BRANCH_SAFETY: f64 = 0.75;

/// Radius above which `c(lambda)` is solved directly from `lambda^2 - 1/2`.
const DIRECT_RADIUS: f64 = 4.0;
const NEWTON_TOL: f64 = 2e-14;
const NEWTON_MAX: usize = 60;

/// A point of the exterior parametrisation: `c = c(lambda)` and `dc/dlambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorParam {
    pub lambda: Complex64,
    pub c: Complex64,
    pub dc_dlambda: Complex64,
}

struct Escape {
    steps: usize,
    z: Complex64,
    dz: Complex64,
}

fn escape(c: Complex64) -> Option<Escape> {
    let mut z = c;
    let mut dz = Complex64::new(1.0, 0.0);
    for steps in 0..MAX_ITER {
        if z.norm_sqr() >= ESCAPE_RADIUS * ESCAPE_RADIUS {
            return Some(Escape { steps, z, dz });
        }
        dz = 2.0 * z * dz + 1.0;
        z = z * z + c;
    }
    None
}

/// `G_M(c) = lim 2^{-n} log |f_c^n(c)|`; zero when `c` does not escape within `MAX_ITER`.
pub fn green_m(c: Complex64) -> f64 {
    match escape(c) {
        Some(e) => {
            // One more term of log|phi_c(z)| = log|z| + log|1 + c/z^2|/2 + ...
            let corr = 0.5 * (Complex64::new(1.0, 0.0) + c / (e.z * e.z)).norm().ln();
            (e.z.norm().ln() + corr) * 0.5f64.powi(e.steps as i32)
        }
        None => 0.0,
    }
}

/// Lower bound for the distance from `c` to `M`,
/// `sinh G / (2 e^G |grad G|)`; zero when `c` does not escape.
pub fn distance_lower_bound(c: Complex64) -> f64 {
    let Some(e) = escape(c) else { return 0.0 };
    let scale = 0.5f64.powi(e.steps as i32);
    let g = e.z.norm().ln() * scale;
    let grad = (e.dz / e.z).norm() * scale;
    if g.is_finite() && grad > 0.0 {
        g.sinh() / (2.0 * g.exp() * grad)
    } else {
        0.0
    }
}

/// Logarithm of `phi_M(c)` on the branch nearest to `hint`, together with
/// `(log phi_M)'(c)`.
pub fn log_phi_near(c: Complex64, hint: Complex64) -> Result<(Complex64, Complex64)> {
    let e = escape(c).ok_or_else(|| Error::Precondition(format!("c = {c} does not escape")))?;
    if e.steps > 52 {
        return Err(Error::Precondition(format!(
            "c = {c} is too close to M for branch resolution ({} steps)",
            e.steps
        )));
    }
    let scale = (1u64 << e.steps) as f64;
    let lz = e.z.ln() + 0.5 * (Complex64::new(1.0, 0.0) + c / (e.z * e.z)).ln();
    let mut d = lz - scale * hint;
    d.im -= 2.0 * PI * (d.im / (2.0 * PI)).round();
    let log_phi = hint + d / scale;
    let dlog = e.dz / (e.z * scale);
    Ok((log_phi, dlog))
}

/// `phi_M(c)` from the principal-branch telescoping product
/// `c * prod_k (1 + c/z_k^2)^{2^{-(k+1)}}`.
pub fn phi_m(c: Complex64) -> Result<Complex64> {
    phi_m_with(c, DEFAULT_G_MIN)
}

pub fn phi_m_with(c: Complex64, g_min: f64) -> Result<Complex64> {
    let g = green_m(c);
    if g <= g_min {
        return Err(Error::Precondition(format!("G_M({c}) = {g:.3e} <= {g_min}")));
    }
    let mut log_phi = c.ln();
    let mut z = c;
    let mut weight = 0.5;
    let mut escaped = false;
    for index in 0..MAX_ITER {
        let zz = z * z;
        let ratio = c / zz;
        let r = ratio.norm();
        if !escaped && r >= BRANCH_SAFETY {
            return Err(Error::BranchUnsafe { index, ratio: r });
        }
        log_phi += weight * (Complex64::new(1.0, 0.0) + ratio).ln();
        if weight * r < 1e-17 {
            break;
        }
        z = zz + c;
        escaped |= z.norm() >= ESCAPE_RADIUS;
        weight *= 0.5;
    }
    Ok(log_phi.exp())
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.norm() > 1.0 + LAMBDA_FLOOR) || !lambda.is_finite() {
        return Err(Error::OutOfRange(format!("|lambda| = {} is not outside the unit disk", lambda.norm())));
    }
    Ok(())
}

/// Principal `log lambda^2 = 2 log lambda`.
fn log_target(lambda: Complex64) -> Complex64 {
    2.0 * lambda.ln()
}

/// Newton on `log phi_M(c) = log_target` from `seed`.
fn solve_from(lambda: Complex64, seed: Complex64) -> Result<ExteriorParam> {
    let target = log_target(lambda);
    let mut c = seed;
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_MAX {
        let (lp, dlog) = match log_phi_near(c, target) {
            Ok(v) => v,
            Err(_) => return Err(Error::NoConvergence { what: "c(lambda) Newton", residual: last }),
        };
        let delta = lp - target;
        last = delta.norm();
        let step = delta / dlog;
        c -= step;
        if last < NEWTON_TOL * (1.0 + target.norm()) && step.norm() < 1e-13 * c.norm().max(1.0).max(1.0 / dlog.norm()) {
            let (_, dlog) = log_phi_near(c, target)?;
            // dc/dlambda = (d log lambda^2 / d lambda) / (log phi_M)'(c).
            return Ok(ExteriorParam { lambda, c, dc_dlambda: 2.0 / (lambda * dlog) });
        }
    }
    Err(Error::NoConvergence { what: "c(lambda) Newton", residual: last })
}

/// `c(lambda) = phi_M^{-1}(lambda^2)` with `dc/dlambda`.
///
/// For `|lambda| < 4` the solution is continued along the ray `arg lambda =
/// const` from radius 4, where the seed `lambda^2 - 1/2` is accurate.
pub fn c_of_lambda(lambda: Complex64) -> Result<ExteriorParam> {
    c_of_lambda_with(lambda, DEFAULT_LAMBDA_MARGIN)
}

/// As [`c_of_lambda`] with an explicit margin `|lambda| >= 1 + margin`.
pub fn c_of_lambda_with(lambda: Complex64, margin: f64) -> Result<ExteriorParam> {
    check_lambda(lambda)?;
    if lambda.norm() < 1.0 + margin {
        return Err(Error::OutOfRange(format!("|lambda| = {} below 1 + {margin}", lambda.norm())));
    }
    let r = lambda.norm();
    if r >= DIRECT_RADIUS {
        return solve_from(lambda, lambda * lambda - 0.5);
    }
    let dir = lambda / r;
    let start = dir * DIRECT_RADIUS;
    let anchor = solve_from(start, start * start - 0.5)?;
    anchor.continue_radially(r)
}

impl ExteriorParam {
    /// Continues along the ray through `self.lambda` to radius `r`, stepping
    /// geometrically in `|lambda| - 1`.
    fn continue_radially(self, r: f64) -> Result<ExteriorParam> {
        let dir = self.lambda / self.lambda.norm();
        let mut cur = self;
        let mut ratio = 0.85f64;
        while (cur.lambda.norm() - r).abs() > 1e-15 * r {
            let rc = cur.lambda.norm();
            let mut next_r = 1.0 + (rc - 1.0) * ratio;
            if (next_r - r) * (rc - r) <= 0.0 || (next_r - r).abs() < 1e-3 * (rc - 1.0) {
                next_r = r;
            }
            match cur.step_to(dir * next_r) {
                Ok(p) => {
                    cur = p;
                    ratio = (ratio * 0.98).max(0.8);
                }
                Err(e) => {
                    ratio = 1.0 - (1.0 - ratio) * 0.5;
                    if ratio > 0.999 {
                        return Err(e);
                    }
                }
            }
        }
        Ok(cur)
    }

    /// One predictor-corrector step; rejected if Newton wanders off the
    /// first-order prediction (which signals a jump to a neighbouring branch).
    fn step_to(&self, lambda: Complex64) -> Result<ExteriorParam> {
        let dl = lambda - self.lambda;
        let pred = self.c + self.dc_dlambda * dl;
        let sol = solve_from(lambda, pred)?;
        let moved = (sol.c - self.c).norm();
        let corr = (sol.c - pred).norm();
        if corr > 0.1 * moved.max(1e-12 * sol.c.norm().max(1.0)) && corr > 1e-10f64.max(1e-12 * sol.dc_dlambda.norm()) {
            return Err(Error::TrackingFailed { t: dl.norm() });
        }
        Ok(sol)
    }

    /// Continues `c(lambda)` along the straight segment to `lambda`.
    pub fn continue_to(&self, lambda: Complex64) -> Result<ExteriorParam> {
        check_lambda(lambda)?;
        let start = self.lambda;
        let mut cur = *self;
        let mut t = 0.0f64;
        let mut dt = 1.0f64;
        while t < 1.0 {
            // Steps comparable to |lambda| - 1 risk jumping to a neighbouring branch.
            let cap = 0.15 * (cur.lambda.norm() - 1.0) / (lambda - start).norm();
            dt = dt.min(cap);
            let tn = (t + dt).min(1.0);
            let target = start + (lambda - start) * tn;
            if target.norm() <= 1.0 + LAMBDA_FLOOR {
                return Err(Error::LeftDomain { bound: 1.0 + LAMBDA_FLOOR });
            }
            match cur.step_to(target) {
                Ok(p) => {
                    cur = p;
                    t = tn;
                    dt *= 1.5;
                }
                Err(_) => {
                    dt *= 0.5;
                    if dt < 1e-9 {
                        return Err(Error::TrackingFailed { t });
                    }
                }
            }
        }
        Ok(cur)
    }
}

/// One of the two preimages of `c` under `c(.)`: the one with
/// `arg lambda` in `(-pi/2, pi/2]`; the other is its negative.
///
/// The external argument is obtained by following the gradient line of `G_M`
/// (`dc/dt = 1 / (log phi_M)'(c)`) out to `G_M = 4`, reading off the principal
/// Böttcher coordinate there, and polishing `c(lambda) = c` by Newton in `lambda`.
pub fn lambda_of_c(c: Complex64) -> Result<ExteriorParam> {
    let g0 = green_m(c);
    if g0 <= 0.0 {
        return Err(Error::Precondition(format!("c = {c} does not escape")));
    }
    let dlog = |c: Complex64| -> Result<Complex64> { Ok(log_phi_near(c, Complex64::new(0.0, 0.0))?.1) };
    let field = |c: Complex64| -> Result<Complex64> { Ok(1.0 / dlog(c)?) };
    let g_far = 4.0f64;
    let mut cur = c;
    let mut g = g0;
    while g < g_far {
        let h = (0.05 * g).min(g_far - g).max(1e-300);
        let k1 = field(cur)?;
        let k2 = field(cur + 0.5 * h * k1)?;
        let k3 = field(cur + 0.5 * h * k2)?;
        let k4 = field(cur + h * k3)?;
        let mut next = cur + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let gt = g + h;
        for _ in 0..3 {
            let err = green_m(next) - gt;
            next -= err / dlog(next)?;
        }
        cur = next;
        g = gt;
    }
    let phi_far = phi_m(cur)?;
    let theta = phi_far.arg();
    let mut lambda = Complex64::from_polar((0.5 * g0).exp(), 0.5 * theta);
    if lambda.re < 0.0 || (lambda.re == 0.0 && lambda.im < 0.0) {
        lambda = -lambda;
    }
    let mut p = c_of_lambda_with(lambda, 0.0)?;
    for _ in 0..40 {
        let err = p.c - c;
        if err.norm() < 1e-13 * c.norm().max(1.0) {
            return Ok(p);
        }
        // |lambda| is known exactly from G_M(c), so only the angle is corrected.
        let tangent = Complex64::i() * p.lambda * p.dc_dlambda;
        let dtheta = -(tangent.conj() * err).re / tangent.norm_sqr();
        let r = p.lambda.norm();
        let theta = p.lambda.arg();
        // Keep chords of the arc well outside the unit circle.
        let max_angle = (0.5 * (r - 1.0) / r).sqrt();
        let pieces = (dtheta.abs() / max_angle).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            let t = theta + dtheta * k as f64 / pieces as f64;
            p = p.continue_to(Complex64::from_polar(r, t))?;
        }
    }
    if (p.c - c).norm() < 1e-10 * c.norm().max(1.0) {
        Ok(p)
    } else {
        Err(Error::NoConvergence { what: "lambda(c) polish", residual: (p.c - c).norm() })
    }
}
