//! Sequences of critical points accumulating at a critical point of `g_w` outside `M`.
//!
//! From a word `v` with a critical point at `lambda*`, the words `w_j` of
//! exact period `j` built by [`Itinerary::extend_full_period`] give
//! multipliers whose `g` converge to `g_v`, so their critical points `c_j`
//! converge to `c(lambda*)`.

use num_complex::Complex64;

use crate::boettcher;
use crate::coding;
use crate::coding::LambdaPath;
use crate::critfind;
use crate::cycle;
use crate::error::{Error, Result};
use crate::itinerary::Itinerary;

pub const MAX_J: usize = 24;
/// Relative size of `h` accepted as a critical point of the base word.
pub const BASE_TOL: f64 = 1e-8;
/// Bound on `|sigma - s| / max(1, |rho|)` for emitted rows.
pub const ROW_TOL: f64 = 1e-8;
pub const DEFAULT_MARGIN: f64 = 1e-5;
/// Largest Newton step in the `c`-plane.
const MAX_C_STEP: f64 = 0.05;
const NEWTON_MAX: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremBRow {
    pub j: usize,
    pub word_j: Itinerary,
    /// `None` when `c_j` lies in `M` (or too close to it to invert `c(.)`).
    pub lambda_j: Option<Complex64>,
    pub c_j: Complex64,
    pub distance: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub c_star: Complex64,
    pub rows: Vec<TheoremBRow>,
    /// Lengths `j` where Newton failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl Sequence {
    pub fn min_distance(&self, lo: usize, hi: usize) -> Option<f64> {
        self.rows.iter().filter(|r| (lo..=hi).contains(&r.j)).map(|r| r.distance).min_by(f64::total_cmp)
    }

    /// Distance at the first length beyond the base word, whose own row sits at `c*`.
    pub fn initial_distance(&self, base_len: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.j > base_len).map(|r| r.distance)
    }

    /// Whether the closest approach over the last four lengths beats the
    /// closest approach over `j = 4..=7`.
    pub fn eventually_closer(&self, j_max: usize) -> Option<bool> {
        let late = self.min_distance(j_max.saturating_sub(3), j_max)?;
        let early = self.min_distance(4, 7)?;
        Some(late < early)
    }
}

/// Relative size of `h` at `(lambda, w)`; zero at a critical point.
pub fn base_residual(base: Itinerary, lambda_star: Complex64, s: Complex64, margin: f64) -> Result<f64> {
    let o = coding::psi_periodic_with(lambda_star, base, margin)?;
    let h = critfind::h_of(&o, s)?;
    let scale = o.period() as f64 * o.rho.norm().max(1.0) / lambda_star.norm();
    Ok(h.norm() / scale)
}

/// One orbit followed through the `c`-plane by predictor and Newton steps.
#[derive(Debug, Clone)]
struct Branch {
    c: Complex64,
    points: Vec<Complex64>,
}

impl Branch {
    fn step(&self, c: Complex64) -> Result<Self> {
        let var = cycle::variation(&self.points, cycle::PARABOLIC_SOLVE_GUARD)?;
        let dc = c - self.c;
        let mut pts: Vec<Complex64> = self.points.iter().zip(&var.dz).map(|(z, d)| z + d * dc).collect();
        cycle::newton_refine(c, &mut pts, 30, 1e-15)?;
        for (a, b) in pts.iter().zip(&self.points) {
            if 2.0 * (a - b).norm() >= b.norm() {
                return Err(Error::TrackingFailed { t: 0.0 });
            }
        }
        Ok(Self { c, points: pts })
    }

    fn move_to(&self, c: Complex64, depth: usize) -> Result<Self> {
        if let Ok(b) = self.step(c) {
            return Ok(b);
        }
        if depth >= 20 {
            return Err(Error::TrackingFailed { t: 0.0 });
        }
        let mid = 0.5 * (self.c + c);
        self.move_to(mid, depth + 1)?.move_to(c, depth + 1)
    }

    /// `(sigma - s) / rho` and its `c`-derivative.
    fn scaled(&self, s: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let rho = cycle::multiplier(&self.points);
        let (sigma, dsigma) = cycle::sigma_with_derivative(&self.points, cycle::PARABOLIC_SOLVE_GUARD)?;
        let f = (sigma - s) / rho;
        let df = dsigma / rho - (sigma - s) * sigma / (rho * rho);
        Ok((f, df, sigma))
    }

    fn newton(mut self, s: Complex64) -> Result<(Self, f64)> {
        let mut last = f64::INFINITY;
        for _ in 0..NEWTON_MAX {
            let (f, df, _) = self.scaled(s)?;
            last = f.norm();
            let mut step = f / df;
            if !step.is_finite() {
                break;
            }
            if step.norm() > MAX_C_STEP {
                step *= MAX_C_STEP / step.norm();
            }
            // sigma loses digits as j grows; steps below this are roundoff.
            if step.norm() < 1e-10 * self.c.norm().max(1.0) {
                return Ok((self, last));
            }
            self = self.move_to(self.c - step, 0)?;
        }
        Err(Error::NoConvergence { what: "theorem B Newton", residual: last })
    }
}

pub fn track_sequence(base: Itinerary, lambda_star: Complex64, j_max: usize, s: Complex64) -> Result<Sequence> {
    track_sequence_with(base, lambda_star, j_max, s, DEFAULT_MARGIN)
}

/// For each `j`, the cycle coded by `w_j` at `c*` is continued in the
/// `c`-plane to the previous `c_{j-1}` (or used at `c*` itself) and Newton
/// is run on `(sigma - s) / rho` along that branch. Working in `c` rather
/// than `lambda` lets `c_j` fall inside `M`, which happens while `j` is small
/// compared with the inverse distance from `c*` to `M`.
pub fn track_sequence_with(base: Itinerary, lambda_star: Complex64, j_max: usize, s: Complex64, margin: f64) -> Result<Sequence> {
    if j_max > MAX_J {
        return Err(Error::OutOfRange(format!("j_max = {j_max} above {MAX_J}")));
    }
    let r = base_residual(base, lambda_star, s, margin)?;
    if !(r < BASE_TOL) {
        return Err(Error::Precondition(format!(
            "lambda* = {lambda_star} is not a critical point for {base} (relative |h| = {r:.3e})"
        )));
    }
    let c_star = boettcher::c_of_lambda_with(lambda_star, margin)?.c;
    let path = LambdaPath::standard(lambda_star, margin)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut seed = c_star;
    for j in 3.max(base.len())..=j_max {
        let word = base.extend_full_period(j)?;
        let found = coding::orbit_on_path(&path, word).and_then(|o| {
            let at_star = Branch { c: o.c, points: o.points };
            let solve = |seed: Complex64| at_star.move_to(seed, 0).and_then(|b| b.newton(s));
            let (b, _) = solve(seed).or_else(|e| if seed == c_star { Err(e) } else { solve(c_star) })?;
            let (_, _, sigma) = b.scaled(s)?;
            let rho = cycle::multiplier(&b.points);
            let residual = (sigma - s).norm() / rho.norm().max(1.0);
            if !(residual < ROW_TOL) {
                return Err(Error::NoConvergence { what: "theorem B row", residual });
            }
            let lambda_j = if boettcher::green_m(b.c) > 0.0 {
                boettcher::lambda_of_c(b.c).ok().map(|ep| align(ep.lambda, lambda_star))
            } else {
                None
            };
            Ok(TheoremBRow { j, word_j: word, lambda_j, c_j: b.c, distance: (b.c - c_star).norm(), residual })
        });
        match found {
            Ok(row) => {
                seed = row.c_j;
                rows.push(row);
            }
            Err(e) => {
                failures.push((j, e.to_string()));
                seed = c_star;
            }
        }
    }
    Ok(Sequence { c_star, rows, failures })
}

/// The preimage `lambda` or `-lambda` on the side of `reference`.
fn align(lambda: Complex64, reference: Complex64) -> Complex64 {
    if (lambda - reference).norm() <= (lambda + reference).norm() {
        lambda
    } else {
        -lambda
    }
}
