//! Symbolic coding of the Cantor Julia sets `J_c`, `c = c(lambda)` outside `M`.
//!
//! At real `lambda > 1` the Julia set misses the real axis and a point with
//! itinerary `w` has `Im z_k > 0` exactly when `w_k = 0`. A periodic word is
//! turned into its cycle by pulling back along the inverse branches selected
//! by its digits. For non-real `lambda` the cycle is continued from a real
//! anchor: along the arc `|lambda| = a` with `a = max(|lambda|, ANCHOR_RADIUS)`
//! from angle 0 to `arg lambda` in `(-pi, pi]`, then radially to `lambda`.
//! Arguments of the cycle points are tracked continuously along the way so
//! that `g = 2 exp(mean log z_k)` is the analytic continuation of its value
//! on the real ray. The negative real axis is reached from above.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boettcher::{self, ExteriorParam, DEFAULT_LAMBDA_MARGIN};
use crate::cycle;
use crate::error::{Error, Result};
use crate::itinerary::{Itinerary, MAX_ENUM_PERIOD};

pub const PULLBACK_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 200;
/// Sweeps after which pullback is finished off by Newton on the cycle.
const NEWTON_AFTER: usize = 40;
pub const ANCHOR_RADIUS: f64 = 1.5;
const MAX_BISECT: usize = 24;

/// A periodic cycle of `f_c` together with its coding data.
#[derive(Debug, Clone)]
pub struct CodedOrbit {
    pub lambda: Complex64,
    pub c: Complex64,
    pub dc_dlambda: Complex64,
    pub word: Itinerary,
    pub points: Vec<Complex64>,
    /// Continuously tracked `arg z_k`.
    pub args: Vec<f64>,
    pub rho: Complex64,
    pub g: Complex64,
    /// `dz_k/dc`.
    pub dz_dc: Vec<Complex64>,
    pub sigma: Complex64,
}

impl CodedOrbit {
    fn assemble(ep: ExteriorParam, word: Itinerary, points: Vec<Complex64>, args: Vec<f64>) -> Result<Self> {
        let var = cycle::variation(&points, cycle::PARABOLIC_SOLVE_GUARD)?;
        let n = points.len() as f64;
        let mean_log: Complex64 = points
            .iter()
            .zip(&args)
            .map(|(z, a)| Complex64::new(z.norm().ln(), *a))
            .sum::<Complex64>()
            / n;
        Ok(Self {
            lambda: ep.lambda,
            c: ep.c,
            dc_dlambda: ep.dc_dlambda,
            word,
            points,
            args,
            rho: var.rho,
            g: 2.0 * mean_log.exp(),
            dz_dc: var.dz,
            sigma: var.sigma,
        })
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    fn param(&self) -> ExteriorParam {
        ExteriorParam { lambda: self.lambda, c: self.c, dc_dlambda: self.dc_dlambda }
    }

    /// `d rho / d lambda`, from the variational solve with `dc/dlambda` as forcing.
    pub fn drho_dlambda(&self) -> Result<Complex64> {
        let forcing = vec![self.dc_dlambda; self.points.len()];
        let dz = cycle::solve_periodic(&self.points, &forcing, cycle::PARABOLIC_SOLVE_GUARD)?;
        let sum: Complex64 = dz.iter().zip(&self.points).map(|(d, z)| d / z).sum();
        Ok(self.rho * sum)
    }

    /// Largest `|f_c(z_k) - z_{k+1}|`.
    pub fn residual(&self) -> f64 {
        cycle::residual(self.c, &self.points)
    }

    /// One continuation step to the parameter `ep`.
    fn step(&self, ep: ExteriorParam) -> Result<Self> {
        let dc = ep.c - self.c;
        let mut pts: Vec<Complex64> = self.points.iter().zip(&self.dz_dc).map(|(z, d)| z + d * dc).collect();
        cycle::newton_refine(ep.c, &mut pts, 30, 1e-15)?;
        let mut args = self.args.clone();
        for k in 0..pts.len() {
            let old = self.points[k];
            // The other root of z^2 = z_{k+1} - c sits at distance 2|z_k|.
            if 2.0 * (pts[k] - old).norm() >= old.norm() {
                return Err(Error::TrackingFailed { t: 0.0 });
            }
            args[k] += (pts[k] / old).arg();
        }
        Self::assemble(ep, self.word, pts, args)
    }

    /// Continues the cycle to a nearby parameter point, bisecting when needed.
    pub fn advance_to(&self, next: ExteriorParam) -> Result<Self> {
        self.step_bisecting(next, 0)
    }

    fn step_bisecting(&self, next: ExteriorParam, depth: usize) -> Result<Self> {
        if let Ok(o) = self.step(next) {
            return Ok(o);
        }
        if depth >= MAX_BISECT {
            return Err(Error::TrackingFailed { t: 0.0 });
        }
        let mid = self.param().continue_to(0.5 * (self.lambda + next.lambda))?;
        self.step_bisecting(mid, depth + 1)?.step_bisecting(next, depth + 1)
    }

    /// Continues the cycle along the nodes of `path` (which must start at `self.lambda`).
    pub fn follow(&self, path: &LambdaPath) -> Result<Self> {
        let mut cur = self.clone();
        for node in path.nodes.iter().skip(1) {
            cur = cur.step_bisecting(*node, 0)?;
        }
        Ok(cur)
    }

    /// Continues the cycle along the straight segment to `lambda`.
    pub fn continue_to(&self, lambda: Complex64) -> Result<Self> {
        let path = LambdaPath::segment(self.param(), lambda)?;
        self.follow(&path)
    }
}

/// Parameter nodes along a continuation path in the `lambda`-plane.
#[derive(Debug, Clone)]
pub struct LambdaPath {
    pub nodes: Vec<ExteriorParam>,
}

impl LambdaPath {
    /// The standard path from the real anchor `max(|lambda|, ANCHOR_RADIUS)` to `lambda`.
    pub fn standard(lambda: Complex64, margin: f64) -> Result<Self> {
        let r = lambda.norm();
        if !(r >= 1.0 + margin) {
            return Err(Error::OutOfRange(format!("|lambda| = {r} below 1 + {margin}")));
        }
        if lambda.im == 0.0 && lambda.re > 0.0 {
            return Ok(Self { nodes: vec![boettcher::c_of_lambda_with(lambda, margin)?] });
        }
        let a = r.max(ANCHOR_RADIUS);
        let theta = lambda.arg();
        let mut cur = boettcher::c_of_lambda_with(Complex64::new(a, 0.0), 0.0)?;
        let mut nodes = vec![cur];
        let arc_steps = ((theta.abs() * a) / (0.1 * (a - 1.0).min(0.5))).ceil().max(1.0) as usize;
        for k in 1..=arc_steps {
            let l = Complex64::from_polar(a, theta * k as f64 / arc_steps as f64);
            cur = cur.continue_to(l)?;
            nodes.push(cur);
        }
        let dir = Complex64::from_polar(1.0, theta);
        let mut rc = a;
        while rc > r {
            rc = (1.0 + (rc - 1.0) * 0.85).max(r);
            if rc - r < 0.02 * (r - 1.0) {
                rc = r;
            }
            cur = cur.continue_to(dir * rc)?;
            nodes.push(cur);
        }
        Ok(Self { nodes })
    }

    /// Straight segment from an existing parameter point.
    pub fn segment(from: ExteriorParam, lambda: Complex64) -> Result<Self> {
        let d = (lambda - from.lambda).norm();
        let lo = from.lambda.norm().min(lambda.norm()) - 1.0;
        let steps = (d / (0.1 * lo.min(0.5))).ceil().max(1.0) as usize;
        let mut cur = from;
        let mut nodes = vec![from];
        for k in 1..=steps {
            cur = cur.continue_to(from.lambda + (lambda - from.lambda) * (k as f64 / steps as f64))?;
            nodes.push(cur);
        }
        Ok(Self { nodes })
    }

    pub fn start(&self) -> ExteriorParam {
        self.nodes[0]
    }

    pub fn end(&self) -> ExteriorParam {
        *self.nodes.last().expect("path has at least one node")
    }
}

fn branch_root(x: Complex64, digit: u8) -> Complex64 {
    let r = x.sqrt();
    let upper = if r.im > 0.0 || (r.im == 0.0 && r.re < 0.0) { r } else { -r };
    if digit == 0 {
        upper
    } else {
        -upper
    }
}

/// Cycle with itinerary `word` at real `c > 1/4` by inverse-branch pullback.
/// The word need not have full period.
pub fn pullback_cycle(c: Complex64, word: Itinerary) -> Result<Vec<Complex64>> {
    let c = Complex64::new(c.re, 0.0);
    let n = word.len();
    let scale = 0.5 + (0.25 + c.norm()).sqrt();
    let mut pts: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(0.0, if word.digit(k) == 0 { scale } else { -scale }))
        .collect();
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let mut change = 0.0f64;
        let mut next = pts[0];
        for k in (0..n).rev() {
            let z = branch_root(next - c, word.digit(k));
            change = change.max((z - pts[k]).norm());
            pts[k] = z;
            next = z;
        }
        if change < PULLBACK_TOL * scale {
            converged = true;
            break;
        }
        if sweep + 1 == NEWTON_AFTER {
            let mut trial = pts.clone();
            if cycle::newton_refine(c, &mut trial, 40, 1e-15).is_ok() && signs_match(&trial, word) {
                pts = trial;
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "pullback", residual: cycle::residual(c, &pts) });
    }
    // Polish to full precision; the pullback limit can carry an O(tol) error.
    let _ = cycle::newton_refine(c, &mut pts, 3, 1e-16);
    if !signs_match(&pts, word) || cycle::residual(c, &pts) > 1e-10 * scale * scale {
        return Err(Error::NoConvergence { what: "pullback", residual: cycle::residual(c, &pts) });
    }
    Ok(pts)
}

fn signs_match(pts: &[Complex64], word: Itinerary) -> bool {
    pts.iter().enumerate().all(|(k, z)| (z.im > 0.0) == (word.digit(k) == 0))
}

fn check_word(word: Itinerary) -> Result<()> {
    if word.len() > MAX_ENUM_PERIOD {
        return Err(Error::OutOfRange(format!("period {} above {MAX_ENUM_PERIOD}", word.len())));
    }
    if !word.has_full_period() {
        return Err(Error::Precondition(format!("word {word} is not of full period")));
    }
    Ok(())
}

/// Coded cycle at the real start of `path`.
pub fn orbit_at_anchor(path: &LambdaPath, word: Itinerary) -> Result<CodedOrbit> {
    let ep = path.start();
    let pts = pullback_cycle(ep.c, word)?;
    let args = pts.iter().map(|z| z.arg()).collect();
    CodedOrbit::assemble(ep, word, pts, args)
}

/// Coded cycle at the end of `path`.
pub fn orbit_on_path(path: &LambdaPath, word: Itinerary) -> Result<CodedOrbit> {
    check_word(word)?;
    orbit_at_anchor(path, word)?.follow(path)
}

/// `psi_lambda` on the cycle coded by `w`, with multiplier, root and derivatives.
pub fn psi_periodic(lambda: Complex64, w: Itinerary) -> Result<CodedOrbit> {
    psi_periodic_with(lambda, w, DEFAULT_LAMBDA_MARGIN)
}

pub fn psi_periodic_with(lambda: Complex64, w: Itinerary, margin: f64) -> Result<CodedOrbit> {
    check_word(w)?;
    let path = LambdaPath::standard(lambda, margin)?;
    orbit_on_path(&path, w)
}

/// Coded cycles of many words at the end of one path, in the order given.
pub fn coded_orbits(path: &LambdaPath, words: &[Itinerary]) -> Vec<Result<CodedOrbit>> {
    words.par_iter().map(|w| orbit_on_path(path, *w)).collect()
}

pub fn g_value(lambda: Complex64, w: Itinerary) -> Result<Complex64> {
    Ok(psi_periodic(lambda, w)?.g)
}

pub fn sigma_coded(lambda: Complex64, w: Itinerary) -> Result<Complex64> {
    Ok(psi_periodic(lambda, w)?.sigma)
}

pub fn drho_dlambda(lambda: Complex64, w: Itinerary) -> Result<Complex64> {
    psi_periodic(lambda, w)?.drho_dlambda()
}

/// Approximations of `psi_lambda(sigma^k w)`, `k < digits.len()`, for an
/// infinite sequence known through the prefix `digits`, at real `c`.
/// Accuracy degrades towards the end of the prefix.
pub fn psi_prefix(c: Complex64, digits: &[u8]) -> Vec<Complex64> {
    let c = Complex64::new(c.re, 0.0);
    let mut next = Complex64::new(0.0, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); digits.len()];
    for k in (0..digits.len()).rev() {
        next = branch_root(next - c, digits[k]);
        out[k] = next;
    }
    out
}

/// `2 (z_0 ... z_{n-1})^{1/n}` with principal logarithms.
pub fn root_mean_principal(points: &[Complex64]) -> Complex64 {
    let s: Complex64 = points.iter().map(|z| z.ln()).sum();
    2.0 * (s / points.len() as f64).exp()
}

/// `(y_1 ... y_n)^{1/n}` on the branch continued from the principal root of
/// `x_1 ... x_n`: each `log y_j` is taken nearest to `Log x_j`.
pub fn root_mean_near(ys: &[Complex64], xs: &[Complex64]) -> Complex64 {
    let s: Complex64 = ys.iter().zip(xs).map(|(y, x)| x.ln() + (y / x).ln()).sum();
    (s / ys.len() as f64).exp()
}

/// Monte-Carlo estimate of `exp(integral log(2 psi_lambda) d mu_0)`.
#[derive(Debug, Clone, Copy)]
pub struct Mu0Estimate {
    pub value: Complex64,
    pub mean_log: Complex64,
    /// Standard errors of the real and imaginary parts of `mean_log`.
    pub stderr_re: f64,
    pub stderr_im: f64,
}

impl Mu0Estimate {
    /// Delta-method standard error of `value`.
    pub fn stderr(&self) -> f64 {
        self.value.norm() * self.stderr_re.hypot(self.stderr_im)
    }
}

pub fn mu0_average(lambda: Complex64, sample_count: usize, prefix_depth: usize, rng_seed: u64) -> Result<Mu0Estimate> {
    if !(lambda.im == 0.0 && lambda.re > 1.0) {
        return Err(Error::Precondition(format!("mu0 average needs real lambda > 1, got {lambda}")));
    }
    if sample_count < 2 || prefix_depth == 0 || prefix_depth > 64 {
        return Err(Error::OutOfRange(format!(
            "sample count {sample_count} / depth {prefix_depth} not usable"
        )));
    }
    let c = boettcher::c_of_lambda_with(lambda, 0.0)?.c;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let words: Vec<Itinerary> = (0..sample_count)
        .map(|_| Itinerary::from_bits(rng.gen::<u64>(), prefix_depth))
        .collect::<Result<_>>()?;
    let logs: Vec<Complex64> = words
        .par_iter()
        .map(|w| pullback_cycle(c, *w).map(|p| (2.0 * p[0]).ln()))
        .collect::<Result<_>>()?;
    let m = logs.len() as f64;
    let mean: Complex64 = logs.iter().sum::<Complex64>() / m;
    let (vr, vi) = logs.iter().fold((0.0, 0.0), |(a, b), l| {
        (a + (l.re - mean.re).powi(2), b + (l.im - mean.im).powi(2))
    });
    Ok(Mu0Estimate {
        value: mean.exp(),
        mean_log: mean,
        stderr_re: (vr / (m - 1.0) / m).sqrt(),
        stderr_im: (vi / (m - 1.0) / m).sqrt(),
    })
}

/// Principal argument reduced to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Itinerary {
        s.parse().unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fixed_point_closed_form() {
        for l in [1.1, 1.5, 3.0] {
            let o = psi_periodic(cx(l, 0.0), w("0")).unwrap();
            let root = (cx(1.0, 0.0) - 4.0 * o.c).sqrt();
            let z = (1.0 + root) / 2.0;
            assert!(z.im > 0.0);
            assert!((o.points[0] - z).norm() < 1e-12);
            assert!((o.rho - (1.0 + root)).norm() < 1e-11);
            assert!((o.g - (1.0 + root)).norm() < 1e-11);
            assert!((o.sigma + 2.0 / root).norm() < 1e-10);
        }
    }

    #[test]
    fn two_cycle_closed_form() {
        for lambda in [cx(1.3, 0.0), cx(0.4, 1.4), cx(-1.2, -0.5)] {
            let o = psi_periodic(lambda, w("01")).unwrap();
            for z in &o.points {
                assert!((z * z + z + o.c + 1.0).norm() < 1e-11);
            }
            assert!((o.rho - 4.0 * (o.c + 1.0)).norm() < 1e-10);
            assert!((o.g * o.g - 4.0 * (o.c + 1.0)).norm() < 1e-10);
            assert!((o.sigma - 4.0).norm() < 1e-10);
            assert!((o.drho_dlambda().unwrap() - 4.0 * o.dc_dlambda).norm() < 1e-9 * o.dc_dlambda.norm());
        }
    }

    #[test]
    fn invariants_on_random_words() {
        let lambda = cx(-0.7, 1.1);
        let path = LambdaPath::standard(lambda, DEFAULT_LAMBDA_MARGIN).unwrap();
        for bits in [0b0010111u64, 0b0110101, 0b1000000] {
            let o = orbit_on_path(&path, Itinerary::from_bits(bits, 7).unwrap()).unwrap();
            assert!(o.residual() < 1e-10);
            assert!(o.rho.norm() > 1.0);
            assert!((o.g.powu(7) - o.rho).norm() < 1e-9 * o.rho.norm());
            let dr = o.drho_dlambda().unwrap();
            assert!((dr - o.sigma * o.dc_dlambda).norm() < 1e-9 * dr.norm());
        }
    }

    #[test]
    fn drho_dlambda_finite_difference() {
        let word = w("00101");
        for lambda in [cx(1.4, 0.0), cx(0.9, 1.0)] {
            let h = 1e-5;
            let o = psi_periodic(lambda, word).unwrap();
            let p = o.continue_to(lambda + h).unwrap();
            let m = o.continue_to(lambda - h).unwrap();
            let fd = (p.rho - m.rho) / (2.0 * h);
            let exact = o.drho_dlambda().unwrap();
            assert!((fd - exact).norm() < 1e-6 * exact.norm(), "{fd} vs {exact}");
        }
    }

    #[test]
    fn digits_select_half_planes() {
        let o = psi_periodic(cx(1.2, 0.0), w("0011101")).unwrap();
        for (k, z) in o.points.iter().enumerate() {
            assert_eq!(z.im > 0.0, o.word.digit(k) == 0);
        }
    }

    #[test]
    fn asymptotics_at_large_lambda() {
        let lambda = cx(1e3, 0.0);
        for word in [w("0"), w("1"), w("0110"), w("10111")] {
            let o = psi_periodic(lambda, word).unwrap();
            let target = if word.digit(0) == 0 { Complex64::i() * lambda } else { -Complex64::i() * lambda };
            assert!((o.points[0] / target - 1.0).norm() < 0.02);
        }
    }

    #[test]
    fn conjugate_lambda_swaps_digits() {
        let lambda = cx(0.5, 1.3);
        let word = w("001011");
        let a = psi_periodic(lambda, word).unwrap();
        let b = psi_periodic(lambda.conj(), word.complement()).unwrap();
        assert!((a.g - b.g.conj()).norm() < 1e-10);
        assert!((a.sigma - b.sigma.conj()).norm() < 1e-8 * a.sigma.norm());
    }

    #[test]
    fn composition_identity() {
        let c = boettcher::c_of_lambda(cx(1.3, 0.0)).unwrap().c;
        let digits: Vec<u8> = (0..80u32).map(|k| ((k * 7 + k / 3) % 5 % 2) as u8).collect();
        for n in 1..=8 {
            for m in 1..=8 {
                let full = psi_prefix(c, &digits);
                let shifted = psi_prefix(c, &digits[n..]);
                let g_nm = root_mean_principal(&full[..n + m]);
                let g_n = root_mean_principal(&full[..n]);
                let g_m = root_mean_principal(&shifted[..m]);
                let (a, b) = (n as f64 / (n + m) as f64, m as f64 / (n + m) as f64);
                let rhs = (a * g_n.ln() + b * g_m.ln()).exp();
                assert!((g_nm - rhs).norm() < 1e-9, "n = {n}, m = {m}");
            }
        }
    }

    #[test]
    fn mu0_estimate_near_two_lambda() {
        let est = mu0_average(cx(2.0, 0.0), 20_000, 20, 3).unwrap();
        assert!((est.value - 4.0).norm() < 3.0 * est.stderr() + 1e-12, "{:?}", est);
        let again = mu0_average(cx(2.0, 0.0), 20_000, 20, 3).unwrap();
        assert_eq!(est.value, again.value);
        assert!(mu0_average(cx(1.5, 0.2), 10, 5, 0).is_err());
    }

    #[test]
    fn rejects_bad_words() {
        assert!(psi_periodic(cx(1.5, 0.0), w("0101")).is_err());
        assert!(psi_periodic(cx(1.01, 0.0), w("01")).is_err());
    }

    #[test]
    fn wraps_angles() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
