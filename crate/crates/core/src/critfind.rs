//! Zeros of `sigma_n(c, O) - s`.
//!
//! Two independent routes:
//! * outside `M`, Newton in the `lambda`-plane on a single coded orbit;
//! * anywhere, argument-principle counting of
//!   `Phi_s(c) = prod over exact-period-n orbits (sigma - s)` on nested
//!   rectangles, then Newton on one orbit branch. `Phi_s` has poles at
//!   primitive parabolic parameters, so a count is zeros minus poles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::boettcher;
use crate::coding::{self, CodedOrbit, LambdaPath};
use crate::cycle;
use crate::equidist::nu;
use crate::error::{Error, Result};
use crate::itinerary::{cyclic_classes, Itinerary};
use crate::orbits::{self, OrbitRecord};

pub const ZERO_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    CodedNewton,
    GlobalSubdivision,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::CodedNewton => "coded-newton",
            Method::GlobalSubdivision => "global-subdivision",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub c: Complex64,
    pub lambda: Option<Complex64>,
    pub word: Option<Itinerary>,
    pub period: usize,
    pub s: Complex64,
    pub residual: f64,
    pub multiplicity: usize,
    pub method: Method,
}

/// Closed rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::OutOfRange(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, c: Complex64, pad: f64) -> bool {
        c.re >= self.x0 - pad && c.re <= self.x1 + pad && c.im >= self.y0 - pad && c.im <= self.y1 + pad
    }

    /// Four children; the cut sits at fraction `ratio` of each side.
    pub fn split(&self, ratio: f64) -> [Rect; 4] {
        let xm = self.x0 + ratio * (self.x1 - self.x0);
        let ym = self.y0 + ratio * (self.y1 - self.y0);
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
        ]
    }

    pub fn shifted(&self, d: Complex64) -> Rect {
        Rect { x0: self.x0 + d.re, x1: self.x1 + d.re, y0: self.y0 + d.im, y1: self.y1 + d.im }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }
}

/// Winding number of a closed sampled curve about 0.
pub fn winding_number(values: &[Complex64]) -> Result<i64> {
    if values.iter().any(|v| v.norm() < ZERO_GUARD) {
        return Err(Error::ZeroOnContour);
    }
    let m = values.len();
    let mut total = 0.0;
    for i in 0..m {
        let inc = (values[(i + 1) % m] * values[i].conj()).arg();
        if inc.abs() >= PI / 2.0 {
            return Err(Error::NeedRefinement(i));
        }
        total += inc;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

// ---------------------------------------------------------------------------
// Global route.

#[derive(Debug, Clone)]
pub struct GlobalOptions {
    /// Smallest box ever split.
    pub min_size: f64,
    /// Boxes with count 1 at or below this diameter are polished by Newton.
    pub polish_size: f64,
    /// Count-0 boxes that may meet `M` are split down to this diameter, to
    /// expose zero/pole pairs.
    pub zero_count_floor: f64,
    /// Negative-count boxes are split down to this diameter, then reported.
    pub suspect_size: f64,
    pub max_jitter: usize,
    pub edge_samples: usize,
    /// Bisection depth cap per boundary interval.
    pub max_refine_depth: usize,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self {
            min_size: 1e-6,
            polish_size: 0.05,
            zero_count_floor: 0.05,
            suspect_size: 1e-4,
            max_jitter: 5,
            edge_samples: 8,
            max_refine_depth: 24,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GlobalReport {
    pub points: Vec<CriticalPoint>,
    /// Minimal boxes with a negative count (primitive parabolic parameters).
    pub parabolic_suspects: Vec<Rect>,
    pub unresolved: Vec<Rect>,
    /// Zeros minus poles in the whole rectangle.
    pub total_count: i64,
    /// Parent counts that differed from the sum over children.
    pub conservation_violations: usize,
    pub boxes_examined: usize,
}

impl GlobalReport {
    fn merge(&mut self, other: GlobalReport) {
        self.points.extend(other.points);
        self.parabolic_suspects.extend(other.parabolic_suspects);
        self.unresolved.extend(other.unresolved);
        self.conservation_violations += other.conservation_violations;
        self.boxes_examined += other.boxes_examined;
    }
}

struct PhiSample {
    c: Complex64,
    phase: Complex64,
    points: Vec<Complex64>,
}

struct Global<'a> {
    n: usize,
    s: Complex64,
    orbit_count: usize,
    opts: &'a GlobalOptions,
}

impl Global<'_> {
    fn sample(&self, c: Complex64, warm: Option<&[Complex64]>) -> Result<PhiSample> {
        let attempt = |pp: orbits::PeriodicPoints| -> Result<PhiSample> {
            let orbs = orbits::group_orbits(c, self.n, &pp.points, true)?;
            if orbs.len() != self.orbit_count {
                return Err(Error::MatchingAmbiguous { margin: 0.0 });
            }
            let mut phase = Complex64::new(1.0, 0.0);
            for o in &orbs {
                let sigma = o.sigma.ok_or(Error::NearParabolic { distance: (1.0 - o.rho).norm() })?;
                let f = sigma - self.s;
                if f.norm() < ZERO_GUARD {
                    return Err(Error::ZeroOnContour);
                }
                phase *= f / f.norm();
            }
            Ok(PhiSample { c, phase, points: pp.points })
        };
        if let Some(w) = warm {
            if let Ok(pp) = orbits::periodic_points_from(c, self.n, w.to_vec()) {
                if let Ok(s) = attempt(pp) {
                    return Ok(s);
                }
            }
        }
        attempt(orbits::periodic_points(c, self.n)?)
    }

    fn refine(&self, a: &PhiSample, b: &PhiSample, depth: usize, out: &mut Vec<Complex64>) -> Result<()> {
        let inc = (b.phase * a.phase.conj()).arg();
        if inc.abs() <= PI / 4.0 {
            return Ok(());
        }
        if depth >= self.opts.max_refine_depth {
            return if inc.abs() < PI / 2.0 { Ok(()) } else { Err(Error::NeedRefinement(out.len())) };
        }
        let mid = self.sample(0.5 * (a.c + b.c), Some(&a.points))?;
        self.refine(a, &mid, depth + 1, out)?;
        out.push(mid.phase);
        self.refine(&mid, b, depth + 1, out)
    }

    /// Zeros minus poles of `Phi_s` inside `rect`.
    fn count(&self, rect: &Rect) -> Result<i64> {
        let corners = rect.corners();
        let m = self.opts.edge_samples.max(2);
        let mut nodes = Vec::with_capacity(4 * m);
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            for k in 0..m {
                nodes.push(a + (b - a) * (k as f64 / m as f64));
            }
        }
        let mut samples: Vec<PhiSample> = Vec::with_capacity(nodes.len());
        for c in nodes {
            let warm = samples.last().map(|s| s.points.as_slice());
            samples.push(self.sample(c, warm)?);
        }
        let mut phases = Vec::with_capacity(samples.len() * 2);
        for i in 0..samples.len() {
            phases.push(samples[i].phase);
            let next = &samples[(i + 1) % samples.len()];
            self.refine(&samples[i], next, 0, &mut phases)?;
        }
        winding_number(&phases)
    }

    fn may_meet_m(&self, rect: &Rect) -> bool {
        boettcher::distance_lower_bound(rect.center()) <= 0.5 * rect.diameter()
    }

    fn split_counts(&self, rect: &Rect) -> Option<Vec<(Rect, i64)>> {
        for k in 0..=self.opts.max_jitter {
            let ratio = 0.51 + 1e-4 * k as f64;
            let children = rect.split(ratio);
            let counts: Vec<Result<i64>> = children.par_iter().map(|r| self.count(r)).collect();
            if counts.iter().all(|c| c.is_ok()) {
                return Some(children.iter().copied().zip(counts.into_iter().map(|c| c.unwrap())).collect());
            }
        }
        None
    }

    fn descend(&self, rect: Rect, count: i64) -> GlobalReport {
        let mut report = GlobalReport { boxes_examined: 1, ..Default::default() };
        let diam = rect.diameter();
        let split = match count {
            0 => diam > self.opts.zero_count_floor && self.may_meet_m(&rect),
            c if c < 0 => {
                if diam <= self.opts.suspect_size {
                    report.parabolic_suspects.push(rect);
                    false
                } else {
                    true
                }
            }
            c => {
                if (c == 1 && diam <= self.opts.polish_size) || diam <= self.opts.min_size {
                    match self.polish(&rect, c as usize) {
                        Some(p) => {
                            report.points.push(p);
                            false
                        }
                        None if diam <= self.opts.min_size => {
                            report.unresolved.push(rect);
                            false
                        }
                        None => true,
                    }
                } else {
                    true
                }
            }
        };
        if !split {
            return report;
        }
        let Some(children) = self.split_counts(&rect) else {
            report.unresolved.push(rect);
            return report;
        };
        let sum: i64 = children.iter().map(|(_, c)| c).sum();
        if sum != count {
            report.conservation_violations += 1;
        }
        let subs: Vec<GlobalReport> = children.into_par_iter().map(|(r, c)| self.descend(r, c)).collect();
        for sub in subs {
            report.merge(sub);
        }
        report
    }

    /// Newton on one orbit branch from the box centre; accepted if it stays in the box.
    fn polish(&self, rect: &Rect, multiplicity: usize) -> Option<CriticalPoint> {
        let c0 = rect.center();
        let mut orbs = orbits::exact_orbits(c0, self.n).ok()?;
        orbs.retain(|o| o.sigma.is_some());
        orbs.sort_by(|a, b| {
            let fa = (a.sigma.unwrap() - self.s).norm();
            let fb = (b.sigma.unwrap() - self.s).norm();
            fa.total_cmp(&fb)
        });
        for o in orbs.iter().take(4) {
            let Ok(c) = newton_on_branch(o, self.s, rect.diameter()) else { continue };
            if !rect.contains(c, 1e-9 * rect.diameter()) {
                continue;
            }
            if let Some(residual) = validate(c, self.n, self.s) {
                return Some(CriticalPoint {
                    c,
                    lambda: None,
                    word: None,
                    period: self.n,
                    s: self.s,
                    residual,
                    multiplicity,
                    method: Method::GlobalSubdivision,
                });
            }
        }
        None
    }
}

/// Newton on `sigma(c) - s` along the analytic continuation of one orbit.
pub fn newton_on_branch(orbit: &OrbitRecord, s: Complex64, max_step: f64) -> Result<Complex64> {
    let mut c = orbit.c;
    let mut pts = orbit.points.clone();
    let tol = 1e-11 * s.norm().max(1.0);
    for _ in 0..60 {
        let var = cycle::variation(&pts, orbits::NEAR_PARABOLIC)?;
        let (sigma, dsigma) = cycle::sigma_with_derivative(&pts, orbits::NEAR_PARABOLIC)?;
        let h = sigma - s;
        let mut step = h / dsigma;
        if !step.is_finite() {
            return Err(Error::NoConvergence { what: "branch Newton", residual: h.norm() });
        }
        if step.norm() > 0.25 * max_step {
            step *= 0.25 * max_step / step.norm();
        }
        if h.norm() < tol && step.norm() < 1e-14 * c.norm().max(1.0) {
            return Ok(c);
        }
        let next = c - step;
        let mut moved: Vec<Complex64> = pts.iter().zip(&var.dz).map(|(z, d)| z - d * step).collect();
        cycle::newton_refine(next, &mut moved, 30, 1e-15)?;
        for (a, b) in moved.iter().zip(&pts) {
            if 2.0 * (a - b).norm() >= b.norm() {
                return Err(Error::TrackingFailed { t: 0.0 });
            }
        }
        c = next;
        pts = moved;
        if h.norm() < tol * 1e-2 {
            return Ok(c);
        }
    }
    Err(Error::NoConvergence { what: "branch Newton", residual: f64::NAN })
}

/// Recomputes all exact-period orbits at `c` and returns `min |sigma - s|`
/// when it passes `1e-7 max(1, |s|)`.
pub fn validate(c: Complex64, n: usize, s: Complex64) -> Option<f64> {
    let orbs = orbits::exact_orbits(c, n).ok()?;
    let best = orbs
        .iter()
        .filter_map(|o| o.sigma)
        .map(|sigma| (sigma - s).norm())
        .fold(f64::INFINITY, f64::min);
    (best < 1e-7 * s.norm().max(1.0)).then_some(best)
}

/// All zeros of `Phi_s` in `rect` by subdivision.
pub fn find_global(n: usize, s: Complex64, rect: Rect) -> Result<GlobalReport> {
    find_global_with(n, s, rect, &GlobalOptions::default())
}

pub fn find_global_with(n: usize, s: Complex64, rect: Rect, opts: &GlobalOptions) -> Result<GlobalReport> {
    if n == 0 || n > 8 {
        return Err(Error::OutOfRange(format!("period {n} not in 1..=8")));
    }
    let g = Global { n, s, orbit_count: (nu(n) as usize) / n, opts };
    let mut root = rect;
    let mut count = None;
    for k in 0..=opts.max_jitter {
        let jitter = Complex64::new(1.0, 0.7) * (1e-4 * rect.diameter() * k as f64);
        let r = rect.shifted(jitter);
        if let Ok(c) = g.count(&r) {
            root = r;
            count = Some(c);
            break;
        }
    }
    let Some(total) = count else {
        return Err(Error::ZeroOnContour);
    };
    let mut report = g.descend(root, total);
    report.total_count = total;
    report.points = dedup(report.points, 1e-6);
    Ok(report)
}

fn sort_points(points: &mut [CriticalPoint]) {
    points.sort_by(|a, b| a.c.re.total_cmp(&b.c.re).then(a.c.im.total_cmp(&b.c.im)));
}

/// Merges points closer than `radius` in `c`; multiplicities add up.
pub fn dedup(mut points: Vec<CriticalPoint>, radius: f64) -> Vec<CriticalPoint> {
    sort_points(&mut points);
    let mut out: Vec<CriticalPoint> = Vec::new();
    for p in points {
        if let Some(q) = out.iter_mut().find(|q| (q.c - p.c).norm() < radius) {
            q.multiplicity += p.multiplicity;
            if p.residual < q.residual {
                let m = q.multiplicity;
                *q = p;
                q.multiplicity = m;
            }
        } else {
            out.push(p);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Coded route.

#[derive(Debug, Clone)]
pub struct CodedOptions {
    pub margin: f64,
    pub max_iter: usize,
}

impl Default for CodedOptions {
    fn default() -> Self {
        Self { margin: boettcher::DEFAULT_LAMBDA_MARGIN, max_iter: 100 }
    }
}

/// `h(lambda) = drho/dlambda - s dc/dlambda` on a coded orbit.
pub fn h_of(o: &CodedOrbit, s: Complex64) -> Result<Complex64> {
    Ok(o.drho_dlambda()? - s * o.dc_dlambda)
}

/// Newton for `h(lambda) = 0` from an already continued orbit.
pub fn coded_newton_from(start: CodedOrbit, s: Complex64, opts: &CodedOptions) -> Result<CriticalPoint> {
    let n = start.period();
    let bound = 1.0 + opts.margin;
    let mut o = start;
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let lambda = o.lambda;
        let h = h_of(&o, s)?;
        last = h.norm();
        let delta = 1e-5 * (lambda.norm() - 1.0);
        let hp = h_of(&o.continue_to(lambda + delta)?, s)?;
        let hm = h_of(&o.continue_to(lambda - delta)?, s)?;
        let dh = (hp - hm) / (2.0 * delta);
        let mut step = h / dh;
        if !step.is_finite() {
            break;
        }
        // Keep bad early steps from throwing the iterate across the domain.
        let cap = 0.5 * (lambda.norm() - 1.0);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let tol = 1e-10 * n as f64 * o.rho.norm().max(1.0) / lambda.norm();
        if h.norm() < tol && step.norm() < 1e-11 {
            let sigma = o.sigma;
            return Ok(CriticalPoint {
                c: o.c,
                lambda: Some(lambda),
                word: Some(o.word),
                period: n,
                s,
                residual: (sigma - s).norm(),
                multiplicity: 1,
                method: Method::CodedNewton,
            });
        }
        let next = lambda - step;
        if next.norm() < bound {
            return Err(Error::LeftDomain { bound });
        }
        o = o.continue_to(next)?;
    }
    Err(Error::NoConvergence { what: "coded Newton", residual: last })
}

/// Newton for a critical point of the multiplier of the orbit coded by `w`.
pub fn coded_newton(w: Itinerary, lambda_seed: Complex64, s: Complex64) -> Result<CriticalPoint> {
    coded_newton_with(w, lambda_seed, s, &CodedOptions::default())
}

pub fn coded_newton_with(w: Itinerary, lambda_seed: Complex64, s: Complex64, opts: &CodedOptions) -> Result<CriticalPoint> {
    if lambda_seed.norm() < 1.0 + opts.margin {
        return Err(Error::OutOfRange(format!("seed |lambda| = {} inside the margin", lambda_seed.norm())));
    }
    let start = coding::psi_periodic_with(lambda_seed, w, opts.margin)?;
    coded_newton_from(start, s, opts)
}

/// Search region `r_min <= |lambda| <= r_max`, `theta_min <= arg lambda < theta_max`.
#[derive(Debug, Clone, Copy)]
pub struct Sector {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Sector {
    /// `1 + margin <= |lambda| <= r_max` over the right half-plane, which
    /// meets each `c` outside `M` exactly once.
    pub fn half_annulus(margin: f64, r_max: f64) -> Self {
        Self { r_min: 1.0 + margin, r_max, theta_min: -PI / 2.0, theta_max: PI / 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct OutsideOptions {
    pub coded: CodedOptions,
    /// Ratio between successive rings in `|lambda| - 1`.
    pub ring_ratio: f64,
    /// Angular spacing on a ring, in units of `(|lambda| - 1) / |lambda|`.
    pub angular_step: f64,
    pub dedup_radius: f64,
}

impl Default for OutsideOptions {
    fn default() -> Self {
        Self { coded: CodedOptions::default(), ring_ratio: 0.7, angular_step: 0.5, dedup_radius: 1e-6 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OutsideReport {
    pub points: Vec<CriticalPoint>,
    /// Newton runs that failed, per class representative.
    pub failures: Vec<(Itinerary, String)>,
    pub seeds: usize,
}

fn ring_radii(sector: &Sector, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = sector.r_max - 1.0;
    let lo = sector.r_min - 1.0;
    while e >= lo {
        out.push(1.0 + e);
        e *= ratio;
    }
    if out.last().map_or(true, |r| *r - 1.0 > lo * 1.0001) {
        out.push(sector.r_min);
    }
    out
}

/// Critical points outside `M` found through every cyclic class of period `n`.
pub fn find_outside(n: usize, s: Complex64, sector: Sector) -> Result<OutsideReport> {
    find_outside_with(n, s, sector, &OutsideOptions::default())
}

pub fn find_outside_with(n: usize, s: Complex64, sector: Sector, opts: &OutsideOptions) -> Result<OutsideReport> {
    if sector.r_min < 1.0 + opts.coded.margin || sector.r_max <= sector.r_min {
        return Err(Error::OutOfRange(format!(
            "sector radii [{}, {}] not outside 1 + {}",
            sector.r_min, sector.r_max, opts.coded.margin
        )));
    }
    let words: Vec<Itinerary> = cyclic_classes(n)?.into_iter().map(|(w, _)| w).collect();
    let radii = ring_radii(&sector, opts.ring_ratio);
    let scans: Vec<Vec<Vec<Option<(f64, Complex64)>>>> = radii
        .par_iter()
        .map(|r| scan_ring(*r, &sector, &words, opts, s))
        .collect();
    let mut seeds: Vec<(usize, Complex64)> = Vec::new();
    for (wi, _) in words.iter().enumerate() {
        for (ri, ring) in scans.iter().enumerate() {
            let row = &ring[wi];
            let m = row.len();
            for k in 0..m {
                let Some((v, lambda)) = row[k] else { continue };
                let mut is_min = true;
                for kk in [k.wrapping_sub(1), k + 1] {
                    if let Some(Some((u, _))) = row.get(kk) {
                        if *u < v {
                            is_min = false;
                        }
                    }
                }
                for rj in [ri.wrapping_sub(1), ri + 1] {
                    if let Some(other) = scans.get(rj) {
                        let orow = &other[wi];
                        let om = orow.len();
                        let frac = (lambda.arg() - sector.theta_min) / (sector.theta_max - sector.theta_min);
                        let j = ((frac * om as f64).round() as usize).min(om - 1);
                        for jj in [j.saturating_sub(1), j, (j + 1).min(om - 1)] {
                            if let Some((u, _)) = orow[jj] {
                                if u < v {
                                    is_min = false;
                                }
                            }
                        }
                    }
                }
                if is_min {
                    seeds.push((wi, lambda));
                }
            }
        }
    }
    let results: Vec<(usize, Result<CriticalPoint>)> = seeds
        .par_iter()
        .map(|(wi, lambda)| (*wi, coded_newton_with(words[*wi], *lambda, s, &opts.coded)))
        .collect();
    let mut report = OutsideReport { seeds: seeds.len(), ..Default::default() };
    let mut found = Vec::new();
    for (wi, r) in results {
        match r {
            Ok(p) => {
                let inside = p.lambda.map_or(false, |l| {
                    let t = l.arg();
                    l.norm() >= sector.r_min && l.norm() <= sector.r_max && t >= sector.theta_min && t < sector.theta_max
                });
                if inside && p.residual < 1e-8 * s.norm().max(1.0) {
                    found.push(p);
                }
            }
            Err(e) => report.failures.push((words[wi], e.to_string())),
        }
    }
    report.points = dedup_lambda(found, opts.dedup_radius);
    Ok(report)
}

/// `|h|` for every class on one ring, walking the ring by continuation.
fn scan_ring(r: f64, sector: &Sector, words: &[Itinerary], opts: &OutsideOptions, s: Complex64) -> Vec<Vec<Option<(f64, Complex64)>>> {
    let step = opts.angular_step * (r - 1.0) / r;
    let m = ((sector.theta_max - sector.theta_min) / step).ceil().max(1.0) as usize;
    let start = Complex64::from_polar(r, sector.theta_min);
    let Ok(path) = LambdaPath::standard(start, 0.0) else {
        return vec![vec![None; m]; words.len()];
    };
    // Parameter nodes are shared by all words.
    let mut nodes = vec![path.end()];
    for k in 1..m {
        let t = sector.theta_min + (sector.theta_max - sector.theta_min) * k as f64 / m as f64;
        match nodes[k - 1].continue_to(Complex64::from_polar(r, t)) {
            Ok(ep) => nodes.push(ep),
            Err(_) => break,
        }
    }
    words
        .par_iter()
        .map(|w| {
            let mut row = vec![None; m];
            let Ok(mut o) = coding::orbit_on_path(&path, *w) else { return row };
            for (k, node) in nodes.iter().enumerate() {
                if k > 0 {
                    match o.advance_to(*node) {
                        Ok(next) => o = next,
                        Err(_) => break,
                    }
                }
                row[k] = h_of(&o, s).ok().map(|h| (h.norm(), node.lambda));
            }
            row
        })
        .collect()
}

/// Merges points closer than `radius` in `lambda` (then in `c`).
fn dedup_lambda(mut points: Vec<CriticalPoint>, radius: f64) -> Vec<CriticalPoint> {
    points.sort_by(|a, b| {
        let (la, lb) = (a.lambda.unwrap_or_default(), b.lambda.unwrap_or_default());
        la.re.total_cmp(&lb.re).then(la.im.total_cmp(&lb.im))
    });
    let mut out: Vec<CriticalPoint> = Vec::new();
    for p in points {
        let close = out.iter_mut().find(|q| {
            (q.lambda.unwrap_or_default() - p.lambda.unwrap_or_default()).norm() < radius || (q.c - p.c).norm() < radius
        });
        match close {
            Some(q) => q.multiplicity += 1,
            None => out.push(p),
        }
    }
    sort_points(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(f: impl Fn(Complex64) -> Complex64, center: Complex64, r: f64, m: usize) -> Vec<Complex64> {
        (0..m).map(|k| f(center + Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64))).collect()
    }

    #[test]
    fn winding_examples() {
        let c0 = cx(0.3, -0.2);
        assert_eq!(winding_number(&circle(|c| c - c0, c0, 1.0, 64)).unwrap(), 1);
        assert_eq!(winding_number(&circle(|_| cx(2.0, 1.0), c0, 1.0, 8)).unwrap(), 0);
        let (a, b, p) = (cx(0.1, 0.1), cx(-0.2, 0.0), cx(0.0, -0.3));
        let f = |c: Complex64| (c - a) * (c - b) / (c - p);
        assert_eq!(winding_number(&circle(f, cx(0.0, 0.0), 1.0, 256)).unwrap(), 1);
        assert!(matches!(winding_number(&circle(|c| c - c0, c0, 1.0, 3)), Err(Error::NeedRefinement(_))));
        assert!(matches!(winding_number(&[cx(0.0, 0.0), cx(1.0, 0.0)]), Err(Error::ZeroOnContour)));
    }

    #[test]
    fn global_periods_one_and_two_are_empty() {
        let rect = Rect::new(-3.0, 2.0, -2.0, 2.0).unwrap();
        for n in [1, 2] {
            let rep = find_global(n, cx(0.0, 0.0), rect).unwrap();
            assert!(rep.points.is_empty(), "n = {n}: {:?}", rep.points);
        }
    }

    #[test]
    fn branch_newton_hits_period_three_oracle() {
        // Critical points of the period-3 multiplier: 9c^2 + 22c + 14 = 0.
        let exact = cx(-11.0 / 9.0, 5f64.sqrt() / 9.0);
        let orbs = orbits::exact_orbits(exact + cx(0.01, -0.01), 3).unwrap();
        let found: Vec<Complex64> = orbs.iter().filter_map(|o| newton_on_branch(o, cx(0.0, 0.0), 0.1).ok()).collect();
        assert!(found.iter().any(|c| (c - exact).norm() < 1e-10), "{found:?}");
    }

    #[test]
    fn ring_radii_cover_sector() {
        let radii = ring_radii(&Sector::half_annulus(0.02, 2.0), 0.7);
        assert_eq!(radii[0], 2.0);
        assert!((radii.last().unwrap() - 1.02).abs() < 1e-12);
    }

    #[test]
    fn coded_newton_degenerate_cases() {
        let zero = cx(0.0, 0.0);
        assert!(coded_newton("01".parse().unwrap(), cx(1.3, 0.4), cx(4.0, 0.0)).is_err());
        assert!(coded_newton("0".parse().unwrap(), cx(1.3, 0.4), zero).is_err());
    }

    #[test]
    fn dedup_merges_multiplicity() {
        let p = |re: f64| CriticalPoint {
            c: cx(re, 0.0),
            lambda: None,
            word: None,
            period: 3,
            s: cx(0.0, 0.0),
            residual: 0.0,
            multiplicity: 1,
            method: Method::GlobalSubdivision,
        };
        let out = dedup(vec![p(1.0), p(1.0 + 1e-8), p(2.0)], 1e-6);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].multiplicity, 2);
    }
}
