//! Counting formulas, the frequency experiment and logarithmic potentials.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::boettcher::{self, DEFAULT_LAMBDA_MARGIN};
use crate::coding::{self, LambdaPath};
use crate::error::{Error, Result};
use crate::itinerary;

pub const MAX_NU_PERIOD: usize = 40;
pub const MAX_EXPERIMENT_PERIOD: usize = 22;

/// Number of words of exact period `n`.
pub fn nu(n: usize) -> u64 {
    assert!((1..=MAX_NU_PERIOD).contains(&n), "nu: period {n} outside 1..=40");
    let total: i64 = divisors(n).into_iter().map(|r| mobius(n / r) * (1i64 << r)).sum();
    total as u64
}

pub fn mobius(mut m: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if m > 1 {
        result = -result;
    }
    result
}

pub fn totient(m: usize) -> u64 {
    (1..=m).filter(|k| gcd(*k, m) == 1).count() as u64
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|r| n % r == 0).collect()
}

/// `sum over n = r p, p < n` of `nu(p) phi(r)`.
fn satellite_sum(n: usize) -> u64 {
    divisors(n).into_iter().filter(|p| *p < n).map(|p| nu(p) * totient(n / p)).sum()
}

/// The degree formula `nu(n) - nu(n)/n - sum nu(p) phi(r)`, evaluated as written.
pub fn deg_c_sn(n: usize) -> Result<i64> {
    check_degree_period(n)?;
    Ok(nu(n) as i64 - (nu(n) / n as u64) as i64 - satellite_sum(n) as i64)
}

/// Same formula with the satellite term halved: each satellite orbit of
/// period `n` is counted once rather than once per rotation of `Per_n`.
/// This is the count the argument-principle runs reproduce.
pub fn deg_c_sn_halved(n: usize) -> Result<i64> {
    check_degree_period(n)?;
    Ok(nu(n) as i64 - (nu(n) / n as u64) as i64 - (satellite_sum(n) / 2) as i64)
}

/// `M_n`, equal to `deg_c S_n`.
pub fn m_n(n: usize) -> Result<i64> {
    deg_c_sn(n)
}

fn check_degree_period(n: usize) -> Result<()> {
    if !(3..=MAX_NU_PERIOD).contains(&n) {
        return Err(Error::OutOfRange(format!("degree formula needs 3 <= n <= 40, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyRow {
    pub n: usize,
    pub lambda: Complex64,
    pub delta: f64,
    pub fraction: f64,
    pub omega_n_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialRow {
    pub n: usize,
    pub c: Complex64,
    pub s: Complex64,
    pub sum_potential: f64,
    pub target: f64,
    pub error: f64,
}

fn check_experiment(lambda: Complex64, n_list: &[usize], margin: f64) -> Result<()> {
    if lambda.norm() < 1.0 + margin {
        return Err(Error::OutOfRange(format!("|lambda| = {} below 1 + {margin}", lambda.norm())));
    }
    if let Some(n) = n_list.iter().find(|n| **n == 0 || **n > MAX_EXPERIMENT_PERIOD) {
        return Err(Error::OutOfRange(format!("period {n} outside 1..=22")));
    }
    Ok(())
}

/// Applies `f` to the coded cycle of every word of exact period `n` at the end
/// of `path`, in word order.
fn map_words<T: Send>(path: &LambdaPath, n: usize, f: impl Fn(&coding::CodedOrbit) -> T + Sync) -> Result<Vec<T>> {
    let words = itinerary::enumerate_exact_period(n)?;
    words.par_iter().map(|w| coding::orbit_on_path(path, *w).map(|o| f(&o))).collect()
}

/// Fraction of `w` in `Omega_n` with `|g_w(lambda) - 2 lambda| < delta`.
pub fn frequency_experiment(lambda: Complex64, n_list: &[usize], delta: f64) -> Result<Vec<FrequencyRow>> {
    frequency_experiment_with(lambda, n_list, delta, DEFAULT_LAMBDA_MARGIN)
}

pub fn frequency_experiment_with(lambda: Complex64, n_list: &[usize], delta: f64, margin: f64) -> Result<Vec<FrequencyRow>> {
    check_experiment(lambda, n_list, margin)?;
    if !(delta >= 0.0) {
        return Err(Error::OutOfRange(format!("delta = {delta}")));
    }
    let path = LambdaPath::standard(lambda, margin)?;
    n_list
        .iter()
        .map(|&n| {
            let dist = map_words(&path, n, |o| (o.g - 2.0 * lambda).norm())?;
            let hits = dist.iter().filter(|d| **d < delta).count();
            Ok(FrequencyRow { n, lambda, delta, fraction: hits as f64 / dist.len() as f64, omega_n_size: dist.len() })
        })
        .collect()
}

/// Distances `|g_w(lambda) - 2 lambda|` for every `w` of exact period `n`, in word order.
pub fn g_distances(lambda: Complex64, n: usize, margin: f64) -> Result<Vec<f64>> {
    check_experiment(lambda, &[n], margin)?;
    let path = LambdaPath::standard(lambda, margin)?;
    map_words(&path, n, |o| (o.g - 2.0 * lambda).norm())
}

/// `(1/(n nu(n))) sum_w log|sigma_w(c(lambda)) - s|` against `log 2 + G_M/2`.
pub fn sum_potential(lambda: Complex64, n: usize, s: Complex64) -> Result<PotentialRow> {
    sum_potential_with(lambda, n, s, DEFAULT_LAMBDA_MARGIN)
}

pub fn sum_potential_with(lambda: Complex64, n: usize, s: Complex64, margin: f64) -> Result<PotentialRow> {
    check_experiment(lambda, &[n], margin)?;
    let path = LambdaPath::standard(lambda, margin)?;
    let logs = map_words(&path, n, |o| (o.sigma - s).norm().ln())?;
    let total: f64 = logs.iter().sum();
    let sum_potential = total / (n as f64 * logs.len() as f64);
    let c = path.end().c;
    let target = 2f64.ln() + 0.5 * boettcher::green_m(c);
    Ok(PotentialRow { n, c, s, sum_potential, target, error: (sum_potential - target).abs() })
}

/// `(1 / sum m_i) sum m_i log|c_test - x_i|`.
pub fn empirical_potential(points: &[(Complex64, u32)], c_test: Complex64) -> Result<f64> {
    let mass: u64 = points.iter().map(|(_, m)| *m as u64).sum();
    if mass == 0 {
        return Err(Error::Precondition("empty point set".into()));
    }
    let sum: f64 = points.iter().map(|(x, m)| *m as f64 * (c_test - x).norm().ln()).sum();
    Ok(sum / mass as f64)
}
