//! Finite binary words read as periodic itineraries of the shift.
//!
//! A word `w = w_0 w_1 ... w_{L-1}` stands for the infinite sequence `<w>`
//! obtained by repeating it. Digits are packed into a `u64` with `w_0` in the
//! most significant used bit, so integer order on words of equal length is
//! lexicographic order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest word that fits the packed representation.
pub const MAX_LEN: usize = 64;

/// Largest period accepted by the enumeration routines.
pub const MAX_ENUM_PERIOD: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Itinerary {
    bits: u64,
    len: u8,
}

impl Itinerary {
    /// Builds a word from its packed bits (`w_0` is bit `len - 1`).
    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_LEN {
            return Err(Error::OutOfRange(format!("word length {len} not in 1..={MAX_LEN}")));
        }
        Ok(Self { bits: bits & mask(len), len: len as u8 })
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for &d in digits {
            if d > 1 {
                return Err(Error::OutOfRange(format!("digit {d} is not binary")));
            }
            bits = (bits << 1) | d as u64;
        }
        Self::from_bits(bits, digits.len())
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Digit `k` of the periodic sequence `<w>`; any `k` is allowed.
    pub fn digit(&self, k: usize) -> u8 {
        let k = k % self.len();
        ((self.bits >> (self.len() - 1 - k)) & 1) as u8
    }

    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |k| self.digit(k))
    }

    /// Cyclic left shift by `k` places.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.len();
        let k = k % n;
        if k == 0 {
            return *self;
        }
        let bits = ((self.bits << k) | (self.bits >> (n - k))) & mask(n);
        Self { bits, len: self.len }
    }

    /// Smallest `p` with `p | len` such that the word is a power of its first `p` digits.
    pub fn minimal_period(&self) -> usize {
        let n = self.len();
        (1..=n)
            .filter(|p| n % p == 0)
            .find(|&p| self.shift(p) == *self)
            .unwrap_or(n)
    }

    pub fn has_full_period(&self) -> bool {
        self.minimal_period() == self.len()
    }

    /// First `n` digits, read as a new periodic word.
    pub fn periodize(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange(format!(
                "periodize to {n} needs 1 <= n <= {}",
                self.len()
            )));
        }
        Self::from_bits(self.bits >> (self.len() - n), n)
    }

    /// Lexicographically smallest rotation.
    pub fn canonical(&self) -> Self {
        (0..self.len()).map(|k| self.shift(k)).min().unwrap_or(*self)
    }

    /// Exchanges every 0 and 1.
    pub fn complement(&self) -> Self {
        Self { bits: !self.bits & mask(self.len()), len: self.len }
    }

    /// Word of length `j` made of whole copies of `self` followed by a tail of
    /// `r` digits, `j = s*n + r` with `1 <= r <= n`. The tail repeats the first
    /// `r` digits of `self`, with its last digit flipped when that is needed for
    /// the result to have minimal period exactly `j`. One of the two tails
    /// always works, whatever the period of `self`.
    pub fn extend_full_period(&self, j: usize) -> Result<Self> {
        let n = self.len();
        if j < n || j > MAX_LEN {
            return Err(Error::OutOfRange(format!("extension length {j} not in {n}..={MAX_LEN}")));
        }
        let r = (j - 1) % n + 1;
        let copies = (j - r) / n;
        let mut bits = 0u64;
        for _ in 0..copies {
            bits = (bits << n) | self.bits;
        }
        bits = (bits << r) | (self.bits >> (n - r));
        let plain = Self::from_bits(bits, j)?;
        if plain.has_full_period() {
            return Ok(plain);
        }
        let flipped = Self::from_bits(bits ^ 1, j)?;
        debug_assert!(flipped.has_full_period());
        Ok(flipped)
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl PartialOrd for Itinerary {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Itinerary {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then(self.bits.cmp(&other.bits))
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            f.write_str(if d == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Itinerary({self})")
    }
}

impl FromStr for Itinerary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::OutOfRange(format!("invalid itinerary digit {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_digits(&digits)
    }
}

fn check_enum_period(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENUM_PERIOD {
        return Err(Error::OutOfRange(format!("period {n} not in 1..={MAX_ENUM_PERIOD}")));
    }
    Ok(())
}

/// All words of minimal period exactly `n`, in increasing lexicographic order.
pub fn enumerate_exact_period(n: usize) -> Result<Vec<Itinerary>> {
    check_enum_period(n)?;
    Ok((0..1u64 << n)
        .map(|bits| Itinerary { bits, len: n as u8 })
        .filter(Itinerary::has_full_period)
        .collect())
}

/// Rotation classes of the words of exact period `n`: canonical (smallest)
/// representative and class size, ordered by representative.
pub fn cyclic_classes(n: usize) -> Result<Vec<(Itinerary, usize)>> {
    check_enum_period(n)?;
    Ok(enumerate_exact_period(n)?
        .into_iter()
        .filter(|w| w.canonical() == *w)
        .map(|w| (w, n))
        .collect())
}
