//! Multiple zeta values `ζ(s1,…,sk) = Σ_{n1>⋯>nk≥1} n1^{-s1}⋯nk^{-sk}`
//! to a requested number of decimal digits, with a rigorous error bound.
//!
//! The iterated integral of the word `x0^{s1-1}x1⋯x0^{sk-1}x1` over `[0,1]`
//! is split at `1/2`; both halves are multiple polylogarithms at `1/2`,
//! summed in fixed point.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{to_decimal_string, Rational};
use crate::Error;

/// Real number known to lie in `[mid - rad, mid + rad]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub mid: Rational,
    pub rad: Rational,
}

impl Ball {
    pub fn exact(x: Rational) -> Self {
        Self { mid: x, rad: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn one() -> Self {
        Self::exact(Rational::one())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { mid: &self.mid - &o.mid, rad: &self.rad + &o.rad }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            mid: &self.mid * &o.mid,
            rad: self.mid.abs() * &o.rad + o.mid.abs() * &self.rad + &self.rad * &o.rad,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { mid: &self.mid * c, rad: &self.rad * c.abs() }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        (&self.mid - x).abs() <= self.rad
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        (&self.mid - &o.mid).abs() <= &self.rad + &o.rad
    }

    /// Rounds the midpoint to `digits` decimals, widening the radius.
    pub fn rounded(&self, digits: u32) -> Self {
        let scale = Rational::from_integer(BigInt::from(10).pow(digits));
        let scaled = &self.mid * &scale;
        let m = scaled.round();
        let err = (&scaled - &m).abs() / &scale;
        Self { mid: m / scale, rad: &self.rad + err }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64().unwrap_or(f64::NAN)
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_decimal(&self, digits: usize) -> String {
        to_decimal_string(&self.mid, digits)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.to_decimal(20), self.rad_f64())
    }
}

/// Exponent vector with `s1 ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MzvIndex(Vec<u32>);

impl MzvIndex {
    pub fn new(s: Vec<u32>) -> Result<Self, Error> {
        if s.contains(&0) {
            return Err(Error::DivergentIndex);
        }
        if s.first().is_some_and(|&s1| s1 < 2) {
            return Err(Error::DivergentIndex);
        }
        Ok(Self(s))
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Letters of `x0^{s1-1}x1⋯`, `true` for `x1`.
    fn word(&self) -> Vec<bool> {
        let mut w = Vec::new();
        for &s in &self.0 {
            w.extend(std::iter::repeat_n(false, (s - 1) as usize));
            w.push(true);
        }
        w
    }
}

impl fmt::Display for MzvIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "ζ({})", parts.join(","))
    }
}

fn ten_pow(d: u32) -> BigInt {
    BigInt::from(10).pow(d)
}

/// `Σ_{n>N} 2^{-n} n^{m-1}`, bounded by a geometric series.
fn tail_bound(n: u64, m: u32) -> Option<Rational> {
    let n1 = Rational::from_integer(BigInt::from(n + 1));
    let ratio = num_traits::pow(Rational::new(BigInt::from(n + 2), BigInt::from(n + 1)), (m.max(1) - 1) as usize)
        / Rational::from_integer(BigInt::from(2));
    if ratio >= Rational::one() {
        return None;
    }
    let first = num_traits::pow(n1, (m.max(1) - 1) as usize) / Rational::from_integer(BigInt::from(2).pow(n as u32 + 1));
    Some(first / (Rational::one() - ratio))
}

/// `Li_w(1/2)` for a word ending in `x1`, at `d` fixed-point digits.
fn li_half(word: &[bool], d: u32) -> Ball {
    if word.is_empty() {
        return Ball::one();
    }
    debug_assert!(*word.last().unwrap());
    let mut b = Vec::new();
    let mut run = 0u32;
    for &x in word {
        if x {
            b.push(run + 1);
            run = 0;
        } else {
            run += 1;
        }
    }
    let m = b.len() as u32;
    let target = Rational::new(BigInt::one(), ten_pow(d));
    let mut n_max = (d as f64 * std::f64::consts::LOG2_10) as u64 + 8;
    let tail = loop {
        if let Some(t) = tail_bound(n_max, m) {
            if t <= target {
                break t;
            }
        }
        n_max += 8;
    };
    let scale = ten_pow(d);
    let mut prefix = vec![BigInt::zero(); b.len()];
    let mut total = BigInt::zero();
    let mut cur = vec![BigInt::zero(); b.len()];
    for n in 1..=n_max {
        let nb = BigInt::from(n);
        for j in (0..b.len()).rev() {
            let num = if j + 1 == b.len() { scale.clone() } else { prefix[j + 1].clone() };
            cur[j] = num / nb.pow(b[j]);
        }
        for j in 0..b.len() {
            prefix[j] += &cur[j];
        }
        total += &cur[0] >> (n as usize);
    }
    let ulps = BigInt::from(m as u64 + n_max + 1);
    Ball {
        mid: Rational::new(total, scale.clone()),
        rad: Rational::new(ulps, scale) + tail,
    }
}

fn zeta_at(word: &[bool], d: u32) -> Ball {
    let mut acc = Ball::zero();
    for i in 0..=word.len() {
        let upper: Vec<bool> = word[..i].iter().rev().map(|x| !x).collect();
        acc = acc.add(&li_half(&upper, d).mul(&li_half(&word[i..], d)));
    }
    acc
}

fn cache() -> &'static RwLock<HashMap<MzvIndex, (u32, Ball)>> {
    static CACHE: OnceLock<RwLock<HashMap<MzvIndex, (u32, Ball)>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `ζ(s)` with radius at most `10^-precision`.
pub fn mzv_numeric(s: &MzvIndex, precision: u32) -> Ball {
    if s.0.is_empty() {
        return Ball::one();
    }
    if let Some((p, v)) = cache().read().expect("mzv cache poisoned").get(s) {
        if *p >= precision {
            return v.clone();
        }
    }
    let value = mzv_uncached(s, precision);
    let mut w = cache().write().expect("mzv cache poisoned");
    let slot = w.entry(s.clone()).or_insert((precision, value.clone()));
    if slot.0 < precision {
        *slot = (precision, value.clone());
    }
    value
}

/// As [`mzv_numeric`], without consulting or filling the cache.
pub fn mzv_uncached(s: &MzvIndex, precision: u32) -> Ball {
    if s.0.is_empty() {
        return Ball::one();
    }
    let word = s.word();
    let goal = Rational::new(BigInt::one(), ten_pow(precision));
    let mut d = precision + 4 + (word.len() as f64).log10().ceil() as u32;
    loop {
        let v = zeta_at(&word, d);
        if v.rad <= goal {
            break v;
        }
        d += 6;
    }
}

/// Convenience form taking a raw exponent list.
pub fn mzv(s: &[u32], precision: u32) -> Result<Ball, Error> {
    Ok(mzv_numeric(&MzvIndex::new(s.to_vec())?, precision))
}
