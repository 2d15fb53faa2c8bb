//! Exact exponent algebra linking Sobolev regularity, distortion
//! integrability and the regularity of inverse maps.
//!
//! Exponents are exact rationals with `+∞` as an ordinary value (`1/∞ = 0`).
//! Every operation checks its parameter range and names the violated
//! condition in the error.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("{0}")]
    Range(String),
    #[error("integer overflow in exact exponent arithmetic")]
    Overflow,
    #[error("division by zero in exponent arithmetic")]
    DivisionByZero,
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
}

type Result<T> = std::result::Result<T, ExponentError>;

/// An exact nonnegative-or-signed rational exponent, or `+∞`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Ratio<i128>),
    Infinite,
}

impl Exponent {
    pub const INF: Exponent = Exponent::Infinite;

    pub fn int(n: i128) -> Self {
        Exponent::Finite(Ratio::from_integer(n))
    }

    /// `num/den`, reduced. Panics on a zero denominator.
    pub fn ratio(num: i128, den: i128) -> Self {
        Exponent::Finite(Ratio::new(num, den))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(&self) -> Option<Ratio<i128>> {
        match self {
            Exponent::Finite(r) => Some(*r),
            Exponent::Infinite => None,
        }
    }

    pub fn numer(&self) -> Option<i128> {
        self.finite().map(|r| *r.numer())
    }

    pub fn denom(&self) -> Option<i128> {
        self.finite().map(|r| *r.denom())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/x` with `1/∞ = 0` and `1/0 = ∞`.
    pub fn recip(&self) -> Result<Self> {
        match self {
            Exponent::Infinite => Ok(Exponent::int(0)),
            Exponent::Finite(r) if r.is_zero() => Ok(Exponent::Infinite),
            Exponent::Finite(r) => Ok(Exponent::Finite(r.recip())),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => {
                a.checked_add(b).map(Exponent::Finite).ok_or(ExponentError::Overflow)
            }
            _ => Ok(Exponent::Infinite),
        }
    }

    /// Subtraction; `∞ − ∞` is rejected, `x − ∞` for finite `x` is rejected.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => {
                a.checked_sub(b).map(Exponent::Finite).ok_or(ExponentError::Overflow)
            }
            (Exponent::Infinite, Exponent::Finite(_)) => Ok(Exponent::Infinite),
            _ => Err(ExponentError::Range("subtraction of an infinite exponent".into())),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => {
                a.checked_mul(b).map(Exponent::Finite).ok_or(ExponentError::Overflow)
            }
            (Exponent::Finite(a), Exponent::Infinite) | (Exponent::Infinite, Exponent::Finite(a)) => {
                if a.is_zero() {
                    Err(ExponentError::Range("0 · ∞ is undefined".into()))
                } else if a.is_negative() {
                    Err(ExponentError::Range("negative multiple of ∞".into()))
                } else {
                    Ok(Exponent::Infinite)
                }
            }
            (Exponent::Infinite, Exponent::Infinite) => Ok(Exponent::Infinite),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Exponent::Finite(_), Exponent::Finite(b)) if b.is_zero() => {
                Err(ExponentError::DivisionByZero)
            }
            (Exponent::Finite(a), Exponent::Finite(b)) => {
                a.checked_div(b).map(Exponent::Finite).ok_or(ExponentError::Overflow)
            }
            (Exponent::Finite(_), Exponent::Infinite) => Ok(Exponent::int(0)),
            (Exponent::Infinite, Exponent::Finite(b)) if b.is_positive() => Ok(Exponent::Infinite),
            _ => Err(ExponentError::Range("∞/∞ or ∞ divided by a nonpositive value".into())),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
            (Exponent::Finite(_), Exponent::Infinite) => Ordering::Less,
            (Exponent::Infinite, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            Exponent::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Exponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Exponent {
    fn from(v: i64) -> Self {
        Exponent::int(v as i128)
    }
}

/// Accepts `inf`/`∞`, integers, `a/b` and finite decimals such as `2.5`.
impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || ExponentError::Parse(s.to_string());
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => return Ok(Exponent::Infinite),
            _ => {}
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Exponent::ratio(n, d));
        }
        if let Some((int_part, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
                return Err(bad());
            }
            let negative = int_part.starts_with('-');
            let ip: i128 = if int_part.is_empty() || int_part == "-" {
                0
            } else {
                int_part.parse().map_err(|_| bad())?
            };
            let den = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
            let fp: i128 = frac.parse().map_err(|_| bad())?;
            let num = ip
                .abs()
                .checked_mul(den)
                .and_then(|v| v.checked_add(fp))
                .ok_or_else(bad)?;
            let num = if negative { -num } else { num };
            return Ok(Exponent::ratio(num, den));
        }
        let n: i128 = t.parse().map_err(|_| bad())?;
        Ok(Exponent::int(n))
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Exponent::from(i)),
            Raw::Float(x) => format!("{x}").parse().map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn n_minus_one(n: u32) -> Result<Exponent> {
    if n < 2 {
        return Err(ExponentError::Range(format!("dimension n must be at least 2, got {n}")));
    }
    Ok(Exponent::int(n as i128 - 1))
}

fn range(msg: impl Into<String>) -> ExponentError {
    ExponentError::Range(msg.into())
}

/// Regularity exponent of the inverse map, `p′ = p/(p − n + 1)`.
///
/// `p′ = ∞` at `p = n − 1` and `p′ = 1` at `p = ∞`.
pub fn inverse_exponent(p: Exponent, n: u32) -> Result<Exponent> {
    let nm1 = n_minus_one(n)?;
    if p < nm1 {
        return Err(range(format!("p must satisfy p ≥ n−1 = {nm1}, got {p}")));
    }
    match p {
        Exponent::Infinite => Ok(Exponent::int(1)),
        _ if p == nm1 => Ok(Exponent::Infinite),
        _ => p.div(&p.sub(&nm1)?),
    }
}

/// `ϱ` with `1/ϱ = (n−1)/q − (n−1)/p`, for `n−1 ≤ q ≤ p ≤ ∞`; `ϱ = ∞` when `q = p`.
pub fn codistortion_exponent(q: Exponent, p: Exponent, n: u32) -> Result<Exponent> {
    let nm1 = n_minus_one(n)?;
    if q < nm1 {
        return Err(range(format!("q must satisfy q ≥ n−1 = {nm1}, got {q}")));
    }
    if q > p {
        return Err(range(format!("q must not exceed p (q = {q}, p = {p})")));
    }
    if q == p {
        return Ok(Exponent::Infinite);
    }
    let inv = nm1.div(&q)?.sub(&nm1.div(&p)?)?;
    inv.recip()
}

/// `ϰ` with `1/ϰ = 1/q − 1/p`, for `1 ≤ q ≤ p ≤ ∞`; `ϰ = ∞` when `q = p`.
pub fn composition_exponent(q: Exponent, p: Exponent) -> Result<Exponent> {
    let one = Exponent::int(1);
    if q < one {
        return Err(range(format!("q must satisfy q ≥ 1, got {q}")));
    }
    if q > p {
        return Err(range(format!("q must not exceed p (q = {q}, p = {p})")));
    }
    if q == p {
        return Ok(Exponent::Infinite);
    }
    q.recip()?.sub(&p.recip()?)?.recip()
}

/// Integrability exponent of the inverse of a three-dimensional Ball-class
/// minimizer, `σ = q(1+m)/(q+m)`, for `q > 3` and `m > 2q/(q−3)`.
pub fn ball_sigma(q: Exponent, m: Exponent) -> Result<Exponent> {
    let three = Exponent::int(3);
    if q <= three || q.is_infinite() {
        return Err(range(format!("q must satisfy 3 < q < ∞, got {q}")));
    }
    let bound = Exponent::int(2).mul(&q)?.div(&q.sub(&three)?)?;
    if m <= bound || m.is_infinite() {
        return Err(range(format!("m must exceed 2q/(q−3) = {bound}, got {m}")));
    }
    let one = Exponent::int(1);
    let sigma = q.mul(&one.add(&m)?)?.div(&q.add(&m)?)?;
    if sigma <= three {
        return Err(range(format!("σ = {sigma} does not exceed 3")));
    }
    Ok(sigma)
}

/// `s = σr/(rn + σ − n)`, for `σ > n` and `r > 1`; the result exceeds 1.
pub fn ball_s(sigma: Exponent, r: Exponent, n: u32) -> Result<Exponent> {
    n_minus_one(n)?;
    let nn = Exponent::int(n as i128);
    let one = Exponent::int(1);
    if sigma <= nn || sigma.is_infinite() {
        return Err(range(format!("σ must satisfy n < σ < ∞ with n = {n}, got {sigma}")));
    }
    if r <= one || r.is_infinite() {
        return Err(range(format!("r must satisfy 1 < r < ∞, got {r}")));
    }
    let s = sigma.mul(&r)?.div(&r.mul(&nn)?.add(&sigma)?.sub(&nn)?)?;
    if s <= one {
        return Err(range(format!("s = {s} does not exceed 1")));
    }
    Ok(s)
}

/// `r = n(n−1)s/(ns + 1 − s)` for `s ≥ 1`; lands in `[n−1, n]` (`r = n` at `s = ∞`).
pub fn corollary_r(s: Exponent, n: u32) -> Result<Exponent> {
    let nm1 = n_minus_one(n)?;
    let nn = Exponent::int(n as i128);
    let one = Exponent::int(1);
    if s < one {
        return Err(range(format!("s must satisfy s ≥ 1, got {s}")));
    }
    let r = match s {
        Exponent::Infinite => nn,
        _ => {
            let num = nn.mul(&nm1)?.mul(&s)?;
            let den = nn.mul(&s)?.add(&one)?.sub(&s)?;
            num.div(&den)?
        }
    };
    if r < nm1 || r > nn {
        return Err(range(format!("r = {r} left [n−1, n]")));
    }
    Ok(r)
}

/// `ρ = r/((n−1)² − r(n−2))` for `n−1 ≤ r ≤ n`; the result is at least 1.
pub fn remark_rho(r: Exponent, n: u32) -> Result<Exponent> {
    let nm1 = n_minus_one(n)?;
    let nn = Exponent::int(n as i128);
    if r < nm1 || r > nn {
        return Err(range(format!("r must satisfy n−1 ≤ r ≤ n = {n}, got {r}")));
    }
    let nm2 = Exponent::int(n as i128 - 2);
    let den = nm1.mul(&nm1)?.sub(&r.mul(&nm2)?)?;
    let rho = r.div(&den)?;
    if rho < Exponent::int(1) {
        return Err(range(format!("ρ = {rho} is below 1")));
    }
    Ok(rho)
}
