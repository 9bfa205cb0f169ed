//! Arithmetic modes.
//!
//! Hypothesis weights are stored as *masses*: in exact mode every weight is an
//! integer over one shared denominator, so subset sums and comparisons inside
//! the solvers are plain integer operations. Derived quantities (normalized
//! costs, bound values) are [`Value`]s: big rationals in exact mode, `f64` in
//! float mode.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational numbers used for reports and audits.
pub type Rational = BigRational;

/// A normalized quantity: a cost, a probability, a bound.
pub trait Value:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(i: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact for rationals: the binary value of `x` is converted without rounding.
    fn from_f64(x: f64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> Rational;
    fn is_exact() -> bool;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Value for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(i: i64) -> Self {
        Rational::from_integer(BigInt::from(i))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn is_exact() -> bool {
        true
    }
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(i: i64) -> Self {
        i as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(<Rational as Zero>::zero)
    }
    fn is_exact() -> bool {
        false
    }
}

/// Converts a big rational to the nearest-ish `f64`, robust to huge numerators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 60;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
}

/// Additive weight representation used by the solvers.
pub trait Mass:
    Copy
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    type Value: Value;

    fn zero() -> Self;
    fn is_zero(self) -> bool;
    fn times(self, k: usize) -> Self;
    /// `self / den` as a normalized value.
    fn over(self, den: Self) -> Self::Value;
    fn to_f64(self) -> f64;
    /// Builds masses and their common denominator from normalized weights.
    fn from_weights(weights: &[Self::Value]) -> Result<(Vec<Self>, Self), Error>;
}

impl Mass for i128 {
    type Value = Rational;

    fn zero() -> Self {
        0
    }
    fn is_zero(self) -> bool {
        self == 0
    }
    fn times(self, k: usize) -> Self {
        self * k as i128
    }
    fn over(self, den: Self) -> Rational {
        Rational::new(BigInt::from(self), BigInt::from(den))
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_weights(weights: &[Rational]) -> Result<(Vec<i128>, i128), Error> {
        let mut den = BigInt::one();
        for w in weights {
            den = den.lcm(w.denom());
        }
        // Leave headroom so that depth-weighted sums over large instances cannot overflow.
        let limit = BigInt::from(1i128 << 90);
        if den > limit {
            return Err(Error::NotRepresentable(format!(
                "common denominator {den} is too large for exact mode"
            )));
        }
        let mut masses = Vec::with_capacity(weights.len());
        for w in weights {
            let m = w.numer() * (&den / w.denom());
            if m.abs() > limit {
                return Err(Error::NotRepresentable(format!("weight {w} is too large")));
            }
            masses.push(m.to_i128().expect("bounded above"));
        }
        Ok((masses, den.to_i128().expect("bounded above")))
    }
}

impl Mass for f64 {
    type Value = f64;

    fn zero() -> Self {
        0.0
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn times(self, k: usize) -> Self {
        self * k as f64
    }
    fn over(self, den: Self) -> f64 {
        self / den
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_weights(weights: &[f64]) -> Result<(Vec<f64>, f64), Error> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::NotRepresentable(format!("weight {w} is not finite")));
        }
        Ok((weights.to_vec(), 1.0))
    }
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with exponent) exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let all = all / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Renders a value either exactly (`p/q`) or as a decimal.
pub fn render<V: Value>(v: &V, float: bool) -> String {
    if float || !V::is_exact() {
        format!("{}", v.to_f64())
    } else {
        format!("{v}")
    }
}

/// Renders an `f64` bound value for report lines.
pub fn render_f64(x: f64) -> String {
    format!("{x}")
}

/// Whether a rational is negative; kept here so callers need not import num-traits.
pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}
