//! Scalar abstraction and exact-rational helpers.

use std::fmt::Debug;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Coefficient field for polynomial arithmetic.
///
/// Implemented for `f32`, `f64` and [`Rational`]. Certified operations
/// (root isolation, inequality checks) are only offered for [`Rational`].
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True for exact arithmetic.
    const EXACT: bool;

    /// Lossy conversion used when moving between exact and floating paths.
    fn from_rational(q: &Rational) -> Self;

    /// Exact value as a rational (finite floats are dyadic rationals).
    fn to_rational(&self) -> Rational;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn to_rational(&self) -> Rational {
        rational_from_f64(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q) as f32
    }

    fn to_rational(&self) -> Rational {
        rational_from_f64(*self as f64)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

/// A rational strictly greater than Euler's number.
pub fn e_upper() -> Rational {
    Rational::new(BigInt::from(271_828_183u64), BigInt::from(100_000_000u64))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn pow_int(base: u64, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// Parses `"p/q"`, an integer, or a decimal such as `"-0.25"` / `"1e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn rational_to_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Nearest-ish `f64`; saturates to 0 or ±inf outside the representable range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    let l = log2_abs(q);
    let mag = l.exp2();
    if q.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

fn log2_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Base-2 logarithm of `|q|` (q nonzero), accurate to a few ulps.
pub fn log2_abs(q: &Rational) -> f64 {
    assert!(!q.is_zero(), "log2 of zero");
    log2_bigint(q.numer()) - log2_bigint(q.denom())
}

/// Rational bounds `lo <= sqrt(q) <= hi` with relative gap about 2^-64.
pub fn sqrt_bounds(q: &Rational) -> (Rational, Rational) {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if q.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    // sqrt(p/r) = sqrt(p r) / r
    let p = q.numer();
    let r = q.denom();
    let pr = p * r;
    let bits = pr.bits() as i64;
    let k = ((130 - bits).max(0) / 2 + 1) as usize;
    let scaled = pr << (2 * k);
    let root = scaled.sqrt();
    let exact = &root * &root == scaled;
    let den = r << k;
    let lo = Rational::new(root.clone(), den.clone());
    let hi = if exact {
        lo.clone()
    } else {
        Rational::new(root + 1, den)
    };
    (lo, hi)
}

pub fn sqrt_upper(q: &Rational) -> Rational {
    sqrt_bounds(q).1
}

pub fn sqrt_lower(q: &Rational) -> Rational {
    sqrt_bounds(q).0
}

/// The simplest rational (smallest denominator) in the closed interval `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    if lo.is_positive() {
        simplest_positive(lo, hi)
    } else if hi.is_negative() {
        -simplest_positive(&-hi, &-lo)
    } else {
        Rational::zero()
    }
}

fn simplest_positive(lo: &Rational, hi: &Rational) -> Rational {
    // Continued-fraction descent on 0 < lo <= hi.
    let fl = lo.floor();
    if fl == *lo {
        return lo.clone();
    }
    if &(fl.clone() + Rational::one()) <= hi {
        return fl + Rational::one();
    }
    let a = fl.clone();
    let inner = simplest_positive(&(hi - &a).recip(), &(lo - &a).recip());
    a + inner.recip()
}

/// Integer-valued helpers that stay in `BigInt`.
pub fn bigint_sign(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}
