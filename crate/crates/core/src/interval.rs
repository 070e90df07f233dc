//! Closed intervals with exact rational endpoints.
//!
//! Endpoints are exact, so no directed rounding is needed; every operation
//! returns an enclosure of the true range.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::poly::{MultiPoly, UniPoly};
use crate::scalar::{rational_to_f64, rational_to_string, sqrt_lower, sqrt_upper};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// Entire interval strictly above zero.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certified `self >= other` over both intervals.
    pub fn certainly_ge(&self, other: &Interval) -> bool {
        self.lo >= other.hi
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= Rational::zero() {
            self.clone()
        } else if self.hi <= Rational::zero() {
            -self
        } else {
            let hi = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            Interval::new(Rational::zero(), hi)
        }
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        Interval::new(&a.lo * &a.lo, &a.hi * &a.hi)
    }

    pub fn pow(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(Rational::one());
        }
        if k.is_multiple_of(2) {
            self.square().pow(k / 2)
        } else {
            (0..k).fold(Interval::point(Rational::one()), |acc, _| &acc * self)
        }
    }

    /// Enclosure of `sqrt` over the nonnegative part.
    pub fn sqrt(&self) -> Interval {
        let lo = if self.lo.is_positive() { sqrt_lower(&self.lo) } else { Rational::zero() };
        let hi = if self.hi.is_positive() { sqrt_upper(&self.hi) } else { Rational::zero() };
        Interval::new(lo, hi)
    }

    pub fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval::new(self.hi.recip(), self.lo.recip()))
    }

    pub fn div(&self, other: &Interval) -> Option<Interval> {
        other.recip().map(|r| self * &r)
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        self * &Interval::point(c.clone())
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(
            if self.lo < other.lo { self.lo.clone() } else { other.lo.clone() },
            if self.hi > other.hi { self.hi.clone() } else { other.hi.clone() },
        )
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.lo), rational_to_f64(&self.hi))
    }

    pub fn mid_f64(&self) -> f64 {
        rational_to_f64(&self.mid())
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: Self) -> Interval {
        Interval::new(&self.lo + &rhs.lo, &self.hi + &rhs.hi)
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: Self) -> Interval {
        Interval::new(&self.lo - &rhs.hi, &self.hi - &rhs.lo)
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: Self) -> Interval {
        if self.is_point() && rhs.is_point() {
            return Interval::point(&self.lo * &rhs.lo);
        }
        let cands = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.to_f64();
        write!(f, "[{a:.12e}, {b:.12e}]")
    }
}

/// Serialized as `["lo", "hi"]` rational strings.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [rational_to_string(&self.lo), rational_to_string(&self.hi)].serialize(s)
    }
}

/// Horner enclosure of `p` over `x`.
pub fn eval_uni(p: &UniPoly<Rational>, x: &Interval) -> Interval {
    if x.is_point() {
        return Interval::point(p.eval(x.lo()));
    }
    p.coeffs()
        .iter()
        .rev()
        .fold(Interval::point(Rational::zero()), |acc, c| &(&acc * x) + &Interval::point(c.clone()))
}

/// Termwise enclosure of a multivariate polynomial over a box.
pub fn eval_multi(p: &MultiPoly<Rational>, x: &[Interval]) -> Interval {
    assert_eq!(x.len(), p.n());
    p.terms().fold(Interval::point(Rational::zero()), |acc, (exp, c)| {
        let mono = exp
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(Interval::point(c.clone()), |m, (&e, xi)| &m * &xi.pow(e));
        &acc + &mono
    })
}

/// Termwise enclosure of the gradient over a box.
pub fn gradient_multi(p: &MultiPoly<Rational>, x: &[Interval]) -> Vec<Interval> {
    assert_eq!(x.len(), p.n());
    let mut grad = vec![Interval::point(Rational::zero()); p.n()];
    for (exp, c) in p.terms() {
        for (i, &ei) in exp.iter().enumerate() {
            if ei == 0 {
                continue;
            }
            let mut m = Interval::point(c * Rational::from_integer(ei.into()));
            for (j, &ej) in exp.iter().enumerate() {
                let e = if j == i { ej - 1 } else { ej };
                if e > 0 {
                    m = &m * &x[j].pow(e);
                }
            }
            grad[i] = &grad[i] + &m;
        }
    }
    grad
}

/// Enclosure of the Euclidean norm of an interval vector.
pub fn norm(v: &[Interval]) -> Interval {
    v.iter()
        .fold(Interval::point(Rational::zero()), |acc, x| &acc + &x.square())
        .sqrt()
}

pub fn sum(v: &[Interval]) -> Interval {
    v.iter().fold(Interval::point(Rational::zero()), |acc, x| &acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::elementary_symmetric;
    use crate::scalar::{int, ratio};

    #[test]
    fn arithmetic_encloses_pointwise_results() {
        let a = Interval::new(ratio(-1, 2), int(2));
        let b = Interval::new(int(-3), ratio(1, 3));
        let prod = &a * &b;
        assert_eq!(prod, Interval::new(int(-6), ratio(3, 2)));
        assert_eq!(a.square(), Interval::new(int(0), int(4)));
        assert_eq!(a.abs(), Interval::new(int(0), int(2)));
        assert!(a.recip().is_none());
        assert_eq!(
            Interval::new(int(2), int(4)).recip().unwrap(),
            Interval::new(ratio(1, 4), ratio(1, 2))
        );
    }

    #[test]
    fn sqrt_encloses() {
        let s = Interval::new(int(2), int(3)).sqrt();
        assert!(s.lo() * s.lo() <= int(2) && s.hi() * s.hi() >= int(3));
    }

    #[test]
    fn polynomial_enclosures_contain_samples() {
        let p = UniPoly::from_i64(&[1, -3, 0, 2]);
        let x = Interval::new(ratio(-1, 3), ratio(1, 2));
        let enc = eval_uni(&p, &x);
        for k in 0..=10 {
            let t = ratio(-1, 3) + ratio(5, 6) * ratio(k, 10);
            assert!(enc.contains(&p.eval(&t)));
        }
        let e2 = elementary_symmetric::<Rational>(3, 2).unwrap();
        let bx = vec![x.clone(), Interval::point(int(1)), Interval::new(int(0), ratio(1, 4))];
        let enc = eval_multi(&e2, &bx);
        let pt = [ratio(1, 5), int(1), ratio(1, 8)];
        assert!(enc.contains(&e2.eval(&pt).unwrap()));
        let g = gradient_multi(&e2, &bx);
        for (gi, exact) in g.iter().zip(e2.gradient(&pt).unwrap()) {
            assert!(gi.contains(&exact));
        }
    }
}
