use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::scalar::Scalar;
use crate::Rational;

pub type Exponent = Vec<u32>;

/// Sparse homogeneous polynomial in `n` variables.
///
/// Every stored term has total degree exactly `degree` and a nonzero
/// coefficient. The zero polynomial keeps its declared degree.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly<T> {
    n: usize,
    degree: u32,
    terms: BTreeMap<Exponent, T>,
}

impl<T: Scalar> MultiPoly<T> {
    pub fn zero(n: usize, degree: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(MultiPoly { n, degree, terms: BTreeMap::new() })
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs.
    ///
    /// Repeated exponents are summed and zero coefficients dropped.
    pub fn from_terms<I>(n: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, T)>,
    {
        let mut p = Self::zero(n, degree)?;
        for (exp, c) in terms {
            if exp.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: exp.len() });
            }
            let total: u32 = exp.iter().sum();
            if total != degree {
                return Err(Error::NotHomogeneous(format!(
                    "term {exp:?} has degree {total}, expected {degree}"
                )));
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exp: Exponent, c: T) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[u32]) -> T {
        self.terms.get(exp).cloned().unwrap_or_else(T::zero)
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    /// Table `pows[i][k] = x_i^k` for `k <= degree`.
    fn power_table(&self, x: &[T]) -> Vec<Vec<T>> {
        x.iter()
            .map(|xi| {
                let mut row = Vec::with_capacity(self.degree as usize + 1);
                row.push(T::one());
                for k in 1..=self.degree as usize {
                    row.push(row[k - 1].clone() * xi.clone());
                }
                row
            })
            .collect()
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        let pows = self.power_table(x);
        Ok(self.terms.iter().fold(T::zero(), |acc, (exp, c)| {
            let mono = exp
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .fold(c.clone(), |m, (i, &e)| m * pows[i][e as usize].clone());
            acc + mono
        }))
    }

    /// Exact partial derivatives evaluated at `x`.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let pows = self.power_table(x);
        let mut grad = vec![T::zero(); self.n];
        for (exp, c) in &self.terms {
            for (i, &ei) in exp.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                let mut m = c.clone() * T::from_u32(ei).unwrap();
                for (j, &ej) in exp.iter().enumerate() {
                    let e = if j == i { ej - 1 } else { ej };
                    if e > 0 {
                        m = m * pows[j][e as usize].clone();
                    }
                }
                grad[i] = grad[i].clone() + m;
            }
        }
        Ok(grad)
    }

    /// Partial derivative with respect to variable `i`, as a polynomial.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: i + 1 });
        }
        let degree = self.degree.saturating_sub(1);
        let terms = self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[i] -= 1;
            (e2, c.clone() * T::from_u32(e[i]).unwrap())
        });
        Self::from_terms(self.n, degree, terms)
    }

    /// The univariate restriction `t -> p(t e + x)`.
    ///
    /// Computed by exact evaluation at the nodes `0, 1, ..., degree` and
    /// Newton interpolation, which avoids expanding the substitution symbolically.
    pub fn restrict(&self, e: &[T], x: &[T]) -> Result<UniPoly<T>> {
        self.check_dim(e)?;
        self.check_dim(x)?;
        let d = self.degree as usize;
        let nodes: Vec<T> = (0..=d).map(|k| T::from_usize(k).unwrap()).collect();
        let mut table: Vec<T> = nodes
            .iter()
            .map(|t| {
                let pt: Vec<T> = e
                    .iter()
                    .zip(x)
                    .map(|(ei, xi)| t.clone() * ei.clone() + xi.clone())
                    .collect();
                self.eval(&pt)
            })
            .collect::<Result<_>>()?;
        // divided differences in place: table[k] = f[t_0..t_k]
        for level in 1..=d {
            for k in (level..=d).rev() {
                let num = table[k].clone() - table[k - 1].clone();
                let den = nodes[k].clone() - nodes[k - level].clone();
                table[k] = num / den;
            }
        }
        let mut acc = UniPoly::constant(table[d].clone());
        for k in (0..d).rev() {
            acc = &(&acc * &UniPoly::linear_root(nodes[k].clone()))
                + &UniPoly::constant(table[k].clone());
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self { n: self.n, degree: self.degree, terms: BTreeMap::new() };
        if !c.is_zero() {
            for (e, a) in &self.terms {
                out.terms.insert(e.clone(), a.clone() * c.clone());
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.n, other.n, "variable count mismatch");
        assert!(
            self.degree == other.degree || self.is_zero() || other.is_zero(),
            "degree mismatch in homogeneous sum"
        );
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::NotHomogeneous(format!(
                "cannot add degree {} and degree {}",
                self.degree, other.degree
            )));
        }
        Ok(self + other)
    }
}

impl MultiPoly<Rational> {
    /// Coefficient-wise conversion to another scalar type.
    pub fn to_scalar<U: Scalar>(&self) -> MultiPoly<U> {
        MultiPoly {
            n: self.n,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), U::from_rational(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
}

impl<T: Scalar> Add for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn add(self, rhs: Self) -> MultiPoly<T> {
        self.check_compatible(rhs);
        let mut out = self.clone();
        if self.is_zero() {
            out.degree = rhs.degree;
        }
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<T: Scalar> Neg for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn neg(self) -> MultiPoly<T> {
        self.scale(&(-T::one()))
    }
}

impl<T: Scalar> Sub for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn sub(self, rhs: Self) -> MultiPoly<T> {
        self + &(-rhs)
    }
}
