use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::Scalar;

/// A set of pairwise vertex-disjoint edges `(i, j)`, `i < j`, on vertices `0..n`.
///
/// Edges are kept sorted so equal matchings compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>, n: usize) -> Result<Self> {
        let mut out = Vec::new();
        let mut seen = vec![false; n];
        for (a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if i == j {
                return Err(Error::MalformedMatching(format!("loop at vertex {i}")));
            }
            if j >= n {
                return Err(Error::MalformedMatching(format!(
                    "edge ({i}, {j}) outside vertex set of size {n}"
                )));
            }
            if seen[i] || seen[j] {
                return Err(Error::MalformedMatching(format!(
                    "edge ({i}, {j}) shares a vertex with another edge"
                )));
            }
            seen[i] = true;
            seen[j] = true;
            out.push((i, j));
        }
        out.sort_unstable();
        Ok(Matching { edges: out })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_vertex(&self) -> Option<usize> {
        self.edges.iter().map(|&(_, j)| j).max()
    }

    pub fn covers(&self, v: usize) -> bool {
        self.edges.iter().any(|&(i, j)| i == v || j == v)
    }

    /// True iff every edge has exactly one endpoint in `set`.
    pub fn fully_crosses(&self, set: &[usize]) -> Result<bool> {
        if set.len() != self.edges.len() {
            return Err(Error::SizeMismatch(format!(
                "set of size {} against a {}-matching",
                set.len(),
                self.edges.len()
            )));
        }
        Ok(self
            .edges
            .iter()
            .all(|&(i, j)| set.contains(&i) != set.contains(&j)))
    }

    /// All `2^d` sets that this matching fully crosses, each sorted.
    pub fn crossed_sets(&self) -> Vec<Vec<usize>> {
        let d = self.edges.len();
        (0..1usize << d)
            .map(|mask| {
                let mut s: Vec<usize> = self
                    .edges
                    .iter()
                    .enumerate()
                    .map(|(k, &(i, j))| if mask >> k & 1 == 1 { j } else { i })
                    .collect();
                s.sort_unstable();
                s
            })
            .collect()
    }
}

/// The degree-`d` elementary symmetric polynomial in `n` variables,
/// generated term by term from the `d`-subsets of `0..n`.
pub fn elementary_symmetric<T: Scalar>(n: usize, d: usize) -> Result<MultiPoly<T>> {
    if d < 1 || d > n {
        return Err(Error::InvalidDegree(format!("need 1 <= d <= n, got n={n}, d={d}")));
    }
    let terms = (0..n).combinations(d).map(|set| {
        let mut exp = vec![0u32; n];
        for i in set {
            exp[i] = 1;
        }
        (exp, T::one())
    });
    MultiPoly::from_terms(n, d as u32, terms)
}

/// `q_M = prod over edges (i, j) of (x_i - x_j)`.
pub fn matching_poly<T: Scalar>(m: &Matching, n: usize) -> Result<MultiPoly<T>> {
    if m.max_vertex().is_some_and(|v| v >= n) {
        return Err(Error::MalformedMatching(format!("matching exceeds n = {n}")));
    }
    let d = m.len();
    // edges are disjoint, so the 2^d sign patterns give distinct monomials
    let terms = (0..1usize << d).map(|mask| {
        let mut exp = vec![0u32; n];
        let mut negative = false;
        for (k, &(i, j)) in m.edges().iter().enumerate() {
            if mask >> k & 1 == 1 {
                exp[j] = 1;
                negative = !negative;
            } else {
                exp[i] = 1;
            }
        }
        let c = if negative { -T::one() } else { T::one() };
        (exp, c)
    });
    MultiPoly::from_terms(n, d as u32, terms)
}

/// Product of the `d` largest entries of `x` in absolute value.
pub fn m_d<T: Scalar>(x: &[T], d: usize) -> Result<T> {
    if d < 1 || d > x.len() {
        return Err(Error::InvalidDegree(format!(
            "need 1 <= d <= n, got n={}, d={d}",
            x.len()
        )));
    }
    let mut abs: Vec<T> = x.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("comparable entries"));
    Ok(abs.into_iter().take(d).fold(T::one(), |acc, v| acc * v))
}

/// Indicator vector of `set` in dimension `n`.
pub fn indicator<T: Scalar>(n: usize, set: &[usize]) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    for &i in set {
        v[i] = T::one();
    }
    v
}

pub fn ones<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

/// `c * 1 + x`
pub fn shifted<T: Scalar>(x: &[T], c: &T) -> Vec<T> {
    x.iter().map(|v| v.clone() + c.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use num_traits::Zero;

    use crate::Rational;

    type Q = Rational;

    #[test]
    fn elementary_symmetric_small_cases() {
        let e1 = elementary_symmetric::<Q>(2, 1).unwrap();
        assert_eq!(e1.term_count(), 2);
        assert_eq!(e1.coeff(&[1, 0]), int(1));
        let e2 = elementary_symmetric::<Q>(3, 2).unwrap();
        assert_eq!(e2.term_count(), 3);
        for exp in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
            assert_eq!(e2.coeff(&exp), int(1));
        }
        assert_eq!(elementary_symmetric::<Q>(6, 3).unwrap().term_count(), 20);
        assert!(elementary_symmetric::<Q>(3, 4).is_err());
        assert!(elementary_symmetric::<Q>(3, 0).is_err());
    }

    #[test]
    fn matching_poly_examples() {
        let m = Matching::new([(0, 1)], 2).unwrap();
        let q = matching_poly::<Q>(&m, 2).unwrap();
        assert_eq!(q.coeff(&[1, 0]), int(1));
        assert_eq!(q.coeff(&[0, 1]), int(-1));

        let m = Matching::new([(0, 1), (2, 3)], 4).unwrap();
        let q = matching_poly::<Q>(&m, 4).unwrap();
        assert_eq!(q.term_count(), 4);
        assert_eq!(q.eval(&indicator(4, &[0, 2])).unwrap(), int(1));
        assert_eq!(q.eval(&indicator(4, &[0, 1])).unwrap(), int(0));
    }

    #[test]
    fn malformed_matchings() {
        assert!(Matching::new([(0, 1), (1, 2)], 3).is_err());
        assert!(Matching::new([(0, 0)], 3).is_err());
        assert!(Matching::new([(0, 5)], 3).is_err());
        let m = Matching::new([(0, 3)], 4).unwrap();
        assert!(matching_poly::<Q>(&m, 3).is_err());
    }

    #[test]
    fn fully_crosses_examples() {
        let m = Matching::new([(0, 1), (2, 3)], 4).unwrap();
        assert!(m.fully_crosses(&[0, 2]).unwrap());
        assert!(!m.fully_crosses(&[0, 1]).unwrap());
        assert!(m.fully_crosses(&[0]).is_err());
        assert_eq!(m.crossed_sets().len(), 4);
        for s in m.crossed_sets() {
            assert!(m.fully_crosses(&s).unwrap());
        }
    }

    #[test]
    fn m_d_examples() {
        assert_eq!(m_d(&[int(1), int(1), int(-2)], 2).unwrap(), int(2));
        assert_eq!(m_d(&[Q::zero(), Q::zero(), Q::zero()], 2).unwrap(), Q::zero());
        assert_eq!(m_d(&[int(-3), int(1), int(2)], 3).unwrap(), int(6));
        assert!(m_d(&[int(1)], 2).is_err());
        assert_eq!(m_d(&[-0.5f64, 2.0, -3.0], 2).unwrap(), 6.0);
        assert_eq!(m_d(&[ratio(-1, 2), ratio(1, 3)], 1).unwrap(), ratio(1, 2));
    }
}
