//! Spectrahedral cones `{x : sum_i x_i C_i >= 0}`, their normalization,
//! the representation distance `mdist`, Hausdorff estimates between cones
//! given by oracles, and the packing-bound calculator.

mod hdist;
mod oracle;

pub use hdist::{
    conetomatrices_check, hdist_estimate, ConeToMatricesReport, DirectionRecord, HausdorffEstimate,
    HdistConfig,
};
pub use oracle::{ConeOracle, Halfspace, HyperbolicCone, Orthant, SpectraCone};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundChain, PackingVerdict};
use crate::error::{Error, Result};
use crate::poly::CoefJson;
use crate::scalar::{rational_to_string, Scalar};
use crate::Rational;

/// Entrywise symmetry tolerance for floating representations.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `n` symmetric `k x k` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectraRep<T: Scalar> {
    n: usize,
    k: usize,
    mats: Vec<DMatrix<T>>,
    normalized: bool,
}

fn is_symmetric<T: Scalar>(m: &DMatrix<T>) -> bool {
    let k = m.nrows();
    let tol = T::from_f64(SYMMETRY_TOL).unwrap();
    (0..k).all(|i| {
        (i + 1..k).all(|j| {
            if T::EXACT {
                m[(i, j)] == m[(j, i)]
            } else {
                (m[(i, j)].clone() - m[(j, i)].clone()).abs() <= tol
            }
        })
    })
}

impl<T: Scalar> SpectraRep<T> {
    pub fn new(mats: Vec<DMatrix<T>>) -> Result<Self> {
        let n = mats.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let k = mats[0].nrows();
        for m in &mats {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::SizeMismatch(format!(
                    "expected {k}x{k}, found {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !is_symmetric(m) {
                return Err(Error::Asymmetric);
            }
        }
        Ok(SpectraRep { n, k, mats, normalized: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mats(&self) -> &[DMatrix<T>] {
        &self.mats
    }

    /// Whether this representation came out of [`normalize`].
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `sum_i x_i C_i`
    pub fn pencil(&self, x: &[T]) -> Result<DMatrix<T>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let mut acc = DMatrix::from_element(self.k, self.k, T::zero());
        for (xi, m) in x.iter().zip(&self.mats) {
            if xi.is_zero() {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(m.iter()) {
                *a = a.clone() + xi.clone() * b.clone();
            }
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> SpectraRep<f64> {
        SpectraRep {
            n: self.n,
            k: self.k,
            mats: self.mats.iter().map(|m| m.map(|v| v.to_f64().unwrap())).collect(),
            normalized: self.normalized,
        }
    }

    /// Checks the normalized invariants: `sum C_i = I` and every `C_i` PSD.
    pub fn check_normalized(&self, tol: f64) -> bool {
        let f = self.to_f64();
        let sum = f.pencil(&vec![1.0; f.n]).unwrap();
        let id_err = (sum - DMatrix::identity(f.k, f.k)).abs().max();
        id_err <= tol && f.mats.iter().all(|m| min_eigenvalue(m) >= -tol)
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().min()
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().amax()
}

/// Exact PSD test by symmetric pivoted elimination over the rationals.
fn psd_exact(m: &DMatrix<Rational>) -> bool {
    let mut a = m.clone();
    loop {
        let k = a.nrows();
        if k == 0 {
            return true;
        }
        if (0..k).any(|i| a[(i, i)].is_negative()) {
            return false;
        }
        let Some(p) = (0..k).find(|&i| a[(i, i)].is_positive()) else {
            // zero diagonal forces a zero matrix
            return a.iter().all(|v| v.is_zero());
        };
        let piv = a[(p, p)].clone();
        let rest: Vec<usize> = (0..k).filter(|&i| i != p).collect();
        let next = DMatrix::from_fn(k - 1, k - 1, |i, j| {
            let (r, c) = (rest[i], rest[j]);
            &a[(r, c)] - &a[(r, p)] * &a[(p, c)] / &piv
        });
        a = next;
    }
}

/// Positive semidefiniteness: `min eig >= -tol` on the floating path, an
/// exact elimination certificate on the rational path (`tol` unused).
pub fn psd_check<T: Scalar>(m: &DMatrix<T>, tol: f64) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::SizeMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    if !is_symmetric(m) {
        return Err(Error::Asymmetric);
    }
    if T::EXACT {
        Ok(psd_exact(&m.map(|v| v.to_rational())))
    } else {
        Ok(min_eigenvalue(&m.map(|v| v.to_f64().unwrap())) >= -tol)
    }
}

/// `x` lies in the spectrahedral cone of `c`.
pub fn spec_cone_contains<T: Scalar>(c: &SpectraRep<T>, x: &[T], tol: f64) -> Result<bool> {
    psd_check(&c.pencil(x)?, tol)
}

/// `max_i ||C_i - C'_i||` in operator norm.
pub fn mdist<T: Scalar>(a: &SpectraRep<T>, b: &SpectraRep<T>) -> Result<f64> {
    if a.n != b.n || a.k != b.k {
        return Err(Error::SizeMismatch(format!(
            "({}, {}) against ({}, {})",
            a.n, a.k, b.n, b.k
        )));
    }
    let (fa, fb) = (a.to_f64(), b.to_f64());
    Ok(fa
        .mats
        .iter()
        .zip(&fb.mats)
        .map(|(x, y)| spectral_norm(&(x - y)))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct NormalizeConfig {
    /// Eigenvalues below `rank_rel * ||.||_F` count as zero.
    pub rank_rel: f64,
    /// Relative slack for the PSD test of the projected matrices.
    pub psd_tol: f64,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig { rank_rel: 1e-10, psd_tol: 1e-10 }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Removes the common kernel `U` of the `C_i`, then conjugates by
/// `M^{-1/2}` where `M = sum_i C'_i`, giving `sum_i C''_i = I`.
///
/// Requires each `C_i` to be PSD on the complement of `U`, which holds
/// exactly when the cone contains the positive orthant.
pub fn normalize<T: Scalar>(c: &SpectraRep<T>, cfg: &NormalizeConfig) -> Result<SpectraRep<f64>> {
    let f = c.to_f64();
    let k = f.k;
    let mut gram = DMatrix::<f64>::zeros(k, k);
    for m in &f.mats {
        gram += m * m;
    }
    let eig = symmetrize(gram.clone()).symmetric_eigen();
    let thr = cfg.rank_rel * gram.norm().max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > thr).collect();
    let basis = DMatrix::from_fn(k, keep.len(), |r, j| eig.eigenvectors[(r, keep[j])]);
    let projected: Vec<DMatrix<f64>> = f
        .mats
        .iter()
        .map(|m| symmetrize(basis.transpose() * m * &basis))
        .collect();
    for (i, m) in projected.iter().enumerate() {
        let scale = m.norm().max(1.0);
        if min_eigenvalue(m) < -cfg.psd_tol * scale {
            return Err(Error::OrthantNotContained(i));
        }
    }
    let kk = keep.len();
    let mut total = DMatrix::<f64>::zeros(kk, kk);
    for m in &projected {
        total += m;
    }
    let me = symmetrize(total.clone()).symmetric_eigen();
    let min_m = if kk == 0 { 0.0 } else { me.eigenvalues.min() };
    if kk == 0 || min_m <= cfg.rank_rel * total.norm() {
        return Err(Error::SingularNormalizer(min_m));
    }
    let inv_sqrt = &me.eigenvectors
        * DMatrix::from_diagonal(&me.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * me.eigenvectors.transpose();
    let mats = projected
        .iter()
        .map(|m| symmetrize(&inv_sqrt * m * &inv_sqrt))
        .collect();
    Ok(SpectraRep { n: f.n, k: kk, mats, normalized: true })
}

/// Checks `||C||_F <= sqrt(k)` for every matrix of a normalized representation.
pub fn frobenius_within_sqrt_k(c: &SpectraRep<f64>, tol: f64) -> bool {
    let bound = (c.k as f64).sqrt();
    c.mats.iter().all(|m| m.norm() <= bound + tol)
}

fn gaussian_matrix(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Random representation whose cone contains the positive orthant: each
/// `C_i = G_i^T G_i` for a Gaussian `G_i` of random rank. With `hidden_kernel`
/// the matrices share a one-dimensional kernel, disguised by a random
/// rotation, so `k + 1` is the reported size.
pub fn random_orthant_rep(rng: &mut impl Rng, n: usize, k: usize, hidden_kernel: bool) -> SpectraRep<f64> {
    let size = if hidden_kernel { k + 1 } else { k };
    let q = gaussian_matrix(rng, size, size).qr().q();
    let mats = (0..n)
        .map(|_| {
            let r = rng.random_range(1..=k);
            let g = gaussian_matrix(rng, r, k);
            let mut c = DMatrix::<f64>::zeros(size, size);
            c.view_mut((0, 0), (k, k)).copy_from(&(g.transpose() * g));
            symmetrize(q.transpose() * c * &q)
        })
        .collect();
    SpectraRep { n, k: size, mats, normalized: false }
}

/// Adds `scale * G_i^T G_i` to each matrix, keeping the orthant inside the cone.
pub fn perturb_psd(c: &SpectraRep<f64>, rng: &mut impl Rng, scale: f64) -> SpectraRep<f64> {
    let mats = c
        .mats
        .iter()
        .map(|m| {
            let g = gaussian_matrix(rng, 1, c.k);
            symmetrize(m + g.transpose() * g * scale)
        })
        .collect();
    SpectraRep { n: c.n, k: c.k, mats, normalized: false }
}

/// The constant chain together with the packing verdict for size `b`.
pub fn packing_bound(
    n: usize,
    d: usize,
    b: usize,
    family_size: usize,
    eps: Option<Rational>,
) -> Result<(BoundChain, PackingVerdict)> {
    if b == 0 {
        return Err(Error::Infeasible("B must be positive".into()));
    }
    let chain = BoundChain::new(n, d, family_size, eps)?;
    let verdict = chain.packing(b);
    Ok((chain, verdict))
}

/// Wire form: `{"n", "k", "mats": [[row-major entries]...], "normalized"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectraJson {
    pub n: usize,
    pub k: usize,
    pub mats: Vec<Vec<CoefJson>>,
    pub normalized: bool,
}

impl<T: Scalar> SpectraRep<T> {
    pub fn to_json(&self) -> SpectraJson {
        let mats = self
            .mats
            .iter()
            .map(|m| {
                let mut out = Vec::with_capacity(self.k * self.k);
                for i in 0..self.k {
                    for j in 0..self.k {
                        let v = &m[(i, j)];
                        out.push(if T::EXACT {
                            CoefJson::Text(rational_to_string(&v.to_rational()))
                        } else {
                            CoefJson::Number(v.to_f64().unwrap())
                        });
                    }
                }
                out
            })
            .collect();
        SpectraJson { n: self.n, k: self.k, mats, normalized: self.normalized }
    }

    pub fn from_json(j: &SpectraJson) -> Result<Self> {
        if j.mats.len() != j.n {
            return Err(Error::Parse(format!("{} matrices for n = {}", j.mats.len(), j.n)));
        }
        let mats = j
            .mats
            .iter()
            .map(|flat| {
                if flat.len() != j.k * j.k {
                    return Err(Error::Parse(format!("matrix with {} entries, expected {}", flat.len(), j.k * j.k)));
                }
                let vals = flat
                    .iter()
                    .map(|c| c.to_rational().map(|q| T::from_rational(&q)))
                    .collect::<Result<Vec<T>>>()?;
                Ok(DMatrix::from_row_slice(j.k, j.k, &vals))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rep = Self::new(mats)?;
        rep.normalized = j.normalized;
        if rep.normalized && !rep.check_normalized(1e-10) {
            return Err(Error::Unnormalized);
        }
        Ok(rep)
    }
}
