use nalgebra::DMatrix;

use crate::spectrahedra::SpectraRep;
use crate::F64Poly;

/// A closed convex cone known through membership and supporting normals.
pub trait ConeOracle: Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &[f64]) -> bool;

    /// A point in the interior.
    fn interior_point(&self) -> Vec<f64>;

    /// A vector `g` with `<g, y> >= 0` for every `y` in the cone and
    /// `<g, x> = 0`, for `x` on the boundary.
    fn supporting_normal(&self, x: &[f64]) -> Vec<f64>;
}

/// The nonnegative orthant.
#[derive(Clone, Debug)]
pub struct Orthant {
    pub n: usize,
}

impl ConeOracle for Orthant {
    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v >= 0.0)
    }

    fn interior_point(&self) -> Vec<f64> {
        vec![1.0; self.n]
    }

    fn supporting_normal(&self, x: &[f64]) -> Vec<f64> {
        let i = x
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut g = vec![0.0; self.n];
        g[i] = 1.0;
        g
    }
}

/// `{x : <a, x> >= 0}`
#[derive(Clone, Debug)]
pub struct Halfspace {
    pub normal: Vec<f64>,
}

impl ConeOracle for Halfspace {
    fn dim(&self) -> usize {
        self.normal.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.normal).map(|(a, b)| a * b).sum::<f64>() >= 0.0
    }

    fn interior_point(&self) -> Vec<f64> {
        self.normal.clone()
    }

    fn supporting_normal(&self, _x: &[f64]) -> Vec<f64> {
        self.normal.clone()
    }
}

/// The cone of a spectrahedral representation.
#[derive(Clone, Debug)]
pub struct SpectraCone {
    pub rep: SpectraRep<f64>,
}

impl SpectraCone {
    pub fn new(rep: SpectraRep<f64>) -> Self {
        SpectraCone { rep }
    }

    fn pencil(&self, x: &[f64]) -> DMatrix<f64> {
        self.rep.pencil(x).expect("dimension checked by caller")
    }
}

impl ConeOracle for SpectraCone {
    fn dim(&self) -> usize {
        self.rep.n()
    }

    fn contains(&self, x: &[f64]) -> bool {
        super::min_eigenvalue(&self.pencil(x)) >= 0.0
    }

    fn interior_point(&self) -> Vec<f64> {
        vec![1.0; self.rep.n()]
    }

    fn supporting_normal(&self, x: &[f64]) -> Vec<f64> {
        // g_i = u^T C_i u for the bottom eigenvector u of the pencil
        let eig = self.pencil(x).symmetric_eigen();
        let imin = eig.eigenvalues.imin();
        let u = eig.eigenvectors.column(imin);
        self.rep
            .mats()
            .iter()
            .map(|c| (u.transpose() * c * u)[(0, 0)])
            .collect()
    }
}

/// Hyperbolicity cone of `p` in direction `e`, evaluated in floating point.
///
/// Membership uses the coefficients of `t -> p(t e + x)`: a real-rooted
/// polynomial with positive leading coefficient has all roots `<= 0`
/// exactly when its coefficients are nonnegative.
#[derive(Clone, Debug)]
pub struct HyperbolicCone {
    pub poly: F64Poly,
    pub e: Vec<f64>,
}

impl HyperbolicCone {
    pub fn new(poly: F64Poly, e: Vec<f64>) -> Self {
        let pe = poly.eval(&e).expect("dimension");
        assert!(pe > 0.0, "p(e) must be positive");
        HyperbolicCone { poly, e }
    }
}

impl ConeOracle for HyperbolicCone {
    fn dim(&self) -> usize {
        self.poly.n()
    }

    fn contains(&self, x: &[f64]) -> bool {
        let r = self.poly.restrict(&self.e, x).expect("dimension");
        r.coeffs().iter().all(|&c| c >= 0.0)
    }

    fn interior_point(&self) -> Vec<f64> {
        self.e.clone()
    }

    fn supporting_normal(&self, x: &[f64]) -> Vec<f64> {
        self.poly.gradient(x).expect("dimension")
    }
}
