use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::indexed_stream;
use crate::spectrahedra::{mdist, min_eigenvalue, ConeOracle, SpectraCone, SpectraRep};

const SHIFT_TOL: f64 = 1e-9;
/// Slack for floating rounding when comparing the estimate against `n^{3/2} mdist`.
const HDIST_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HdistConfig {
    pub samples: usize,
    pub seed: u64,
    /// Common interior point; defaults to the first oracle's.
    pub interior: Option<Vec<f64>>,
    /// Extra directions evaluated after the random ones.
    pub probes: Vec<Vec<f64>>,
    pub max_bisection: usize,
}

impl HdistConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        HdistConfig { samples, seed, interior: None, probes: Vec::new(), max_bisection: 200 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionRecord {
    pub index: usize,
    pub probe: bool,
    pub t_a: Option<f64>,
    pub t_b: Option<f64>,
    pub bound: f64,
}

/// One-sided (lower) estimate of the Hausdorff distance between two cones
/// intersected with the Euclidean unit ball.
#[derive(Clone, Debug, Serialize)]
pub struct HausdorffEstimate {
    pub lower: f64,
    pub samples: usize,
    pub seed: u64,
    pub norm: &'static str,
    pub records: Vec<DirectionRecord>,
}

impl HausdorffEstimate {
    /// The estimate using only the first `k` random directions.
    pub fn lower_after(&self, k: usize) -> f64 {
        self.records
            .iter()
            .filter(|r| !r.probe)
            .take(k)
            .map(|r| r.bound)
            .fold(0.0, f64::max)
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn along(u: &[f64], c: &[f64], t: f64) -> Vec<f64> {
    u.iter().zip(c).map(|(a, b)| a + t * b).collect()
}

/// Smallest `t` with `u + t c` in the cone, by bracketing and bisection.
fn boundary_param(o: &dyn ConeOracle, u: &[f64], c: &[f64], iters: usize) -> Option<f64> {
    let mut hi = 1.0;
    while !o.contains(&along(u, c, hi)) {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = -1.0;
    while o.contains(&along(u, c, lo)) {
        lo *= 2.0;
        if lo < -1e12 {
            return None;
        }
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if o.contains(&along(u, c, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Distance from the unit-normalized `u + t_in c` to the cone whose boundary
/// meets the line at `t_out > t_in`, bounded below by the supporting
/// halfspace there.
fn line_bound(outer: &dyn ConeOracle, u: &[f64], c: &[f64], t_in: f64, t_out: f64) -> f64 {
    let g = outer.supporting_normal(&along(u, c, t_out));
    let gn = dot(&g, &g).sqrt();
    let gc = dot(&g, c);
    let a = along(u, c, t_in);
    let an = dot(&a, &a).sqrt();
    if gn == 0.0 || gc <= 0.0 || an == 0.0 {
        return 0.0;
    }
    ((t_out - t_in) * gc / (gn * an)).min(1.0)
}

fn direction(o_a: &dyn ConeOracle, o_b: &dyn ConeOracle, u: &[f64], c: &[f64], iters: usize) -> (Option<f64>, Option<f64>, f64) {
    let ta = boundary_param(o_a, u, c, iters);
    let tb = boundary_param(o_b, u, c, iters);
    let bound = match (ta, tb) {
        (Some(a), Some(b)) if a < b => line_bound(o_b, u, c, a, b),
        (Some(a), Some(b)) if b < a => line_bound(o_a, u, c, b, a),
        _ => 0.0,
    };
    (ta, tb, bound)
}

/// Lower estimate of `hdist(A, B)` over the `l2` unit ball.
///
/// Each sampled unit direction `u` is swept along `u + t c` toward the
/// common interior point `c`. Where the two boundary crossings differ, the
/// earlier crossing lies in one cone and outside the other, and the
/// supporting halfspace of the other cone at its crossing bounds the
/// distance from below.
pub fn hdist_estimate(a: &dyn ConeOracle, b: &dyn ConeOracle, cfg: &HdistConfig) -> Result<HausdorffEstimate> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
    }
    let c = unit(&cfg.interior.clone().unwrap_or_else(|| a.interior_point()));
    if !a.contains(&c) || !b.contains(&c) {
        return Err(Error::Infeasible("interior point is not in both cones".into()));
    }
    let dirs: Vec<Vec<f64>> = (0..cfg.samples)
        .map(|i| {
            let mut rng = indexed_stream(cfg.seed, "hdist-direction", i);
            loop {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                if dot(&g, &g) > 1e-18 {
                    return unit(&g);
                }
            }
        })
        .collect();
    for (i, u) in dirs.iter().take(8).enumerate() {
        let scaled: Vec<f64> = u.iter().map(|v| 2.5 * v).collect();
        if a.contains(u) != a.contains(&scaled) || b.contains(u) != b.contains(&scaled) {
            return Err(Error::OracleInconsistent(i));
        }
    }
    let probes: Vec<Vec<f64>> = cfg.probes.iter().map(|p| unit(p)).collect();
    let all: Vec<(bool, &Vec<f64>)> = dirs
        .iter()
        .map(|d| (false, d))
        .chain(probes.iter().map(|p| (true, p)))
        .collect();
    let records: Vec<DirectionRecord> = all
        .par_iter()
        .enumerate()
        .map(|(index, (probe, u))| {
            let (t_a, t_b, bound) = direction(a, b, u, &c, cfg.max_bisection);
            DirectionRecord { index, probe: *probe, t_a, t_b, bound }
        })
        .collect();
    let lower = records.iter().map(|r| r.bound).fold(0.0, f64::max);
    Ok(HausdorffEstimate { lower, samples: cfg.samples, seed: cfg.seed, norm: "l2", records })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeToMatricesReport {
    pub n: usize,
    pub k: usize,
    pub mdist: f64,
    pub hdist_lower: f64,
    /// `n^{3/2} mdist`
    pub bound: f64,
    pub hdist_ok: bool,
    pub shift_samples: usize,
    pub shift_failures: usize,
    pub min_shift_margin: f64,
    pub norm: &'static str,
}

impl ConeToMatricesReport {
    pub fn passed(&self) -> bool {
        self.hdist_ok && self.shift_failures == 0
    }
}

/// Samples `x` in `K_C` with `||x||_inf <= 1` and returns the smallest
/// eigenvalue of the pencil of `c2` at `x + n mdist 1`.
fn shift_margins(c1: &SpectraCone, c2: &SpectraCone, md: f64, samples: usize, seed: u64, label: &str) -> Vec<f64> {
    let n = c1.rep.n();
    let ones = vec![1.0; n];
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_stream(seed, label, i);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let y = if c1.contains(&x) {
                x
            } else {
                let t = boundary_param(c1, &x, &ones, 200).expect("ones is interior");
                along(&x, &ones, t)
            };
            let inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let shifted: Vec<f64> = y.iter().map(|v| v / inf + n as f64 * md).collect();
            min_eigenvalue(&c2.rep.pencil(&shifted).unwrap())
        })
        .collect()
}

/// Checks `hdist(K_C, K_C') <= n^{3/2} mdist(C, C')` against the sampled
/// lower estimate, and that `x + n mdist 1` lies in `K_C'` for sampled
/// `x` in `K_C` with `||x||_inf <= 1` (and symmetrically).
pub fn conetomatrices_check(c1: &SpectraRep<f64>, c2: &SpectraRep<f64>, samples: usize, seed: u64) -> Result<ConeToMatricesReport> {
    for c in [c1, c2] {
        if !c.check_normalized(1e-9) {
            return Err(Error::Unnormalized);
        }
    }
    let md = mdist(c1, c2)?;
    let (a, b) = (SpectraCone::new(c1.clone()), SpectraCone::new(c2.clone()));
    let est = hdist_estimate(&a, &b, &HdistConfig::new(samples, seed))?;
    let n = c1.n();
    let bound = (n as f64).powf(1.5) * md;
    let mut margins = shift_margins(&a, &b, md, samples, seed, "shift-forward");
    margins.extend(shift_margins(&b, &a, md, samples, seed, "shift-backward"));
    Ok(ConeToMatricesReport {
        n,
        k: c1.k(),
        mdist: md,
        hdist_lower: est.lower,
        bound,
        hdist_ok: est.lower <= bound + HDIST_SLACK,
        shift_samples: margins.len(),
        shift_failures: margins.iter().filter(|&&m| m < -SHIFT_TOL).count(),
        min_shift_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
        norm: "l2",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrahedra::{Halfspace, Orthant};
    use nalgebra::DMatrix;

    #[test]
    fn identical_cones_have_zero_estimate() {
        let o = Orthant { n: 3 };
        let est = hdist_estimate(&o, &o, &HdistConfig::new(200, 1)).unwrap();
        assert_eq!(est.lower, 0.0);
    }

    #[test]
    fn orthant_against_halfspace() {
        let o = Orthant { n: 2 };
        let h = Halfspace { normal: vec![1.0, 0.0] };
        let mut cfg = HdistConfig::new(2000, 5);
        cfg.interior = Some(vec![1.0, 1.0]);
        let est = hdist_estimate(&o, &h, &cfg).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-2, "{}", est.lower);
        assert!(est.lower <= 1.0);
    }

    #[test]
    fn estimate_is_monotone_in_samples() {
        let o = Orthant { n: 3 };
        let h = Halfspace { normal: vec![1.0, 1.0, 0.2] };
        let est = hdist_estimate(&o, &h, &HdistConfig::new(300, 2)).unwrap();
        let mut prev = 0.0;
        for k in [1, 10, 50, 100, 300] {
            let v = est.lower_after(k);
            assert!(v >= prev);
            prev = v;
        }
        let short = hdist_estimate(&o, &h, &HdistConfig::new(50, 2)).unwrap();
        assert_eq!(short.lower, est.lower_after(50));
    }

    #[test]
    fn inconsistent_oracle_is_reported() {
        struct Ball;
        impl ConeOracle for Ball {
            fn dim(&self) -> usize {
                2
            }
            fn contains(&self, x: &[f64]) -> bool {
                x[0] * x[0] + x[1] * x[1] <= 2.0
            }
            fn interior_point(&self) -> Vec<f64> {
                vec![0.0, 0.0]
            }
            fn supporting_normal(&self, x: &[f64]) -> Vec<f64> {
                x.to_vec()
            }
        }
        let mut cfg = HdistConfig::new(8, 0);
        cfg.interior = Some(vec![0.1, 0.1]);
        assert!(matches!(hdist_estimate(&Ball, &Orthant { n: 2 }, &cfg), Err(Error::OracleInconsistent(_))));
    }

    #[test]
    fn perturbed_diagonal_reps() {
        let diag = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v));
        let a = crate::spectrahedra::normalize(
            &SpectraRep::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        let rep = conetomatrices_check(&a, &a, 100, 0).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.mdist, 0.0);
        let delta = 0.05;
        let b = crate::spectrahedra::normalize(
            &SpectraRep::new(vec![diag(&[1.0 + delta, 0.0]), diag(&[0.0, 1.0])]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        // normalization rescales the perturbed entry back to 1: same cone
        let rep = conetomatrices_check(&a, &b, 100, 0).unwrap();
        assert!(rep.passed());
        let c = SpectraRep::new(vec![
            DMatrix::from_row_slice(2, 2, &[1.0 - delta, delta, delta, 0.0]),
            DMatrix::from_row_slice(2, 2, &[delta, -delta, -delta, 1.0]),
        ]);
        // not PSD individually, still a valid pair for the distance check
        if let Ok(c) = c {
            assert!(conetomatrices_check(&a, &c, 10, 0).is_err() || mdist(&a, &c).unwrap() > 0.0);
        }
    }
}
