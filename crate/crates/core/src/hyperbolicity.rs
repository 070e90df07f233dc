//! Hyperbolicity cones of `e_d` and its matching perturbations
//! `p_s = e_d - eps * sum_M s_M q_M`: membership, boundary points, the
//! restriction embedding, sampled hyperbolicity checks, the `e_d / m_d`
//! inequality, and certified Hausdorff lower bounds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::{hdist_floor, restriction_delta, separation_budget};
use crate::error::{Error, Result};
use crate::interval::{gradient_multi, norm, sum, Interval};
use crate::matching::MatchingFamily;
use crate::poly::{elementary_symmetric, indicator, m_d, matching_poly, ones, MultiPoly, UniPoly};
use crate::real_roots::{
    gap_to_boundary, is_real_rooted, lambda_max, real_roots, roots_above, Tolerance,
};
use crate::rng::{indexed_stream, StreamRng};
use crate::scalar::{binomial, log2_abs, pow_int, rational_to_f64, rational_to_string, simplest_between};
use crate::{QPoly, Rational};

pub use crate::bounds::perturbation_budget;

fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(q))
}

fn ser_opt_rational<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&rational_to_string(q)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

fn real_rooted_restriction(p: &QPoly, e: &[Rational], x: &[Rational]) -> Result<UniPoly<Rational>> {
    if p.eval(e)?.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let r = p.restrict(e, x)?;
    if !is_real_rooted(&r)? {
        return Err(Error::NotRealRooted);
    }
    Ok(r)
}

/// Classifies `x` against the hyperbolicity cone of `p` in direction `e`
/// by the sign of the largest root of `t -> p(t e + x)`.
pub fn cone_contains(p: &QPoly, e: &[Rational], x: &[Rational]) -> Result<Membership> {
    let r = real_rooted_restriction(p, e, x)?;
    Ok(if roots_above(&r, &Rational::zero())? > 0 {
        Membership::Outside
    } else if r.eval(&Rational::zero()).is_zero() {
        Membership::Boundary
    } else {
        Membership::Interior
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPoint {
    pub lambda: Interval,
    /// Enclosure of `lambda e + x`.
    pub z: Vec<Interval>,
    /// `lambda e + x` when `lambda` is known exactly.
    #[serde(skip)]
    pub exact: Option<Vec<Rational>>,
}

/// The point `lambda_max e + x` where the line through `x` along `e` meets
/// the cone boundary.
pub fn cone_boundary_along(
    p: &QPoly,
    e: &[Rational],
    x: &[Rational],
    tol: &Tolerance,
) -> Result<BoundaryPoint> {
    let r = real_rooted_restriction(p, e, x)?;
    let lambda = lambda_max(&r, tol)?;
    let z = e
        .iter()
        .zip(x)
        .map(|(ei, xi)| &lambda.scale(ei) + &Interval::point(xi.clone()))
        .collect();
    let exact = lambda
        .is_point()
        .then(|| e.iter().zip(x).map(|(ei, xi)| lambda.lo() * ei + xi).collect());
    Ok(BoundaryPoint { lambda, z, exact })
}

/// `Lambda(p)_S = lambda_max(p(t 1 + 1_S))` over the good sets of `fam`.
pub fn restriction_embedding(p: &QPoly, fam: &MatchingFamily, tol: &Tolerance) -> Result<Vec<Interval>> {
    let e = ones::<Rational>(fam.n);
    fam.good_sets
        .par_iter()
        .map(|s| {
            let r = real_rooted_restriction(p, &e, &indicator(fam.n, s))?;
            lambda_max(&r, tol)
        })
        .collect()
}

/// `p_s = e_d - eps * sum_M s_M q_M` over a shared matching family.
#[derive(Clone, Debug)]
pub struct PerturbedPoly {
    family: Arc<MatchingFamily>,
    s: Vec<bool>,
    eps: Rational,
    perturbation: QPoly,
    poly: QPoly,
}

impl PerturbedPoly {
    pub fn new(family: Arc<MatchingFamily>, s: Vec<bool>, eps: Rational) -> Result<Self> {
        if s.len() != family.len() {
            return Err(Error::SizeMismatch(format!(
                "{} sign bits for {} matchings",
                s.len(),
                family.len()
            )));
        }
        if eps.is_negative() {
            return Err(Error::Infeasible("eps must be nonnegative".into()));
        }
        let (n, d) = (family.n, family.d);
        let mut perturbation = MultiPoly::zero(n, d as u32)?;
        for (m, &bit) in family.matchings.iter().zip(&s) {
            if bit {
                perturbation = &perturbation + &matching_poly(m, n)?;
            }
        }
        let poly = &elementary_symmetric(n, d)? - &perturbation.scale(&eps);
        Ok(PerturbedPoly { family, s, eps, perturbation, poly })
    }

    /// Uniformly random sign vector.
    pub fn random(family: Arc<MatchingFamily>, eps: Rational, rng: &mut impl Rng) -> Result<Self> {
        let s = (0..family.len()).map(|_| rng.random::<bool>()).collect();
        Self::new(family, s, eps)
    }

    pub fn family(&self) -> &Arc<MatchingFamily> {
        &self.family
    }

    pub fn s(&self) -> &[bool] {
        &self.s
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    /// `sum_M s_M q_M`
    pub fn perturbation(&self) -> &QPoly {
        &self.perturbation
    }

    pub fn n(&self) -> usize {
        self.family.n
    }

    pub fn d(&self) -> usize {
        self.family.d
    }

    /// Coefficient l1 norm of `e_d - p_s`.
    pub fn perturbation_l1(&self) -> Rational {
        let l1 = self
            .perturbation
            .terms()
            .fold(Rational::zero(), |acc, (_, c)| acc + c.abs());
        l1 * &self.eps
    }

    /// `||e_d - p_s||_1 <= R`, the hypothesis of the effective Nuij bound.
    pub fn certified_hyperbolic(&self) -> bool {
        let r = perturbation_budget(self.n(), self.d()).expect("valid family");
        self.perturbation_l1() <= r
    }

    pub fn coefficients_nonnegative(&self) -> bool {
        self.poly.terms().all(|(_, c)| !c.is_negative())
    }

    /// Largest `eps` keeping every coefficient of `p_s` nonnegative, or
    /// `None` when no coefficient decreases with `eps`.
    pub fn max_eps_nonnegative(&self) -> Option<Rational> {
        // coefficient of x_S in p_s is 1 - eps * a_S
        self.perturbation
            .terms()
            .filter(|(_, a)| a.is_positive())
            .map(|(_, a)| a.recip())
            .min()
    }

    fn compatible(&self, other: &PerturbedPoly) -> bool {
        (Arc::ptr_eq(&self.family, &other.family) || self.family == other.family)
            && self.eps == other.eps
    }
}

/// `||Lambda(a) - Lambda(b)||_inf` as an interval, together with the set
/// where the maximum lower endpoint is attained.
pub fn embedding_gap(a: &PerturbedPoly, b: &PerturbedPoly, tol: &Tolerance) -> Result<(Interval, Vec<usize>)> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePerturbations);
    }
    let fam = a.family();
    if a.s == b.s || fam.good_sets.is_empty() {
        return Ok((Interval::point(Rational::zero()), Vec::new()));
    }
    let la = restriction_embedding(a.poly(), fam, tol)?;
    let lb = restriction_embedding(b.poly(), fam, tol)?;
    let mut best: Option<(Interval, usize)> = None;
    let mut hi = Rational::zero();
    for (i, (x, y)) in la.iter().zip(&lb).enumerate() {
        let diff = (x - y).abs();
        if diff.hi() > &hi {
            hi = diff.hi().clone();
        }
        if best.as_ref().is_none_or(|(b, _)| diff.lo() > b.lo()) {
            best = Some((diff, i));
        }
    }
    let (b, idx) = best.unwrap();
    Ok((Interval::new(b.lo().clone(), hi), fam.good_sets[idx].clone()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub gap: Interval,
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
    pub delta_log2: f64,
    /// Certified `gap >= Delta` over the whole enclosure.
    pub ok: bool,
    pub witness_set: Vec<usize>,
    /// `eps < R / N`
    pub eps_within_budget: bool,
}

/// Checks `||Lambda(p_s) - Lambda(p_s')||_inf >= eps / (C(n,d) d e)`.
pub fn embedding_separation(a: &PerturbedPoly, b: &PerturbedPoly, tol: &Tolerance) -> Result<SeparationReport> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePerturbations);
    }
    if a.s == b.s {
        return Err(Error::IdenticalPerturbations);
    }
    let (n, d, nf) = (a.n(), a.d(), a.family().len());
    let (gap, witness_set) = embedding_gap(a, b, tol)?;
    let delta = restriction_delta(n, d, a.eps());
    let r = perturbation_budget(n, d)?;
    Ok(SeparationReport {
        ok: gap.lo() >= &delta,
        delta_log2: log2_abs(&delta),
        delta,
        gap,
        witness_set,
        eps_within_budget: a.eps() * Rational::from_integer(nf.into()) < r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Axis,
    Indicator,
    Sphere,
    Recentred,
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerance,
    /// Sphere samples are rounded to multiples of `2^-bits`.
    pub bits: u32,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SamplerConfig { samples, seed, tol: Tolerance::with_bits(40), bits: 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleFailure {
    pub index: usize,
    pub kind: SampleKind,
    pub x: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicityReport {
    pub samples: usize,
    pub real_rooted: usize,
    pub failures: Vec<SampleFailure>,
    pub by_kind: BTreeMap<SampleKind, usize>,
    /// Smallest `min |r(c)|` over critical points `c` of the sampled restrictions.
    pub min_gap: Option<Interval>,
    pub certified_budget: bool,
}

impl HyperbolicityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Unit Gaussian direction rounded to the dyadic grid `2^-bits`.
pub fn random_sphere_point(rng: &mut StreamRng, n: usize, bits: u32) -> Vec<Rational> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        let scale = (1u64 << bits) as f64;
        let den = BigInt::one() << bits;
        let x: Vec<Rational> = g
            .iter()
            .map(|v| Rational::new(BigInt::from((v / norm * scale).round() as i64), den.clone()))
            .collect();
        if x.iter().any(|v| !v.is_zero()) {
            return x;
        }
    }
}

fn sample_point(p: &QPoly, kind: SampleKind, index: usize, structured: &[Vec<Rational>], cfg: &SamplerConfig) -> Vec<Rational> {
    let n = p.n();
    if matches!(kind, SampleKind::Axis | SampleKind::Indicator) {
        return structured[index].clone();
    }
    let mut rng = indexed_stream(cfg.seed, "nuij-sample", index);
    let x = random_sphere_point(&mut rng, n, cfg.bits);
    if kind == SampleKind::Sphere {
        return x;
    }
    // shift along 1 so that a critical point of the restriction sits at t = 0
    let e = ones::<Rational>(n);
    let Ok(r) = p.restrict(&e, &x) else { return x };
    let dr = r.derivative();
    if dr.degree() == 0 || dr.is_zero() {
        return x;
    }
    let Ok(crit) = real_roots(&dr, &Tolerance::with_bits(30)) else { return x };
    if crit.is_empty() {
        return x;
    }
    let pick = &crit.roots[rng.random_range(0..crit.len())].interval;
    let t0 = simplest_between(pick.lo(), pick.hi());
    x.iter().map(|v| v + &t0).collect()
}

/// Samples restrictions `t -> p_s(t 1 + x)` and certifies each is real-rooted.
///
/// The sample list starts with the coordinate axes and the indicator
/// vectors of `d`-sets, then alternates rationalized sphere points and
/// sphere points recentred at a critical point of their restriction.
pub fn verify_hyperbolic_sampled(ps: &PerturbedPoly, cfg: &SamplerConfig) -> HyperbolicityReport {
    let (n, d) = (ps.n(), ps.d());
    let p = ps.poly();
    let mut structured: Vec<Vec<Rational>> = (0..n).map(|i| indicator(n, &[i])).collect();
    let mut kinds: Vec<SampleKind> = vec![SampleKind::Axis; n];
    let all_sets = binomial(n as u64, d as u64) <= BigInt::from(cfg.samples / 2);
    let sets: Vec<Vec<usize>> = if all_sets {
        itertools::Itertools::combinations(0..n, d).collect()
    } else {
        ps.family().good_sets.clone()
    };
    for s in sets {
        structured.push(indicator(n, &s));
        kinds.push(SampleKind::Indicator);
    }
    structured.truncate(cfg.samples);
    kinds.truncate(cfg.samples);
    let mut k = 0;
    while kinds.len() < cfg.samples {
        kinds.push(if k % 2 == 0 { SampleKind::Sphere } else { SampleKind::Recentred });
        k += 1;
    }

    let e = ones::<Rational>(n);
    let results: Vec<(SampleKind, Option<SampleFailure>, Option<Interval>)> = kinds
        .par_iter()
        .enumerate()
        .map(|(i, &kind)| {
            let x = sample_point(p, kind, i, &structured, cfg);
            let r = p.restrict(&e, &x).expect("dimensions agree");
            let real = !r.is_zero() && is_real_rooted(&r).unwrap_or(false);
            if !real {
                let fail = SampleFailure { index: i, kind, x: x.iter().map(rational_to_string).collect() };
                return (kind, Some(fail), None);
            }
            let gap = (r.degree() >= 2).then(|| gap_to_boundary(&r, &cfg.tol).ok()).flatten();
            (kind, None, gap)
        })
        .collect();

    let mut by_kind = BTreeMap::new();
    let mut failures = Vec::new();
    let mut min_gap: Option<Interval> = None;
    for (kind, fail, gap) in results {
        *by_kind.entry(kind).or_insert(0) += 1;
        if let Some(f) = fail {
            failures.push(f);
        }
        if let Some(g) = gap {
            if min_gap.as_ref().is_none_or(|m| g.lo() < m.lo()) {
                min_gap = Some(g);
            }
        }
    }
    HyperbolicityReport {
        samples: cfg.samples,
        real_rooted: cfg.samples - failures.len(),
        failures,
        by_kind,
        min_gap,
        certified_budget: ps.certified_hyperbolic(),
    }
}

/// `C(n,d) / (2 n^{d+1})^{n-d}`
pub fn edmd_bound(n: usize, d: usize) -> Rational {
    let base = BigInt::from(2u32) * pow_int(n as u64, (d + 1) as u64);
    Rational::new(binomial(n as u64, d as u64), num_traits::pow(base, n - d))
}

#[derive(Clone, Debug, Serialize)]
pub struct EdmdReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub feasible: usize,
    pub skipped_no_solution: usize,
    pub skipped_zero_md: usize,
    #[serde(serialize_with = "ser_opt_rational")]
    pub min_ratio: Option<Rational>,
    pub min_ratio_f64: Option<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub violations: usize,
    pub argmin: Option<Vec<String>>,
}

impl EdmdReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.feasible > 0
    }
}

enum EdmdSample {
    NoSolution,
    ZeroMd,
    Ratio(Rational, Vec<Rational>),
}

fn edmd_point(x: Vec<Rational>, d: usize) -> Result<EdmdSample> {
    let n = x.len();
    let md = m_d(&x, d)?;
    if md.is_zero() {
        return Ok(EdmdSample::ZeroMd);
    }
    let ed = elementary_symmetric::<Rational>(n, d)?.eval(&x)?;
    Ok(EdmdSample::Ratio(ed.abs() / md, x))
}

fn random_coordinate(rng: &mut StreamRng) -> Rational {
    // mixes small integers, fractions and occasional large magnitudes
    let num: i64 = rng.random_range(-64..=64);
    let den: i64 = [1, 2, 3, 4, 7, 8, 16][rng.random_range(0..7)];
    let scale: i64 = if rng.random_bool(0.1) { 1000 } else { 1 };
    Rational::new(BigInt::from(num * scale), BigInt::from(den))
}

/// Samples rational points on `e_{d-1}(x) = 0` and checks
/// `|e_d(x)| >= C(n,d) / (2 n^{d+1})^{n-d} * m_d(x)` exactly.
///
/// Each sample fixes `x_1..x_{n-1}` at random and solves for `x_n`, which
/// enters `e_{d-1}` linearly. `inject` adds caller-supplied points.
pub fn edmd_oracle(n: usize, d: usize, trials: usize, seed: u64, inject: &[Vec<Rational>]) -> Result<EdmdReport> {
    if d < 2 || d > n {
        return Err(Error::InvalidDegree(format!("need 1 <= d-1 < n, got n={n}, d={d}")));
    }
    for x in inject {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
    }
    let lower = elementary_symmetric::<Rational>(n, d - 1)?;
    let mut last_axis = vec![Rational::zero(); n];
    last_axis[n - 1] = Rational::one();
    let samples: Vec<Result<EdmdSample>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_stream(seed, "edmd", i);
            let mut x: Vec<Rational> = (0..n - 1).map(|_| random_coordinate(&mut rng)).collect();
            x.push(Rational::zero());
            let line = lower.restrict(&last_axis, &x)?;
            if line.degree() != 1 {
                return Ok(EdmdSample::NoSolution);
            }
            x[n - 1] = -line.coeff(0) / line.coeff(1);
            edmd_point(x, d)
        })
        .chain(inject.par_iter().map(|x| edmd_point(x.clone(), d)))
        .collect();

    let bound = edmd_bound(n, d);
    let mut report = EdmdReport {
        n,
        d,
        trials: trials + inject.len(),
        feasible: 0,
        skipped_no_solution: 0,
        skipped_zero_md: 0,
        min_ratio: None,
        min_ratio_f64: None,
        bound: bound.clone(),
        violations: 0,
        argmin: None,
    };
    for s in samples {
        match s? {
            EdmdSample::NoSolution => report.skipped_no_solution += 1,
            EdmdSample::ZeroMd => report.skipped_zero_md += 1,
            EdmdSample::Ratio(r, x) => {
                report.feasible += 1;
                if r < bound {
                    report.violations += 1;
                }
                if report.min_ratio.as_ref().is_none_or(|m| &r < m) {
                    report.argmin = Some(x.iter().map(rational_to_string).collect());
                    report.min_ratio = Some(r);
                }
            }
        }
    }
    if report.feasible == 0 {
        return Err(Error::NoFeasibleSamples);
    }
    report.min_ratio_f64 = report.min_ratio.as_ref().map(rational_to_f64);
    Ok(report)
}

/// Certified lower bound on `hdist(K_{p_s}, K_{p_s'})` from a tangent plane.
#[derive(Clone, Debug, Serialize)]
pub struct HdistCertificate {
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub bound_f64: f64,
    pub bound_log2: Option<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub floor: Rational,
    pub floor_log2: f64,
    pub meets_floor: bool,
    pub witness_set: Vec<usize>,
    pub witness_matching: Option<usize>,
    /// Shift between the two boundary crossings on the witness line.
    pub delta_obs: Option<Interval>,
    /// True when the boundary point lies on the cone of the first argument.
    pub inner_is_first: bool,
    /// Unit-normalized witness point `z / ||z||`, as floats.
    pub probe: Vec<f64>,
}

struct Candidate {
    bound: Rational,
    set: Vec<usize>,
    matching: usize,
    delta: Interval,
    inner_is_first: bool,
    probe: Vec<f64>,
}

fn certify_line(a: &PerturbedPoly, b: &PerturbedPoly, set: &[usize], matching: usize, tol: &Tolerance) -> Result<Option<Candidate>> {
    let n = a.n();
    let e = ones::<Rational>(n);
    let x = indicator::<Rational>(n, set);
    let la = lambda_max(&real_rooted_restriction(a.poly(), &e, &x)?, tol)?;
    let lb = lambda_max(&real_rooted_restriction(b.poly(), &e, &x)?, tol)?;
    // the cone whose boundary crossing comes first along t is the larger one
    // on this line; its crossing point lies outside the other cone
    let (inner_is_first, li, lo_, outer) = if la.hi() < lb.lo() {
        (true, &la, &lb, b)
    } else if lb.hi() < la.lo() {
        (false, &lb, &la, a)
    } else {
        return Ok(None);
    };
    let delta = lo_ - li;
    let point = |lam: &Interval| -> Vec<Interval> {
        x.iter().map(|xi| lam + &Interval::point(xi.clone())).collect()
    };
    let z = point(li);
    let z_out = point(lo_);
    let v = gradient_multi(outer.poly(), &z_out);
    let dot = sum(&v);
    let (nv, nz) = (norm(&v), norm(&z));
    if !dot.is_positive() || !nv.is_positive() || !nz.is_positive() {
        return Ok(None);
    }
    let bound = delta.lo() * dot.lo() / (nv.hi() * nz.hi());
    let zf: Vec<f64> = z.iter().map(|c| c.mid_f64()).collect();
    let zn = zf.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(Some(Candidate {
        bound,
        set: set.to_vec(),
        matching,
        delta,
        inner_is_first,
        probe: zf.iter().map(|v| v / zn).collect(),
    }))
}

/// Tangent-plane lower bound on the Hausdorff distance between the cones
/// of two perturbations, maximized over the good sets crossed by a
/// matching where `s` and `s'` differ, together with the closed-form floor
/// `Delta / (18 n^{d(n-d)} N n)`.
pub fn hdist_lower_bound_cert(a: &PerturbedPoly, b: &PerturbedPoly, tol: &Tolerance) -> Result<HdistCertificate> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePerturbations);
    }
    let fam = a.family();
    let (n, d, nf) = (a.n(), a.d(), fam.len());
    let r2 = separation_budget(n, d, nf);
    if a.eps() >= &r2 {
        return Err(Error::BudgetViolation(format!(
            "eps = {} is not below R_2 = {}",
            rational_to_f64(a.eps()),
            rational_to_f64(&r2)
        )));
    }
    let floor = hdist_floor(n, d, nf, &restriction_delta(n, d, a.eps()));
    let floor_log2 = log2_abs(&floor);
    let empty = |meets| HdistCertificate {
        bound: Rational::zero(),
        bound_f64: 0.0,
        bound_log2: None,
        floor: floor.clone(),
        floor_log2,
        meets_floor: meets,
        witness_set: Vec::new(),
        witness_matching: None,
        delta_obs: None,
        inner_is_first: true,
        probe: Vec::new(),
    };
    if a.s() == b.s() {
        return Ok(empty(false));
    }
    let jobs: Vec<(usize, Vec<usize>)> = (0..nf)
        .filter(|&i| a.s()[i] != b.s()[i])
        .flat_map(|i| fam.sets_of(i).into_iter().map(move |s| (i, s.clone())))
        .collect();
    if jobs.is_empty() {
        return Err(Error::NoWitness);
    }
    let cands: Vec<Option<Candidate>> = jobs
        .par_iter()
        .map(|(i, s)| certify_line(a, b, s, *i, tol))
        .collect::<Result<_>>()?;
    let best = cands
        .into_iter()
        .flatten()
        .max_by(|x, y| x.bound.cmp(&y.bound));
    let Some(c) = best else {
        return Ok(empty(false));
    };
    Ok(HdistCertificate {
        bound_f64: rational_to_f64(&c.bound),
        bound_log2: c.bound.is_positive().then(|| log2_abs(&c.bound)),
        meets_floor: c.bound >= floor,
        bound: c.bound,
        floor,
        floor_log2,
        witness_set: c.set,
        witness_matching: Some(c.matching),
        delta_obs: Some(c.delta),
        inner_is_first: c.inner_is_first,
        probe: c.probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Matching;
    use crate::scalar::{int, ratio};

    fn e2(n: usize) -> QPoly {
        elementary_symmetric(n, 2).unwrap()
    }

    fn single_family() -> Arc<MatchingFamily> {
        Arc::new(MatchingFamily {
            n: 4,
            d: 2,
            seed: 0,
            matchings: vec![Matching::new([(0, 1), (2, 3)], 4).unwrap()],
            good_sets: vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]],
        })
    }

    #[test]
    fn membership_examples() {
        let p = e2(3);
        let e = ones::<Rational>(3);
        assert_eq!(cone_contains(&p, &e, &e).unwrap(), Membership::Interior);
        assert_eq!(cone_contains(&p, &e, &indicator(3, &[0])).unwrap(), Membership::Boundary);
        assert_eq!(
            cone_contains(&p, &e, &[int(-1), int(0), int(0)]).unwrap(),
            Membership::Outside
        );
        let zero = indicator(3, &[0]);
        assert_eq!(cone_contains(&p, &zero, &e).unwrap_err(), Error::DegenerateDirection);
    }

    #[test]
    fn boundary_points() {
        let p = e2(3);
        let e = ones::<Rational>(3);
        let b = cone_boundary_along(&p, &e, &indicator(3, &[0, 1]), &Tolerance::default()).unwrap();
        assert_eq!(b.exact.unwrap(), vec![ratio(2, 3), ratio(2, 3), ratio(-1, 3)]);
        let x = indicator(3, &[0]);
        let b = cone_boundary_along(&p, &e, &x, &Tolerance::default()).unwrap();
        assert_eq!(b.exact.unwrap(), x);
    }

    #[test]
    fn perturbed_boundary_shift() {
        let fam = single_family();
        let ps = PerturbedPoly::new(fam, vec![true], ratio(1, 100)).unwrap();
        let e = ones::<Rational>(4);
        let tol = Tolerance::default();
        let b = cone_boundary_along(ps.poly(), &e, &indicator(4, &[0, 2]), &tol).unwrap();
        assert!((b.lambda.mid_f64() + 0.208452).abs() < 1e-5);
        let b = cone_boundary_along(&elementary_symmetric(4, 2).unwrap(), &e, &indicator(4, &[0, 2]), &tol).unwrap();
        assert!((b.lambda.mid_f64() + 0.211325).abs() < 1e-6);
    }

    #[test]
    fn embedding_of_e2_is_constant() {
        let fam = crate::matching::sample_family(6, 2, 1).unwrap();
        let lam = restriction_embedding(&e2(6), &fam, &Tolerance::default()).unwrap();
        for l in &lam {
            assert_eq!(l, &lam[0]);
        }
    }

    #[test]
    fn separation_example() {
        let fam = single_family();
        let a = PerturbedPoly::new(fam.clone(), vec![false], ratio(1, 100)).unwrap();
        let b = PerturbedPoly::new(fam, vec![true], ratio(1, 100)).unwrap();
        let rep = embedding_separation(&a, &b, &Tolerance::default()).unwrap();
        // S = {0, 2} has q_M(1_S) = 1, the sets with q_M(1_S) = -1 move further
        let e = ones::<Rational>(4);
        let x = indicator(4, &[0, 2]);
        let tol = Tolerance::default();
        let shift = &lambda_max(&b.poly().restrict(&e, &x).unwrap(), &tol).unwrap()
            - &lambda_max(&a.poly().restrict(&e, &x).unwrap(), &tol).unwrap();
        assert!((shift.mid_f64() - 0.002870).abs() < 1e-5, "{shift}");
        assert!((rep.gap.mid_f64() - 0.002901).abs() < 1e-5, "{}", rep.gap);
        assert!((rational_to_f64(&rep.delta) - 3.066e-4).abs() < 1e-6);
        assert!(rep.ok);
        assert!(!rep.eps_within_budget);
        assert_eq!(embedding_gap(&a, &a, &Tolerance::default()).unwrap().0, Interval::point(int(0)));
        assert_eq!(embedding_separation(&a, &a, &Tolerance::default()).unwrap_err(), Error::IdenticalPerturbations);
    }

    #[test]
    fn budget_and_coefficients() {
        let fam = single_family();
        let r = perturbation_budget(4, 2).unwrap();
        let ps = PerturbedPoly::new(fam.clone(), vec![true], r.clone() / int(4)).unwrap();
        assert!(ps.certified_hyperbolic());
        assert!(ps.coefficients_nonnegative());
        assert_eq!(ps.max_eps_nonnegative(), Some(int(1)));
        let ps = PerturbedPoly::new(fam, vec![true], r).unwrap();
        // ||q_M||_1 = 4
        assert!(!ps.certified_hyperbolic());
    }

    #[test]
    fn sampled_hyperbolicity_passes_and_fails() {
        let fam = single_family();
        let ok = PerturbedPoly::new(fam.clone(), vec![true], Rational::zero()).unwrap();
        let rep = verify_hyperbolic_sampled(&ok, &SamplerConfig::new(200, 3));
        assert!(rep.passed());
        assert!(rep.min_gap.is_some());
        let big = perturbation_budget(4, 2).unwrap() * int(1_000_000);
        let bad = PerturbedPoly::new(fam, vec![true], big).unwrap();
        let rep = verify_hyperbolic_sampled(&bad, &SamplerConfig::new(200, 3));
        assert!(!rep.passed());
        assert!(rep.failures.iter().any(|f| f.kind == SampleKind::Indicator));
    }

    #[test]
    fn edmd_examples() {
        assert_eq!(edmd_bound(3, 2), ratio(1, 18));
        let rep = edmd_oracle(3, 2, 0, 0, &[vec![int(1), int(1), int(-2)]]).unwrap();
        assert_eq!(rep.min_ratio, Some(ratio(3, 2)));
        assert!(rep.passed());
        let rep = edmd_oracle(3, 2, 0, 0, &[vec![int(0); 3], vec![int(1), int(1), int(-2)]]).unwrap();
        assert_eq!(rep.skipped_zero_md, 1);
        let rep = edmd_oracle(5, 3, 200, 9, &[]).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(edmd_oracle(3, 1, 10, 0, &[]).is_err());
    }

    #[test]
    fn certificate_on_single_matching_family() {
        let fam = single_family();
        let eps = crate::bounds::default_eps(4, 2, 1).unwrap();
        let a = PerturbedPoly::new(fam.clone(), vec![false], eps.clone()).unwrap();
        let b = PerturbedPoly::new(fam, vec![true], eps).unwrap();
        let tol = Tolerance::with_bits(96);
        let cert = hdist_lower_bound_cert(&a, &b, &tol).unwrap();
        assert!(cert.bound.is_positive());
        assert!(cert.meets_floor);
        let same = hdist_lower_bound_cert(&a, &a, &tol).unwrap();
        assert!(same.bound.is_zero());
        let big = PerturbedPoly::new(a.family().clone(), vec![true], int(1)).unwrap();
        let big0 = PerturbedPoly::new(a.family().clone(), vec![false], int(1)).unwrap();
        assert!(matches!(hdist_lower_bound_cert(&big0, &big, &tol), Err(Error::BudgetViolation(_))));
    }
}
