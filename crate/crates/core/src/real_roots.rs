//! Certified real-root isolation over the rationals.
//!
//! Pipeline: Yun square-free factorization, a Sturm chain per square-free
//! factor, isolation by bisection on exact sign-variation counts, then
//! refinement to the requested width. A root that is a "simple" rational
//! (the smallest-denominator rational of its isolating interval) is snapped
//! to a point interval when the exact evaluation vanishes.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{eval_uni, Interval};
use crate::poly::UniPoly;
use crate::scalar::{bigint_sign, factorial, int, lcm_denominators, pow_int, rational_to_f64, simplest_between};
use crate::Rational;

type QPoly = UniPoly<Rational>;

/// Isolation widths for certified root reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerance {
    /// Maximum width of an isolating interval.
    pub root_width: Rational,
    /// Slack for floating-point cross-checks only.
    pub realroot_slack: Rational,
}

impl Tolerance {
    pub fn new(root_width: Rational, realroot_slack: Rational) -> Result<Self> {
        if !root_width.is_positive() || !realroot_slack.is_positive() {
            return Err(Error::BadTolerance);
        }
        Ok(Tolerance { root_width, realroot_slack })
    }

    /// Isolating width `2^-bits`.
    pub fn with_bits(bits: u32) -> Self {
        Tolerance {
            root_width: Rational::new(BigInt::one(), BigInt::one() << bits),
            realroot_slack: Rational::new(BigInt::one(), BigInt::from(1_000_000)),
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::with_bits(64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsolatedRoot {
    pub interval: Interval,
    pub multiplicity: usize,
    #[serde(skip)]
    factor: usize,
}

/// Sorted real roots with multiplicities.
#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    pub roots: Vec<IsolatedRoot>,
    pub total_count: usize,
    pub certified: bool,
    #[serde(skip)]
    chains: Vec<SturmChain>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn largest(&self) -> Option<&IsolatedRoot> {
        self.roots.last()
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.roots.iter().map(|r| r.interval.clone()).collect()
    }

    /// Shrinks root `idx` until its width is at most `width`.
    pub fn refine(&mut self, idx: usize, width: &Rational) {
        let root = &mut self.roots[idx];
        let chain = &self.chains[root.factor];
        root.interval = chain.refine(root.interval.clone(), width);
    }

    pub fn refine_all(&mut self, width: &Rational) {
        for i in 0..self.roots.len() {
            self.refine(i, width);
        }
    }

    fn separate(&mut self) {
        // roots of distinct coprime factors may have overlapping enclosures
        loop {
            self.roots
                .sort_by(|a, b| (a.interval.lo(), a.interval.hi()).cmp(&(b.interval.lo(), b.interval.hi())));
            let clash = (1..self.roots.len()).find(|&i| {
                let (a, b) = (&self.roots[i - 1].interval, &self.roots[i].interval);
                a.hi() > b.lo()
            });
            match clash {
                None => return,
                Some(i) => {
                    for j in [i - 1, i] {
                        let w = self.roots[j].interval.width() / int(2);
                        if w.is_zero() {
                            continue;
                        }
                        self.refine(j, &w);
                    }
                }
            }
        }
    }
}

/// Positive integer multiple of a rational polynomial, for exact sign
/// evaluation without rational normalization.
#[derive(Clone, Debug)]
struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    fn new(p: &QPoly) -> Self {
        let l = lcm_denominators(p.coeffs());
        let coeffs = p
            .coeffs()
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        IntPoly { coeffs }.primitive()
    }

    fn trim(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    /// Divides by the positive content.
    fn primitive(self) -> Self {
        let mut s = self.trim();
        let g = s.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in &mut s.coeffs {
                *c /= &g;
            }
        }
        s
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn leading_sign(&self) -> i8 {
        self.coeffs.last().map_or(0, |c| bigint_sign(c) as i8)
    }

    fn derivative(&self) -> Self {
        IntPoly {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect(),
        }
        .primitive()
    }

    /// A positive multiple of the remainder of `self` by `b`.
    fn signed_prem(&self, b: &IntPoly) -> IntPoly {
        let mut r = self.coeffs.clone();
        let n = b.degree();
        let lb = b.coeffs.last().unwrap();
        let mut k = 0usize;
        while r.len() > n && !r.is_empty() {
            let lr = r.last().unwrap().clone();
            let shift = r.len() - 1 - n;
            for c in r.iter_mut() {
                *c *= lb;
            }
            for (j, bc) in b.coeffs.iter().enumerate() {
                r[shift + j] -= &lr * bc;
            }
            r.pop();
            k += 1;
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        let mut out = IntPoly { coeffs: r };
        if bigint_sign(lb) < 0 && k % 2 == 1 {
            for c in &mut out.coeffs {
                *c = -&*c;
            }
        }
        out.primitive()
    }

    fn negate(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = -&*c;
        }
        self
    }

    /// Sign of `p(num/den)` via `sum a_i num^i den^(deg-i)`.
    fn sign_at(&self, x: &Rational) -> i8 {
        let (num, den) = (x.numer(), x.denom());
        let mut it = self.coeffs.iter().rev();
        let mut acc = match it.next() {
            Some(c) => c.clone(),
            None => return 0,
        };
        let mut dpow = BigInt::one();
        for c in it {
            dpow *= den;
            acc = acc * num + c * &dpow;
        }
        bigint_sign(&acc) as i8
    }
}

/// Sturm sequence kept as primitive integer polynomials; each entry is a
/// positive multiple of the classical one, so sign counts agree.
#[derive(Clone, Debug)]
struct SturmChain {
    base: QPoly,
    ints: Vec<IntPoly>,
}

fn count_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut prev = 0i8;
    let mut changes = 0;
    for s in signs.filter(|&s| s != 0) {
        if prev != 0 && s != prev {
            changes += 1;
        }
        prev = s;
    }
    changes
}

impl SturmChain {
    /// Chain of a polynomial of degree at least 1; it ends in `gcd(p, p')`.
    fn new(p: &QPoly) -> Self {
        let p0 = IntPoly::new(p);
        let mut ints = vec![p0.clone(), p0.derivative()];
        loop {
            let k = ints.len();
            let r = ints[k - 2].signed_prem(&ints[k - 1]);
            if r.is_zero() {
                break;
            }
            ints.push(r.negate());
        }
        SturmChain { base: p.clone(), ints }
    }

    fn is_square_free(&self) -> bool {
        self.ints.last().unwrap().degree() == 0
    }

    fn poly(&self) -> &QPoly {
        &self.base
    }

    fn variations(&self, x: &Rational) -> usize {
        count_changes(self.ints.iter().map(|p| p.sign_at(x)))
    }

    fn variations_pos_inf(&self) -> usize {
        count_changes(self.ints.iter().map(|p| p.leading_sign()))
    }

    fn variations_neg_inf(&self) -> usize {
        count_changes(self.ints.iter().map(|p| {
            let s = p.leading_sign();
            if p.degree() % 2 == 1 {
                -s
            } else {
                s
            }
        }))
    }

    fn total(&self) -> usize {
        self.variations_neg_inf() - self.variations_pos_inf()
    }

    /// Distinct roots in `(a, inf)`.
    fn count_above(&self, a: &Rational) -> usize {
        self.variations(a) - self.variations_pos_inf()
    }

    /// Power-of-two bound strictly above every root magnitude.
    fn root_bound(&self) -> Rational {
        let p = self.poly();
        let lead = p.leading().abs();
        let mut bound = Rational::one();
        for c in &p.coeffs()[..p.degree()] {
            let r = c.abs() / lead.clone();
            if r > bound {
                bound = r;
            }
        }
        bound += Rational::one();
        let mut b = Rational::one();
        while b <= bound {
            b *= int(2);
        }
        b
    }

    /// Isolating intervals `(lo, hi]` containing one root each, ascending.
    fn isolate(&self) -> Vec<Interval> {
        let ip = &self.ints[0];
        let b = self.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-b.clone(), b.clone(), self.variations(&-b.clone()), self.variations(&b))];
        while let Some((lo, hi, vlo, vhi)) = stack.pop() {
            let count = vlo - vhi;
            if count == 0 {
                continue;
            }
            if count == 1 {
                if ip.sign_at(&hi) == 0 {
                    out.push(Interval::point(hi));
                } else {
                    out.push(Interval::new(lo, hi));
                }
                continue;
            }
            let mid = (&lo + &hi) / int(2);
            let vmid = self.variations(&mid);
            stack.push((lo, mid.clone(), vlo, vmid));
            stack.push((mid, hi, vmid, vhi));
        }
        out.sort_by(|a, b| (a.lo(), a.hi()).cmp(&(b.lo(), b.hi())));
        out
    }

    /// Refines an interval `(lo, hi]` that holds exactly one root.
    fn refine(&self, iv: Interval, width: &Rational) -> Interval {
        if iv.is_point() {
            return iv;
        }
        let ip = &self.ints[0];
        let (mut lo, mut hi) = (iv.lo().clone(), iv.hi().clone());
        if ip.sign_at(&hi) == 0 {
            return Interval::point(hi);
        }
        // move lo off a root of p so plain sign bisection applies
        while ip.sign_at(&lo) == 0 {
            let mid = (&lo + &hi) / int(2);
            if ip.sign_at(&mid) == 0 {
                return Interval::point(mid);
            }
            if self.variations(&lo) - self.variations(&mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let slo = ip.sign_at(&lo);
        while &(&hi - &lo) > width {
            let mid = (&lo + &hi) / int(2);
            let sm = ip.sign_at(&mid);
            if sm == 0 {
                return Interval::point(mid);
            }
            if sm == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = simplest_between(&lo, &hi);
        if ip.sign_at(&r) == 0 {
            return Interval::point(r);
        }
        Interval::new(lo, hi)
    }
}

/// Yun square-free factorization: returns `(factor, multiplicity)` pairs with
/// positive-degree factors whose product (with multiplicity) is `p` up to a constant.
pub fn square_free_factors(p: &QPoly) -> Vec<(QPoly, usize)> {
    let mut out = Vec::new();
    if p.degree() == 0 {
        return out;
    }
    let dp = p.derivative();
    let a0 = p.gcd(&dp);
    let mut b = p.div_rem(&a0).unwrap().0;
    let c = dp.div_rem(&a0).unwrap().0;
    let mut d = &c - &b.derivative();
    let mut i = 1;
    while b.degree() > 0 {
        let a = b.gcd(&d);
        if a.degree() > 0 {
            out.push((a.monic(), i));
        }
        let b_next = b.div_rem(&a).unwrap().0;
        let c_next = d.div_rem(&a).unwrap().0;
        d = &c_next - &b_next.derivative();
        b = b_next;
        i += 1;
    }
    out
}

/// One chain per square-free factor; a square-free input needs only its own.
fn sturm_chains(q: &QPoly) -> Vec<(SturmChain, usize)> {
    if q.degree() == 0 {
        return Vec::new();
    }
    let whole = SturmChain::new(q);
    if whole.is_square_free() {
        return vec![(whole, 1)];
    }
    square_free_factors(q)
        .into_iter()
        .map(|(f, m)| (SturmChain::new(&f), m))
        .collect()
}

fn check_nonzero(q: &QPoly) -> Result<()> {
    if q.is_zero() {
        Err(Error::ZeroPolynomial)
    } else {
        Ok(())
    }
}

/// Certified real roots of `q` with multiplicities, isolated to `tol.root_width`.
pub fn real_roots(q: &QPoly, tol: &Tolerance) -> Result<RootSet> {
    check_nonzero(q)?;
    let mut chains = Vec::new();
    let mut roots = Vec::new();
    for (chain, mult) in sturm_chains(q) {
        let idx = chains.len();
        for iv in chain.isolate() {
            let interval = chain.refine(iv, &tol.root_width);
            roots.push(IsolatedRoot { interval, multiplicity: mult, factor: idx });
        }
        chains.push(chain);
    }
    let total_count = roots.iter().map(|r| r.multiplicity).sum();
    let mut set = RootSet { roots, total_count, certified: true, chains };
    set.separate();
    Ok(set)
}

/// Number of real roots counted with multiplicity, without isolating them.
pub fn real_root_count(q: &QPoly) -> Result<usize> {
    check_nonzero(q)?;
    Ok(sturm_chains(q)
        .iter()
        .map(|(c, m)| m * c.total())
        .sum())
}

/// Exact decision: all roots of `q` are real.
pub fn is_real_rooted(q: &QPoly) -> Result<bool> {
    Ok(real_root_count(q)? == q.degree())
}

/// Number of roots in `(a, inf)` counted with multiplicity.
pub fn roots_above(q: &QPoly, a: &Rational) -> Result<usize> {
    check_nonzero(q)?;
    Ok(sturm_chains(q)
        .iter()
        .map(|(c, m)| m * c.count_above(a))
        .sum())
}

/// Isolating interval of the largest real root.
pub fn lambda_max(q: &QPoly, tol: &Tolerance) -> Result<Interval> {
    let set = real_roots(q, tol)?;
    set.largest().map(|r| r.interval.clone()).ok_or(Error::NoRealRoots)
}

/// Distance `min |q(c)|` over real critical points `c`, which is zero exactly
/// when `q` has a repeated root.
pub fn gap_to_boundary(q: &QPoly, tol: &Tolerance) -> Result<Interval> {
    check_nonzero(q)?;
    if q.degree() < 2 {
        return Err(Error::InvalidDegree(format!("gap needs degree >= 2, got {}", q.degree())));
    }
    if !is_real_rooted(q)? {
        return Err(Error::NotRealRooted);
    }
    let dq = q.derivative();
    if !SturmChain::new(q).is_square_free() {
        return Ok(Interval::point(Rational::zero()));
    }
    let crit = real_roots(&dq, tol)?;
    let mut best: Option<Interval> = None;
    for r in &crit.roots {
        let v = eval_uni(q, &r.interval).abs();
        best = Some(match best {
            None => v,
            Some(b) => Interval::new(
                b.lo().clone().min(v.lo().clone()),
                b.hi().clone().min(v.hi().clone()),
            ),
        });
    }
    best.ok_or(Error::NoRealRoots)
}

/// Outcome of checking derivative roots against the `[1/n, 1 - 1/n]` segment rule.
#[derive(Clone, Debug, Serialize)]
pub struct InterlacingReport {
    pub degree: usize,
    pub segments: usize,
    /// Smallest observed `(z' - z_j) / (z_{j+1} - z_j)`.
    pub min_ratio: f64,
    /// Largest observed `(z' - z_j) / (z_{j+1} - z_j)`.
    pub max_ratio: f64,
    pub violations: Vec<usize>,
    pub inconclusive: Vec<usize>,
}

impl InterlacingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.inconclusive.is_empty()
    }
}

const INTERLACE_MAX_BITS: u32 = 400;

/// Checks that each derivative root strictly between consecutive roots of `q`
/// divides that segment in ratio at most `1 : (deg q)`.
pub fn interlacing_ratio_check(q: &QPoly) -> Result<InterlacingReport> {
    check_nonzero(q)?;
    let n = q.degree();
    if n < 2 {
        return Err(Error::InvalidDegree(format!("need degree >= 2, got {n}")));
    }
    let tol = Tolerance::with_bits(32);
    let mut zs = real_roots(q, &tol)?;
    if zs.total_count != n {
        return Err(Error::NotRealRooted);
    }
    let mut ds = real_roots(&q.derivative(), &tol)?;
    if zs.roots.iter().any(|r| r.multiplicity > 1) {
        return Err(Error::InvalidDegree("interlacing check needs distinct roots".into()));
    }
    if n == 2 {
        // the derivative root is the mean of the two roots: ratio exactly 1/2
        return Ok(InterlacingReport {
            degree: 2,
            segments: 1,
            min_ratio: 0.5,
            max_ratio: 0.5,
            violations: Vec::new(),
            inconclusive: Vec::new(),
        });
    }
    let nq = int(n as i64);
    let inv = nq.recip();
    let one_minus = Rational::one() - inv.clone();
    let mut report = InterlacingReport {
        degree: n,
        segments: n - 1,
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        violations: Vec::new(),
        inconclusive: Vec::new(),
    };
    // with distinct real roots, q' has exactly one root per segment
    for j in 0..n - 1 {
        let mut bits = 32;
        loop {
            let (a, b) = (&zs.roots[j].interval, &zs.roots[j + 1].interval);
            let z = &ds.roots[j].interval;
            let lower = &a.scale(&one_minus) + &b.scale(&inv);
            let upper = &a.scale(&inv) + &b.scale(&one_minus);
            let ok = lower.hi() <= z.lo() && z.hi() <= upper.lo();
            let bad = z.hi() < lower.lo() || z.lo() > upper.hi();
            if ok || bad || bits >= INTERLACE_MAX_BITS {
                let ratio = (z.mid_f64() - a.mid_f64()) / (b.mid_f64() - a.mid_f64());
                report.min_ratio = report.min_ratio.min(ratio);
                report.max_ratio = report.max_ratio.max(ratio);
                if bad {
                    report.violations.push(j);
                } else if !ok {
                    report.inconclusive.push(j);
                }
                break;
            }
            bits *= 2;
            let w = Rational::new(BigInt::one(), BigInt::one() << bits);
            zs.refine(j, &w);
            zs.refine(j + 1, &w);
            ds.refine(j, &w);
        }
    }
    Ok(report)
}

/// `(1/(n-d)!) D^{n-d} [t^{n-d} (t+1)^d]`, the common restriction of `e_d`
/// along `t 1 + 1_S` for any `|S| = d`.
pub fn jacobi_poly(n: usize, d: usize) -> Result<QPoly> {
    if d < 1 || d >= n {
        return Err(Error::InvalidDegree(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let base = &QPoly::from_i64(&[0, 1]).pow(n - d) * &QPoly::from_i64(&[1, 1]).pow(d);
    let k = n - d;
    Ok(base
        .nth_derivative(k)
        .scale(&Rational::from_integer(factorial(k as u64)).recip()))
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiSensitivity {
    pub n: usize,
    pub d: usize,
    pub lambda: Interval,
    pub derivative: Interval,
    /// `n^{-d(n-d)}`
    pub bound: Interval,
    pub bound_ok: bool,
}

/// Largest root of the Jacobi polynomial and a certified enclosure of the
/// derivative there, checked against `n^{-d(n-d)}` over the whole enclosure.
pub fn jacobi_sensitivity(n: usize, d: usize, tol: &Tolerance) -> Result<JacobiSensitivity> {
    let j = jacobi_poly(n, d)?;
    let lambda = lambda_max(&j, tol)?;
    let derivative = eval_uni(&j.derivative(), &lambda);
    let bound = Rational::new(BigInt::one(), pow_int(n as u64, (d * (n - d)) as u64));
    let bound_ok = derivative.lo() >= &bound;
    Ok(JacobiSensitivity {
        n,
        d,
        lambda,
        derivative,
        bound: Interval::point(bound),
        bound_ok,
    })
}

/// Floating-point count of real roots from companion-matrix eigenvalues:
/// eigenvalues with `|im| <= slack * (1 + |re|)` count as real. Never used
/// for certificates.
pub fn companion_real_root_count(q: &UniPoly<f64>, slack: f64) -> usize {
    let n = q.degree();
    if n == 0 {
        return 0;
    }
    let lead = q.leading();
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -q.coeff(i) / lead;
    }
    c.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= slack * (1.0 + z.re.abs()))
        .count()
}

/// Midpoint approximations of all roots, as `f64`.
pub fn approx_roots(set: &RootSet) -> Vec<f64> {
    set.roots.iter().map(|r| r.interval.mid_f64()).collect()
}

pub fn interval_to_f64(iv: &Interval) -> f64 {
    rational_to_f64(&iv.mid())
}
