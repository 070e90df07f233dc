//! The constant chain `R, R_2, eps, Delta, floor, gamma, eta` and the
//! packing count, kept both as exact rationals and in log2-space.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{binomial, e_upper, log2_abs, pow_int, rational_to_string, sqrt_upper};
use crate::Rational;

/// Decimal value of [`e_upper`], used by the log-space formulas.
const E_UPPER: f64 = 271_828_183.0 / 100_000_000.0;

/// Relative tolerance between the exact log2 and the closed-form log2 formula.
pub const LOG2_REL_TOL: f64 = 1e-12;

fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(q))
}

/// An exact positive constant with its log2 computed two ways.
#[derive(Clone, Debug, Serialize)]
pub struct Constant {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    /// `log2` of the exact rational.
    pub log2: f64,
    /// `log2` from the closed-form expression in floating point.
    pub log2_formula: f64,
}

impl Constant {
    fn new(value: Rational, log2_formula: f64) -> Self {
        assert!(value.is_positive());
        let log2 = log2_abs(&value);
        Constant { value, log2, log2_formula }
    }

    pub fn rel_err(&self) -> f64 {
        (self.log2 - self.log2_formula).abs() / self.log2.abs().max(1.0)
    }

    pub fn consistent(&self) -> bool {
        self.rel_err() <= LOG2_REL_TOL
    }
}

fn lg(x: f64) -> f64 {
    x.log2()
}

fn log2_binomial(n: usize, d: usize) -> f64 {
    (0..d).map(|i| lg((n - i) as f64) - lg((i + 1) as f64)).sum()
}

fn recip_pow(n: usize, e: usize) -> Rational {
    Rational::new(BigInt::one(), pow_int(n as u64, e as u64))
}

/// `R = C(n,d) / (2^n n^{(d+1)(n-d)})`.
pub fn perturbation_budget(n: usize, d: usize) -> Result<Rational> {
    if d < 1 || d > n {
        return Err(Error::InvalidDegree(format!("need 1 <= d <= n, got n={n}, d={d}")));
    }
    let den = (BigInt::one() << n) * pow_int(n as u64, ((d + 1) * (n - d)) as u64);
    Ok(Rational::new(binomial(n as u64, d as u64), den))
}

fn perturbation_budget_log2(n: usize, d: usize) -> f64 {
    log2_binomial(n, d) - n as f64 - ((d + 1) * (n - d)) as f64 * lg(n as f64)
}

/// `R_2 = 1 / (4 n^{d(n-d)} N d sqrt(n))`, with `sqrt(n)` rounded up so the
/// result only shrinks.
pub fn separation_budget(n: usize, d: usize, family_size: usize) -> Rational {
    let den = Rational::from_integer(
        BigInt::from(4u32)
            * pow_int(n as u64, (d * (n - d)) as u64)
            * BigInt::from(family_size)
            * BigInt::from(d),
    ) * sqrt_upper(&Rational::from_integer(n.into()));
    den.recip()
}

fn separation_budget_log2(n: usize, d: usize, family_size: usize) -> f64 {
    -2.0 - (d * (n - d)) as f64 * lg(n as f64)
        - lg(family_size as f64)
        - lg(d as f64)
        - 0.5 * lg(n as f64)
}

/// `min(R, R_2) / 2`.
pub fn default_eps(n: usize, d: usize, family_size: usize) -> Result<Rational> {
    let r = perturbation_budget(n, d)?;
    let r2 = separation_budget(n, d, family_size);
    Ok(r.min(r2) / Rational::from_integer(2.into()))
}

/// `Delta = eps / (C(n,d) d e)` with `e` rounded up, so `Delta` is rounded down.
pub fn restriction_delta(n: usize, d: usize, eps: &Rational) -> Rational {
    eps / (Rational::from_integer(binomial(n as u64, d as u64) * BigInt::from(d)) * e_upper())
}

/// `Delta / (18 n^{d(n-d)} N n)`.
pub fn hdist_floor(n: usize, d: usize, family_size: usize, delta: &Rational) -> Rational {
    delta
        / Rational::from_integer(
            BigInt::from(18u32)
                * pow_int(n as u64, (d * (n - d)) as u64)
                * BigInt::from(family_size)
                * BigInt::from(n),
        )
}

/// `n^{-3nd}`
pub fn gamma_target(n: usize, d: usize) -> Rational {
    recip_pow(n, 3 * n * d)
}

/// `n^{-4nd}`
pub fn eta(n: usize, d: usize) -> Rational {
    recip_pow(n, 4 * n * d)
}

/// `log2` of the packing count `(sqrt(B)/eta)^{n B^2}`.
pub fn packing_count_log2(n: usize, b: usize, eta_log2: f64) -> f64 {
    let b = b as f64;
    n as f64 * b * b * (0.5 * lg(b) - eta_log2)
}

/// Smallest real `B >= 1` with `B^2 log2 B >= rhs`.
pub fn solve_min_b(rhs: f64) -> f64 {
    if rhs <= 0.0 {
        return 1.0;
    }
    let f = |b: f64| b * b * lg(b);
    let mut hi = 2.0;
    while f(hi) < rhs {
        hi *= 2.0;
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= rhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundChain {
    pub n: usize,
    pub d: usize,
    pub family_size: usize,
    pub r: Constant,
    pub r2: Constant,
    pub eps: Constant,
    pub delta: Constant,
    pub hdist_floor: Constant,
    pub gamma_target: Constant,
    pub eta: Constant,
    /// Whether `hdist_floor >= gamma_target`, compared exactly.
    pub floor_meets_gamma: bool,
    /// `eps < R` and `eps < R_2`.
    pub eps_within_budgets: bool,
}

impl BoundChain {
    /// Builds the chain; `eps` defaults to `min(R, R_2) / 2`.
    pub fn new(n: usize, d: usize, family_size: usize, eps: Option<Rational>) -> Result<Self> {
        if d < 1 || d > n || family_size == 0 {
            return Err(Error::Infeasible(format!(
                "need 1 <= d <= n and a nonempty family, got n={n}, d={d}, N={family_size}"
            )));
        }
        let nf = n as f64;
        let r_val = perturbation_budget(n, d)?;
        let r2_val = separation_budget(n, d, family_size);
        let r = Constant::new(r_val, perturbation_budget_log2(n, d));
        let r2 = Constant::new(r2_val, separation_budget_log2(n, d, family_size));
        let (eps_val, eps_log2) = match eps {
            Some(e) if e.is_positive() => {
                let l = log2_abs(&e);
                (e, l)
            }
            Some(_) => return Err(Error::Infeasible("eps must be positive".into())),
            None => (
                default_eps(n, d, family_size)?,
                r.log2_formula.min(r2.log2_formula) - 1.0,
            ),
        };
        let eps_within_budgets = eps_val < r.value && eps_val < r2.value;
        let eps = Constant::new(eps_val, eps_log2);
        let delta_val = restriction_delta(n, d, &eps.value);
        let delta = Constant::new(
            delta_val,
            eps_log2 - log2_binomial(n, d) - lg(d as f64) - lg(E_UPPER),
        );
        let floor_val = hdist_floor(n, d, family_size, &delta.value);
        let floor_formula = delta.log2_formula
            - lg(18.0)
            - (d * (n - d)) as f64 * lg(nf)
            - lg(family_size as f64)
            - lg(nf);
        let hdist_floor = Constant::new(floor_val, floor_formula);
        let gamma_target = Constant::new(gamma_target(n, d), -((3 * n * d) as f64) * lg(nf));
        let eta = Constant::new(eta(n, d), -((4 * n * d) as f64) * lg(nf));
        let floor_meets_gamma = hdist_floor.value >= gamma_target.value;
        Ok(BoundChain {
            n,
            d,
            family_size,
            r,
            r2,
            eps,
            delta,
            hdist_floor,
            gamma_target,
            eta,
            floor_meets_gamma,
            eps_within_budgets,
        })
    }

    pub fn constants(&self) -> [(&'static str, &Constant); 7] {
        [
            ("R", &self.r),
            ("R_2", &self.r2),
            ("eps", &self.eps),
            ("Delta", &self.delta),
            ("hdist_floor", &self.hdist_floor),
            ("gamma", &self.gamma_target),
            ("eta", &self.eta),
        ]
    }

    /// Largest relative disagreement between exact and formula log2 values.
    pub fn max_log2_rel_err(&self) -> f64 {
        self.constants().iter().map(|(_, c)| c.rel_err()).fold(0.0, f64::max)
    }

    pub fn consistent(&self) -> bool {
        self.constants().iter().all(|(_, c)| c.consistent())
    }

    /// Packing comparison for representations of size `b`.
    pub fn packing(&self, b: usize) -> PackingVerdict {
        let count_log2 = packing_count_log2(self.n, b, self.eta.log2);
        let family_log2 = self.family_size as f64;
        // log2(n^{3/2} / gamma)
        let sep_log2 = 1.5 * lg(self.n as f64) - self.gamma_target.log2;
        let min_b = solve_min_b(family_log2 / sep_log2);
        PackingVerdict {
            b,
            packing_count_log2: count_log2,
            family_count_log2: family_log2,
            excludes_size_b: family_log2 > count_log2,
            implied_min_b: min_b,
            implied_min_b_log2: lg(min_b),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PackingVerdict {
    pub b: usize,
    pub packing_count_log2: f64,
    /// `log2 2^N`
    pub family_count_log2: f64,
    /// `2^N` exceeds the packing count, so no representation of size `b` is
    /// close enough to all perturbations.
    pub excludes_size_b: bool,
    pub implied_min_b: f64,
    pub implied_min_b_log2: f64,
}

/// `C(n,d) / (4 2^d)`, the size floor for uniquely crossing families.
pub fn family_size_floor(n: usize, d: usize) -> f64 {
    binomial(n as u64, d as u64).to_f64().unwrap() / (4.0 * 2f64.powi(d as i32))
}
