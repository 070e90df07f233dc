//! Randomized construction and exhaustive verification of a family of
//! `d`-matchings in which every good `d`-set is fully crossed by exactly one
//! member.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{indicator, matching_poly, Matching};
use crate::rng::stream;
use crate::Rational;

/// Number of `d`-matchings fully crossing a fixed `d`-set: `C(n-d, d) * d!`.
pub fn crossing_count(n: usize, d: usize) -> u128 {
    if 2 * d > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..d {
        c = c * (n - d - i) as u128 / (i + 1) as u128;
    }
    (1..=d as u128).fold(c, |acc, k| acc * k)
}

/// Total number of `d`-matchings on `n` vertices.
pub fn matching_count(n: usize, d: usize) -> u128 {
    if 2 * d > n {
        return 0;
    }
    let mut c: u128 = 1;
    // n! / ((n - 2d)! 2^d d!)
    for i in 0..2 * d {
        c *= (n - i) as u128;
    }
    for k in 1..=d as u128 {
        c /= 2 * k;
    }
    c
}

/// Every `d`-matching on `0..n`, in a canonical order.
pub fn all_matchings(n: usize, d: usize) -> Vec<Matching> {
    fn pairings(verts: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if verts.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = verts[0];
        for k in 1..verts.len() {
            let rest: Vec<usize> = verts[1..]
                .iter()
                .enumerate()
                .filter(|&(i, _)| i + 1 != k)
                .map(|(_, &v)| v)
                .collect();
            acc.push((first, verts[k]));
            pairings(&rest, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    for verts in (0..n).combinations(2 * d) {
        let mut raw = Vec::new();
        pairings(&verts, &mut Vec::new(), &mut raw);
        out.extend(raw.into_iter().map(|e| Matching::new(e, n).expect("valid pairing")));
    }
    out
}

fn random_matching<R: Rng>(rng: &mut R, n: usize, d: usize) -> Matching {
    let verts = sample_indices(rng, n, 2 * d).into_vec();
    let edges = verts.chunks(2).map(|c| (c[0], c[1]));
    Matching::new(edges, n).expect("distinct vertices")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleConfig {
    /// Enumerate every matching when the total count is at most this.
    pub enumeration_cap: u128,
    pub max_attempts: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { enumeration_cap: 10_000_000, max_attempts: 1000 }
    }
}

/// A family of matchings together with the good sets each crosses uniquely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingFamily {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub matchings: Vec<Matching>,
    pub good_sets: Vec<Vec<usize>>,
}

impl MatchingFamily {
    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn crossing_count(&self) -> u128 {
        crossing_count(self.n, self.d)
    }

    /// Index of the unique member fully crossing `set`, if exactly one does.
    pub fn unique_crosser(&self, set: &[usize]) -> Option<usize> {
        let mut hits = self
            .matchings
            .iter()
            .enumerate()
            .filter(|(_, m)| m.fully_crosses(set).unwrap_or(false))
            .map(|(i, _)| i);
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }

    /// Good sets fully crossed by member `idx`.
    pub fn sets_of(&self, idx: usize) -> Vec<&Vec<usize>> {
        let m = &self.matchings[idx];
        self.good_sets
            .iter()
            .filter(|s| m.fully_crosses(s).unwrap_or(false))
            .collect()
    }

    /// Size floor `C(n, d) / (4 * 2^d)` guaranteed for some outcome of the construction.
    pub fn size_floor(&self) -> f64 {
        let c = crate::scalar::binomial(self.n as u64, self.d as u64);
        crate::scalar::rational_to_f64(&Rational::from_integer(c)) / (4.0 * 2f64.powi(self.d as i32))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleStats {
    pub attempts: usize,
    pub enumerated: bool,
    pub total_matchings: u128,
    pub inclusion_probability: f64,
    pub sampled: usize,
    pub good_sets: usize,
    pub kept: usize,
    pub size_floor: f64,
}

/// Runs the randomized construction with the default configuration.
pub fn sample_family(n: usize, d: usize, seed: u64) -> Result<MatchingFamily> {
    sample_family_with(n, d, seed, &SampleConfig::default()).map(|(f, _)| f)
}

/// Includes each `d`-matching independently with probability `1 / (2E)`,
/// keeps the sets crossed by exactly one included matching, drops matchings
/// crossing no kept set, and retries until the result is nonempty.
pub fn sample_family_with(
    n: usize,
    d: usize,
    seed: u64,
    cfg: &SampleConfig,
) -> Result<(MatchingFamily, SampleStats)> {
    if d == 0 || 2 * d > n {
        return Err(Error::Infeasible(format!("need 1 <= d and 2d <= n, got n={n}, d={d}")));
    }
    let e = crossing_count(n, d);
    let total = matching_count(n, d);
    let prob = 1.0 / (2.0 * e as f64);
    let enumerated = total <= cfg.enumeration_cap;
    let universe = if enumerated { all_matchings(n, d) } else { Vec::new() };
    let mut rng = stream(seed, "matching-family");
    let mut last = (0, 0);
    for attempt in 1..=cfg.max_attempts {
        let sampled: Vec<Matching> = if enumerated {
            universe.iter().filter(|_| rng.random::<f64>() < prob).cloned().collect()
        } else {
            // same law as independent inclusion: binomial count, then a
            // uniformly random set of that many distinct matchings
            let k = Binomial::new(total.min(u64::MAX as u128) as u64, prob)
                .map_err(|e| Error::Infeasible(e.to_string()))?
                .sample(&mut rng) as usize;
            let mut chosen = std::collections::BTreeSet::new();
            while chosen.len() < k {
                chosen.insert(random_matching(&mut rng, n, d));
            }
            chosen.into_iter().collect()
        };
        let mut degree: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for m in &sampled {
            for s in m.crossed_sets() {
                *degree.entry(s).or_default() += 1;
            }
        }
        let good_sets: Vec<Vec<usize>> =
            degree.into_iter().filter(|(_, c)| *c == 1).map(|(s, _)| s).collect();
        let kept: Vec<Matching> = sampled
            .iter()
            .filter(|m| good_sets.iter().any(|s| m.fully_crosses(s).unwrap_or(false)))
            .cloned()
            .collect();
        last = (sampled.len(), good_sets.len());
        if !kept.is_empty() {
            let fam = MatchingFamily { n, d, seed, matchings: kept, good_sets };
            let stats = SampleStats {
                attempts: attempt,
                enumerated,
                total_matchings: total,
                inclusion_probability: prob,
                sampled: sampled.len(),
                good_sets: fam.good_sets.len(),
                kept: fam.matchings.len(),
                size_floor: fam.size_floor(),
            };
            return Ok((fam, stats));
        }
    }
    Err(Error::RetryLimit {
        attempts: cfg.max_attempts,
        last_matchings: last.0,
        last_good_sets: last.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyFamily,
    BadSet { set: Vec<usize> },
    BadMatching { index: usize, reason: String },
    NotUniquelyCrossed { set: Vec<usize>, crossers: Vec<usize> },
    UncoveredMatching { index: usize },
    VanishingIndicator { set: Vec<usize>, matching: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyVerification {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Exhaustive check of uniqueness, coverage, and nonvanishing of `q_M` at
/// the indicator of each good set for its unique crosser.
pub fn verify_family(fam: &MatchingFamily) -> FamilyVerification {
    let mut violations = Vec::new();
    if fam.matchings.is_empty() {
        violations.push(Violation::EmptyFamily);
    }
    for (i, m) in fam.matchings.iter().enumerate() {
        if m.len() != fam.d {
            violations.push(Violation::BadMatching { index: i, reason: format!("{} edges", m.len()) });
        } else if let Err(e) = Matching::new(m.edges().iter().copied(), fam.n) {
            violations.push(Violation::BadMatching { index: i, reason: e.to_string() });
        }
    }
    for s in &fam.good_sets {
        let sorted_unique = s.windows(2).all(|w| w[0] < w[1]);
        if s.len() != fam.d || !sorted_unique || s.iter().any(|&v| v >= fam.n) {
            violations.push(Violation::BadSet { set: s.clone() });
        }
    }
    if !violations.is_empty() {
        return FamilyVerification { ok: false, violations };
    }

    let per_set: Vec<Vec<Violation>> = fam
        .good_sets
        .par_iter()
        .map(|s| {
            let crossers: Vec<usize> = fam
                .matchings
                .iter()
                .enumerate()
                .filter(|(_, m)| m.fully_crosses(s).unwrap())
                .map(|(i, _)| i)
                .collect();
            if crossers.len() != 1 {
                return vec![Violation::NotUniquelyCrossed { set: s.clone(), crossers }];
            }
            let q = matching_poly::<Rational>(&fam.matchings[crossers[0]], fam.n).unwrap();
            let v = q.eval(&indicator(fam.n, s)).unwrap();
            if v.is_zero() {
                vec![Violation::VanishingIndicator { set: s.clone(), matching: crossers[0] }]
            } else {
                Vec::new()
            }
        })
        .collect();
    violations.extend(per_set.into_iter().flatten());

    for (i, m) in fam.matchings.iter().enumerate() {
        if !fam.good_sets.iter().any(|s| m.fully_crosses(s).unwrap()) {
            violations.push(Violation::UncoveredMatching { index: i });
        }
    }
    FamilyVerification { ok: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        assert_eq!(matching_count(6, 2), 45);
        assert_eq!(all_matchings(6, 2).len(), 45);
        assert_eq!(all_matchings(4, 1).len(), 6);
        assert_eq!(all_matchings(8, 3).len() as u128, matching_count(8, 3));
        assert_eq!(crossing_count(6, 2), 12);
        assert_eq!(crossing_count(3, 2), 0);
    }

    #[test]
    fn single_edge_family_is_valid() {
        let fam = MatchingFamily {
            n: 4,
            d: 1,
            seed: 0,
            matchings: vec![Matching::new([(0, 1)], 4).unwrap()],
            good_sets: vec![vec![0], vec![1]],
        };
        let v = verify_family(&fam);
        assert!(v.ok, "{:?}", v.violations);
    }

    #[test]
    fn doubly_crossed_set_is_reported() {
        let fam = MatchingFamily {
            n: 4,
            d: 2,
            seed: 0,
            matchings: vec![
                Matching::new([(0, 1), (2, 3)], 4).unwrap(),
                Matching::new([(0, 3), (1, 2)], 4).unwrap(),
            ],
            good_sets: vec![vec![0, 2]],
        };
        let v = verify_family(&fam);
        assert!(!v.ok);
        assert!(v.violations.contains(&Violation::NotUniquelyCrossed {
            set: vec![0, 2],
            crossers: vec![0, 1]
        }));
    }

    #[test]
    fn uncovered_and_empty_families_fail() {
        let fam = MatchingFamily { n: 4, d: 1, seed: 0, matchings: vec![], good_sets: vec![] };
        assert_eq!(verify_family(&fam).violations, vec![Violation::EmptyFamily]);
        let fam = MatchingFamily {
            n: 4,
            d: 1,
            seed: 0,
            matchings: vec![Matching::new([(0, 1)], 4).unwrap(), Matching::new([(2, 3)], 4).unwrap()],
            good_sets: vec![vec![0]],
        };
        let v = verify_family(&fam);
        assert_eq!(v.violations, vec![Violation::UncoveredMatching { index: 1 }]);
    }

    #[test]
    fn infeasible_parameters() {
        assert!(matches!(sample_family(3, 2, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let a = sample_family(6, 2, 7).unwrap();
        let b = sample_family(6, 2, 7).unwrap();
        assert_eq!(a, b);
        assert!(verify_family(&a).ok);
    }

    #[test]
    fn rejection_path_produces_valid_families() {
        let cfg = SampleConfig { enumeration_cap: 0, max_attempts: 1000 };
        for seed in 0..10 {
            let (fam, stats) = sample_family_with(6, 2, seed, &cfg).unwrap();
            assert!(!stats.enumerated);
            assert!(verify_family(&fam).ok);
        }
    }

    #[test]
    fn json_round_trip() {
        let fam = sample_family(6, 2, 3).unwrap();
        let back = MatchingFamily::from_json(&fam.to_json()).unwrap();
        assert_eq!(fam, back);
        assert!(fam.to_json().contains("\"matchings\":[[["));
    }
}
