//! Experiment driver behind the `hypercone` binary.
//!
//! Every subcommand resolves its parameters, runs the library checks, and
//! returns a [`Report`]. Reports are plain JSON with sorted keys and no
//! timestamps, so a fixed seed gives identical bytes on every run.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hypercone::bounds::{default_eps, BoundChain};
use hypercone::hyperbolicity::{
    edmd_oracle, embedding_separation, hdist_lower_bound_cert, verify_hyperbolic_sampled, PerturbedPoly,
    SamplerConfig,
};
use hypercone::matching::{sample_family_with, verify_family, MatchingFamily, SampleConfig};
use hypercone::poly::indicator;
use hypercone::real_roots::{interlacing_ratio_check, jacobi_sensitivity, Tolerance};
use hypercone::rng::{indexed_stream, StreamRng};
use hypercone::scalar::{log2_abs, parse_rational, rational_to_f64, rational_to_string};
use hypercone::spectrahedra::{
    conetomatrices_check, hdist_estimate, normalize, perturb_psd, random_orthant_rep, HdistConfig, HyperbolicCone,
    NormalizeConfig,
};
use hypercone::{Error, QUniPoly, Rational};

/// Relative slack when comparing the floating Hausdorff estimate with the
/// exact tangent-plane certificate on the same line.
pub const ESTIMATE_REL_TOL: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(name = "hypercone", version, about = "Checks on perturbed elementary symmetric hyperbolicity cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Sample and verify a uniquely crossing matching family.
    Family(Opts),
    /// Run one of the registered verification suites.
    VerifyLemma {
        #[arg(value_enum)]
        lemma: Lemma,
        #[command(flatten)]
        opts: Opts,
    },
    /// Certified and sampled Hausdorff distances between perturbed cones.
    Hdist(Opts),
    /// End-to-end run: family, perturbations, separations, constant chain.
    Pack(Opts),
    /// Table of the constant chain and the packing verdict.
    Bounds(Opts),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    Aspect,
    Edmd,
    Jacobi,
    Restrictfar,
    Conetomatrices,
    Nuij,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rational perturbation size, e.g. `1/1000000`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Root isolation width `2^-tol`.
    #[arg(long, default_value_t = 40)]
    pub tol: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Report constants in log2 space only.
    #[arg(long)]
    pub float: bool,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long = "B")]
    pub b: Option<usize>,
    /// Comma-separated rational point injected into the `edmd` suite.
    #[arg(long)]
    pub point: Option<String>,
}

/// Parameters after defaults are applied; embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct Params {
    pub op: String,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub seed: u64,
    pub eps: Option<String>,
    pub samples: Option<usize>,
    pub tol_bits: u32,
    pub pairs: Option<usize>,
    pub b: Option<usize>,
    pub point: Option<String>,
    pub arithmetic: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub tag: String,
    pub holds: bool,
    pub observed: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub op: String,
    pub params: Params,
    /// SHA-256 of the canonical JSON of `params`.
    pub input_hash: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub samples: usize,
    pub failures: Vec<Value>,
    pub min_gap: Option<f64>,
    pub bounds: Option<Value>,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_)
            | Error::InvalidDegree(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse(_)
            | Error::BadTolerance => CliError::Usage(e.to_string()),
            e => CliError::Run(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

struct Builder {
    params: Params,
    checks: Vec<Check>,
    samples: usize,
    failures: Vec<Value>,
    min_gap: Option<f64>,
    bounds: Option<Value>,
}

impl Builder {
    fn new(params: Params) -> Self {
        Builder { params, checks: Vec::new(), samples: 0, failures: Vec::new(), min_gap: None, bounds: None }
    }

    fn check(&mut self, tag: impl Into<String>, holds: bool, observed: Value) {
        self.checks.push(Check { tag: tag.into(), holds, observed });
    }

    fn gap(&mut self, g: f64) {
        self.min_gap = Some(self.min_gap.map_or(g, |m| m.min(g)));
    }

    fn finish(self, result: Value) -> Report {
        let canonical = serde_json::to_vec(&self.params).expect("params serialize");
        let input_hash = format!("{:x}", Sha256::digest(&canonical));
        Report {
            op: self.params.op.clone(),
            passed: self.checks.iter().all(|c| c.holds),
            params: self.params,
            input_hash,
            checks: self.checks,
            samples: self.samples,
            failures: self.failures,
            min_gap: self.min_gap,
            bounds: self.bounds,
            result,
        }
    }
}

fn params(op: &str, o: &Opts, n: Option<usize>, d: Option<usize>) -> Params {
    Params {
        op: op.to_string(),
        n,
        d,
        seed: o.seed,
        eps: o.eps.clone(),
        samples: o.samples,
        tol_bits: o.tol,
        pairs: o.pairs,
        b: o.b,
        point: o.point.clone(),
        arithmetic: if o.float { "float" } else { "exact" },
        version: env!("CARGO_PKG_VERSION"),
    }
}

fn family_dims(o: &Opts) -> CliResult<(usize, usize)> {
    let (n, d) = (o.n.unwrap_or(6), o.d.unwrap_or(2));
    if d == 0 || 2 * d > n {
        return usage(format!("need 1 <= d and 2d <= n, got n={n}, d={d}"));
    }
    Ok((n, d))
}

fn parse_eps(o: &Opts, n: usize, d: usize, nf: usize) -> CliResult<Rational> {
    let eps = match &o.eps {
        Some(s) => parse_rational(s)?,
        None => default_eps(n, d, nf)?,
    };
    if eps <= Rational::from_integer(0.into()) {
        return usage("eps must be positive");
    }
    Ok(eps)
}

fn build_family(n: usize, d: usize, seed: u64) -> CliResult<Arc<MatchingFamily>> {
    Ok(Arc::new(sample_family_with(n, d, seed, &SampleConfig::default())?.0))
}

/// Two perturbations of the same family with different sign patterns.
pub fn random_pair(
    fam: &Arc<MatchingFamily>,
    eps: &Rational,
    rng: &mut StreamRng,
) -> hypercone::Result<(PerturbedPoly, PerturbedPoly)> {
    let a = PerturbedPoly::random(fam.clone(), eps.clone(), rng)?;
    loop {
        let b = PerturbedPoly::random(fam.clone(), eps.clone(), rng)?;
        if b.s() != a.s() {
            return Ok((a, b));
        }
    }
}

/// Parses `--point` as a comma-separated list of rationals.
pub fn parse_point(s: &str) -> hypercone::Result<Vec<Rational>> {
    s.split(',').map(|t| parse_rational(t.trim())).collect()
}

pub fn run(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Family(o) => cmd_family(o),
        Command::VerifyLemma { lemma, opts } => match lemma {
            Lemma::Aspect => cmd_aspect(opts),
            Lemma::Edmd => cmd_edmd(opts),
            Lemma::Jacobi => cmd_jacobi(opts),
            Lemma::Restrictfar => cmd_restrictfar(opts),
            Lemma::Conetomatrices => cmd_conetomatrices(opts),
            Lemma::Nuij => cmd_nuij(opts),
        },
        Command::Hdist(o) => cmd_hdist(o),
        Command::Pack(o) => cmd_pack(o),
        Command::Bounds(o) => cmd_bounds(o),
    }
}

pub fn cmd_family(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let mut r = Builder::new(params("family", o, Some(n), Some(d)));
    let (fam, stats) = sample_family_with(n, d, o.seed, &SampleConfig::default())?;
    let v = verify_family(&fam);
    r.samples = fam.len();
    r.failures = v.violations.iter().map(|x| json!(x)).collect();
    r.check("family.unique-crossing", v.ok, json!({ "matchings": fam.len(), "good_sets": fam.good_sets.len() }));
    Ok(r.finish(json!({ "family": fam, "stats": stats, "verified": v.ok })))
}

/// Random real-rooted polynomial with distinct roots: rational roots, and
/// for about half the draws a pair `+-sqrt(m)` for a non-square `m`.
pub fn random_distinct_root_poly(rng: &mut StreamRng, degree: usize) -> QUniPoly {
    let irrational = degree >= 2 && rng.random_bool(0.5);
    let rational_count = if irrational { degree - 2 } else { degree };
    let mut roots = std::collections::BTreeSet::new();
    while roots.len() < rational_count {
        let num: i64 = rng.random_range(-60..=60);
        let den: i64 = rng.random_range(1..=9);
        let mut r = Rational::new(num.into(), den.into());
        if rng.random_bool(0.1) {
            // near-collisions stress the refinement loop
            if let Some(prev) = roots.iter().next_back() {
                r = prev + Rational::new(1.into(), 997.into());
            }
        }
        roots.insert(r);
    }
    let roots: Vec<Rational> = roots.into_iter().collect();
    let mut p = QUniPoly::from_roots(&roots);
    if irrational {
        let m = [2i64, 3, 5, 6, 7, 10, 11, 13][rng.random_range(0..8)];
        p = &p * &QUniPoly::from_i64(&[-m, 0, 1]);
    }
    p
}

pub fn cmd_aspect(o: &Opts) -> CliResult<Report> {
    let samples = o.samples.unwrap_or(1000);
    let mut r = Builder::new(params("verify-lemma aspect", o, None, None));
    let results: Vec<_> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_stream(o.seed, "aspect", i);
            let degree = rng.random_range(2..=12);
            let q = random_distinct_root_poly(&mut rng, degree);
            (i, interlacing_ratio_check(&q))
        })
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, res) in results {
        let rep = res?;
        let inv = 1.0 / rep.degree as f64;
        r.gap((rep.min_ratio - inv).min(1.0 - inv - rep.max_ratio));
        lo = lo.min(rep.min_ratio);
        hi = hi.max(rep.max_ratio);
        if !rep.passed() {
            r.failures.push(json!({ "index": i, "report": rep }));
        }
    }
    r.samples = samples;
    let ok = r.failures.is_empty();
    r.check("interlacing.segment-ratio", ok, json!({ "min_ratio": lo, "max_ratio": hi }));
    Ok(r.finish(json!({ "min_ratio": lo, "max_ratio": hi })))
}

fn sweep_or_single(o: &Opts, all: impl Fn() -> Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    match (o.n, o.d) {
        (Some(n), Some(d)) => vec![(n, d)],
        (Some(n), None) => all().into_iter().filter(|p| p.0 == n).collect(),
        (None, Some(d)) => all().into_iter().filter(|p| p.1 == d).collect(),
        (None, None) => all(),
    }
}

pub fn cmd_edmd(o: &Opts) -> CliResult<Report> {
    let samples = o.samples.unwrap_or(1000);
    let dims = sweep_or_single(o, || {
        (2..=8).flat_map(|n| (2..=4.min(n)).map(move |d| (n, d))).collect()
    });
    if dims.is_empty() {
        return usage("no (n, d) pairs selected");
    }
    let inject = match &o.point {
        Some(p) => vec![parse_point(p)?],
        None => Vec::new(),
    };
    let mut r = Builder::new(params("verify-lemma edmd", o, o.n, o.d));
    let mut rows = Vec::new();
    for &(n, d) in &dims {
        let rep = edmd_oracle(n, d, samples, o.seed, &inject)?;
        r.samples += rep.feasible;
        if let Some(m) = rep.min_ratio.as_ref() {
            r.gap(log2_abs(m) - log2_abs(&rep.bound));
        }
        r.check(format!("edmd.ratio-floor[n={n},d={d}]"), rep.passed(), json!({
            "min_ratio": rep.min_ratio_f64,
            "bound": rational_to_f64(&rep.bound),
            "violations": rep.violations,
        }));
        if !rep.passed() {
            r.failures.push(json!({ "n": n, "d": d, "violations": rep.violations, "argmin": rep.argmin }));
        }
        rows.push(json!(rep));
    }
    Ok(r.finish(json!(rows)))
}

pub fn cmd_jacobi(o: &Opts) -> CliResult<Report> {
    let dims = sweep_or_single(o, || (3..=10).flat_map(|n| (1..n).map(move |d| (n, d))).collect());
    if dims.is_empty() {
        return usage("no (n, d) pairs selected");
    }
    let tol = Tolerance::with_bits(o.tol);
    let mut r = Builder::new(params("verify-lemma jacobi", o, o.n, o.d));
    let rows: Vec<_> = dims.par_iter().map(|&(n, d)| jacobi_sensitivity(n, d, &tol)).collect();
    let mut out = Vec::new();
    for row in rows {
        let js = row?;
        let margin = log2_abs(js.derivative.lo()) - log2_abs(js.bound.lo());
        r.gap(margin);
        r.samples += 1;
        r.check(format!("jacobi.derivative-floor[n={},d={}]", js.n, js.d), js.bound_ok, json!({
            "lambda": js.lambda.mid_f64(),
            "derivative_lo": rational_to_f64(js.derivative.lo()),
            "margin_log2": margin,
        }));
        if !js.bound_ok {
            r.failures.push(json!({ "n": js.n, "d": js.d }));
        }
        out.push(json!(js));
    }
    Ok(r.finish(json!(out)))
}

pub fn cmd_restrictfar(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let pairs = o.pairs.unwrap_or(100);
    let fam = build_family(n, d, o.seed)?;
    let eps = parse_eps(o, n, d, fam.len())?;
    let tol = Tolerance::with_bits(o.tol);
    let mut r = Builder::new(params("verify-lemma restrictfar", o, Some(n), Some(d)));
    let reps: Vec<_> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_stream(o.seed, "restrictfar-pair", i);
            let (a, b) = random_pair(&fam, &eps, &mut rng)?;
            embedding_separation(&a, &b, &tol)
        })
        .collect();
    let mut delta = None;
    for (i, rep) in reps.into_iter().enumerate() {
        let rep = rep?;
        r.gap(rational_to_f64(rep.gap.lo()));
        if !rep.ok {
            r.failures.push(json!({ "pair": i, "gap": rep.gap, "witness_set": rep.witness_set }));
        }
        delta.get_or_insert((rep.delta.clone(), rep.delta_log2));
    }
    r.samples = pairs;
    let ok = r.failures.is_empty();
    let (dv, dl) = delta.unwrap_or((Rational::from_integer(0.into()), f64::NEG_INFINITY));
    r.check("restriction.separation", ok, json!({ "pairs": pairs, "violations": r.failures.len() }));
    r.bounds = Some(json!({ "eps": rational_to_string(&eps), "delta": rational_to_string(&dv), "log2": { "delta": dl, "eps": log2_abs(&eps) } }));
    Ok(r.finish(json!({ "family_size": fam.len() })))
}

pub fn cmd_conetomatrices(o: &Opts) -> CliResult<Report> {
    let pairs = o.pairs.unwrap_or(100);
    let samples = o.samples.unwrap_or(200);
    if let Some(n) = o.n {
        if n == 0 {
            return usage("n must be positive");
        }
    }
    let mut r = Builder::new(params("verify-lemma conetomatrices", o, o.n, None));
    let reps: Vec<_> = (0..pairs)
        .into_par_iter()
        .map(|i| -> hypercone::Result<_> {
            let mut rng = indexed_stream(o.seed, "conetomatrices-pair", i);
            let n = o.n.unwrap_or_else(|| rng.random_range(2..=5));
            let k = rng.random_range(1..=6);
            let hidden = rng.random_bool(0.3);
            let a = normalize(&random_orthant_rep(&mut rng, n, k, hidden), &NormalizeConfig::default())?;
            let scale = 10f64.powf(rng.random_range(-4.0..0.0));
            let b = normalize(&perturb_psd(&a, &mut rng, scale), &NormalizeConfig::default())?;
            conetomatrices_check(&a, &b, samples, rng.random())
        })
        .collect();
    let mut rows = Vec::new();
    for (i, rep) in reps.into_iter().enumerate() {
        let rep = rep?;
        r.gap(rep.bound - rep.hdist_lower);
        r.samples += rep.shift_samples;
        if !rep.passed() {
            r.failures.push(json!({ "pair": i, "report": rep }));
        }
        rows.push(json!(rep));
    }
    let ok = r.failures.is_empty();
    r.check("cone-to-matrices.hdist-and-shift", ok, json!({ "pairs": pairs }));
    Ok(r.finish(json!(rows)))
}

pub fn cmd_nuij(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let polys = o.pairs.unwrap_or(20).max(1);
    let samples = o.samples.unwrap_or(10_000);
    let per = samples.div_ceil(polys);
    let fam = build_family(n, d, o.seed)?;
    let eps = parse_eps(o, n, d, fam.len())?;
    let mut r = Builder::new(params("verify-lemma nuij", o, Some(n), Some(d)));
    let reps: Vec<_> = (0..polys)
        .map(|j| -> hypercone::Result<_> {
            let mut rng = indexed_stream(o.seed, "nuij-poly", j);
            let ps = PerturbedPoly::random(fam.clone(), eps.clone(), &mut rng)?;
            let mut cfg = SamplerConfig::new(per, rng.random());
            cfg.tol = Tolerance::with_bits(o.tol);
            let rep = verify_hyperbolic_sampled(&ps, &cfg);
            Ok((ps, rep))
        })
        .collect();
    let mut rows = Vec::new();
    let mut all_budget = true;
    for (j, res) in reps.into_iter().enumerate() {
        let (ps, rep) = res?;
        r.samples += rep.samples;
        if let Some(g) = &rep.min_gap {
            r.gap(rational_to_f64(g.lo()));
        }
        for f in &rep.failures {
            r.failures.push(json!({ "poly": j, "failure": f }));
        }
        all_budget &= rep.certified_budget;
        rows.push(json!({
            "poly": j,
            "samples": rep.samples,
            "real_rooted": rep.real_rooted,
            "by_kind": rep.by_kind,
            "coefficient_l1_within_budget": rep.certified_budget,
            "coefficients_nonnegative": ps.coefficients_nonnegative(),
            "max_eps_nonnegative": ps.max_eps_nonnegative().map(|e| rational_to_string(&e)),
        }));
    }
    let ok = r.failures.is_empty();
    r.check("hyperbolicity.sampled-real-rooted", ok, json!({ "samples": r.samples, "failures": r.failures.len() }));
    let budget = hypercone::bounds::perturbation_budget(n, d)?;
    r.bounds = Some(json!({
        "eps": rational_to_string(&eps),
        "R": rational_to_string(&budget),
        "coefficient_l1_within_R": all_budget,
        "log2": { "eps": log2_abs(&eps), "R": log2_abs(&budget) },
    }));
    Ok(r.finish(json!({ "family_size": fam.len(), "polys": rows })))
}

/// Probe directions for the sampled estimate: the certificate's witness
/// point and every good-set indicator.
fn probes(fam: &MatchingFamily, witness: &[f64]) -> Vec<Vec<f64>> {
    let n = fam.n;
    std::iter::once(witness.to_vec())
        .filter(|w| !w.is_empty())
        .chain(fam.good_sets.iter().map(|s| indicator::<f64>(n, s)))
        .collect()
}

fn float_cone(ps: &PerturbedPoly) -> HyperbolicCone {
    HyperbolicCone::new(ps.poly().to_scalar::<f64>(), vec![1.0; ps.n()])
}

pub fn cmd_hdist(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let pairs = o.pairs.unwrap_or(20);
    let samples = o.samples.unwrap_or(1000);
    let fam = build_family(n, d, o.seed)?;
    let eps = parse_eps(o, n, d, fam.len())?;
    let tol = Tolerance::with_bits(o.tol);
    let mut r = Builder::new(params("hdist", o, Some(n), Some(d)));
    let rows: Vec<_> = (0..pairs)
        .into_par_iter()
        .map(|i| -> hypercone::Result<_> {
            let mut rng = indexed_stream(o.seed, "hdist-pair", i);
            let (a, b) = random_pair(&fam, &eps, &mut rng)?;
            let cert = hdist_lower_bound_cert(&a, &b, &tol)?;
            let mut cfg = HdistConfig::new(samples, rng.random());
            cfg.probes = probes(&fam, &cert.probe);
            let est = hdist_estimate(&float_cone(&a), &float_cone(&b), &cfg)?;
            Ok((cert, est.lower))
        })
        .collect();
    let mut floor_ok = true;
    let mut est_ok = true;
    let mut out = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        let (cert, est) = row?;
        let consistent = est >= cert.bound_f64 * (1.0 - ESTIMATE_REL_TOL);
        floor_ok &= cert.meets_floor;
        est_ok &= consistent;
        if cert.bound_f64 > 0.0 {
            r.gap(est / cert.bound_f64 - 1.0);
        }
        if !cert.meets_floor || !consistent {
            r.failures.push(json!({ "pair": i, "certificate": cert, "estimate": est }));
        }
        out.push(json!({
            "pair": i,
            "certified_lower": cert.bound_f64,
            "certified_log2": cert.bound_log2,
            "floor_log2": cert.floor_log2,
            "estimate": est,
            "witness_set": cert.witness_set,
        }));
    }
    r.samples = pairs;
    r.check("hdist.certificate-meets-floor", floor_ok, json!({ "pairs": pairs }));
    r.check("hdist.estimate-above-certificate", est_ok, json!({ "rel_tol": ESTIMATE_REL_TOL }));
    Ok(r.finish(json!({ "family_size": fam.len(), "pairs": out })))
}

fn chain_json(chain: &BoundChain, float_only: bool) -> Value {
    let mut log2 = serde_json::Map::new();
    let mut exact = serde_json::Map::new();
    for (name, c) in chain.constants() {
        log2.insert(name.to_string(), json!(c.log2));
        if !float_only {
            exact.insert(name.to_string(), json!(rational_to_string(&c.value)));
        }
    }
    let mut v = json!({
        "log2": log2,
        "max_log2_rel_err": chain.max_log2_rel_err(),
        "floor_meets_gamma": chain.floor_meets_gamma,
        "eps_within_budgets": chain.eps_within_budgets,
        "family_size": chain.family_size,
    });
    if !float_only {
        v["exact"] = Value::Object(exact);
    }
    v
}

pub fn cmd_pack(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let pairs = o.pairs.unwrap_or(20);
    let samples = o.samples.unwrap_or(40);
    let b = o.b.unwrap_or(2);
    let (fam, _) = sample_family_with(n, d, o.seed, &SampleConfig::default())?;
    let fam = Arc::new(fam);
    let eps = parse_eps(o, n, d, fam.len())?;
    let tol = Tolerance::with_bits(o.tol);
    let mut r = Builder::new(params("pack", o, Some(n), Some(d)));
    let v = verify_family(&fam);
    r.check("family.unique-crossing", v.ok, json!({ "matchings": fam.len() }));
    let chain = BoundChain::new(n, d, fam.len(), Some(eps.clone()))?;
    r.check("chain.eps-within-budgets", chain.eps_within_budgets, json!(rational_to_f64(&eps)));
    r.check("chain.log2-consistent", chain.consistent(), json!(chain.max_log2_rel_err()));
    let rows: Vec<_> = (0..pairs)
        .into_par_iter()
        .map(|i| -> hypercone::Result<_> {
            let mut rng = indexed_stream(o.seed, "pack-pair", i);
            let (a, b) = random_pair(&fam, &eps, &mut rng)?;
            let ha = verify_hyperbolic_sampled(&a, &SamplerConfig::new(samples, rng.random()));
            let hb = verify_hyperbolic_sampled(&b, &SamplerConfig::new(samples, rng.random()));
            let sep = embedding_separation(&a, &b, &tol)?;
            let cert = hdist_lower_bound_cert(&a, &b, &tol)?;
            Ok((ha, hb, sep, cert, a.certified_hyperbolic() && b.certified_hyperbolic()))
        })
        .collect();
    let (mut hyp, mut sep_ok, mut cert_ok, mut l1) = (true, true, true, true);
    for (i, row) in rows.into_iter().enumerate() {
        let (ha, hb, sep, cert, budget) = row?;
        r.samples += ha.samples + hb.samples;
        hyp &= ha.passed() && hb.passed();
        sep_ok &= sep.ok;
        cert_ok &= cert.meets_floor;
        l1 &= budget;
        r.gap(rational_to_f64(sep.gap.lo()));
        if !(ha.passed() && hb.passed() && sep.ok && cert.meets_floor) {
            r.failures.push(json!({
                "pair": i,
                "hyperbolic": [ha.passed(), hb.passed()],
                "separated": sep.ok,
                "certificate_meets_floor": cert.meets_floor,
            }));
        }
    }
    r.check("hyperbolicity.sampled-real-rooted", hyp, json!({ "pairs": pairs }));
    r.check("restriction.separation", sep_ok, json!({ "pairs": pairs }));
    r.check("hdist.certificate-meets-floor", cert_ok, json!({ "pairs": pairs }));
    let verdict = chain.packing(b);
    let mut bounds = chain_json(&chain, o.float);
    bounds["packing"] = json!(verdict);
    bounds["coefficient_l1_within_R"] = json!(l1);
    r.bounds = Some(bounds);
    Ok(r.finish(json!({ "family_size": fam.len() })))
}

pub fn cmd_bounds(o: &Opts) -> CliResult<Report> {
    let (n, d) = family_dims(o)?;
    let b = o.b.unwrap_or(2);
    if b == 0 {
        return usage("B must be positive");
    }
    let (fam, _) = sample_family_with(n, d, o.seed, &SampleConfig::default())?;
    let eps = match &o.eps {
        Some(s) => Some(parse_rational(s)?),
        None => None,
    };
    let chain = BoundChain::new(n, d, fam.len(), eps)?;
    let mut r = Builder::new(params("bounds", o, Some(n), Some(d)));
    r.check("chain.log2-consistent", chain.consistent(), json!(chain.max_log2_rel_err()));
    let verdict = chain.packing(b);
    let mut bounds = chain_json(&chain, o.float);
    bounds["packing"] = json!(verdict);
    r.bounds = Some(bounds);
    r.samples = 1;
    Ok(r.finish(json!({ "family_size": fam.len() })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypercone::real_roots::real_root_count;

    #[test]
    fn random_polys_have_distinct_real_roots() {
        for i in 0..50 {
            let mut rng = indexed_stream(1, "poly", i);
            let degree = 2 + i % 11;
            let q = random_distinct_root_poly(&mut rng, degree);
            assert_eq!(q.degree(), degree);
            assert_eq!(real_root_count(&q).unwrap(), degree);
            assert!(interlacing_ratio_check(&q).is_ok());
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let o = Opts { samples: Some(10), seed: 3, ..Default::default() };
        assert_eq!(cmd_aspect(&o).unwrap().to_json(), cmd_aspect(&o).unwrap().to_json());
        let other = Opts { seed: 4, ..o.clone() };
        assert_ne!(cmd_aspect(&o).unwrap().input_hash, cmd_aspect(&other).unwrap().input_hash);
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("1, -2/3,0").unwrap(), vec![Rational::from_integer(1.into()), Rational::new((-2).into(), 3.into()), Rational::from_integer(0.into())]);
        assert!(parse_point("1,,2").is_err());
    }
}
