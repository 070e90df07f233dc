//! Cross-checks of the exact and floating paths against independent oracles.

use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use hypercone::hyperbolicity::{cone_contains, hdist_lower_bound_cert, Membership, PerturbedPoly};
use hypercone::matching::sample_family;
use hypercone::poly::{elementary_symmetric, ones, UniPoly};
use hypercone::real_roots::{companion_real_root_count, jacobi_sensitivity, real_root_count, Tolerance};
use hypercone::rng::stream;
use hypercone::scalar::{int, ratio, rational_from_f64};
use hypercone::spectrahedra::{
    frobenius_within_sqrt_k, hdist_estimate, mdist, normalize, packing_bound, random_orthant_rep, spec_cone_contains,
    spectral_norm, HdistConfig, HyperbolicCone, NormalizeConfig, SpectraJson, SpectraRep,
};
use hypercone::{F64UniPoly, QPoly, QUniPoly, Rational};

#[test]
fn elementary_symmetric_matches_subset_sum() {
    let mut rng = stream(1, "ed-oracle");
    for n in 1..=7 {
        for d in 1..=n {
            let p = elementary_symmetric::<Rational>(n, d).unwrap();
            let x: Vec<Rational> = (0..n).map(|_| ratio(rng.random_range(-9..=9), rng.random_range(1..=4))).collect();
            let brute = (0..n)
                .combinations(d)
                .map(|s| s.iter().fold(int(1), |acc, &i| acc * &x[i]))
                .fold(int(0), |a, b| a + b);
            assert_eq!(p.eval(&x).unwrap(), brute);
        }
    }
}

#[test]
fn root_counts_agree_with_companion_eigenvalues() {
    let mut rng = stream(2, "companion");
    for _ in 0..200 {
        // well separated real roots times irreducible quadratics
        let real: Vec<Rational> = (0..rng.random_range(0..5)).map(|i| int(3 * i - 6)).collect();
        let mut q = QUniPoly::from_roots(&real);
        let quadratics = rng.random_range(0..3);
        for _ in 0..quadratics {
            let b = rng.random_range(-3..=3);
            q = &q * &QUniPoly::from_i64(&[b * b + 1 + rng.random_range(1..5), 2 * b, 1]);
        }
        if q.degree() == 0 {
            continue;
        }
        let exact = real_root_count(&q).unwrap();
        assert_eq!(exact, real.len());
        let qf: F64UniPoly = q.to_scalar();
        assert_eq!(companion_real_root_count(&qf, 1e-6), exact, "{q:?}");
    }
}

#[test]
fn jacobi_spot_value() {
    let js = jacobi_sensitivity(3, 2, &Tolerance::default()).unwrap();
    assert!(js.lambda.is_point());
    assert_eq!(js.lambda.lo(), &ratio(-1, 3));
    assert_eq!(js.derivative.lo(), &int(2));
    assert!(js.bound_ok);
}

#[test]
fn product_polynomial_cone_is_the_orthant() {
    // e_n = x_1 ... x_n has the diagonal representation diag(e_i)
    let n = 4;
    let p = elementary_symmetric::<Rational>(n, n).unwrap();
    let mats = (0..n)
        .map(|i| {
            let mut v = DVector::from_element(n, int(0));
            v[i] = int(1);
            DMatrix::from_diagonal(&v)
        })
        .collect();
    let rep = SpectraRep::new(mats).unwrap();
    let mut rng = stream(3, "product");
    for _ in 0..1000 {
        let x: Vec<Rational> = (0..n).map(|_| int(rng.random_range(-3..=6))).collect();
        let hyp = cone_contains(&p, &ones(n), &x).unwrap() != Membership::Outside;
        assert_eq!(spec_cone_contains(&rep, &x, 0.0).unwrap(), hyp, "{x:?}");
    }
}

fn power_iteration(m: &DMatrix<f64>) -> f64 {
    let mut v = DVector::from_fn(m.nrows(), |i, _| 1.0 + i as f64 * 0.37);
    let mut lam = 0.0;
    for _ in 0..2000 {
        let w = m * &v;
        lam = w.norm() / v.norm();
        if lam == 0.0 {
            return 0.0;
        }
        v = w / lam;
    }
    lam
}

#[test]
fn mdist_against_closed_forms() {
    let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_row_slice(v));
    let a = SpectraRep::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
    let b = SpectraRep::new(vec![diag(&[1.1, 0.0]), diag(&[0.0, 1.0])]).unwrap();
    assert!((mdist(&a, &b).unwrap() - 0.1).abs() < 1e-12);

    let mut rng = stream(4, "mdist");
    for _ in 0..50 {
        let c = random_orthant_rep(&mut rng, 2, 2, false);
        let d = random_orthant_rep(&mut rng, 2, 2, false);
        let expect = c
            .mats()
            .iter()
            .zip(d.mats())
            .map(|(x, y)| {
                let m = x - y;
                // eigenvalues of [[a, b], [b, c]]
                let (p, q, r) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
                let mid = 0.5 * (p + r);
                let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
                (mid + rad).abs().max((mid - rad).abs())
            })
            .fold(0.0, f64::max);
        let got = mdist(&c, &d).unwrap();
        assert!((got - expect).abs() <= 1e-10 * (1.0 + expect));
        let pi = c
            .mats()
            .iter()
            .zip(d.mats())
            .map(|(x, y)| power_iteration(&(x - y)))
            .fold(0.0, f64::max);
        assert!((got - pi).abs() <= 1e-6 * (1.0 + got), "{got} vs {pi}");
    }
}

#[test]
fn normalized_matrices_lie_in_the_frobenius_ball() {
    let mut rng = stream(5, "frobenius");
    for i in 0..60 {
        let c = random_orthant_rep(&mut rng, 1 + i % 5, 1 + i % 6, i % 4 == 0);
        let nc = normalize(&c, &NormalizeConfig::default()).unwrap();
        assert!(frobenius_within_sqrt_k(&nc, 1e-9));
        assert!(nc.mats().iter().all(|m| spectral_norm(m) <= 1.0 + 1e-9));
    }
}

#[test]
fn normalize_examples() {
    let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_row_slice(v));
    let c = SpectraRep::new(vec![diag(&[2.0, 0.0, 0.0]), diag(&[0.0, 3.0, 0.0])]).unwrap();
    let nc = normalize(&c, &NormalizeConfig::default()).unwrap();
    assert_eq!(nc.k(), 2);
    let mut entries: Vec<Vec<f64>> = nc.mats().iter().map(|m| m.iter().map(|v| v.abs()).collect()).collect();
    entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for e in entries.iter().flatten() {
        assert!(e.abs() < 1e-12 || (e - 1.0).abs() < 1e-12);
    }
    let bad = SpectraRep::new(vec![diag(&[1.0, -1.0]), diag(&[0.0, 1.0])]).unwrap();
    assert!(normalize(&bad, &NormalizeConfig::default()).is_err());
}

#[test]
fn spectra_json_round_trip() {
    let m = DMatrix::from_row_slice(2, 2, &[ratio(1, 2), ratio(-1, 3), ratio(-1, 3), int(2)]);
    let rep = SpectraRep::new(vec![m.clone(), m]).unwrap();
    let text = serde_json::to_string(&rep.to_json()).unwrap();
    let back: SpectraJson = serde_json::from_str(&text).unwrap();
    assert_eq!(SpectraRep::<Rational>::from_json(&back).unwrap(), rep);
}

#[test]
fn poly_json_round_trip() {
    let p = elementary_symmetric::<Rational>(5, 2).unwrap();
    assert_eq!(QPoly::from_json(&p.to_json()).unwrap(), p);
}

#[test]
fn packing_example_reports_every_constant() {
    let (chain, verdict) = packing_bound(6, 2, 2, 10, None).unwrap();
    for (name, c) in chain.constants() {
        assert!(c.log2.is_finite(), "{name}");
        assert!(c.consistent(), "{name}");
    }
    assert!(verdict.packing_count_log2 > 0.0);
    assert!(verdict.implied_min_b >= 1.0);
}

#[test]
fn sampled_estimate_dominates_certificate() {
    let fam = Arc::new(sample_family(6, 2, 11).unwrap());
    let eps = hypercone::bounds::default_eps(6, 2, fam.len()).unwrap();
    let mut rng = stream(11, "pairs");
    let mut done = 0;
    while done < 3 {
        let a = PerturbedPoly::random(fam.clone(), eps.clone(), &mut rng).unwrap();
        let b = PerturbedPoly::random(fam.clone(), eps.clone(), &mut rng).unwrap();
        if a.s() == b.s() {
            continue;
        }
        let cert = hdist_lower_bound_cert(&a, &b, &Tolerance::with_bits(64)).unwrap();
        assert!(cert.meets_floor);
        let cone = |p: &PerturbedPoly| HyperbolicCone::new(p.poly().to_scalar(), vec![1.0; 6]);
        let mut cfg = HdistConfig::new(50, 1);
        cfg.probes = vec![cert.probe.clone()];
        let est = hdist_estimate(&cone(&a), &cone(&b), &cfg).unwrap();
        assert!(est.lower >= cert.bound_f64 * (1.0 - 1e-3), "{} vs {}", est.lower, cert.bound_f64);
        done += 1;
    }
}

#[test]
fn float_and_exact_restrictions_agree() {
    let p = elementary_symmetric::<Rational>(5, 3).unwrap();
    let pf = elementary_symmetric::<f64>(5, 3).unwrap();
    let mut rng = stream(6, "float-exact");
    for _ in 0..100 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xr: Vec<Rational> = x.iter().map(|&v| rational_from_f64(v)).collect();
        let exact: QUniPoly = p.restrict(&ones(5), &xr).unwrap();
        let float: UniPoly<f64> = pf.restrict(&[1.0; 5], &x).unwrap();
        for k in 0..=3 {
            let e = hypercone::scalar::rational_to_f64(&exact.coeff(k));
            assert!((e - float.coeff(k)).abs() <= 1e-9 * (1.0 + e.abs()));
        }
    }
}
