use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use hypercone::bounds::BoundChain;
use hypercone::hyperbolicity::{cone_contains, restriction_embedding, Membership, PerturbedPoly};
use hypercone::matching::{sample_family, verify_family};
use hypercone::poly::{elementary_symmetric, ones, UniPoly};
use hypercone::real_roots::{interlacing_ratio_check, jacobi_poly, lambda_max, real_roots, Tolerance};
use hypercone::scalar::{int, ratio};
use hypercone::spectrahedra::{
    hdist_estimate, mdist, normalize, random_orthant_rep, spec_cone_contains, HdistConfig, NormalizeConfig, Orthant,
    SpectraCone, SpectraRep,
};
use hypercone::{QPoly, QUniPoly, Rational};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=6).prop_map(|(p, q)| ratio(p, q))
}

fn rational_vec(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), n)
}

fn ed(n: usize, d: usize) -> QPoly {
    elementary_symmetric::<Rational>(n, d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restriction_matches_direct_evaluation(x in rational_vec(5), e in rational_vec(5), t in small_rational()) {
        let p = ed(5, 3);
        let r = p.restrict(&e, &x).unwrap();
        let point: Vec<Rational> = e.iter().zip(&x).map(|(a, b)| &t * a + b).collect();
        prop_assert_eq!(r.eval(&t), p.eval(&point).unwrap());
        prop_assert!(r.degree() <= 3);
    }

    #[test]
    fn rational_roots_are_recovered_exactly(roots in prop::collection::vec(small_rational(), 1..8)) {
        let q = QUniPoly::from_roots(&roots);
        let set = real_roots(&q, &Tolerance::with_bits(30)).unwrap();
        prop_assert_eq!(set.total_count, roots.len());
        let mut distinct = roots.clone();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(set.len(), distinct.len());
        for (r, expect) in set.roots.iter().zip(&distinct) {
            prop_assert!(r.interval.contains(expect));
            let m = roots.iter().filter(|v| *v == expect).count();
            prop_assert_eq!(r.multiplicity, m);
        }
    }

    #[test]
    fn derivative_roots_stay_inside_segments(roots in prop::collection::btree_set(-30i64..=30, 2..9)) {
        let roots: Vec<Rational> = roots.into_iter().map(int).collect();
        let rep = interlacing_ratio_check(&QUniPoly::from_roots(&roots)).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn membership_is_scale_invariant(x in rational_vec(4), c in 1i64..=50, q in 1i64..=7) {
        let p = ed(4, 2);
        let e = ones::<Rational>(4);
        let scaled: Vec<Rational> = x.iter().map(|v| v * ratio(c, q)).collect();
        prop_assert_eq!(cone_contains(&p, &e, &x).unwrap(), cone_contains(&p, &e, &scaled).unwrap());
    }

    #[test]
    fn cone_is_convex(x in rational_vec(4), y in rational_vec(4)) {
        let p = ed(4, 3);
        let e = ones::<Rational>(4);
        let inside = |v: &[Rational]| cone_contains(&p, &e, v).unwrap() == Membership::Interior;
        if inside(&x) && inside(&y) {
            let mid: Vec<Rational> = x.iter().zip(&y).map(|(a, b)| (a + b) / int(2)).collect();
            prop_assert!(inside(&mid));
        }
    }

    #[test]
    fn perturbed_cone_contains_orthant(seed in 0u64..50, x in prop::collection::vec(0i64..=20, 6)) {
        let fam = Arc::new(sample_family(6, 2, seed).unwrap());
        let eps = hypercone::bounds::default_eps(6, 2, fam.len()).unwrap();
        let mut rng = hypercone::rng::stream(seed, "orthant");
        let ps = PerturbedPoly::random(fam, eps, &mut rng).unwrap();
        let x: Vec<Rational> = x.into_iter().map(int).collect();
        let m = cone_contains(ps.poly(), &ones(6), &x).unwrap();
        prop_assert_ne!(m, Membership::Outside);
        prop_assert!(ps.coefficients_nonnegative());
    }

    #[test]
    fn embedding_moves_only_on_flipped_sets(seed in 0u64..40) {
        let fam = Arc::new(sample_family(6, 2, seed).unwrap());
        let mut rng = hypercone::rng::stream(seed, "embedding");
        let ps = PerturbedPoly::random(fam.clone(), ratio(1, 1 << 20), &mut rng).unwrap();
        let tol = Tolerance::with_bits(40);
        let base = restriction_embedding(&ed(6, 2), &fam, &tol).unwrap();
        let moved = restriction_embedding(ps.poly(), &fam, &tol).unwrap();
        for (i, set) in fam.good_sets.iter().enumerate() {
            let crosser = fam.unique_crosser(set).unwrap();
            if !ps.s()[crosser] {
                prop_assert_eq!(&base[i], &moved[i]);
            } else {
                prop_assert!(base[i] != moved[i]);
            }
        }
    }

    #[test]
    fn sampled_families_verify(n in 4usize..=8, d in 1usize..=3, seed in 0u64..1000) {
        prop_assume!(2 * d <= n);
        let fam = sample_family(n, d, seed).unwrap();
        prop_assert!(verify_family(&fam).ok);
        let round = hypercone::matching::MatchingFamily::from_json(&fam.to_json()).unwrap();
        prop_assert_eq!(round, fam);
    }

    #[test]
    fn log2_chain_agrees_with_exact(n in 3usize..=14, d in 1usize..=4, size in 1usize..=200) {
        prop_assume!(2 * d <= n);
        let chain = BoundChain::new(n, d, size, None).unwrap();
        prop_assert!(chain.consistent(), "{}", chain.max_log2_rel_err());
    }

    #[test]
    fn mdist_is_a_metric(seed in 0u64..500, n in 1usize..=4, k in 1usize..=4) {
        let mut rng = hypercone::rng::stream(seed, "metric");
        let mut draw = || random_orthant_rep(&mut rng, n, k, false);
        let (a, b, c) = (draw(), draw(), draw());
        let ab = mdist(&a, &b).unwrap();
        prop_assert!((ab - mdist(&b, &a).unwrap()).abs() <= 1e-12 * (1.0 + ab));
        prop_assert!(ab <= mdist(&a, &c).unwrap() + mdist(&c, &b).unwrap() + 1e-9);
        prop_assert_eq!(mdist(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn normalize_is_idempotent_on_membership(seed in 0u64..500, n in 1usize..=4, k in 1usize..=5) {
        let mut rng = hypercone::rng::stream(seed, "idempotent");
        let c = random_orthant_rep(&mut rng, n, k, seed % 2 == 0);
        let once = normalize(&c, &NormalizeConfig::default()).unwrap();
        let twice = normalize(&once, &NormalizeConfig::default()).unwrap();
        prop_assert!(twice.check_normalized(1e-9));
        let mut prng = hypercone::rng::stream(seed, "points");
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut prng, -1.0..1.0)).collect();
            let m = hypercone::spectrahedra::min_eigenvalue(&once.pencil(&x).unwrap());
            if m.abs() > 1e-8 {
                let m2 = hypercone::spectrahedra::min_eigenvalue(&twice.pencil(&x).unwrap());
                prop_assert_eq!(m > 0.0, m2 > 0.0);
            }
        }
    }

    #[test]
    fn diagonal_reps_reduce_to_sign_conditions(
        diags in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 3),
        x in prop::collection::vec(-5i64..=5, 3),
    ) {
        let mats: Vec<DMatrix<Rational>> = diags
            .iter()
            .map(|d| DMatrix::from_diagonal(&DVector::from_iterator(3, d.iter().map(|&v| int(v)))))
            .collect();
        let rep = SpectraRep::new(mats).unwrap();
        let xr: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
        let direct = (0..3).all(|row| (0..3).map(|i| diags[i][row] * x[i]).sum::<i64>() >= 0);
        prop_assert_eq!(spec_cone_contains(&rep, &xr, 0.0).unwrap(), direct);
    }

    #[test]
    fn hdist_estimate_is_zero_on_identical_cones(seed in 0u64..200, n in 2usize..=4, k in 1usize..=4) {
        let mut rng = hypercone::rng::stream(seed, "self");
        let c = normalize(&random_orthant_rep(&mut rng, n, k, false), &NormalizeConfig::default()).unwrap();
        let cone = SpectraCone::new(c);
        let est = hdist_estimate(&cone, &cone, &HdistConfig::new(30, seed)).unwrap();
        prop_assert_eq!(est.lower, 0.0);
        let o = Orthant { n };
        prop_assert_eq!(hdist_estimate(&o, &o, &HdistConfig::new(30, seed)).unwrap().lower, 0.0);
    }
}

#[test]
fn jacobi_is_monotone_and_convex_above_largest_root() {
    for n in 3..=8 {
        for d in 1..n {
            let j = jacobi_poly(n, d).unwrap();
            let lam = lambda_max(&j, &Tolerance::with_bits(40)).unwrap();
            let (j1, j2): (UniPoly<Rational>, UniPoly<Rational>) = (j.derivative(), j.nth_derivative(2));
            for step in 0..=40 {
                let t = lam.hi() + ratio(step, 8);
                assert!(j1.eval(&t) >= int(0), "J' at n={n} d={d} step={step}");
                assert!(j2.eval(&t) >= int(0), "J'' at n={n} d={d} step={step}");
            }
        }
    }
}
