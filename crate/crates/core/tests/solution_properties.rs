//! Property-based checks: the least-squares solution structure must hold
//! on arbitrary small discrete designs, not just the curated fixtures.

mod common;

use lsdml::{
    bias_identity_check, build_operator, solve_oracle, BasisSpec, Domain, FunctionalPair,
    GramMatrix, JointPMF,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn arb_joint_instance() -> impl Strategy<Value = JointPMF> {
    (2usize..=4, 2usize..=4)
        .prop_flat_map(|(m, k)| {
            let cells = m * k;
            (
                Just(m),
                Just(k),
                proptest::collection::vec(0.05f64..1.0, cells),
                proptest::collection::vec(-2.0f64..2.0, cells),
                proptest::collection::vec(0.0f64..1.0, cells),
            )
        })
        .prop_map(|(m, k, raw_p, y, v)| {
            let total: f64 = raw_p.iter().sum();
            let prob = DMatrix::from_fn(m, k, |i, l| raw_p[i * k + l] / total);
            let y_mean = DMatrix::from_fn(m, k, |i, l| y[i * k + l]);
            let y_var = DMatrix::from_fn(m, k, |i, l| v[i * k + l]);
            JointPMF::new(
                (0..m).map(|i| i as f64).collect(),
                (0..k).map(|l| l as f64).collect(),
                prob,
                y_mean,
                y_var,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_invariants_hold_on_random_instances(pmf in arb_joint_instance()) {
        let hs = BasisSpec::indicator(Domain::X, pmf.x_support().to_vec()).unwrap();
        let gs = BasisSpec::indicator(Domain::Z, pmf.z_support().to_vec()).unwrap();
        let fp = FunctionalPair::iv_average();
        let op = build_operator(&pmf, &hs, &gs).unwrap();
        let sol = solve_oracle(&op, &pmf, &fp).unwrap();
        let gram_h = GramMatrix::population(&hs, &pmf).unwrap();
        let gram_g = GramMatrix::population(&gs, &pmf).unwrap();

        // the image of each solution is the parallel part of its data
        let th = op.apply(&sol.h_dagger).unwrap();
        let d1 = th.add_scaled(&sol.r_parallel, -1.0).unwrap();
        prop_assert!(gram_g.norm(&d1).unwrap() < 1e-8);
        let tg = op.apply_adjoint(&sol.g_dagger).unwrap();
        let d2 = tg.add_scaled(&sol.a_parallel, -1.0).unwrap();
        prop_assert!(gram_h.norm(&d2).unwrap() < 1e-8);

        // Pythagoras on both data decompositions
        let (r, rp, rq) = (
            gram_g.norm(&sol.r).unwrap(),
            gram_g.norm(&sol.r_parallel).unwrap(),
            gram_g.norm(&sol.r_perp).unwrap(),
        );
        prop_assert!((r * r - rp * rp - rq * rq).abs() < 1e-9);
        let (a, ap, aq) = (
            gram_h.norm(&sol.a).unwrap(),
            gram_h.norm(&sol.a_parallel).unwrap(),
            gram_h.norm(&sol.a_perp).unwrap(),
        );
        prop_assert!((a * a - ap * ap - aq * aq).abs() < 1e-9);

        // kernel dimensions complement the rank
        prop_assert_eq!(sol.kernel_h_basis.len(), hs.dimension() - sol.rank);
        prop_assert_eq!(sol.kernel_g_basis.len(), gs.dimension() - sol.rank);

        // minimal-norm solutions carry no kernel components
        for ker in &sol.kernel_h_basis {
            prop_assert!(gram_h.inner(&sol.h_dagger, ker).unwrap().abs() < 1e-8);
            prop_assert!(gram_h.inner(&sol.alpha_h_dagger, ker).unwrap().abs() < 1e-8);
        }
        for ker in &sol.kernel_g_basis {
            prop_assert!(gram_g.inner(&sol.g_dagger, ker).unwrap().abs() < 1e-8);
            prop_assert!(gram_g.inner(&sol.alpha_g_dagger, ker).unwrap().abs() < 1e-8);
        }

        // the reported target agrees with the direct expectation
        let direct = pmf.expect_product(&sol.h_dagger, &sol.g_dagger).unwrap();
        prop_assert!((direct - sol.psi).abs() < 1e-9);

        // and the exact tuple zeroes the bias decomposition
        let report =
            bias_identity_check(&pmf, &op, &fp, &sol.nuisance_tuple(), &sol).unwrap();
        prop_assert!(report.lhs.abs() < 1e-8);
        prop_assert!(report.residual < 1e-8);
    }

    #[test]
    fn split_sizes_are_balanced_and_partition_everything(
        n in 8usize..200,
        seed in 0u64..1000,
    ) {
        let folds = lsdml::split_indices(n, seed).unwrap();
        prop_assert_eq!(folds.len(), lsdml::N_FOLDS);
        let mut seen = vec![false; n];
        for fold in &folds {
            for &i in fold {
                prop_assert!(!seen[i], "index {} assigned twice", i);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        let (min, max) = (
            *sizes.iter().min().unwrap(),
            *sizes.iter().max().unwrap(),
        );
        prop_assert!(max - min <= 1, "unbalanced folds: {:?}", sizes);
    }
}
