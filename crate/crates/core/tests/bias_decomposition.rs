//! The population mean of the correction score, minus the true target,
//! must decompose exactly into a product-of-errors term and two
//! inner-product remainder terms — for *any* nuisance tuple, not just
//! accurate ones. These tests drive the decomposition with exact,
//! structured, and randomly perturbed tuples.

mod common;

use approx::assert_abs_diff_eq;
use common::{a_perp_dgp, identity_dgp, no_solution_dgp, XorShift};
use lsdml::{
    bias_identity_check, build_operator, population_score_mean, solve_oracle, BasisSpec,
    CoefVector, Domain, NuisanceTuple, RealizedDgp,
};
use nalgebra::DVector;

fn perturbed(v: &CoefVector, rng: &mut XorShift, scale: f64) -> CoefVector {
    let delta = DVector::from_fn(v.coef().len(), |_, _| scale * rng.sym());
    CoefVector::new(v.space().clone(), v.coef() + delta).unwrap()
}

#[test]
fn exact_tuple_has_zero_bias_and_zero_terms() {
    for dgp in [identity_dgp(0.0), no_solution_dgp(0.0), a_perp_dgp(0.0)] {
        let (op, sol) = dgp.solve().unwrap();
        let report =
            bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &sol.nuisance_tuple(), &sol)
                .unwrap();
        assert_abs_diff_eq!(report.lhs, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.term_a, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.term_b, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.term_c, 0.0, epsilon = 1e-10);
        assert!(report.residual < 1e-12);
    }
}

#[test]
fn exact_tuple_recovers_the_target_from_the_score_mean() {
    for dgp in [identity_dgp(0.0), no_solution_dgp(0.0), a_perp_dgp(0.0)] {
        let (_, sol) = dgp.solve().unwrap();
        let mean =
            population_score_mean(&dgp.pmf, &sol.nuisance_tuple(), &dgp.functionals).unwrap();
        assert_abs_diff_eq!(mean, sol.psi, epsilon = 1e-10);
    }
}

#[test]
fn solution_error_alone_does_not_bias_the_score() {
    // Moving h (or g) while keeping the projections and representers exact
    // leaves the score mean untouched: the product term needs both sides.
    let dgp = no_solution_dgp(0.0);
    let (op, sol) = dgp.solve().unwrap();
    let mut rng = XorShift(11);
    for _ in 0..10 {
        let mut eta = sol.nuisance_tuple();
        eta.h = perturbed(&eta.h, &mut rng, 1.0);
        let report = bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &eta, &sol).unwrap();
        assert_abs_diff_eq!(report.lhs, 0.0, epsilon = 1e-9);
        assert!(report.residual < 1e-9);

        let mut eta_g = sol.nuisance_tuple();
        eta_g.g = perturbed(&eta_g.g, &mut rng, 1.0);
        let report_g = bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &eta_g, &sol).unwrap();
        assert_abs_diff_eq!(report_g.lhs, 0.0, epsilon = 1e-9);
    }
}

#[test]
fn joint_solution_errors_produce_exactly_the_product_term() {
    // With both solutions off but everything else exact, the bias is the
    // expected product of the two errors — term A alone.
    let dgp = no_solution_dgp(0.0);
    let (op, sol) = dgp.solve().unwrap();
    let mut rng = XorShift(17);
    for _ in 0..10 {
        let mut eta = sol.nuisance_tuple();
        eta.h = perturbed(&eta.h, &mut rng, 1.0);
        eta.g = perturbed(&eta.g, &mut rng, 1.0);
        let dh = eta.h.add_scaled(&sol.h_dagger, -1.0).unwrap();
        let dg = eta.g.add_scaled(&sol.g_dagger, -1.0).unwrap();
        let product = dgp.pmf.expect_product(&dh, &dg).unwrap();
        let report = bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &eta, &sol).unwrap();
        assert_abs_diff_eq!(report.term_a, product, epsilon = 1e-10);
        assert_abs_diff_eq!(report.lhs, product, epsilon = 1e-9);
        assert_abs_diff_eq!(report.term_b, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.term_c, 0.0, epsilon = 1e-10);
        assert!(report.residual < 1e-9);
    }
}

fn assert_identity_under_random_tuples(dgp: &RealizedDgp, seed: u64, rounds: usize) {
    let (op, sol) = dgp.solve().unwrap();
    let mut rng = XorShift(seed);
    let mut saw_nonzero = false;
    for _ in 0..rounds {
        let base = sol.nuisance_tuple();
        let eta = NuisanceTuple {
            h: perturbed(&base.h, &mut rng, 1.0),
            g: perturbed(&base.g, &mut rng, 1.0),
            alpha_h: perturbed(&base.alpha_h, &mut rng, 1.0),
            alpha_g: perturbed(&base.alpha_g, &mut rng, 1.0),
            xi_h: perturbed(&base.xi_h, &mut rng, 1.0),
            xi_g: perturbed(&base.xi_g, &mut rng, 1.0),
            xi_alpha_h: perturbed(&base.xi_alpha_h, &mut rng, 1.0),
            xi_alpha_g: perturbed(&base.xi_alpha_g, &mut rng, 1.0),
            r: perturbed(&base.r, &mut rng, 1.0),
            a: perturbed(&base.a, &mut rng, 1.0),
        };
        let report = bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &eta, &sol).unwrap();
        assert!(
            report.residual <= 1e-8,
            "decomposition residual {} with lhs {}",
            report.residual,
            report.lhs
        );
        if report.lhs.abs() > 1e-3 {
            saw_nonzero = true;
        }
    }
    assert!(saw_nonzero, "perturbations never produced visible bias");
}

#[test]
fn decomposition_is_exact_for_arbitrary_tuples() {
    assert_identity_under_random_tuples(&identity_dgp(0.3), 101, 25);
    assert_identity_under_random_tuples(&no_solution_dgp(0.3), 202, 25);
    assert_identity_under_random_tuples(&a_perp_dgp(0.3), 303, 25);
}

#[test]
fn decomposition_holds_on_the_reference_instance() {
    let pmf = common::reference_pmf();
    let hs = BasisSpec::indicator(Domain::X, vec![0.0, 1.0, 2.0]).unwrap();
    let gs = BasisSpec::indicator(Domain::Z, vec![0.0, 1.0]).unwrap();
    let op = build_operator(&pmf, &hs, &gs).unwrap();
    let fp = common::reference_functionals();
    let sol = solve_oracle(&op, &pmf, &fp).unwrap();
    let mut rng = XorShift(404);
    for _ in 0..25 {
        let base = sol.nuisance_tuple();
        let eta = NuisanceTuple {
            h: perturbed(&base.h, &mut rng, 2.0),
            g: perturbed(&base.g, &mut rng, 2.0),
            alpha_h: perturbed(&base.alpha_h, &mut rng, 2.0),
            alpha_g: perturbed(&base.alpha_g, &mut rng, 2.0),
            xi_h: perturbed(&base.xi_h, &mut rng, 2.0),
            xi_g: perturbed(&base.xi_g, &mut rng, 2.0),
            xi_alpha_h: perturbed(&base.xi_alpha_h, &mut rng, 2.0),
            xi_alpha_g: perturbed(&base.xi_alpha_g, &mut rng, 2.0),
            r: perturbed(&base.r, &mut rng, 2.0),
            a: perturbed(&base.a, &mut rng, 2.0),
        };
        let report = bias_identity_check(&pmf, &op, &fp, &eta, &sol).unwrap();
        assert!(report.residual <= 1e-8);
    }
}

#[test]
fn tuples_on_wrong_domains_are_rejected() {
    let dgp = identity_dgp(0.0);
    let (op, sol) = dgp.solve().unwrap();
    let mut eta = sol.nuisance_tuple();
    // swap a Z-side component onto the X side
    eta.xi_h = eta.a.clone();
    assert!(bias_identity_check(&dgp.pmf, &op, &dgp.functionals, &eta, &sol).is_err());
}
