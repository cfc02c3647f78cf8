//! Population oracle against hand-derived reference values and structural
//! invariants that any least-squares solution set must satisfy.

mod common;

use approx::assert_abs_diff_eq;
use common::{no_solution_dgp, reference_functionals, reference_pmf};
use lsdml::{
    build_operator, solve_oracle, BasisSpec, CoefVector, Domain, GramMatrix, OperatorMatrix,
    OracleSolution,
};
use nalgebra::DVector;

fn reference_solution() -> (OperatorMatrix, OracleSolution, lsdml::JointPMF) {
    let pmf = reference_pmf();
    let hs = BasisSpec::indicator(Domain::X, vec![0.0, 1.0, 2.0]).unwrap();
    let gs = BasisSpec::indicator(Domain::Z, vec![0.0, 1.0]).unwrap();
    let op = build_operator(&pmf, &hs, &gs).unwrap();
    let sol = solve_oracle(&op, &pmf, &reference_functionals()).unwrap();
    (op, sol, pmf)
}

#[test]
fn conditional_expectation_matrix_matches_hand_computation() {
    let (op, _, _) = reference_solution();
    // T maps values over x-atoms to conditional means over z-atoms:
    // row l is P(X = · | Z = z_l).
    let t = op.matrix();
    let expected = [[0.4, 0.2, 0.4], [0.2, 0.4, 0.4]];
    for l in 0..2 {
        for i in 0..3 {
            assert_abs_diff_eq!(t[(l, i)], expected[l][i], epsilon = 1e-14);
        }
    }
}

#[test]
fn minimal_norm_solutions_match_hand_derived_values() {
    let (_, sol, _) = reference_solution();
    let expect = |v: &CoefVector, want: &[f64], tol: f64| {
        assert_eq!(v.coef().len(), want.len());
        for (got, want) in v.coef().iter().zip(want) {
            assert_abs_diff_eq!(got, want, epsilon = tol);
        }
    };
    expect(&sol.h_dagger, &[0.6, 1.6, 1.1], 1e-12);
    expect(&sol.g_dagger, &[1.0, 1.0], 1e-12);
    expect(&sol.alpha_h_dagger, &[1.0, 1.0, 1.0], 1e-12);
    expect(&sol.alpha_g_dagger, &[-0.4, 2.6], 1e-12);
    expect(&sol.r, &[1.0, 1.2], 1e-12);
    expect(&sol.a, &[1.0, 1.0, 1.0], 1e-12);
    // both equations solve exactly here
    expect(&sol.xi_h, &[1.0, 1.2], 1e-12);
    expect(&sol.xi_g, &[1.0, 1.0, 1.0], 1e-12);
    expect(&sol.xi_alpha_h, &[1.0, 1.0], 1e-12);
    expect(&sol.xi_alpha_g, &[0.6, 1.6, 1.1], 1e-12);
    assert_abs_diff_eq!(sol.psi, 1.1, epsilon = 1e-12);
}

#[test]
fn spectrum_rank_and_kernels_match_hand_derived_values() {
    let (op, sol, pmf) = reference_solution();
    assert_eq!(sol.rank, 2);
    assert_eq!(sol.singular_values.len(), 2);
    assert_abs_diff_eq!(sol.singular_values[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        sol.singular_values[1],
        (1.0f64 / 15.0).sqrt(),
        epsilon = 1e-12
    );

    // one kernel direction on the hypothesis side, proportional to (1, 1, −1.5)
    assert_eq!(sol.kernel_h_basis.len(), 1);
    assert!(sol.kernel_g_basis.is_empty());
    let ker = &sol.kernel_h_basis[0];
    let gram_h = GramMatrix::population(ker.space(), &pmf).unwrap();
    assert_abs_diff_eq!(gram_h.norm(ker).unwrap(), 1.0, epsilon = 1e-10);
    let reference =
        CoefVector::new(ker.space().clone(), DVector::from_vec(vec![1.0, 1.0, -1.5])).unwrap();
    let cos = gram_h.inner(ker, &reference).unwrap() / gram_h.norm(&reference).unwrap();
    assert_abs_diff_eq!(cos.abs(), 1.0, epsilon = 1e-10);
    // and it is genuinely annihilated by the operator
    let image = op.apply(ker).unwrap();
    assert!(image.coef().norm() < 1e-10);
}

#[test]
fn exactly_solvable_instance_reports_no_residual_mass() {
    let (_, sol, pmf) = reference_solution();
    let gram_g = GramMatrix::population(sol.r.space(), &pmf).unwrap();
    let gram_h = GramMatrix::population(sol.a.space(), &pmf).unwrap();
    assert!(gram_g.norm(&sol.r_perp).unwrap() < 1e-10);
    assert!(gram_h.norm(&sol.a_perp).unwrap() < 1e-10);
    assert!(!sol.source_condition_violated);
    assert!(sol.alpha_h_residual < 1e-10);
    assert!(sol.alpha_g_residual < 1e-10);
}

#[test]
fn solutions_satisfy_normal_equations_and_orthogonality() {
    // On a design without exact solutions the least-squares structure must
    // hold: T h† = r_∥, residual ⟂ range, solutions ⟂ kernels.
    let dgp = no_solution_dgp(0.0);
    let (op, sol) = dgp.solve().unwrap();
    let gram_g = GramMatrix::population(&dgp.gspace, &dgp.pmf).unwrap();
    let gram_h = GramMatrix::population(&dgp.hspace, &dgp.pmf).unwrap();

    // image of the solution is the parallel part
    let image = op.apply(&sol.h_dagger).unwrap();
    let diff = image.add_scaled(&sol.r_parallel, -1.0).unwrap();
    assert!(gram_g.norm(&diff).unwrap() < 1e-9);

    // residual is orthogonal to every operator image (normal equations)
    let residual = sol.r.add_scaled(&image, -1.0).unwrap();
    for b in 0..dgp.hspace.dimension() {
        let mut e = DVector::zeros(dgp.hspace.dimension());
        e[b] = 1.0;
        let basis_fn = CoefVector::new(dgp.hspace.clone(), e).unwrap();
        let t_basis = op.apply(&basis_fn).unwrap();
        assert!(gram_g.inner(&residual, &t_basis).unwrap().abs() < 1e-9);
    }

    // Pythagoras for the data part
    let total = gram_g.norm(&sol.r).unwrap();
    let par = gram_g.norm(&sol.r_parallel).unwrap();
    let perp = gram_g.norm(&sol.r_perp).unwrap();
    assert_abs_diff_eq!(total * total, par * par + perp * perp, epsilon = 1e-9);

    // minimal norm: orthogonal to each kernel direction
    for ker in &sol.kernel_h_basis {
        assert!(gram_h.inner(&sol.h_dagger, ker).unwrap().abs() < 1e-9);
        assert!(gram_h.inner(&sol.alpha_h_dagger, ker).unwrap().abs() < 1e-9);
    }
    for ker in &sol.kernel_g_basis {
        assert!(gram_g.inner(&sol.g_dagger, ker).unwrap().abs() < 1e-9);
        assert!(gram_g.inner(&sol.alpha_g_dagger, ker).unwrap().abs() < 1e-9);
    }
}

#[test]
fn target_value_is_invariant_to_kernel_perturbations() {
    // Ψ = E[g(Z)·h(X)] must not depend on which least-squares solution is
    // plugged in: moving along the kernels cannot change it. The two
    // designs put the indeterminacy on opposite sides.
    let mut rng = common::XorShift(0x9e3779b97f4a7c15);
    let mut kernel_dims = 0;
    for dgp in [common::no_solution_dgp(0.0), common::a_perp_dgp(0.0)] {
        let (_, sol) = dgp.solve().unwrap();
        kernel_dims += sol.kernel_h_basis.len() + sol.kernel_g_basis.len();
        let psi_of =
            |h: &CoefVector, g: &CoefVector| -> f64 { dgp.pmf.expect_product(h, g).unwrap() };
        let base = psi_of(&sol.h_dagger, &sol.g_dagger);
        assert_abs_diff_eq!(base, sol.psi, epsilon = 1e-10);
        for _ in 0..25 {
            let mut h = sol.h_dagger.clone();
            for ker in &sol.kernel_h_basis {
                h = h.add_scaled(ker, 3.0 * rng.sym()).unwrap();
            }
            let mut g = sol.g_dagger.clone();
            for ker in &sol.kernel_g_basis {
                g = g.add_scaled(ker, 3.0 * rng.sym()).unwrap();
            }
            assert_abs_diff_eq!(psi_of(&h, &g), sol.psi, epsilon = 1e-9);
        }
    }
    assert!(kernel_dims >= 2, "fixtures must actually have kernels");
}

#[test]
fn weak_representers_map_onto_the_strong_solutions() {
    // ξ identities: T α_h† = g†, T* α_g† = h† (projections agree because
    // both right-hand sides already lie in the respective ranges).
    let dgp = no_solution_dgp(0.0);
    let (op, sol) = dgp.solve().unwrap();
    let gram_g = GramMatrix::population(&dgp.gspace, &dgp.pmf).unwrap();
    let gram_h = GramMatrix::population(&dgp.hspace, &dgp.pmf).unwrap();

    let th = op.apply(&sol.alpha_h_dagger).unwrap();
    let dg = th.add_scaled(&sol.g_dagger, -1.0).unwrap();
    assert!(gram_g.norm(&dg).unwrap() < 1e-9);

    let tg = op.apply_adjoint(&sol.alpha_g_dagger).unwrap();
    let dh = tg.add_scaled(&sol.h_dagger, -1.0).unwrap();
    assert!(gram_h.norm(&dh).unwrap() < 1e-9);
}
