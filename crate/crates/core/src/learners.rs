//! Closed-form nuisance estimators over linear sieves.
//!
//! Every estimator here is the exact solution of a finite-dimensional
//! convex (or convex–concave) program:
//!
//! * **Minimax Tikhonov learners** for the equation solutions:
//!   `ĥ(λ) = argmin_{h∈H} max_{g∈G} E_n[2(m̃(W;g) − h(X)g(Z)) − g(Z)² + λh(X)²]`,
//!   whose inner maximum is a concave quadratic with best response
//!   `c*(θ) = G_G⁻¹(μ − Cθ)` and whose outer minimum solves
//!   `(Cᵀ G_G⁻¹ C + λ G_H)·θ = Cᵀ G_G⁻¹ μ`. The dual learner `ĝ(λ)` is the
//!   same program with the two spaces' roles swapped and `m̃` replaced by `m`.
//! * **Weak-Riesz minimax learners**: identical algebra with the moment
//!   vector `μ_j = E_n[g₁(Z)ψ_j(Z)]` for a plugged-in `g₁` (oracle or
//!   estimated), producing the regularized weak representers `α`.
//! * **Projection least squares**: OLS of an evaluated function onto the
//!   opposite-side basis.
//! * **Riesz regression**: `argmin_{g∈G} E_n[½g(Z)² − m̃(W;g)]`, i.e.
//!   Gram⁻¹ × moment vector.
//!
//! Each estimator also has a population variant fed exact pmf moments, used
//! to verify population-limit recovery of the oracle targets.
//!
//! Learners are split-agnostic pure functions; sample-splitting bookkeeping
//! belongs to the estimator assembly layer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrete_oracle::JointPMF;
use crate::error::{Error, Result};
use crate::function_space::{BasisSpec, CoefVector, Domain, GramMatrix, GramWeighting};
use crate::functionals::{self, FunctionalPair};
use crate::linalg;

/// One observation `W = (X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Sample {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sample contains non-finite value: ({x}, {y}, {z})"
            )));
        }
        Ok(Sample { x, y, z })
    }
}

/// A solved minimax program: the hypothesis-side estimate, the attained
/// critic, the penalty, and the saddle value of the empirical objective.
#[derive(Debug, Clone)]
pub struct MinimaxFit {
    pub coef: CoefVector,
    pub critic_coef: CoefVector,
    pub lambda: f64,
    pub saddle_value: f64,
}

/// Which strong Riesz representer a regression estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RieszKind {
    /// `r̂`: representer of the outcome functional, over the Z-side space.
    RHat,
    /// `â`: representer of the target functional, over the X-side space.
    AHat,
}

fn check_spaces(hspace: &BasisSpec, gspace: &BasisSpec) -> Result<()> {
    if hspace.domain != Domain::X {
        return Err(Error::DomainMismatch {
            context: "hypothesis space".into(),
            expected: "X",
            got: hspace.domain.name(),
        });
    }
    if gspace.domain != Domain::Z {
        return Err(Error::DomainMismatch {
            context: "instrument space".into(),
            expected: "Z",
            got: gspace.domain.name(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidLambda { value: lambda });
    }
    Ok(())
}

fn check_nonempty(data: &[Sample], context: &str) -> Result<()> {
    if data.is_empty() {
        return Err(Error::TooFewSamples {
            context: context.into(),
            n: 0,
            min: 1,
        });
    }
    Ok(())
}

fn xs(data: &[Sample]) -> Vec<f64> {
    data.iter().map(|w| w.x).collect()
}

fn zs(data: &[Sample]) -> Vec<f64> {
    data.iter().map(|w| w.z).collect()
}

/// The ridge-adjusted penalty matrix: empirical Grams get the same additive
/// jitter the factorization applies, population Grams are used as-is.
fn penalty_matrix(gram: &GramMatrix) -> DMatrix<f64> {
    match gram.weighting() {
        GramWeighting::EmpiricalSample { .. } => linalg::jittered(gram.matrix()),
        GramWeighting::PopulationPmf => gram.matrix().clone(),
    }
}

/// Shared closed-form solve of
/// `min_θ max_c 2cᵀμ − 2cᵀ(cross)θ − cᵀG_c c + λθᵀG_hyp θ`.
///
/// The saddle value reported is the raw (unjittered) objective at the
/// returned pair.
#[allow(clippy::too_many_arguments)]
fn minimax_core(
    hyp_gram: &GramMatrix,
    critic_gram: &GramMatrix,
    cross: &DMatrix<f64>,
    mu: &DVector<f64>,
    hyp_space: &BasisSpec,
    critic_space: &BasisSpec,
    lambda: f64,
    context: &str,
) -> Result<MinimaxFit> {
    check_lambda(lambda)?;
    let p = hyp_space.dimension();
    let q = critic_space.dimension();
    if cross.nrows() != q || cross.ncols() != p {
        return Err(Error::dim(
            format!("{context}: cross-moment matrix rows"),
            q,
            cross.nrows(),
        ));
    }
    let (theta, critic) = if q == 0 {
        // Degenerate critic: the program is a pure ridge, minimized at 0.
        (DVector::zeros(p), DVector::zeros(0))
    } else if p == 0 {
        // Degenerate hypothesis: the critic maximizes unopposed.
        (DVector::zeros(0), critic_gram.factor()?.solve_vec(mu))
    } else {
        let factor_c = critic_gram.factor()?;
        let w = factor_c.solve_mat(cross); // G_c⁻¹·cross
        let mut normal = cross.tr_mul(&w) + lambda * penalty_matrix(hyp_gram);
        // symmetrize float noise before the SPD solve
        normal = (&normal + normal.transpose()) * 0.5;
        let rhs = w.tr_mul(mu);
        let theta = linalg::solve_spd_system(&normal, &rhs, context)?;
        let critic = factor_c.solve_vec(&(mu - cross * &theta));
        (theta, critic)
    };
    let saddle_value = 2.0 * critic.dot(mu)
        - 2.0 * critic.dot(&(cross * &theta))
        - critic.dot(&(critic_gram.matrix() * &critic))
        + lambda * theta.dot(&(hyp_gram.matrix() * &theta));
    Ok(MinimaxFit {
        coef: CoefVector::new(hyp_space.clone(), theta)?,
        critic_coef: CoefVector::new(critic_space.clone(), critic)?,
        lambda,
        saddle_value,
    })
}

/// Empirical cross-moment matrix `E_n[rows(t_row)·cols(t_col)ᵀ]`.
fn empirical_cross(
    row_space: &BasisSpec,
    row_points: &[f64],
    col_space: &BasisSpec,
    col_points: &[f64],
) -> Result<DMatrix<f64>> {
    let dr = row_space.design_matrix(row_points)?;
    let dc = col_space.design_matrix(col_points)?;
    Ok(dr.tr_mul(&dc) / row_points.len() as f64)
}

/// Empirical moment vector `E_n[c_i·basis(t_i)]`.
fn empirical_moments(space: &BasisSpec, points: &[f64], weights: &[f64]) -> Result<DVector<f64>> {
    let d = space.design_matrix(points)?;
    let w = DVector::from_column_slice(weights);
    Ok(d.tr_mul(&w) / points.len() as f64)
}

/// Exact population cross-moment matrix `E[ψ_j(Z)·φ_b(X)]` (q×p).
fn population_cross(
    pmf: &JointPMF,
    hspace: &BasisSpec,
    gspace: &BasisSpec,
) -> Result<DMatrix<f64>> {
    let dx = hspace.design_matrix(pmf.x_support())?;
    let dz = gspace.design_matrix(pmf.z_support())?;
    Ok(dz.tr_mul(&(pmf.prob().tr_mul(&dx))))
}

/// Minimax Tikhonov learner for the primary equation solution `ĥ(λ)`.
pub fn minimax_primary(
    data: &[Sample],
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    fp: &FunctionalPair,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    check_nonempty(data, "minimax_primary")?;
    let (x, z) = (xs(data), zs(data));
    let gram_h = GramMatrix::empirical(hspace, &x)?;
    let gram_g = GramMatrix::empirical(gspace, &z)?;
    let cross = empirical_cross(gspace, &z, hspace, &x)?;
    let sw = data
        .iter()
        .map(|w| fp.outcome.sample_weight(w))
        .collect::<Result<Vec<_>>>()?;
    let mu = empirical_moments(gspace, &z, &sw)?;
    minimax_core(
        &gram_h,
        &gram_g,
        &cross,
        &mu,
        hspace,
        gspace,
        lambda,
        "minimax_primary normal equations",
    )
}

/// Minimax Tikhonov learner for the adjoint equation solution `ĝ(λ)`:
/// role-swapped [`minimax_primary`] with the target functional's moments.
pub fn minimax_dual(
    data: &[Sample],
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    fp: &FunctionalPair,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    check_nonempty(data, "minimax_dual")?;
    let (x, z) = (xs(data), zs(data));
    let gram_h = GramMatrix::empirical(hspace, &x)?;
    let gram_g = GramMatrix::empirical(gspace, &z)?;
    let cross = empirical_cross(hspace, &x, gspace, &z)?;
    let sw = data
        .iter()
        .map(|w| fp.target.sample_weight(w))
        .collect::<Result<Vec<_>>>()?;
    let mu = empirical_moments(hspace, &x, &sw)?;
    minimax_core(
        &gram_g,
        &gram_h,
        &cross,
        &mu,
        gspace,
        hspace,
        lambda,
        "minimax_dual normal equations",
    )
}

/// Weak-Riesz minimax learner.
///
/// With a Z-side plug-in `g₁` this is
/// `α̂^h(g₁,λ) = argmin_{α∈H} max_{g∈G} E_n[2(g₁(Z)g(Z) − α(X)g(Z)) − g(Z)² + λα(X)²]`;
/// with an X-side plug-in `h₁` it is the mirror-image program for `α̂^g`.
/// The plug-in is evaluated pointwise, so it may live in any basis over its
/// domain (the feasible two-stage form composes directly).
pub fn minimax_weak_riesz(
    data: &[Sample],
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    plug_in: &CoefVector,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    check_nonempty(data, "minimax_weak_riesz")?;
    let (x, z) = (xs(data), zs(data));
    let gram_h = GramMatrix::empirical(hspace, &x)?;
    let gram_g = GramMatrix::empirical(gspace, &z)?;
    match plug_in.domain() {
        Domain::Z => {
            let vals = z
                .iter()
                .map(|&t| plug_in.evaluate_at(t))
                .collect::<Result<Vec<_>>>()?;
            let mu = empirical_moments(gspace, &z, &vals)?;
            let cross = empirical_cross(gspace, &z, hspace, &x)?;
            minimax_core(
                &gram_h,
                &gram_g,
                &cross,
                &mu,
                hspace,
                gspace,
                lambda,
                "minimax_weak_riesz normal equations",
            )
        }
        Domain::X => {
            let vals = x
                .iter()
                .map(|&t| plug_in.evaluate_at(t))
                .collect::<Result<Vec<_>>>()?;
            let mu = empirical_moments(hspace, &x, &vals)?;
            let cross = empirical_cross(hspace, &x, gspace, &z)?;
            minimax_core(
                &gram_g,
                &gram_h,
                &cross,
                &mu,
                gspace,
                hspace,
                lambda,
                "minimax_weak_riesz normal equations",
            )
        }
    }
}

/// Least-squares projection of an evaluated function onto the opposite
/// side's basis: `ξ̂(h₁) = argmin_{ξ} E_n[(h₁(X) − ξ(Z))²]` (or the mirror).
pub fn projection_ls(
    data: &[Sample],
    input_fn: &CoefVector,
    target_space: &BasisSpec,
) -> Result<CoefVector> {
    check_nonempty(data, "projection_ls")?;
    if target_space.domain != input_fn.domain().opposite() {
        return Err(Error::DomainMismatch {
            context: "projection_ls target space".into(),
            expected: input_fn.domain().opposite().name(),
            got: target_space.domain.name(),
        });
    }
    let (input_pts, target_pts): (Vec<f64>, Vec<f64>) = match input_fn.domain() {
        Domain::X => (xs(data), zs(data)),
        Domain::Z => (zs(data), xs(data)),
    };
    let vals = input_pts
        .iter()
        .map(|&t| input_fn.evaluate_at(t))
        .collect::<Result<Vec<_>>>()?;
    let gram = GramMatrix::empirical(target_space, &target_pts)?;
    let moments = empirical_moments(target_space, &target_pts, &vals)?;
    let coef = gram.factor()?.solve_vec(&moments);
    CoefVector::new(target_space.clone(), coef)
}

/// Riesz representer regression `argmin_{g} E_n[½g(Z)² − m̃(W;g)]`
/// (or the X-side mirror with `m`): empirical Gram solve against the
/// functional's empirical moments.
pub fn riesz_regression(
    data: &[Sample],
    space: &BasisSpec,
    fp: &FunctionalPair,
    which: RieszKind,
) -> Result<CoefVector> {
    check_nonempty(data, "riesz_regression")?;
    let expected = match which {
        RieszKind::RHat => Domain::Z,
        RieszKind::AHat => Domain::X,
    };
    if space.domain != expected {
        return Err(Error::DomainMismatch {
            context: "riesz_regression space".into(),
            expected: expected.name(),
            got: space.domain.name(),
        });
    }
    let (pts, sw): (Vec<f64>, Vec<f64>) = match which {
        RieszKind::RHat => (
            zs(data),
            data.iter()
                .map(|w| fp.outcome.sample_weight(w))
                .collect::<Result<Vec<_>>>()?,
        ),
        RieszKind::AHat => (
            xs(data),
            data.iter()
                .map(|w| fp.target.sample_weight(w))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let gram = GramMatrix::empirical(space, &pts)?;
    let moments = empirical_moments(space, &pts, &sw)?;
    let coef = gram.factor()?.solve_vec(&moments);
    CoefVector::new(space.clone(), coef)
}

/// [`minimax_primary`] fed exact population moments instead of a sample.
pub fn minimax_primary_population(
    pmf: &JointPMF,
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    fp: &FunctionalPair,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    let gram_h = GramMatrix::population(hspace, pmf)?;
    let gram_g = GramMatrix::population(gspace, pmf)?;
    let cross = population_cross(pmf, hspace, gspace)?;
    let mu = functionals::population_outcome_moments(&fp.outcome, pmf, gspace)?;
    minimax_core(
        &gram_h,
        &gram_g,
        &cross,
        &mu,
        hspace,
        gspace,
        lambda,
        "minimax_primary population normal equations",
    )
}

/// [`minimax_dual`] fed exact population moments.
pub fn minimax_dual_population(
    pmf: &JointPMF,
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    fp: &FunctionalPair,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    let gram_h = GramMatrix::population(hspace, pmf)?;
    let gram_g = GramMatrix::population(gspace, pmf)?;
    let cross = population_cross(pmf, hspace, gspace)?.transpose();
    let mu = functionals::population_target_moments(&fp.target, pmf, hspace)?;
    minimax_core(
        &gram_g,
        &gram_h,
        &cross,
        &mu,
        gspace,
        hspace,
        lambda,
        "minimax_dual population normal equations",
    )
}

/// [`minimax_weak_riesz`] fed exact population moments.
pub fn minimax_weak_riesz_population(
    pmf: &JointPMF,
    hspace: &BasisSpec,
    gspace: &BasisSpec,
    plug_in: &CoefVector,
    lambda: f64,
) -> Result<MinimaxFit> {
    check_spaces(hspace, gspace)?;
    let gram_h = GramMatrix::population(hspace, pmf)?;
    let gram_g = GramMatrix::population(gspace, pmf)?;
    match plug_in.domain() {
        Domain::Z => {
            let dz = gspace.design_matrix(pmf.z_support())?;
            let pz = pmf.z_marginal();
            let vals = pmf
                .z_support()
                .iter()
                .map(|&t| plug_in.evaluate_at(t))
                .collect::<Result<Vec<_>>>()?;
            let w =
                DVector::from_iterator(vals.len(), vals.iter().zip(pz.iter()).map(|(v, p)| v * p));
            let mu = dz.tr_mul(&w);
            let cross = population_cross(pmf, hspace, gspace)?;
            minimax_core(
                &gram_h,
                &gram_g,
                &cross,
                &mu,
                hspace,
                gspace,
                lambda,
                "minimax_weak_riesz population normal equations",
            )
        }
        Domain::X => {
            let dx = hspace.design_matrix(pmf.x_support())?;
            let px = pmf.x_marginal();
            let vals = pmf
                .x_support()
                .iter()
                .map(|&t| plug_in.evaluate_at(t))
                .collect::<Result<Vec<_>>>()?;
            let w =
                DVector::from_iterator(vals.len(), vals.iter().zip(px.iter()).map(|(v, p)| v * p));
            let mu = dx.tr_mul(&w);
            let cross = population_cross(pmf, hspace, gspace)?.transpose();
            minimax_core(
                &gram_g,
                &gram_h,
                &cross,
                &mu,
                gspace,
                hspace,
                lambda,
                "minimax_weak_riesz population normal equations",
            )
        }
    }
}

/// [`projection_ls`] fed exact population moments.
pub fn projection_ls_population(
    pmf: &JointPMF,
    input_fn: &CoefVector,
    target_space: &BasisSpec,
) -> Result<CoefVector> {
    if target_space.domain != input_fn.domain().opposite() {
        return Err(Error::DomainMismatch {
            context: "projection_ls target space".into(),
            expected: input_fn.domain().opposite().name(),
            got: target_space.domain.name(),
        });
    }
    let gram = GramMatrix::population(target_space, pmf)?;
    let moments = match input_fn.domain() {
        Domain::X => {
            let vx = DVector::from_vec(
                pmf.x_support()
                    .iter()
                    .map(|&t| input_fn.evaluate_at(t))
                    .collect::<Result<Vec<_>>>()?,
            );
            let dz = target_space.design_matrix(pmf.z_support())?;
            dz.tr_mul(&(pmf.prob().tr_mul(&vx)))
        }
        Domain::Z => {
            let vz = DVector::from_vec(
                pmf.z_support()
                    .iter()
                    .map(|&t| input_fn.evaluate_at(t))
                    .collect::<Result<Vec<_>>>()?,
            );
            let dx = target_space.design_matrix(pmf.x_support())?;
            dx.tr_mul(&(pmf.prob() * &vz))
        }
    };
    let coef = gram.factor()?.solve_vec(&moments);
    CoefVector::new(target_space.clone(), coef)
}

/// [`riesz_regression`] fed exact population moments; identical to the
/// population Riesz representer on the requested side.
pub fn riesz_regression_population(
    pmf: &JointPMF,
    space: &BasisSpec,
    fp: &FunctionalPair,
    which: RieszKind,
) -> Result<CoefVector> {
    let expected = match which {
        RieszKind::RHat => Domain::Z,
        RieszKind::AHat => Domain::X,
    };
    if space.domain != expected {
        return Err(Error::DomainMismatch {
            context: "riesz_regression space".into(),
            expected: expected.name(),
            got: space.domain.name(),
        });
    }
    functionals::population_riesz(fp, pmf, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_point_spaces() -> (BasisSpec, BasisSpec) {
        (
            BasisSpec::indicator(Domain::X, vec![0.0, 1.0]).unwrap(),
            BasisSpec::indicator(Domain::Z, vec![0.0, 1.0]).unwrap(),
        )
    }

    fn identity_data() -> Vec<Sample> {
        // X = Z, Y = X, balanced.
        (0..8)
            .map(|i| {
                let v = (i % 2) as f64;
                Sample::new(v, v, v).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_plug_in_gives_zero_weak_representer() {
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let g1 = CoefVector::zero(gs.clone());
        let fit = minimax_weak_riesz(&data, &hs, &gs, &g1, 0.1).unwrap();
        assert!(fit.coef.coef().norm() < 1e-12);
        assert!(fit.critic_coef.coef().norm() < 1e-12);
        assert_abs_diff_eq!(fit.saddle_value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn huge_penalty_crushes_the_estimate() {
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let fit = minimax_primary(&data, &hs, &gs, &FunctionalPair::iv_average(), 1e8).unwrap();
        assert!(fit.coef.coef().norm() < 1e-3);
    }

    #[test]
    fn degenerate_critic_returns_pure_ridge_zero() {
        let hs = BasisSpec::indicator(Domain::X, vec![0.0, 1.0]).unwrap();
        let gs = BasisSpec::indicator(Domain::Z, vec![]).unwrap();
        let data = identity_data();
        let fit = minimax_primary(&data, &hs, &gs, &FunctionalPair::iv_average(), 0.5).unwrap();
        assert!(fit.coef.coef().norm() == 0.0);
        assert_eq!(fit.critic_coef.coef().len(), 0);
        assert_abs_diff_eq!(fit.saddle_value, 0.0);
    }

    #[test]
    fn saddle_value_matches_attained_objective_identity() {
        // At the closed-form pair, the objective equals cᵀG_c c + λθᵀG_h θ.
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let fit = minimax_primary(&data, &hs, &gs, &FunctionalPair::iv_average(), 0.3).unwrap();
        let gram_h = GramMatrix::empirical(&hs, &xs(&data)).unwrap();
        let gram_g = GramMatrix::empirical(&gs, &zs(&data)).unwrap();
        let c = fit.critic_coef.coef();
        let t = fit.coef.coef();
        let expected = c.dot(&(gram_g.matrix() * c)) + fit.lambda * t.dot(&(gram_h.matrix() * t));
        // The identity holds up to the solver jitter (1e-10 scale).
        assert_abs_diff_eq!(fit.saddle_value, expected, epsilon = 1e-8);
    }

    #[test]
    fn projection_onto_saturated_basis_of_same_variable_is_exact() {
        // X = Z ⟹ regressing h₁(X) on the saturated Z-basis reproduces h₁.
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let h1 = CoefVector::new(hs, nalgebra::dvector![2.5, -1.0]).unwrap();
        let xi = projection_ls(&data, &h1, &gs).unwrap();
        assert_abs_diff_eq!(xi.evaluate_at(0.0).unwrap(), 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(xi.evaluate_at(1.0).unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_input_projects_to_zero() {
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let h1 = CoefVector::zero(hs);
        let xi = projection_ls(&data, &h1, &gs).unwrap();
        assert!(xi.coef().norm() < 1e-12);
    }

    #[test]
    fn riesz_regression_recovers_conditional_mean_in_the_limit() {
        // Empirical version on balanced identity data: r̂(z) = E_n[Y|Z=z] = z.
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let fp = FunctionalPair::iv_average();
        let r = riesz_regression(&data, &gs, &fp, RieszKind::RHat).unwrap();
        assert_abs_diff_eq!(r.evaluate_at(0.0).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.evaluate_at(1.0).unwrap(), 1.0, epsilon = 1e-8);
        let a = riesz_regression(&data, &hs, &fp, RieszKind::AHat).unwrap();
        assert_abs_diff_eq!(a.evaluate_at(0.0).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(a.evaluate_at(1.0).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn domain_checks_reject_swapped_spaces() {
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let fp = FunctionalPair::iv_average();
        assert!(minimax_primary(&data, &gs, &gs, &fp, 0.1).is_err());
        assert!(riesz_regression(&data, &hs, &fp, RieszKind::RHat).is_err());
        assert!(riesz_regression(&data, &gs, &fp, RieszKind::AHat).is_err());
    }

    #[test]
    fn empty_data_is_rejected() {
        let (hs, gs) = two_point_spaces();
        let fp = FunctionalPair::iv_average();
        assert!(minimax_primary(&[], &hs, &gs, &fp, 0.1).is_err());
        assert!(projection_ls(&[], &CoefVector::zero(hs), &gs).is_err());
    }

    #[test]
    fn invalid_lambda_is_rejected() {
        let (hs, gs) = two_point_spaces();
        let data = identity_data();
        let fp = FunctionalPair::iv_average();
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                minimax_primary(&data, &hs, &gs, &fp, bad),
                Err(Error::InvalidLambda { .. })
            ));
        }
    }
}
