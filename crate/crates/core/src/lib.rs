//! Debiased estimation of bilinear functionals of least-squares solutions
//! to linear operator equations between function spaces.
//!
//! The quantity of interest is `Ψ(P) = E[g(Z)·h(X)]`, where `h` and `g` are
//! the minimal-norm least-squares solutions of a primal and a dual operator
//! equation induced by the joint law of `(X, Y, Z)`. Neither equation needs
//! an exact solution and neither solution needs to be unique: everything is
//! defined through projections onto operator ranges, and `Ψ` is invariant
//! to the remaining indeterminacy.
//!
//! The crate provides:
//!
//! * finite-dimensional function spaces with population and empirical
//!   geometry ([`function_space`]);
//! * an exact population oracle on discrete designs — operators, singular
//!   structure, minimal-norm solutions, debiasing corrections, Tikhonov
//!   paths, and a term-by-term bias decomposition ([`discrete_oracle`]);
//! * the moment functionals defining the two equations ([`functionals`]);
//! * sample-based learners: penalized minimax estimators for the solutions
//!   and their debiasing corrections, plus least-squares projections
//!   ([`learners`]);
//! * the cross-fitted debiased estimator with confidence intervals
//!   ([`debiased`]);
//! * synthetic designs with prescribed operator spectrum, source exponent,
//!   and kernel masses ([`dgp`]).

pub mod debiased;
pub mod dgp;
pub mod discrete_oracle;
pub mod error;
pub mod function_space;
pub mod functionals;
pub mod learners;
mod linalg;

pub use debiased::{
    estimate, normal_quantile, population_estimate, population_score_mean, score, split_indices,
    EstimateReport, EstimatorConfig, LambdaRule, NuisanceTuple, RotationReport, VarianceMode,
    N_FOLDS,
};
pub use dgp::{realize, sample, Construction, DgpSpec, RealizedDgp, SpectralDesign};
pub use discrete_oracle::{
    bias_identity_check, build_operator, solve_oracle, tikhonov_path, BiasReport, JointPMF,
    OperatorMatrix, OracleSolution, TikhonovSide,
};
pub use error::{Error, Result};
pub use function_space::{BasisKind, BasisSpec, CoefVector, Domain, GramMatrix, GramWeighting};
pub use functionals::{
    eval_m, eval_mtilde, population_riesz, FunctionalPair, OutcomeFunctional, PointWeights,
    TargetFunctional,
};
pub use learners::{
    minimax_dual, minimax_dual_population, minimax_primary, minimax_primary_population,
    minimax_weak_riesz, minimax_weak_riesz_population, projection_ls, projection_ls_population,
    riesz_regression, riesz_regression_population, MinimaxFit, RieszKind, Sample,
};
