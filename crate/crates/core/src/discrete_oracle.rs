//! Exact population computations on finite-support joint distributions.
//!
//! For a joint pmf on a finite grid, every population object of the
//! estimation problem has a closed form in coordinates:
//!
//! * the operator `T: H → G` mapping `h(X)` to the best `L²` predictor of it
//!   by functions of `Z` within `G` (matrix `G_G⁻¹·C` with cross-moment
//!   matrix `C_{jb} = E[ψ_j(Z)·φ_b(X)]`), and its Gram adjoint
//!   `T* = G_H⁻¹·Cᵀ`;
//! * the minimum-norm least-squares solutions `h† = T†r`, `g† = (T*)†a` of
//!   `T h ≈ r` and `T* g ≈ a`, where `r` and `a` are the Riesz representers
//!   of the two linear functionals of the problem;
//! * the weak representers `α` solving `T α = g†` and `T* α = h†`;
//! * the orthogonal splits `r = r_∥ + r_⊥` (range closure vs `ker T*`) and
//!   `a = a_∥ + a_⊥` (vs `ker T`).
//!
//! All solves whiten coefficients by Cholesky factors of the population Gram
//! matrices, take one SVD of the whitened operator with a hard relative rank
//! cutoff, and map back — bases are never orthonormalized, and all reported
//! geometry is Gram-correct.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::debiased::{self, NuisanceTuple};
use crate::error::{Error, Result};
use crate::function_space::{BasisSpec, CoefVector, Domain, GramMatrix};
use crate::functionals::FunctionalPair;
use crate::linalg::{self, RankedSvd, SpdFactor};

/// Relative residual above which an `α`-solve is declared unattainable and
/// the solution flagged as violating the source condition.
pub const SOURCE_RESIDUAL_TOL: f64 = 1e-8;

/// A joint probability mass function for `(X, Z)` on a finite grid, together
/// with the conditional mean and variance of an outcome `Y` at every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPMF {
    x_support: Vec<f64>,
    z_support: Vec<f64>,
    /// `prob[(i, l)] = P(X = x_i, Z = z_l)`, rows indexed by x atoms.
    prob: DMatrix<f64>,
    /// `y_mean[(i, l)] = E[Y | X = x_i, Z = z_l]`.
    y_mean: DMatrix<f64>,
    /// `y_var[(i, l)] = Var[Y | X = x_i, Z = z_l]`.
    y_var: DMatrix<f64>,
}

impl JointPMF {
    /// Validating constructor.
    ///
    /// Requires strictly increasing supports, nonnegative cell probabilities
    /// summing to 1 within `1e-12`, strictly positive marginals at every
    /// atom (zero-probability atoms must be pruned by the caller), and
    /// nonnegative conditional variances.
    pub fn new(
        x_support: Vec<f64>,
        z_support: Vec<f64>,
        prob: DMatrix<f64>,
        y_mean: DMatrix<f64>,
        y_var: DMatrix<f64>,
    ) -> Result<Self> {
        let m = x_support.len();
        let k = z_support.len();
        if m == 0 || k == 0 {
            return Err(Error::InvalidPmf("supports must be nonempty".into()));
        }
        for (name, sup) in [("x_support", &x_support), ("z_support", &z_support)] {
            for v in sup.iter() {
                if !v.is_finite() {
                    return Err(Error::InvalidPmf(format!(
                        "{name} contains non-finite value"
                    )));
                }
            }
            if sup.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidPmf(format!(
                    "{name} must be strictly increasing (duplicate atoms are not allowed)"
                )));
            }
        }
        for (name, mat) in [("prob", &prob), ("y_mean", &y_mean), ("y_var", &y_var)] {
            if mat.nrows() != m || mat.ncols() != k {
                return Err(Error::InvalidPmf(format!(
                    "{name} must be {m}×{k}, got {}×{}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPmf(format!(
                    "{name} contains non-finite value"
                )));
            }
        }
        if prob.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidPmf("negative cell probability".into()));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!(
                "cell probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        if y_var.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidPmf("negative conditional variance".into()));
        }
        let pmf = JointPMF {
            x_support,
            z_support,
            prob,
            y_mean,
            y_var,
        };
        for (i, w) in pmf.x_marginal().iter().enumerate() {
            if *w <= 0.0 {
                return Err(Error::InvalidPmf(format!(
                    "x atom {} (value {}) has zero marginal probability; remove it",
                    i, pmf.x_support[i]
                )));
            }
        }
        for (l, w) in pmf.z_marginal().iter().enumerate() {
            if *w <= 0.0 {
                return Err(Error::InvalidPmf(format!(
                    "z atom {} (value {}) has zero marginal probability; remove it",
                    l, pmf.z_support[l]
                )));
            }
        }
        Ok(pmf)
    }

    pub fn x_support(&self) -> &[f64] {
        &self.x_support
    }

    pub fn z_support(&self) -> &[f64] {
        &self.z_support
    }

    pub fn prob(&self) -> &DMatrix<f64> {
        &self.prob
    }

    pub fn y_mean(&self) -> &DMatrix<f64> {
        &self.y_mean
    }

    pub fn y_var(&self) -> &DMatrix<f64> {
        &self.y_var
    }

    /// Marginal `P(X = x_i)` as a vector over x atoms.
    pub fn x_marginal(&self) -> DVector<f64> {
        DVector::from_iterator(self.x_support.len(), self.prob.row_iter().map(|r| r.sum()))
    }

    /// Marginal `P(Z = z_l)` as a vector over z atoms.
    pub fn z_marginal(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.z_support.len(),
            self.prob.column_iter().map(|c| c.sum()),
        )
    }

    /// Exact expectation `E[f(cell)] = Σ prob_{il}·f(i, l)` over grid cells.
    pub fn expect_cells(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.x_support.len() {
            for l in 0..self.z_support.len() {
                let p = self.prob[(i, l)];
                if p > 0.0 {
                    acc += p * f(i, l);
                }
            }
        }
        acc
    }

    /// Exact cross-expectation `E[u(X)·v(Z)]` of two coefficient functions.
    pub fn expect_product(&self, u: &CoefVector, v: &CoefVector) -> Result<f64> {
        if u.domain() != Domain::X {
            return Err(Error::DomainMismatch {
                context: "expect_product first argument".into(),
                expected: "X",
                got: u.domain().name(),
            });
        }
        if v.domain() != Domain::Z {
            return Err(Error::DomainMismatch {
                context: "expect_product second argument".into(),
                expected: "Z",
                got: v.domain().name(),
            });
        }
        let ux = self.eval_on_x(u)?;
        let vz = self.eval_on_z(v)?;
        Ok(self.expect_cells(|i, l| ux[i] * vz[l]))
    }

    /// Evaluate an X-domain function on all x atoms.
    pub(crate) fn eval_on_x(&self, u: &CoefVector) -> Result<Vec<f64>> {
        self.x_support.iter().map(|&t| u.evaluate_at(t)).collect()
    }

    /// Evaluate a Z-domain function on all z atoms.
    pub(crate) fn eval_on_z(&self, v: &CoefVector) -> Result<Vec<f64>> {
        self.z_support.iter().map(|&t| v.evaluate_at(t)).collect()
    }
}

/// The conditional-expectation-type operator between two basis spaces under
/// a fixed population distribution, with cached whitening and SVD.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    hspace: BasisSpec,
    gspace: BasisSpec,
    /// `T = G_G⁻¹·C`, shape (dim G) × (dim H): coefficient action of
    /// `h ↦ argmin_{g∈G} E(h(X) − g(Z))²`.
    matrix: DMatrix<f64>,
    /// Cross-moment matrix `C_{jb} = E[ψ_j(Z)·φ_b(X)]`.
    cross: DMatrix<f64>,
    gram_h: GramMatrix,
    gram_g: GramMatrix,
    factor_h: SpdFactor,
    factor_g: SpdFactor,
    /// Whitened operator `T̃ = L_Gᵀ·T·L_H⁻ᵀ`; its singular values are the
    /// canonical correlations of the problem (top value 1 for saturated
    /// bases containing constants).
    whitened: DMatrix<f64>,
    svd: RankedSvd,
}

/// Build the population operator for `hspace → gspace` under `pmf`.
pub fn build_operator(
    pmf: &JointPMF,
    hspace: &BasisSpec,
    gspace: &BasisSpec,
) -> Result<OperatorMatrix> {
    if hspace.domain != Domain::X {
        return Err(Error::DomainMismatch {
            context: "build_operator hypothesis space".into(),
            expected: "X",
            got: hspace.domain.name(),
        });
    }
    if gspace.domain != Domain::Z {
        return Err(Error::DomainMismatch {
            context: "build_operator instrument space".into(),
            expected: "Z",
            got: gspace.domain.name(),
        });
    }
    if hspace.dimension() == 0 || gspace.dimension() == 0 {
        return Err(Error::InvalidBasis(
            "operator construction requires positive-dimensional spaces".into(),
        ));
    }
    let gram_h = GramMatrix::population(hspace, pmf)?;
    let gram_g = GramMatrix::population(gspace, pmf)?;
    let factor_h = gram_h.factor()?;
    let factor_g = gram_g.factor()?;
    let dx = hspace.design_matrix(pmf.x_support())?;
    let dz = gspace.design_matrix(pmf.z_support())?;
    // C = Dzᵀ·Pᵀ·Dx, q×p
    let cross = dz.tr_mul(&(pmf.prob().tr_mul(&dx)));
    let matrix = factor_g.solve_mat(&cross);
    let whitened = factor_g.l().tr_mul(&matrix) * factor_h.l_inv_t();
    let svd = RankedSvd::new(&whitened, "whitened operator")?;
    Ok(OperatorMatrix {
        hspace: hspace.clone(),
        gspace: gspace.clone(),
        matrix,
        cross,
        gram_h,
        gram_g,
        factor_h,
        factor_g,
        whitened,
        svd,
    })
}

impl OperatorMatrix {
    pub fn hspace(&self) -> &BasisSpec {
        &self.hspace
    }

    pub fn gspace(&self) -> &BasisSpec {
        &self.gspace
    }

    /// The coefficient matrix of `T` (dim G × dim H).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The cross-moment matrix `C_{jb} = E[ψ_j(Z)·φ_b(X)]`.
    pub fn cross(&self) -> &DMatrix<f64> {
        &self.cross
    }

    /// The coefficient matrix of the Gram adjoint `T* = G_H⁻¹·Cᵀ`.
    pub fn adjoint_matrix(&self) -> DMatrix<f64> {
        self.factor_h.solve_mat(&self.cross.transpose())
    }

    pub fn gram_h(&self) -> &GramMatrix {
        &self.gram_h
    }

    pub fn gram_g(&self) -> &GramMatrix {
        &self.gram_g
    }

    /// Whitened singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        self.svd.s.iter().cloned().collect()
    }

    /// Rank after the relative cutoff.
    pub fn rank(&self) -> usize {
        self.svd.rank
    }

    /// Apply `T` to an H-function: the best approximation in `G` of
    /// `E[h(X) | Z]`.
    pub fn apply(&self, h: &CoefVector) -> Result<CoefVector> {
        if h.space() != &self.hspace {
            return Err(Error::DomainMismatch {
                context: "operator application".into(),
                expected: "X",
                got: h.domain().name(),
            });
        }
        CoefVector::new(self.gspace.clone(), &self.matrix * h.coef())
    }

    /// Apply the adjoint `T*` to a G-function.
    pub fn apply_adjoint(&self, g: &CoefVector) -> Result<CoefVector> {
        if g.space() != &self.gspace {
            return Err(Error::DomainMismatch {
                context: "adjoint application".into(),
                expected: "Z",
                got: g.domain().name(),
            });
        }
        CoefVector::new(
            self.hspace.clone(),
            self.factor_h.solve_vec(&self.cross.tr_mul(g.coef())),
        )
    }

    pub(crate) fn whitened(&self) -> &DMatrix<f64> {
        &self.whitened
    }

    pub(crate) fn svd(&self) -> &RankedSvd {
        &self.svd
    }

    pub(crate) fn factor_h(&self) -> &SpdFactor {
        &self.factor_h
    }

    pub(crate) fn factor_g(&self) -> &SpdFactor {
        &self.factor_g
    }

    /// Whiten a G-side coefficient vector.
    fn whiten_g(&self, v: &CoefVector) -> DVector<f64> {
        self.factor_g.whiten(v.coef())
    }

    fn whiten_h(&self, v: &CoefVector) -> DVector<f64> {
        self.factor_h.whiten(v.coef())
    }

    fn unwhiten_g(&self, v: &DVector<f64>) -> Result<CoefVector> {
        CoefVector::new(self.gspace.clone(), self.factor_g.unwhiten(v))
    }

    fn unwhiten_h(&self, v: &DVector<f64>) -> Result<CoefVector> {
        CoefVector::new(self.hspace.clone(), self.factor_h.unwhiten(v))
    }
}

/// The full population solution at a distribution: minimum-norm
/// least-squares solutions, weak representers, orthogonal splits of both
/// Riesz representers, the exact projections ξ, the target value Ψ, and
/// Gram-orthonormal kernel bases.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub h_dagger: CoefVector,
    pub g_dagger: CoefVector,
    pub alpha_h_dagger: CoefVector,
    pub alpha_g_dagger: CoefVector,
    pub r: CoefVector,
    pub r_parallel: CoefVector,
    pub r_perp: CoefVector,
    pub a: CoefVector,
    pub a_parallel: CoefVector,
    pub a_perp: CoefVector,
    /// `T h†` (equals `r_∥`).
    pub xi_h: CoefVector,
    /// `T* g†` (equals `a_∥`).
    pub xi_g: CoefVector,
    /// `T α^{h,†}` (equals `g†`).
    pub xi_alpha_h: CoefVector,
    /// `T* α^{g,†}` (equals `h†`).
    pub xi_alpha_g: CoefVector,
    /// The target `Ψ(P) = E[g†(Z)·h†(X)]`.
    pub psi: f64,
    /// Gram-orthonormal basis of `ker T ⊂ H`.
    pub kernel_h_basis: Vec<CoefVector>,
    pub kernel_g_basis: Vec<CoefVector>,
    /// Whitened singular values, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// True when either `α`-equation has relative residual above
    /// [`SOURCE_RESIDUAL_TOL`], i.e. the weak representers do not exist.
    pub source_condition_violated: bool,
    pub alpha_h_residual: f64,
    pub alpha_g_residual: f64,
}

impl OracleSolution {
    /// The exact nuisance tuple `η†` of this solution.
    pub fn nuisance_tuple(&self) -> NuisanceTuple {
        NuisanceTuple {
            h: self.h_dagger.clone(),
            g: self.g_dagger.clone(),
            alpha_h: self.alpha_h_dagger.clone(),
            alpha_g: self.alpha_g_dagger.clone(),
            xi_h: self.xi_h.clone(),
            xi_g: self.xi_g.clone(),
            xi_alpha_h: self.xi_alpha_h.clone(),
            xi_alpha_g: self.xi_alpha_g.clone(),
            r: self.r.clone(),
            a: self.a.clone(),
        }
    }
}

/// Solve the full population problem for the functional pair under `pmf`.
pub fn solve_oracle(
    op: &OperatorMatrix,
    pmf: &JointPMF,
    fp: &FunctionalPair,
) -> Result<OracleSolution> {
    let r = crate::functionals::population_riesz(fp, pmf, op.gspace())?;
    let a = crate::functionals::population_riesz(fp, pmf, op.hspace())?;
    let svd = op.svd();

    let r_w = op.whiten_g(&r);
    let a_w = op.whiten_h(&a);

    let r_par_w = svd.project_range(&r_w);
    let r_perp_w = &r_w - &r_par_w;
    let a_par_w = svd.project_corange(&a_w);
    let a_perp_w = &a_w - &a_par_w;

    let h_dag_w = svd.pinv_apply(&r_w);
    let g_dag_w = svd.pinv_apply_transpose(&a_w);

    let alpha_h_w = svd.pinv_apply(&g_dag_w);
    let alpha_g_w = svd.pinv_apply_transpose(&h_dag_w);

    let t_w = op.whitened();
    let xi_h_w = t_w * &h_dag_w;
    let xi_g_w = t_w.tr_mul(&g_dag_w);
    let xi_alpha_h_w = t_w * &alpha_h_w;
    let xi_alpha_g_w = t_w.tr_mul(&alpha_g_w);

    let alpha_h_residual = (&xi_alpha_h_w - &g_dag_w).norm();
    let alpha_g_residual = (&xi_alpha_g_w - &h_dag_w).norm();
    let source_condition_violated = alpha_h_residual
        > SOURCE_RESIDUAL_TOL * g_dag_w.norm().max(1.0)
        || alpha_g_residual > SOURCE_RESIDUAL_TOL * h_dag_w.norm().max(1.0);

    let psi = g_dag_w.dot(&xi_h_w);

    // Kernel bases from the symmetric products (a thin SVD cannot see
    // directions beyond min(q, p)). Whitened-orthonormal vectors map back to
    // Gram-orthonormal coefficient vectors.
    let p = op.hspace().dimension();
    let q = op.gspace().dimension();
    let rank = svd.rank;
    let kernel_h_basis = {
        let ker = linalg::smallest_eigenvectors(&t_w.tr_mul(t_w), p - rank);
        (0..ker.ncols())
            .map(|j| op.unwhiten_h(&ker.column(j).into_owned()))
            .collect::<Result<Vec<_>>>()?
    };
    let kernel_g_basis = {
        let ker = linalg::smallest_eigenvectors(&(t_w * t_w.transpose()), q - rank);
        (0..ker.ncols())
            .map(|j| op.unwhiten_g(&ker.column(j).into_owned()))
            .collect::<Result<Vec<_>>>()?
    };

    Ok(OracleSolution {
        h_dagger: op.unwhiten_h(&h_dag_w)?,
        g_dagger: op.unwhiten_g(&g_dag_w)?,
        alpha_h_dagger: op.unwhiten_h(&alpha_h_w)?,
        alpha_g_dagger: op.unwhiten_g(&alpha_g_w)?,
        r,
        r_parallel: op.unwhiten_g(&r_par_w)?,
        r_perp: op.unwhiten_g(&r_perp_w)?,
        a,
        a_parallel: op.unwhiten_h(&a_par_w)?,
        a_perp: op.unwhiten_h(&a_perp_w)?,
        xi_h: op.unwhiten_g(&xi_h_w)?,
        xi_g: op.unwhiten_h(&xi_g_w)?,
        xi_alpha_h: op.unwhiten_g(&xi_alpha_h_w)?,
        xi_alpha_g: op.unwhiten_h(&xi_alpha_g_w)?,
        psi,
        kernel_h_basis,
        kernel_g_basis,
        singular_values: op.singular_values(),
        rank,
        source_condition_violated,
        alpha_h_residual,
        alpha_g_residual,
    })
}

/// Which regularized equation a Tikhonov path solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TikhonovSide {
    /// `h^λ = (T*T + λ)⁻¹ T* target`, target in G (e.g. `r`), output in H.
    Primal,
    /// `g^λ = (T T* + λ)⁻¹ T target`, target in H (e.g. `a`), output in G.
    Dual,
    /// Same normal equations as [`TikhonovSide::Primal`] with the weak
    /// target `g†` in G, yielding the regularized `α^h`.
    WeakRieszPrimal,
    /// Same as [`TikhonovSide::Dual`] with target `h†` in H, yielding the
    /// regularized `α^g`.
    WeakRieszDual,
}

impl TikhonovSide {
    fn primal_direction(self) -> bool {
        matches!(self, TikhonovSide::Primal | TikhonovSide::WeakRieszPrimal)
    }
}

/// Tikhonov-regularized solution path along a grid of penalties.
///
/// Returns `(T*T + λ·I_Gram)⁻¹ T* target` (or the mirror-image dual) in
/// Gram-correct coordinates, one solution per λ. Components whose singular
/// value falls below the rank cutoff are treated as exact zeros.
pub fn tikhonov_path(
    op: &OperatorMatrix,
    target: &CoefVector,
    side: TikhonovSide,
    lambdas: &[f64],
) -> Result<Vec<CoefVector>> {
    for &l in lambdas {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidLambda { value: l });
        }
    }
    let svd = op.svd();
    let primal = side.primal_direction();
    let expected_space = if primal { op.gspace() } else { op.hspace() };
    if target.space() != expected_space {
        return Err(Error::DomainMismatch {
            context: format!("tikhonov_path target for {side:?}"),
            expected: expected_space.domain.name(),
            got: target.domain().name(),
        });
    }
    let t_w = if primal {
        op.whiten_g(target)
    } else {
        op.whiten_h(target)
    };
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let dim = if primal {
            op.hspace().dimension()
        } else {
            op.gspace().dimension()
        };
        let mut sol = DVector::zeros(dim);
        for i in 0..svd.rank {
            let s = svd.s[i];
            let filt = s / (s * s + lambda);
            if primal {
                let c = svd.u.column(i).dot(&t_w) * filt;
                sol.axpy(c, &svd.v.column(i).into_owned(), 1.0);
            } else {
                let c = svd.v.column(i).dot(&t_w) * filt;
                sol.axpy(c, &svd.u.column(i).into_owned(), 1.0);
            }
        }
        out.push(if primal {
            op.unwhiten_h(&sol)?
        } else {
            op.unwhiten_g(&sol)?
        });
    }
    Ok(out)
}

/// Exact decomposition of the population bias of the debiased score at an
/// arbitrary nuisance tuple.
#[derive(Debug, Clone, Serialize)]
pub struct BiasReport {
    /// `E_P[χ(W; η)] − Ψ(P)`.
    pub lhs: f64,
    /// Product-of-errors term `E[(g−g†)(Z)·(h−h†)(X)]`.
    pub term_a: f64,
    /// The three G-side inner products (h/ξ/r block).
    pub term_b: f64,
    /// The three H-side inner products (g/ξ/a block).
    pub term_c: f64,
    /// `|lhs − (term_a + term_b + term_c)|`.
    pub residual: f64,
}

/// Verify the exact bias decomposition of the score at a nuisance tuple.
///
/// The identity certified is
/// `E_P[χ(W;η)] − Ψ(P) = A + B + C` with
/// `A = E[(g−g_P)(h−h_P)]`,
/// `B = ⟨T(h−h_P), T(α_P^h−α^h)⟩ + ⟨Th−ξ^h, Tα^h−ξ^{α_h}⟩ + ⟨Tα^h−ξ^{α_h}, r−r_P⟩`,
/// `C = ⟨T*(g−g_P), T*(α_P^g−α^g)⟩ + ⟨T*α^g−ξ^{α_g}, T*g−ξ^g⟩ + ⟨T*α^g−ξ^{α_g}, a−a_P⟩`,
/// where the anchor `(h_P, g_P, α_P, ξ_P, r_P, a_P)` is the oracle solution.
/// All expectations are exact pmf sums, so the residual is pure float noise
/// regardless of how far `η` is from the anchor.
///
/// The tuple's components must be expressed in the operator's two bases.
pub fn bias_identity_check(
    pmf: &JointPMF,
    op: &OperatorMatrix,
    fp: &FunctionalPair,
    eta: &NuisanceTuple,
    anchor: &OracleSolution,
) -> Result<BiasReport> {
    eta.validate()?;
    for (name, v, space) in [
        ("h", &eta.h, op.hspace()),
        ("alpha_h", &eta.alpha_h, op.hspace()),
        ("xi_g", &eta.xi_g, op.hspace()),
        ("xi_alpha_g", &eta.xi_alpha_g, op.hspace()),
        ("a", &eta.a, op.hspace()),
        ("g", &eta.g, op.gspace()),
        ("alpha_g", &eta.alpha_g, op.gspace()),
        ("xi_h", &eta.xi_h, op.gspace()),
        ("xi_alpha_h", &eta.xi_alpha_h, op.gspace()),
        ("r", &eta.r, op.gspace()),
    ] {
        if v.space() != space {
            return Err(Error::InvalidConfig(format!(
                "bias identity check requires nuisance '{name}' in the operator's basis"
            )));
        }
    }

    let lhs = debiased::population_score_mean(pmf, eta, fp)? - anchor.psi;

    let gram_h = op.gram_h();
    let gram_g = op.gram_g();

    let dh = eta.h.add_scaled(&anchor.h_dagger, -1.0)?;
    let dg = eta.g.add_scaled(&anchor.g_dagger, -1.0)?;
    let term_a = pmf.expect_product(&dh, &dg)?;

    // G-side block.
    let t_dh = op.apply(&dh)?;
    let d_alpha_h = anchor.alpha_h_dagger.add_scaled(&eta.alpha_h, -1.0)?;
    let t_dalpha_h = op.apply(&d_alpha_h)?;
    let th_minus_xih = op.apply(&eta.h)?.add_scaled(&eta.xi_h, -1.0)?;
    let talpha_minus_xiah = op.apply(&eta.alpha_h)?.add_scaled(&eta.xi_alpha_h, -1.0)?;
    let dr = eta.r.add_scaled(&anchor.r, -1.0)?;
    let term_b = gram_g.inner(&t_dh, &t_dalpha_h)?
        + gram_g.inner(&th_minus_xih, &talpha_minus_xiah)?
        + gram_g.inner(&talpha_minus_xiah, &dr)?;

    // H-side block.
    let ts_dg = op.apply_adjoint(&dg)?;
    let d_alpha_g = anchor.alpha_g_dagger.add_scaled(&eta.alpha_g, -1.0)?;
    let ts_dalpha_g = op.apply_adjoint(&d_alpha_g)?;
    let tsg_minus_xig = op.apply_adjoint(&eta.g)?.add_scaled(&eta.xi_g, -1.0)?;
    let tsalpha_minus_xiag = op
        .apply_adjoint(&eta.alpha_g)?
        .add_scaled(&eta.xi_alpha_g, -1.0)?;
    let da = eta.a.add_scaled(&anchor.a, -1.0)?;
    let term_c = gram_h.inner(&ts_dg, &ts_dalpha_g)?
        + gram_h.inner(&tsalpha_minus_xiag, &tsg_minus_xig)?
        + gram_h.inner(&tsalpha_minus_xiag, &da)?;

    let residual = (lhs - (term_a + term_b + term_c)).abs();
    Ok(BiasReport {
        lhs,
        term_a,
        term_b,
        term_c,
        residual,
    })
}
