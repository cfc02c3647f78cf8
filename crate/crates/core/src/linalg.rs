//! Internal dense linear-algebra helpers.
//!
//! Everything here works on small dense matrices. The conventions shared by
//! the oracle and the learners are centralized in this module:
//!
//! * Gram matrices are factored as `G = L·Lᵀ`. Cholesky is attempted first;
//!   a symmetric eigendecomposition is the fallback, with eigenvalues in
//!   `(-REL_EIG_TOL·λ_max, 0)` clamped to zero before deciding whether the
//!   matrix is singular.
//! * Pseudoinverses use a hard relative cutoff: singular values at or below
//!   [`REL_RANK_TOL`] times the largest are treated as exact zeros.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for rank decisions.
pub const REL_RANK_TOL: f64 = 1e-10;

/// Relative tolerance on negative Gram eigenvalues before declaring the
/// matrix indefinite.
pub const REL_EIG_TOL: f64 = 1e-10;

/// Relative ridge added to empirical Gram matrices before factorization:
/// `1e-10 · trace/dim`.
pub const EMPIRICAL_RIDGE: f64 = 1e-10;

/// A symmetric positive-definite factorization `G = L·Lᵀ` with a cached
/// inverse factor, used to whiten coefficient coordinates.
///
/// For a lower-triangular Cholesky factor the whitened coordinates of a
/// coefficient vector `u` are `ũ = Lᵀu`, so that `⟨u, v⟩_G = ũ·ṽ`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    l: DMatrix<f64>,
    l_inv: DMatrix<f64>,
}

impl SpdFactor {
    /// Factor a symmetric positive-definite matrix.
    ///
    /// Falls back to a symmetric eigendecomposition when Cholesky fails.
    /// Eigenvalues in `(-REL_EIG_TOL·λ_max, 0)` are treated as zero; any zero
    /// eigenvalue makes the matrix singular and is reported through
    /// [`Error::SingularPopulationGram`] naming the dominant coefficient of
    /// each null eigenvector. More negative eigenvalues raise
    /// [`Error::NotPositiveSemidefinite`].
    pub fn new(g: &DMatrix<f64>, context: &str) -> Result<Self> {
        let n = g.nrows();
        if n != g.ncols() {
            return Err(Error::dim(
                format!("{context}: square matrix"),
                n,
                g.ncols(),
            ));
        }
        if n == 0 {
            return Ok(SpdFactor {
                l: DMatrix::zeros(0, 0),
                l_inv: DMatrix::zeros(0, 0),
            });
        }
        if let Some(chol) = nalgebra::Cholesky::new(g.clone()) {
            let l = chol.l();
            let l_inv = invert_lower_triangular(&l);
            return Ok(SpdFactor { l, l_inv });
        }
        // Fallback: symmetric eigendecomposition with clamping.
        let eig = nalgebra::SymmetricEigen::new(g.clone());
        let max_eig = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let tol = REL_EIG_TOL * max_eig.max(f64::MIN_POSITIVE);
        let mut null_directions = Vec::new();
        let mut clamped = eig.eigenvalues.clone();
        for (i, ev) in eig.eigenvalues.iter().enumerate() {
            if *ev < -tol {
                return Err(Error::NotPositiveSemidefinite {
                    context: context.to_string(),
                    min_eigenvalue: *ev,
                });
            }
            if *ev <= tol {
                clamped[i] = 0.0;
                let col = eig.eigenvectors.column(i);
                let dominant = col
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .map(|(j, _)| j)
                    .unwrap_or(i);
                null_directions.push(dominant);
            }
        }
        if !null_directions.is_empty() {
            null_directions.sort_unstable();
            null_directions.dedup();
            return Err(Error::SingularPopulationGram {
                context: context.to_string(),
                directions: null_directions,
            });
        }
        // Positive definite but Cholesky failed (extreme conditioning):
        // use the symmetric factor L = Q·Λ^{1/2}.
        let sqrt = clamped.map(f64::sqrt);
        let mut l = eig.eigenvectors.clone();
        let mut l_inv = eig.eigenvectors.transpose();
        for j in 0..n {
            let s = sqrt[j];
            l.column_mut(j).scale_mut(s);
            l_inv.row_mut(j).scale_mut(1.0 / s);
        }
        Ok(SpdFactor { l, l_inv })
    }

    /// The factor `L` with `G = L·Lᵀ`.
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Whitened coordinates `ũ = Lᵀ·u`.
    pub fn whiten(&self, u: &DVector<f64>) -> DVector<f64> {
        self.l.tr_mul(u)
    }

    /// Undo whitening: `u = L⁻ᵀ·ũ`.
    pub fn unwhiten(&self, u_t: &DVector<f64>) -> DVector<f64> {
        self.l_inv.tr_mul(u_t)
    }

    /// Solve `G·x = b`, i.e. `x = L⁻ᵀ·L⁻¹·b`.
    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.l_inv.tr_mul(&(&self.l_inv * b))
    }

    /// Solve `G·X = B` column-wise.
    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.l_inv.tr_mul(&(&self.l_inv * b))
    }

    /// `L⁻ᵀ` as a matrix (used to map whitened operators back).
    pub fn l_inv_t(&self) -> DMatrix<f64> {
        self.l_inv.transpose()
    }
}

fn invert_lower_triangular(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::identity(n, n);
    l.solve_lower_triangular_mut(&mut inv);
    inv
}

/// Thin SVD with a hard relative rank cutoff.
#[derive(Debug, Clone)]
pub struct RankedSvd {
    /// Left singular vectors, `q × min(q,p)`, descending singular values.
    pub u: DMatrix<f64>,
    /// Right singular vectors, `p × min(q,p)`.
    pub v: DMatrix<f64>,
    /// Singular values, descending.
    pub s: DVector<f64>,
    /// Number of singular values strictly above `REL_RANK_TOL · s_max`.
    pub rank: usize,
}

impl RankedSvd {
    pub fn new(m: &DMatrix<f64>, context: &str) -> Result<Self> {
        let svd =
            nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, 0).ok_or_else(|| {
                Error::Numerical {
                    context: context.to_string(),
                    detail: "singular value decomposition did not converge".to_string(),
                }
            })?;
        let u_raw = svd.u.expect("u requested");
        let v_raw = svd.v_t.expect("v_t requested").transpose();
        let s_raw = svd.singular_values;
        if s_raw.is_empty() {
            return Ok(RankedSvd {
                u: u_raw,
                v: v_raw,
                s: s_raw,
                rank: 0,
            });
        }
        // Enforce descending order ourselves; downstream filters and rank
        // cutoffs rely on it.
        let mut order: Vec<usize> = (0..s_raw.len()).collect();
        order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]));
        let s = DVector::from_iterator(order.len(), order.iter().map(|&i| s_raw[i]));
        let u = DMatrix::from_columns(&order.iter().map(|&i| u_raw.column(i)).collect::<Vec<_>>());
        let v = DMatrix::from_columns(&order.iter().map(|&i| v_raw.column(i)).collect::<Vec<_>>());
        let s_max = s.iter().cloned().fold(0.0_f64, f64::max);
        let cutoff = REL_RANK_TOL * s_max;
        let rank = s.iter().filter(|&&x| x > cutoff).count();
        Ok(RankedSvd { u, v, s, rank })
    }

    /// Minimum-norm least-squares solve `argmin ‖M·x − b‖` via the
    /// pseudoinverse: `x = Σ_{i<rank} v_i (u_iᵀ b)/s_i`.
    pub fn pinv_apply(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.v.nrows());
        for i in 0..self.rank {
            let c = self.u.column(i).dot(b) / self.s[i];
            x.axpy(c, &self.v.column(i).into_owned(), 1.0);
        }
        x
    }

    /// Pseudoinverse of the transpose: `x = Σ_{i<rank} u_i (v_iᵀ b)/s_i`.
    pub fn pinv_apply_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.u.nrows());
        for i in 0..self.rank {
            let c = self.v.column(i).dot(b) / self.s[i];
            x.axpy(c, &self.u.column(i).into_owned(), 1.0);
        }
        x
    }

    /// Orthogonal projection onto the column space (span of `u_0..u_{rank}`).
    pub fn project_range(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.u.nrows());
        for i in 0..self.rank {
            let c = self.u.column(i).dot(b);
            x.axpy(c, &self.u.column(i).into_owned(), 1.0);
        }
        x
    }

    /// Orthogonal projection onto the row space (span of `v_0..v_{rank}`).
    pub fn project_corange(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.v.nrows());
        for i in 0..self.rank {
            let c = self.v.column(i).dot(b);
            x.axpy(c, &self.v.column(i).into_owned(), 1.0);
        }
        x
    }
}

/// Orthonormal basis for the eigenspace of the `dim_kernel` smallest
/// eigenvalues of a symmetric PSD matrix (used for operator kernels, where
/// thin SVDs cannot see directions beyond `min(q, p)`).
pub fn smallest_eigenvectors(sym: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let n = sym.nrows();
    if count == 0 {
        return DMatrix::zeros(n, 0);
    }
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut basis = DMatrix::zeros(n, count);
    for (k, &idx) in order.iter().take(count).enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(idx));
    }
    basis
}

/// Add the stabilizing ridge `EMPIRICAL_RIDGE · trace/dim` used on empirical
/// Gram matrices before factorization.
pub fn jittered(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    if n == 0 {
        return g.clone();
    }
    let ridge = EMPIRICAL_RIDGE * g.trace() / n as f64;
    let mut out = g.clone();
    for i in 0..n {
        out[(i, i)] += ridge;
    }
    out
}

/// Solve the symmetric positive-definite system `M x = b` arising from
/// ridge-regularized normal equations, reporting a condition estimate on
/// failure.
pub fn solve_spd_system(m: &DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    if let Some(chol) = nalgebra::Cholesky::new(m.clone()) {
        return Ok(chol.solve(b));
    }
    // Diagnose with the spectrum.
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let rcond = if max > 0.0 { min / max } else { 0.0 };
    Err(Error::SingularSystem {
        context: context.to_string(),
        rcond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spd_factor_reproduces_matrix_and_inverse() {
        let g = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let f = SpdFactor::new(&g, "test").unwrap();
        let rebuilt = f.l() * f.l().transpose();
        assert_relative_eq!(rebuilt, g, epsilon = 1e-12);
        let b = DVector::from_row_slice(&[1.0, -2.0, 3.0]);
        let x = f.solve_vec(&b);
        assert_relative_eq!(&g * &x, b, epsilon = 1e-10);
        // whiten/unwhiten round trip
        let u = DVector::from_row_slice(&[0.3, 0.1, -0.7]);
        assert_relative_eq!(f.unwhiten(&f.whiten(&u)), u, epsilon = 1e-12);
    }

    #[test]
    fn singular_gram_reports_null_direction() {
        // direction 2 carries no mass
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let err = SpdFactor::new(&g, "gram over H").unwrap_err();
        match err {
            Error::SingularPopulationGram { directions, .. } => assert_eq!(directions, vec![2]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(matches!(
            SpdFactor::new(&g, "t").unwrap_err(),
            Error::NotPositiveSemidefinite { .. }
        ));
    }

    #[test]
    fn ranked_svd_rank_cutoff_and_pinv() {
        // rank-1 matrix with a tiny numerical tail
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let svd = RankedSvd::new(&a, "test").unwrap();
        assert_eq!(svd.rank, 1);
        // pinv solves the least-squares problem for b in range
        let x = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let b = &a * &x;
        let sol = svd.pinv_apply(&b);
        assert_relative_eq!(&a * &sol, b, epsilon = 1e-10);
        // minimum-norm: solution is in the row space (parallel to (1,2,3))
        let cross = sol[0] * 2.0 - sol[1];
        assert!(cross.abs() < 1e-12, "solution not minimum-norm");
    }

    #[test]
    fn singular_values_come_out_descending() {
        let a = DMatrix::from_row_slice(3, 3, &[0.3, 0.0, 0.0, 0.0, 1.2, 0.0, 0.0, 0.0, 0.7]);
        let svd = RankedSvd::new(&a, "test").unwrap();
        assert!(svd.s.iter().zip(svd.s.iter().skip(1)).all(|(x, y)| x >= y));
        assert_relative_eq!(svd.s[0], 1.2, epsilon = 1e-12);
        assert_relative_eq!(svd.s[2], 0.3, epsilon = 1e-12);
        // reconstruction survives the reordering
        let rebuilt = &svd.u * DMatrix::from_diagonal(&svd.s) * svd.v.transpose();
        assert_relative_eq!(rebuilt, a, epsilon = 1e-12);
    }

    #[test]
    fn smallest_eigenvectors_span_kernel() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let k = smallest_eigenvectors(&a.tr_mul(&a), 1);
        // kernel of a is e3
        assert_relative_eq!(k.column(0)[2].abs(), 1.0, epsilon = 1e-12);
        assert!((&a * k.column(0).into_owned()).norm() < 1e-12);
    }

    #[test]
    fn jitter_scale_is_relative_to_trace() {
        let g = DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 4.0]));
        let j = jittered(&g);
        assert_relative_eq!(j[(0, 0)], 2.0 + 1e-10 * 3.0, epsilon = 1e-24);
    }
}
