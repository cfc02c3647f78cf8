//! Finite-dimensional function spaces over scalar variables.
//!
//! A [`BasisSpec`] names an ordered basis (φ_1, …, φ_p) of functions of one
//! variable together with the variable it acts on ([`Domain::X`] or
//! [`Domain::Z`]). Functions are represented by coefficient vectors in that
//! basis ([`CoefVector`]); all geometry (norms, inner products, adjoints)
//! goes through Gram matrices ([`GramMatrix`]) under either an empirical or
//! a population weighting — bases are never orthonormalized.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrete_oracle::JointPMF;
use crate::error::{Error, Result};
use crate::linalg::{self, SpdFactor};

/// Absolute/relative tolerance used to match evaluation points against the
/// atoms of a finite support.
pub(crate) const POINT_MATCH_TOL: f64 = 1e-9;

/// The variable a basis acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// The endogenous/regressor variable.
    X,
    /// The instrument/conditioning variable.
    Z,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::X => "X",
            Domain::Z => "Z",
        }
    }

    /// The other variable.
    pub fn opposite(self) -> Domain {
        match self {
            Domain::X => Domain::Z,
            Domain::Z => Domain::X,
        }
    }
}

/// The family of basis functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisKind {
    /// One indicator per support atom: φ_j(t) = 1{t = points[j]}.
    ///
    /// Saturated for a finite support. An empty point list is the degenerate
    /// zero-dimensional space {0}.
    Indicator { points: Vec<f64> },
    /// Monomials 1, t, t², …, t^degree.
    Polynomial { degree: usize },
    /// Indicators of the cells cut by sorted breakpoints:
    /// (−∞, b₁), [b₁, b₂), …, [b_k, ∞).
    PiecewiseConstant { breakpoints: Vec<f64> },
}

/// An ordered finite basis on one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub domain: Domain,
    pub kind: BasisKind,
}

impl BasisSpec {
    /// Indicator basis over a strictly increasing list of support atoms.
    pub fn indicator(domain: Domain, points: Vec<f64>) -> Result<Self> {
        validate_strictly_increasing(&points, "indicator support")?;
        Ok(BasisSpec {
            domain,
            kind: BasisKind::Indicator { points },
        })
    }

    /// Monomial basis 1, t, …, t^degree.
    pub fn polynomial(domain: Domain, degree: usize) -> Self {
        BasisSpec {
            domain,
            kind: BasisKind::Polynomial { degree },
        }
    }

    /// Piecewise-constant basis on the cells cut by the breakpoints.
    pub fn piecewise_constant(domain: Domain, breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidBasis(
                "piecewise-constant basis needs at least one breakpoint".into(),
            ));
        }
        validate_strictly_increasing(&breakpoints, "breakpoints")?;
        Ok(BasisSpec {
            domain,
            kind: BasisKind::PiecewiseConstant { breakpoints },
        })
    }

    /// Number of basis functions.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            BasisKind::Indicator { points } => points.len(),
            BasisKind::Polynomial { degree } => degree + 1,
            BasisKind::PiecewiseConstant { breakpoints } => breakpoints.len() + 1,
        }
    }

    /// Evaluate all basis functions at one point.
    pub fn evaluate_basis(&self, t: f64) -> Result<DVector<f64>> {
        let p = self.dimension();
        let mut out = DVector::zeros(p);
        match &self.kind {
            // The zero-dimensional space is the zero function: evaluation
            // imposes no membership requirement on the point.
            BasisKind::Indicator { points } if points.is_empty() => {}
            BasisKind::Indicator { points } => {
                let idx = lookup_point(points, t).ok_or_else(|| Error::PointOutsideSupport {
                    context: format!("indicator basis on {}", self.domain.name()),
                    value: t,
                })?;
                out[idx] = 1.0;
            }
            BasisKind::Polynomial { .. } => {
                let mut pw = 1.0;
                for j in 0..p {
                    out[j] = pw;
                    pw *= t;
                }
            }
            BasisKind::PiecewiseConstant { breakpoints } => {
                let cell = breakpoints.partition_point(|b| *b <= t);
                out[cell] = 1.0;
            }
        }
        Ok(out)
    }

    /// The n×p design matrix of basis evaluations at the given points.
    ///
    /// An empty point list yields a 0×p matrix.
    pub fn design_matrix(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.dimension();
        let mut d = DMatrix::zeros(points.len(), p);
        for (i, &t) in points.iter().enumerate() {
            let row = self.evaluate_basis(t)?;
            d.row_mut(i).copy_from(&row.transpose());
        }
        Ok(d)
    }
}

/// Locate `t` among sorted atoms within [`POINT_MATCH_TOL`] (absolute,
/// scaled up for large atoms).
pub(crate) fn lookup_point(points: &[f64], t: f64) -> Option<usize> {
    let idx = points.partition_point(|p| *p < t);
    for cand in [idx.wrapping_sub(1), idx] {
        if let Some(&p) = points.get(cand) {
            if (t - p).abs() <= POINT_MATCH_TOL * p.abs().max(1.0) {
                return Some(cand);
            }
        }
    }
    None
}

fn validate_strictly_increasing(points: &[f64], what: &str) -> Result<()> {
    for p in points {
        if !p.is_finite() {
            return Err(Error::InvalidBasis(format!(
                "{what} contains non-finite value {p}"
            )));
        }
    }
    for w in points.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidBasis(format!(
                "{what} must be strictly increasing (found {} after {})",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// A function represented by coefficients in a [`BasisSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefVector {
    space: BasisSpec,
    coef: DVector<f64>,
}

impl CoefVector {
    pub fn new(space: BasisSpec, coef: DVector<f64>) -> Result<Self> {
        if coef.len() != space.dimension() {
            return Err(Error::dim(
                "coefficient vector",
                space.dimension(),
                coef.len(),
            ));
        }
        Ok(CoefVector { space, coef })
    }

    pub fn zero(space: BasisSpec) -> Self {
        let coef = DVector::zeros(space.dimension());
        CoefVector { space, coef }
    }

    pub fn space(&self) -> &BasisSpec {
        &self.space
    }

    pub fn domain(&self) -> Domain {
        self.space.domain
    }

    pub fn coef(&self) -> &DVector<f64> {
        &self.coef
    }

    /// Evaluate the function at a point.
    pub fn evaluate_at(&self, t: f64) -> Result<f64> {
        Ok(self.space.evaluate_basis(t)?.dot(&self.coef))
    }

    /// `self + c·other`; both must live in the same space.
    pub fn add_scaled(&self, other: &CoefVector, c: f64) -> Result<CoefVector> {
        self.check_same_space(other, "add_scaled")?;
        Ok(CoefVector {
            space: self.space.clone(),
            coef: &self.coef + c * &other.coef,
        })
    }

    pub(crate) fn check_same_space(&self, other: &CoefVector, context: &str) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DomainMismatch {
                context: format!("{context}: coefficient vectors in different spaces"),
                expected: self.space.domain.name(),
                got: other.space.domain.name(),
            });
        }
        Ok(())
    }
}

/// Provenance of a Gram matrix's weighting measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramWeighting {
    /// Averaged over an observed sample of n points.
    EmpiricalSample { n: usize },
    /// Exact expectation under a finite-support distribution.
    PopulationPmf,
}

/// A basis Gram matrix `G_{ab} = E[φ_a(T)·φ_b(T)]` under a stated weighting.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    space: BasisSpec,
    weighting: GramWeighting,
    matrix: DMatrix<f64>,
}

impl GramMatrix {
    /// Exact population Gram under the pmf's marginal on the basis domain.
    pub fn population(space: &BasisSpec, pmf: &JointPMF) -> Result<GramMatrix> {
        let (atoms, weights) = match space.domain {
            Domain::X => (pmf.x_support(), pmf.x_marginal()),
            Domain::Z => (pmf.z_support(), pmf.z_marginal()),
        };
        let d = space.design_matrix(atoms)?;
        let mut weighted = d.clone();
        for (i, w) in weights.iter().enumerate() {
            weighted.row_mut(i).scale_mut(*w);
        }
        let matrix = d.tr_mul(&weighted);
        Ok(GramMatrix {
            space: space.clone(),
            weighting: GramWeighting::PopulationPmf,
            matrix: symmetrize(matrix),
        })
    }

    /// Empirical Gram `(1/n)·Σ φ(tᵢ)φ(tᵢ)ᵀ`.
    pub fn empirical(space: &BasisSpec, points: &[f64]) -> Result<GramMatrix> {
        let n = points.len();
        if n == 0 {
            return Err(Error::TooFewSamples {
                context: "empirical Gram".into(),
                n: 0,
                min: 1,
            });
        }
        let d = space.design_matrix(points)?;
        let matrix = d.tr_mul(&d) / n as f64;
        Ok(GramMatrix {
            space: space.clone(),
            weighting: GramWeighting::EmpiricalSample { n },
            matrix: symmetrize(matrix),
        })
    }

    pub fn space(&self) -> &BasisSpec {
        &self.space
    }

    pub fn weighting(&self) -> GramWeighting {
        self.weighting
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Factor `G = L·Lᵀ`. Empirical Grams receive the stabilizing ridge
    /// `1e-10·trace/dim` first; population Grams are factored exactly and a
    /// singular factorization is an error instructing support pruning.
    pub fn factor(&self) -> Result<SpdFactor> {
        let context = format!("Gram matrix over {}", self.space.domain.name());
        match self.weighting {
            GramWeighting::EmpiricalSample { .. } => {
                SpdFactor::new(&linalg::jittered(&self.matrix), &context)
            }
            GramWeighting::PopulationPmf => SpdFactor::new(&self.matrix, &context),
        }
    }

    /// Inner product `⟨u, v⟩_G = uᵀ·G·v` of two coefficient vectors.
    pub fn inner(&self, u: &CoefVector, v: &CoefVector) -> Result<f64> {
        self.check_member(u)?;
        self.check_member(v)?;
        Ok(u.coef().dot(&(&self.matrix * v.coef())))
    }

    /// Gram norm `‖u‖_G = sqrt(⟨u,u⟩_G)` (clamped at 0 against float noise).
    pub fn norm(&self, u: &CoefVector) -> Result<f64> {
        Ok(self.inner(u, u)?.max(0.0).sqrt())
    }

    fn check_member(&self, u: &CoefVector) -> Result<()> {
        if *u.space() != self.space {
            return Err(Error::DomainMismatch {
                context: "Gram inner product: vector from a different space".into(),
                expected: self.space.domain.name(),
                got: u.space().domain.name(),
            });
        }
        Ok(())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    (m + mt) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point_indicator() -> BasisSpec {
        BasisSpec::indicator(Domain::X, vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn indicator_design_rows_are_unit_vectors() {
        let b = two_point_indicator();
        let d = b.design_matrix(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.nrows(), 3);
        assert_eq!(d.row(0).iter().cloned().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert_eq!(d.row(1).iter().cloned().collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn indicator_rejects_point_outside_support() {
        let b = two_point_indicator();
        assert!(matches!(
            b.evaluate_basis(0.5).unwrap_err(),
            Error::PointOutsideSupport { .. }
        ));
    }

    #[test]
    fn indicator_rejects_duplicate_support_points() {
        assert!(BasisSpec::indicator(Domain::X, vec![0.0, 0.0, 1.0]).is_err());
        assert!(BasisSpec::indicator(Domain::X, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn polynomial_degree_zero_is_constant() {
        let b = BasisSpec::polynomial(Domain::Z, 0);
        assert_eq!(b.dimension(), 1);
        let d = b.design_matrix(&[-3.0, 7.5]).unwrap();
        assert_eq!(d, DMatrix::from_element(2, 1, 1.0));
    }

    #[test]
    fn polynomial_design_contains_monomials() {
        let b = BasisSpec::polynomial(Domain::X, 2);
        let d = b.design_matrix(&[2.0]).unwrap();
        assert_eq!(
            d.row(0).iter().cloned().collect::<Vec<_>>(),
            vec![1.0, 2.0, 4.0]
        );
    }

    #[test]
    fn piecewise_constant_cells() {
        // breakpoints (0.5,): cells (-inf, 0.5) and [0.5, inf)
        let b = BasisSpec::piecewise_constant(Domain::X, vec![0.5]).unwrap();
        assert_eq!(b.dimension(), 2);
        let d = b.design_matrix(&[0.2, 0.9]).unwrap();
        assert_eq!(d.row(0).iter().cloned().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert_eq!(d.row(1).iter().cloned().collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn empty_point_list_gives_zero_row_design() {
        let b = BasisSpec::polynomial(Domain::X, 1);
        let d = b.design_matrix(&[]).unwrap();
        assert_eq!((d.nrows(), d.ncols()), (0, 2));
    }

    #[test]
    fn empirical_gram_matches_explicit_average() {
        let b = two_point_indicator();
        let g = GramMatrix::empirical(&b, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        // 3 of 4 points at the first atom
        let expected = DMatrix::from_row_slice(2, 2, &[0.75, 0.0, 0.0, 0.25]);
        assert_relative_eq!(*g.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn coef_vector_checks_dimension() {
        let b = BasisSpec::indicator(Domain::X, vec![0.0, 1.0]).unwrap();
        assert!(CoefVector::new(b, DVector::zeros(3)).is_err());
    }

    #[test]
    fn evaluate_is_linear_in_coefficients() {
        let b = BasisSpec::polynomial(Domain::Z, 3);
        let u =
            CoefVector::new(b.clone(), DVector::from_row_slice(&[1.0, -2.0, 0.5, 3.0])).unwrap();
        let v =
            CoefVector::new(b.clone(), DVector::from_row_slice(&[0.3, 0.0, 2.0, -1.0])).unwrap();
        let w = u.add_scaled(&v, 2.5).unwrap();
        for t in [-1.2, 0.0, 0.7, 2.0] {
            assert_relative_eq!(
                w.evaluate_at(t).unwrap(),
                u.evaluate_at(t).unwrap() + 2.5 * v.evaluate_at(t).unwrap(),
                epsilon = 1e-12
            );
        }
    }
}
