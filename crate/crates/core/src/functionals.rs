//! The two continuous linear functionals defining the target parameter.
//!
//! The estimand is the bilinear form `Ψ(P) = E[g†(Z)·h†(X)]` where `h†` and
//! `g†` solve the operator equations driven by two linear functionals:
//!
//! * an outcome functional `g ↦ E[m̃(W; g)]` over instrument-side functions,
//!   with strong Riesz representer `r_P` (for the IV setting
//!   `m̃(w; g) = y·g(z)`, so `r_P` is the projection of `E[Y|Z]`);
//! * a target functional `h ↦ E[m(W; h)]` over hypothesis-side functions,
//!   with representer `a_P` (`m(w; h) = h(x)` gives the average value,
//!   `a_P = 1`).
//!
//! Both maps are linear in the function argument and at most linear in `Y`,
//! which keeps every population quantity computable through conditional
//! means and every empirical moment a plain average.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrete_oracle::JointPMF;
use crate::error::{Error, Result};
use crate::function_space::{lookup_point, BasisSpec, CoefVector, Domain, GramMatrix};
use crate::learners::Sample;

/// A weight function defined by a lookup table on finite support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointWeights {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl PointWeights {
    /// Points must be strictly increasing and finite; one weight per point.
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("weight table must be nonempty".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::dim("weight table", points.len(), weights.len()));
        }
        if points.iter().any(|p| !p.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "weight table contains non-finite value".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "weight table points must be strictly increasing".into(),
            ));
        }
        Ok(PointWeights { points, weights })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        lookup_point(&self.points, t)
            .map(|i| self.weights[i])
            .ok_or_else(|| Error::PointOutsideSupport {
                context: "weight table".into(),
                value: t,
            })
    }
}

/// The outcome-side functional `g ↦ E[m̃(W; g)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutcomeFunctional {
    /// `m̃(w; g) = y·g(z)`: the instrumental-variable outcome pairing whose
    /// representer is the projection of `E[Y|Z]`.
    IvOutcome,
    /// `m̃(w; g) = ω(z)·g(z)` for a known weight `ω`.
    WeightedZ(PointWeights),
}

/// The target-side functional `h ↦ E[m(W; h)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetFunctional {
    /// `m(w; h) = h(x)`: the average value, representer `a_P = 1`.
    AverageValue,
    /// `m(w; h) = ω(x)·h(x)` for a known weight `ω`.
    WeightedX(PointWeights),
}

/// The pair of functionals defining one estimation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalPair {
    pub outcome: OutcomeFunctional,
    pub target: TargetFunctional,
}

impl FunctionalPair {
    /// The instrumental-variable default: `m̃(w;g) = y·g(z)`, `m(w;h) = h(x)`.
    pub fn iv_average() -> Self {
        FunctionalPair {
            outcome: OutcomeFunctional::IvOutcome,
            target: TargetFunctional::AverageValue,
        }
    }
}

impl OutcomeFunctional {
    /// The scalar `c(w)` with `m̃(w; g) = c(w)·g(z)`.
    pub(crate) fn sample_weight(&self, w: &Sample) -> Result<f64> {
        match self {
            OutcomeFunctional::IvOutcome => Ok(w.y),
            OutcomeFunctional::WeightedZ(om) => om.eval(w.z),
        }
    }

    /// The grid `c[(i, l)]` with exact cell value `E-cell[m̃(·; g)] =
    /// c[(i,l)]·g(z_l)`; `Y` enters only through its conditional mean.
    pub(crate) fn cell_multiplier(&self, pmf: &JointPMF) -> Result<DMatrix<f64>> {
        let (m, k) = (pmf.x_support().len(), pmf.z_support().len());
        match self {
            OutcomeFunctional::IvOutcome => Ok(pmf.y_mean().clone()),
            OutcomeFunctional::WeightedZ(om) => {
                let wz: Vec<f64> = pmf
                    .z_support()
                    .iter()
                    .map(|&z| om.eval(z))
                    .collect::<Result<_>>()?;
                Ok(DMatrix::from_fn(m, k, |_, l| wz[l]))
            }
        }
    }
}

impl TargetFunctional {
    /// The scalar `c(w)` with `m(w; h) = c(w)·h(x)`.
    pub(crate) fn sample_weight(&self, w: &Sample) -> Result<f64> {
        match self {
            TargetFunctional::AverageValue => Ok(1.0),
            TargetFunctional::WeightedX(om) => om.eval(w.x),
        }
    }

    /// The grid `c[(i, l)]` with exact cell value `c[(i,l)]·h(x_i)`.
    pub(crate) fn cell_multiplier(&self, pmf: &JointPMF) -> Result<DMatrix<f64>> {
        let (m, k) = (pmf.x_support().len(), pmf.z_support().len());
        match self {
            TargetFunctional::AverageValue => Ok(DMatrix::from_element(m, k, 1.0)),
            TargetFunctional::WeightedX(om) => {
                let wx: Vec<f64> = pmf
                    .x_support()
                    .iter()
                    .map(|&x| om.eval(x))
                    .collect::<Result<_>>()?;
                Ok(DMatrix::from_fn(m, k, |i, _| wx[i]))
            }
        }
    }
}

/// Evaluate `m̃(w; g)` at one sample. `g` must be instrument-side.
pub fn eval_mtilde(fp: &FunctionalPair, w: &Sample, g: &CoefVector) -> Result<f64> {
    if g.domain() != Domain::Z {
        return Err(Error::DomainMismatch {
            context: "eval_mtilde function argument".into(),
            expected: "Z",
            got: g.domain().name(),
        });
    }
    Ok(fp.outcome.sample_weight(w)? * g.evaluate_at(w.z)?)
}

/// Evaluate `m(w; h)` at one sample. `h` must be hypothesis-side.
pub fn eval_m(fp: &FunctionalPair, w: &Sample, h: &CoefVector) -> Result<f64> {
    if h.domain() != Domain::X {
        return Err(Error::DomainMismatch {
            context: "eval_m function argument".into(),
            expected: "X",
            got: h.domain().name(),
        });
    }
    Ok(fp.target.sample_weight(w)? * h.evaluate_at(w.x)?)
}

/// Exact population moment vector `μ_j = E[m̃(W; ψ_j)]` on a Z-basis.
pub fn population_outcome_moments(
    outcome: &OutcomeFunctional,
    pmf: &JointPMF,
    gspace: &BasisSpec,
) -> Result<DVector<f64>> {
    if gspace.domain != Domain::Z {
        return Err(Error::DomainMismatch {
            context: "population outcome moments".into(),
            expected: "Z",
            got: gspace.domain.name(),
        });
    }
    let mult = outcome.cell_multiplier(pmf)?;
    let dz = gspace.design_matrix(pmf.z_support())?;
    // per-atom mass: w_l = Σ_i prob_{il}·c_{il}
    let w = DVector::from_iterator(
        pmf.z_support().len(),
        pmf.prob()
            .component_mul(&mult)
            .column_iter()
            .map(|c| c.sum()),
    );
    Ok(dz.tr_mul(&w))
}

/// Exact population moment vector `ν_b = E[m(W; φ_b)]` on an X-basis.
pub fn population_target_moments(
    target: &TargetFunctional,
    pmf: &JointPMF,
    hspace: &BasisSpec,
) -> Result<DVector<f64>> {
    if hspace.domain != Domain::X {
        return Err(Error::DomainMismatch {
            context: "population target moments".into(),
            expected: "X",
            got: hspace.domain.name(),
        });
    }
    let mult = target.cell_multiplier(pmf)?;
    let dx = hspace.design_matrix(pmf.x_support())?;
    let w = DVector::from_iterator(
        pmf.x_support().len(),
        pmf.prob().component_mul(&mult).row_iter().map(|r| r.sum()),
    );
    Ok(dx.tr_mul(&w))
}

/// Exact population expectation `E[m̃(W; g)]` (Z-side) by cell summation.
pub fn population_mtilde_mean(fp: &FunctionalPair, pmf: &JointPMF, g: &CoefVector) -> Result<f64> {
    if g.domain() != Domain::Z {
        return Err(Error::DomainMismatch {
            context: "population_mtilde_mean".into(),
            expected: "Z",
            got: g.domain().name(),
        });
    }
    let mult = fp.outcome.cell_multiplier(pmf)?;
    let gz = pmf
        .z_support()
        .iter()
        .map(|&z| g.evaluate_at(z))
        .collect::<Result<Vec<_>>>()?;
    Ok(pmf.expect_cells(|i, l| mult[(i, l)] * gz[l]))
}

/// Exact population expectation `E[m(W; h)]` (X-side) by cell summation.
pub fn population_m_mean(fp: &FunctionalPair, pmf: &JointPMF, h: &CoefVector) -> Result<f64> {
    if h.domain() != Domain::X {
        return Err(Error::DomainMismatch {
            context: "population_m_mean".into(),
            expected: "X",
            got: h.domain().name(),
        });
    }
    let mult = fp.target.cell_multiplier(pmf)?;
    let hx = pmf
        .x_support()
        .iter()
        .map(|&x| h.evaluate_at(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(pmf.expect_cells(|i, l| mult[(i, l)] * hx[i]))
}

/// The strong Riesz representer of the functional matching the space's
/// domain: the representer of `g ↦ E[m̃(W;g)]` (`r_P`) for an instrument-side
/// space, of `h ↦ E[m(W;h)]` (`a_P`) for a hypothesis-side space.
///
/// Solves `Gram·c = moment vector` with exact population moments.
pub fn population_riesz(
    fp: &FunctionalPair,
    pmf: &JointPMF,
    space: &BasisSpec,
) -> Result<CoefVector> {
    let moments = match space.domain {
        Domain::Z => population_outcome_moments(&fp.outcome, pmf, space)?,
        Domain::X => population_target_moments(&fp.target, pmf, space)?,
    };
    let gram = GramMatrix::population(space, pmf)?;
    let coef = gram.factor()?.solve_vec(&moments);
    CoefVector::new(space.clone(), coef)
}
