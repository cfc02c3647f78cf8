//! Synthetic data-generating processes with exact ground truth.
//!
//! Two constructions:
//!
//! * **Explicit**: a joint probability table plus conditional outcome
//!   moments, taken as-is.
//! * **Spectral**: a design that *prescribes the whitened singular values*
//!   of the induced operator. A projected fixed-point loop alternates
//!   between (a) resetting the singular values of the standardized table to
//!   the targets and (b) projecting back onto the set of nonnegative,
//!   normalized probability tables. On convergence the table's operator has
//!   the requested spectrum to 1e-8 relative, so source exponents, kernel
//!   masses, and Tikhonov rate exponents are all controlled exactly.
//!
//! The spectral design then chooses `E[Y|X,Z]` so the outcome representer
//! is `r_P = r_∥ + r_⊥` with coefficient of `r_∥` on the `t`-th left
//! singular direction proportional to `s_t^{β+1}` (a β-source function,
//! unit norm) and `‖r_⊥‖` equal to the requested kernel mass; the target
//! functional's representer receives its kernel mass through a weighted
//! average-value functional. Both regimes the theory cares about — no exact
//! equation solution, and exactly failed identification — are therefore
//! available with known oracle values.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::discrete_oracle::{
    build_operator, solve_oracle, JointPMF, OperatorMatrix, OracleSolution,
};
use crate::error::{Error, Result};
use crate::function_space::{BasisSpec, Domain};
use crate::functionals::{FunctionalPair, OutcomeFunctional, PointWeights, TargetFunctional};
use crate::learners::Sample;
use crate::linalg::{self, RankedSvd};

/// Iteration cap of the spectrum-matching fixed-point loop.
pub const REALIZE_MAX_ITERS: usize = 10_000;
/// Mixing step of the fixed-point update.
pub const REALIZE_STEP: f64 = 0.1;
/// Relative spectral deviation at which the loop declares convergence.
pub const REALIZE_TOL: f64 = 1e-8;
/// Cap on the post-convergence polish rounds.
pub const POLISH_MAX_ROUNDS: usize = 500;
/// Ceiling for unprescribed singular values after polishing; keeping the
/// tail this small makes the rank decision unambiguous, so prescribed
/// kernel directions really are kernel directions.
pub const POLISH_TAIL_TOL: f64 = 1e-12;

/// A data-generating process specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    /// Label carried into experiment outputs.
    pub name: String,
    /// Strictly increasing finite atoms of `X`.
    pub x_support: Vec<f64>,
    /// Strictly increasing finite atoms of `Z`.
    pub z_support: Vec<f64>,
    pub construction: Construction,
    /// Seed namespace for sampling from this DGP.
    pub seed_domain: u64,
}

/// How the joint distribution is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Construction {
    /// A fully explicit table: `prob[i][l] = P(X=x_i, Z=z_l)`,
    /// `y_values[i][l] = E[Y|X=x_i,Z=z_l]`, `y_cond_var` its variance.
    ExplicitPmf {
        prob: Vec<Vec<f64>>,
        y_values: Vec<Vec<f64>>,
        y_cond_var: Vec<Vec<f64>>,
    },
    /// Prescribed operator spectrum; see [`SpectralDesign`].
    SpectralDesign(SpectralDesign),
}

/// Controlled-spectrum design.
///
/// `singular_values` prescribes the *nontrivial* whitened singular values:
/// the standardized table always carries a top singular value of exactly 1
/// (the constant direction), so the realized spectrum is
/// `(1, s_1, …, s_d, 0, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDesign {
    /// Nonincreasing values in (0, 1]; at most `min(m, k) − 1` of them.
    pub singular_values: Vec<f64>,
    /// Source exponent β: the parallel representer's coefficient on the
    /// `t`-th singular direction decays like `s_t^{β+1}`.
    pub coef_decay_beta: f64,
    /// Requested `‖r_⊥‖` (component of the outcome representer in the
    /// cokernel); positive values require instrument-side kernel room.
    pub r_perp_mass: f64,
    /// Requested `‖a_⊥‖` (target representer mass in `ker T`); positive
    /// values require hypothesis-side kernel room.
    pub a_perp_mass: f64,
    /// Conditional standard deviation of `Y` given `(X, Z)`.
    pub noise_sd: f64,
}

/// A realized process: the joint pmf, the saturated indicator spaces, the
/// functional pair, and design metadata.
#[derive(Debug, Clone)]
pub struct RealizedDgp {
    pub name: String,
    pub pmf: JointPMF,
    /// Saturated indicator basis over the X atoms.
    pub hspace: BasisSpec,
    /// Saturated indicator basis over the Z atoms.
    pub gspace: BasisSpec,
    pub functionals: FunctionalPair,
    /// Source exponent for spectral designs.
    pub source_beta: Option<f64>,
    /// Requested kernel masses (zero for explicit constructions).
    pub r_perp_mass: f64,
    pub a_perp_mass: f64,
    /// Whitened singular values of the realized operator, descending.
    pub achieved_singular_values: Vec<f64>,
    /// Fixed-point iterations used (zero for explicit constructions).
    pub realize_iterations: usize,
    pub seed_domain: u64,
}

impl RealizedDgp {
    /// Build the population operator on the saturated spaces.
    pub fn operator(&self) -> Result<OperatorMatrix> {
        build_operator(&self.pmf, &self.hspace, &self.gspace)
    }

    /// Build the operator and solve the full population problem.
    pub fn solve(&self) -> Result<(OperatorMatrix, OracleSolution)> {
        let op = self.operator()?;
        let sol = solve_oracle(&op, &self.pmf, &self.functionals)?;
        Ok((op, sol))
    }
}

fn to_matrix(rows: &[Vec<f64>], m: usize, k: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidPmf(format!(
            "{name} must be {m} rows of {k} values"
        )));
    }
    Ok(DMatrix::from_fn(m, k, |i, l| rows[i][l]))
}

/// Orthonormal cosine family on `n` points; column 0 is the constant.
fn dct_family(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, t| {
        if t == 0 {
            1.0 / (n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
                * (std::f64::consts::PI * t as f64 * (i as f64 + 0.5) / n as f64).cos()
        }
    })
}

/// The standardized (whitened) table `B[l][i] = prob[i][l]/√(p_X(i)·p_Z(l))`
/// whose singular values are the operator's whitened singular values.
fn standardized_table(prob: &DMatrix<f64>, px: &DVector<f64>, pz: &DVector<f64>) -> DMatrix<f64> {
    let (m, k) = prob.shape();
    DMatrix::from_fn(k, m, |l, i| prob[(i, l)] / (px[i] * pz[l]).sqrt())
}

struct RealizedTable {
    prob: DMatrix<f64>,
    iterations: usize,
}

/// Spectral deviation of a standardized table from the prescription:
/// `dev` covers the constant direction and the targets (relative), `tail`
/// is the largest unprescribed singular value.
fn spectrum_deviation(s: &DVector<f64>, targets: &[f64]) -> (f64, f64) {
    let mut dev = (s[0] - 1.0).abs();
    for (t, &target) in targets.iter().enumerate() {
        dev = dev.max((s[t + 1] - target).abs() / target);
    }
    let mut tail = 0.0_f64;
    for t in (1 + targets.len())..s.len() {
        tail = tail.max(s[t]);
    }
    (dev, tail)
}

struct TableState {
    prob: DMatrix<f64>,
    px: DVector<f64>,
    pz: DVector<f64>,
    svd: RankedSvd,
}

/// Clip to nonnegative, renormalize, and take the SVD of the standardized
/// table; errors if the projection degenerates.
fn project_table(
    mut prob: DMatrix<f64>,
    targets: &[f64],
    iterations: usize,
    worst: f64,
) -> Result<TableState> {
    let (m, k) = prob.shape();
    prob.apply(|v| *v = v.max(0.0));
    let total: f64 = prob.iter().sum();
    if total <= 0.0 {
        return Err(Error::SpectrumNotRealized {
            iterations,
            worst_rel_dev: f64::INFINITY,
            targets: targets.to_vec(),
        });
    }
    prob /= total;
    let px = DVector::from_iterator(m, prob.row_iter().map(|r| r.sum()));
    let pz = DVector::from_iterator(k, prob.column_iter().map(|c| c.sum()));
    if px.min() <= 1e-12 || pz.min() <= 1e-12 {
        return Err(Error::SpectrumNotRealized {
            iterations,
            worst_rel_dev: worst,
            targets: targets.to_vec(),
        });
    }
    let svd = RankedSvd::new(&standardized_table(&prob, &px, &pz), "spectrum realization")?;
    Ok(TableState { prob, px, pz, svd })
}

/// The table whose standardized form has the prescribed spectrum, obtained
/// by resetting the singular values to the targets.
fn reset_spectrum(state: &TableState, targets: &[f64]) -> DMatrix<f64> {
    let (m, k) = state.prob.shape();
    let n_s = state.svd.s.len();
    let mut s2 = DVector::zeros(n_s);
    s2[0] = 1.0;
    for (t, &target) in targets.iter().enumerate() {
        s2[t + 1] = target;
    }
    let b2 = &state.svd.u * DMatrix::from_diagonal(&s2) * state.svd.v.transpose();
    DMatrix::from_fn(m, k, |i, l| b2[(l, i)] * (state.px[i] * state.pz[l]).sqrt())
}

/// Projected fixed-point loop matching the prescribed nontrivial singular
/// values of the standardized table, followed by a polish phase of full
/// spectral resets that pushes the unprescribed tail below the rank cutoff.
fn realize_table(m: usize, k: usize, targets: &[f64]) -> Result<RealizedTable> {
    let d = targets.len();
    let vx = dct_family(m);
    let vz = dct_family(k);

    // Rank-(d+1) seed: constant direction plus damped target directions,
    // with the damping chosen to keep the seed table entrywise nonnegative.
    let base = vz.column(0) * vx.column(0).transpose(); // k×m
    let mut corr = DMatrix::zeros(k, m);
    for (t, &s) in targets.iter().enumerate() {
        corr += s * vz.column(t + 1) * vx.column(t + 1).transpose();
    }
    let mut gamma = 1.0_f64;
    if d > 0 {
        for (b, c) in base.iter().zip(corr.iter()) {
            if *c < 0.0 {
                gamma = gamma.min(0.95 * b / (-c));
            }
        }
    }
    let b0 = &base + gamma * &corr;
    let cell = 1.0 / ((m * k) as f64).sqrt();
    let mut prob = DMatrix::from_fn(m, k, |i, l| b0[(l, i)] * cell);

    let mut worst = f64::INFINITY;
    let mut converged = None;
    for it in 0..REALIZE_MAX_ITERS {
        let state = project_table(prob, targets, it, worst)?;
        let (dev, tail) = spectrum_deviation(&state.svd.s, targets);
        worst = dev.max(tail);
        if worst <= REALIZE_TOL {
            converged = Some((state, it));
            break;
        }
        // mix toward the exact-spectrum table
        let prob2 = reset_spectrum(&state, targets);
        prob = (1.0 - REALIZE_STEP) * state.prob + REALIZE_STEP * prob2;
    }
    let (mut state, iterations) = converged.ok_or_else(|| Error::SpectrumNotRealized {
        iterations: REALIZE_MAX_ITERS,
        worst_rel_dev: worst,
        targets: targets.to_vec(),
    })?;

    // Polish: full resets until the tail clears the rank cutoff by margin.
    for round in 0..=POLISH_MAX_ROUNDS {
        let (dev, tail) = spectrum_deviation(&state.svd.s, targets);
        if dev <= REALIZE_TOL && tail <= POLISH_TAIL_TOL {
            return Ok(RealizedTable {
                prob: state.prob,
                iterations: iterations + round,
            });
        }
        if round == POLISH_MAX_ROUNDS {
            break;
        }
        let prob2 = reset_spectrum(&state, targets);
        state = project_table(prob2, targets, iterations + round, dev.max(tail))?;
    }
    Err(Error::SpectrumNotRealized {
        iterations: iterations + POLISH_MAX_ROUNDS,
        worst_rel_dev: worst,
        targets: targets.to_vec(),
    })
}

fn validate_spectral(m: usize, k: usize, design: &SpectralDesign) -> Result<()> {
    let d = design.singular_values.len();
    if d + 1 > m.min(k) {
        return Err(Error::InfeasibleDesign(format!(
            "{d} prescribed singular values need supports of at least {} atoms \
             (got {m}×{k}); the constant direction always occupies one slot",
            d + 1
        )));
    }
    for &s in &design.singular_values {
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(Error::InfeasibleDesign(format!(
                "prescribed singular value {s} outside (0, 1]; a conditional-probability \
                 structure cannot exceed 1"
            )));
        }
    }
    if design.singular_values.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InfeasibleDesign(
            "prescribed singular values must be nonincreasing".into(),
        ));
    }
    if !(design.coef_decay_beta.is_finite() && design.coef_decay_beta >= 0.0) {
        return Err(Error::InfeasibleDesign(format!(
            "source exponent must be finite and nonnegative, got {}",
            design.coef_decay_beta
        )));
    }
    for (label, v) in [
        ("r_perp_mass", design.r_perp_mass),
        ("a_perp_mass", design.a_perp_mass),
        ("noise_sd", design.noise_sd),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InfeasibleDesign(format!(
                "{label} must be finite and nonnegative, got {v}"
            )));
        }
    }
    if design.r_perp_mass > 0.0 && k < d + 2 {
        return Err(Error::InfeasibleDesign(format!(
            "r_perp_mass > 0 needs instrument-side kernel room: \
             |z_support| ≥ {} required, got {k}",
            d + 2
        )));
    }
    if design.a_perp_mass > 0.0 && m < d + 2 {
        return Err(Error::InfeasibleDesign(format!(
            "a_perp_mass > 0 needs hypothesis-side kernel room: \
             |x_support| ≥ {} required, got {m}",
            d + 2
        )));
    }
    Ok(())
}

/// Build the joint pmf and metadata a specification describes.
pub fn realize(spec: &DgpSpec) -> Result<RealizedDgp> {
    let m = spec.x_support.len();
    let k = spec.z_support.len();
    let hspace = BasisSpec::indicator(Domain::X, spec.x_support.clone())?;
    let gspace = BasisSpec::indicator(Domain::Z, spec.z_support.clone())?;
    match &spec.construction {
        Construction::ExplicitPmf {
            prob,
            y_values,
            y_cond_var,
        } => {
            let pmf = JointPMF::new(
                spec.x_support.clone(),
                spec.z_support.clone(),
                to_matrix(prob, m, k, "prob")?,
                to_matrix(y_values, m, k, "y_values")?,
                to_matrix(y_cond_var, m, k, "y_cond_var")?,
            )?;
            let op = build_operator(&pmf, &hspace, &gspace)?;
            Ok(RealizedDgp {
                name: spec.name.clone(),
                pmf,
                hspace,
                gspace,
                functionals: FunctionalPair::iv_average(),
                source_beta: None,
                r_perp_mass: 0.0,
                a_perp_mass: 0.0,
                achieved_singular_values: op.singular_values(),
                realize_iterations: 0,
                seed_domain: spec.seed_domain,
            })
        }
        Construction::SpectralDesign(design) => {
            validate_spectral(m, k, design)?;
            let table = realize_table(m, k, &design.singular_values)?;

            // Operator of the realized table; y entries do not affect it.
            let shell = JointPMF::new(
                spec.x_support.clone(),
                spec.z_support.clone(),
                table.prob.clone(),
                DMatrix::zeros(m, k),
                DMatrix::zeros(m, k),
            )?;
            let op = build_operator(&shell, &hspace, &gspace)?;
            let svd = op.singular_values();
            let rank = op.rank();
            let whitened = op.whitened();
            let tsvd = op.svd();

            // r in whitened Z-coordinates: unit-norm β-source combination of
            // the positive singular directions, plus the kernel component.
            let mut coef = DVector::zeros(rank);
            for t in 0..rank {
                coef[t] = tsvd.s[t].powf(design.coef_decay_beta + 1.0);
            }
            coef /= coef.norm();
            let mut r_w = DVector::zeros(k);
            for t in 0..rank {
                r_w.axpy(coef[t], &tsvd.u.column(t).into_owned(), 1.0);
            }
            if design.r_perp_mass > 0.0 {
                let ker = linalg::smallest_eigenvectors(&(whitened * whitened.transpose()), 1);
                r_w.axpy(design.r_perp_mass, &ker.column(0).into_owned(), 1.0);
            }
            let r_coef = op.factor_g().unwhiten(&r_w);

            // Saturated indicator coefficients are function values.
            let y_mean = DMatrix::from_fn(m, k, |_, l| r_coef[l]);
            let y_var = DMatrix::from_element(m, k, design.noise_sd * design.noise_sd);
            let pmf = JointPMF::new(
                spec.x_support.clone(),
                spec.z_support.clone(),
                table.prob,
                y_mean,
                y_var,
            )?;

            let target = if design.a_perp_mass > 0.0 {
                let ker = linalg::smallest_eigenvectors(&whitened.tr_mul(whitened), 1);
                let k_h = op.factor_h().unwhiten(&ker.column(0).into_owned());
                let weights: Vec<f64> = (0..m).map(|i| 1.0 + design.a_perp_mass * k_h[i]).collect();
                TargetFunctional::WeightedX(PointWeights::new(spec.x_support.clone(), weights)?)
            } else {
                TargetFunctional::AverageValue
            };

            Ok(RealizedDgp {
                name: spec.name.clone(),
                pmf,
                hspace,
                gspace,
                functionals: FunctionalPair {
                    outcome: OutcomeFunctional::IvOutcome,
                    target,
                },
                source_beta: Some(design.coef_decay_beta),
                r_perp_mass: design.r_perp_mass,
                a_perp_mass: design.a_perp_mass,
                achieved_singular_values: svd,
                realize_iterations: table.iterations,
                seed_domain: spec.seed_domain,
            })
        }
    }
}

/// Draw `n` i.i.d. observations: `(x, z)` from the table, then
/// `y = E[Y|x,z] + σ(x,z)·ε` with standard Gaussian `ε`. Deterministic
/// given the seed.
pub fn sample(pmf: &JointPMF, n: usize, seed: u64) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::TooFewSamples {
            context: "sampling".into(),
            n: 0,
            min: 1,
        });
    }
    let m = pmf.x_support().len();
    let k = pmf.z_support().len();
    let mut cum = Vec::with_capacity(m * k);
    let mut acc = 0.0;
    for i in 0..m {
        for l in 0..k {
            acc += pmf.prob()[(i, l)];
            cum.push(acc);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cum.partition_point(|&c| c < u).min(m * k - 1);
        let (i, l) = (idx / k, idx % k);
        let sd = pmf.y_var()[(i, l)].sqrt();
        let mut y = pmf.y_mean()[(i, l)];
        if sd > 0.0 {
            let eps: f64 = rng.sample(StandardNormal);
            y += sd * eps;
        }
        out.push(Sample {
            x: pmf.x_support()[i],
            y,
            z: pmf.z_support()[l],
        });
    }
    Ok(out)
}
