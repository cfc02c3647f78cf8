//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use lsdml::{
    realize, Construction, DgpSpec, FunctionalPair, JointPMF, RealizedDgp, SpectralDesign,
};
use nalgebra::DMatrix;

/// A 3-atom × 2-atom instance with `Y = X` whose population solutions are
/// rational and were derived by hand:
///
/// * joint table rows (over x = 0, 1, 2): (.2, .1), (.1, .2), (.2, .2)
/// * conditional means E[Y|Z=0] = 1.0, E[Y|Z=1] = 1.2
/// * minimal-norm solutions h† = (0.6, 1.6, 1.1), g† = (1, 1),
///   α_h† = (1, 1, 1), α_g† = (−0.4, 2.6)
/// * Ψ = E[g†(Z)·h†(X)] = 1.1
/// * whitened spectrum (1, 1/√15), one-dimensional kernel ∝ (1, 1, −1.5)
pub fn reference_pmf() -> JointPMF {
    let prob = DMatrix::from_row_slice(3, 2, &[0.2, 0.1, 0.1, 0.2, 0.2, 0.2]);
    let y_mean = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
    let y_var = DMatrix::zeros(3, 2);
    JointPMF::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0], prob, y_mean, y_var).unwrap()
}

pub fn reference_functionals() -> FunctionalPair {
    FunctionalPair::iv_average()
}

/// Spectral design helper over integer supports.
#[allow(clippy::too_many_arguments)]
pub fn spectral_dgp(
    name: &str,
    m: usize,
    k: usize,
    singular_values: Vec<f64>,
    beta: f64,
    r_perp_mass: f64,
    a_perp_mass: f64,
    noise_sd: f64,
) -> RealizedDgp {
    realize(&DgpSpec {
        name: name.into(),
        x_support: (0..m).map(|i| i as f64).collect(),
        z_support: (0..k).map(|i| i as f64).collect(),
        construction: Construction::SpectralDesign(SpectralDesign {
            singular_values,
            coef_decay_beta: beta,
            r_perp_mass,
            a_perp_mass,
            noise_sd,
        }),
        seed_domain: 0,
    })
    .unwrap()
}

/// Perfect X–Z coupling on two atoms: every estimator target is exactly
/// identified and the oracle value is stable.
pub fn identity_dgp(noise_sd: f64) -> RealizedDgp {
    spectral_dgp("identity", 2, 2, vec![1.0], 1.0, 0.0, 0.0, noise_sd)
}

/// The canonical explicit instance: X = Z uniform on {0, 1} and Y = X
/// (plus optional noise), so the operator is the identity, h†(x) = x,
/// g† = 1, and Ψ = E[X] = 0.5.
pub fn explicit_identity_dgp(y_var: f64) -> RealizedDgp {
    realize(&DgpSpec {
        name: "identity-explicit".into(),
        x_support: vec![0.0, 1.0],
        z_support: vec![0.0, 1.0],
        construction: Construction::ExplicitPmf {
            prob: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            y_values: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            y_cond_var: vec![vec![y_var, y_var], vec![y_var, y_var]],
        },
        seed_domain: 1,
    })
    .unwrap()
}

/// 3-atom × 4-atom design with spectrum (0.8, 0.5) and `‖r_⊥‖ = 0.5`: the
/// instrument side has one extra dimension, so the cokernel is exact by
/// shape and the primary equation has no exact solution.
pub fn no_solution_dgp(noise_sd: f64) -> RealizedDgp {
    spectral_dgp("no-solution", 3, 4, vec![0.8, 0.5], 1.0, 0.5, 0.0, noise_sd)
}

/// 4-atom × 3-atom design with target-side kernel mass `‖a_⊥‖ = 0.5`: the
/// hypothesis side has one extra dimension, so `ker T` is exact by shape
/// and the dual equation's data part lies partly outside the range.
pub fn a_perp_dgp(noise_sd: f64) -> RealizedDgp {
    spectral_dgp("a-perp", 4, 3, vec![0.8, 0.5], 1.0, 0.0, 0.5, noise_sd)
}

/// Deterministic xorshift stream for reproducible ad-hoc perturbations.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in (-1, 1).
    pub fn sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}
