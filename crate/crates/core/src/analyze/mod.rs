//! Persistence checkers: analytic invariance and equilibrium criteria on
//! sampled points, trajectory diagnostics, and Monte Carlo verdicts on
//! stability, attraction, convergence order and symplecticity.

mod checks;
mod fit;
mod montecarlo;
mod trajectory;

pub use checks::{
    check_equilibrium, check_invariance, Condition, EquilibriumOptions, EquilibriumReport, InvarianceOptions,
    InvarianceReport, TermKind, TermMagnitude,
};
pub use fit::{fit_loglog, LogLogFit};
pub use montecarlo::{
    check_symplecticity, coupled_gap, empirical_convergence_order, equilibrium_attraction, generator_sign_sweep,
    one_step_generator_estimate, stability_probability, ConvergenceOptions, Estimate, ExactSolution, FrequencyEstimate,
    Oracle, OrderEstimate, SweepResult,
};
pub use trajectory::{first_integral_drift, lyapunov_monotonicity, FirstIntegralDrift, Monotonicity};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::noise::rng_for;
use crate::vecalg::{
    cross, double_bracket_vf, hamiltonian_vf, DoubleBracketStructure, PoissonStructure, ScalarField, Vec3,
};
use crate::Result;

/// `n` points of the Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// `n` independent uniform points on the unit sphere.
pub fn random_sphere(seed: u64, n: usize) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, 0);
    (0..n)
        .map(|_| loop {
            let v = Vec3::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            if let Some(u) = v.normalized() {
                break u.to_vec();
            }
        })
        .collect()
}

/// A uniform point of the sphere outside the cap `{x : x·pole > cos_max}`,
/// where `pole` is a unit vector. Used to draw initial conditions away from
/// an unstable equilibrium.
pub fn sphere_outside_cap(rng: &mut dyn rand::RngCore, pole: Vec3, cos_max: f64) -> Vec<f64> {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            if u.dot(pole) <= cos_max {
                return u.to_vec();
            }
        }
    }
}

/// Relative gap between `X_H + X_H^{db}` for `H(z) = z·b` and the LL field
/// `z∧b − α z∧(z∧b)`. Returns the absolute gap when the field vanishes.
pub fn ll_decomposition_residual(z: Vec3, b: Vec3, alpha: f64) -> Result<f64> {
    let h = ScalarField::linear(&b.to_array());
    let lhs =
        hamiltonian_vf(&h, z, PoissonStructure::MINUS) + double_bracket_vf(&h, z, DoubleBracketStructure::new(alpha)?);
    let zb = cross(z, b);
    let rhs = zb - cross(z, zb) * alpha;
    let gap = (lhs - rhs).norm();
    let scale = rhs.norm();
    Ok(if scale > 0.0 { gap / scale } else { gap })
}
