// The stochastic Landau-Lifshitz equation read two ways: Stratonovich keeps
// the magnetisation on the unit sphere, Itô drifts off it.

use stochlab::integrate::{ensemble_path, run_ensemble, InitialCondition, Interpretation, Solver};
use stochlab::models::{build_model, CatalogEntry, ModelId, ModelParams};
use stochlab::vecalg::ScalarField;

fn ell(interpretation: Interpretation, epsilon: f64) -> stochlab::Result<stochlab::integrate::ModelSpec> {
    let params = ModelParams {
        b: Some([0.0, 0.0, 1.0]),
        alpha: Some(1.0),
        epsilon: Some(epsilon),
        ..Default::default()
    };
    build_model(&CatalogEntry::new(ModelId::Ell, params).with_interpretation(interpretation))
}

/// Returns (max |‖μ‖² − 1| for Heun, growth rate of E‖μ‖² under EM).
pub fn run_example() -> stochlab::Result<(f64, f64)> {
    let x0 = vec![0.0, 0.6, 0.8];
    let (t_end, h) = (1.0, 1e-4);

    let heun = Solver::for_model(ell(Interpretation::Stratonovich, 0.5)?);
    let path = ensemble_path(1, 0, t_end, h, heun.noise_dim())?;
    let tr = heun.solve(&x0, &path)?;
    let sq = ScalarField::norm_sq(3);
    let dev = tr.map_field(&sq).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    println!(
        "Stratonovich/Heun: max |‖μ‖² − 1| = {dev:.2e} over {} steps",
        tr.len() - 1
    );

    let (eps, h) = (0.1, 1e-3);
    let em = Solver::for_model(ell(Interpretation::Ito, eps)?);
    let stats = run_ensemble(&em, &InitialCondition::Fixed(x0), t_end, h, 400, 2, &[sq], None)?;
    let last = stats.times.len() - 1;
    let rate = (stats.mean[0][last] - 1.0) / t_end;
    println!(
        "Itô/EM: E‖μ_T‖² = {:.5} ± {:.5}, growth rate {rate:.4} (generator: 2ε²(1+α²) = {:.4})",
        stats.mean[0][last],
        stats.std_error(0, last),
        2.0 * eps * eps * 2.0
    );
    Ok((dev, rate))
}

fn main() {
    run_example().unwrap();
}
