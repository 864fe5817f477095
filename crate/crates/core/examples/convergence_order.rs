// Empirical strong orders: Euler-Maruyama on geometric Brownian motion and
// stochastic Heun on the Kubo oscillator, both against exact solutions.

use stochlab::analyze::{empirical_convergence_order, ConvergenceOptions, Oracle};
use stochlab::integrate::{Interpretation, Solver};
use stochlab::models::{build_model, CatalogEntry, ModelId, ModelParams};
use stochlab::vecalg::ScalarField;

/// Returns (EM order, Heun order, Heun first-integral order).
pub fn run_example() -> stochlab::Result<(f64, f64, f64)> {
    let opts = ConvergenceOptions {
        levels: 5,
        n_paths: 200,
        seed: 9,
        t_end: 1.0,
        h0: 1.0 / 16.0,
        threads: None,
    };
    let (a, b) = (-1.0, 1.0);
    let gbm = build_model(&CatalogEntry::new(
        ModelId::ScalarLinear,
        ModelParams {
            a: Some(a),
            b_scalar: Some(b),
            ..Default::default()
        },
    ))?;
    let exact = Oracle::closed_form(move |x0, path| {
        let w: f64 = path.increments().iter().sum();
        vec![x0[0] * ((a - 0.5 * b * b) * path.t_end() + b * w).exp()]
    });
    let em = empirical_convergence_order(&Solver::for_model(gbm), &[1.0], &exact, &opts)?;
    println!("EM / scalar linear: order {:.3} ± {:.3}", em.slope, em.half_width);

    let (ka, ks) = (1.0, 0.5);
    let kubo = build_model(
        &CatalogEntry::new(
            ModelId::Kubo,
            ModelParams {
                kubo_a: Some(ka),
                kubo_sigma: Some(ks),
                ..Default::default()
            },
        )
        .with_interpretation(Interpretation::Stratonovich),
    )?;
    let rotation = Oracle::closed_form(move |x0, path| {
        let w: f64 = path.increments().iter().sum();
        let (s, c) = (ka * path.t_end() + ks * w).sin_cos();
        vec![c * x0[0] - s * x0[1], s * x0[0] + c * x0[1]]
    });
    let heun = Solver::for_model(kubo);
    let hk = empirical_convergence_order(&heun, &[1.0, 0.0], &rotation, &opts)?;
    let fi = empirical_convergence_order(
        &heun,
        &[1.0, 0.0],
        &Oracle::Conserved(ScalarField::half_norm_sq(2)),
        &opts,
    )?;
    println!(
        "Heun / Kubo: order {:.3} ± {:.3}, H₀ drift order {:.3}",
        hk.slope, hk.half_width, fi.slope
    );
    Ok((em.slope, hk.slope, fi.slope))
}

fn main() {
    run_example().unwrap();
}
