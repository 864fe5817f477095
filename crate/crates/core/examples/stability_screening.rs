// Stability of the zero solution of dx = a x dt + b x dW: the generator sign
// of |x|^r against Monte Carlo exceedance frequencies.

use stochlab::analyze::{generator_sign_sweep, stability_probability};
use stochlab::integrate::{apply_generator, ModelSpec, Solver};
use stochlab::models::{build_model, CatalogEntry, ModelId, ModelParams};
use stochlab::vecalg::ScalarField;

fn linear(a: f64, b: f64) -> stochlab::Result<ModelSpec> {
    build_model(&CatalogEntry::new(
        ModelId::ScalarLinear,
        ModelParams {
            a: Some(a),
            b_scalar: Some(b),
            ..Default::default()
        },
    ))
}

/// Returns the exceedance fractions of the (stable, unstable) cases.
pub fn run_example() -> stochlab::Result<(f64, f64)> {
    let r = 0.5;
    let v = ScalarField::abs_power(r);
    for (a, b) in [(-1.0, 1.0), (1.0, 1.0)] {
        let lv = apply_generator(&linear(a, b)?, &v, 0.0, &[0.1])?;
        println!(
            "a = {a:+}, b = {b}: L|x|^{r} at 0.1 = {lv:+.5} (closed form {:+.5})",
            (a + 0.5 * b * b * (r - 1.0)) * r * 0.1f64.powf(r)
        );
    }

    // How much noise can the stable drift a = -1 absorb before L|x|² > 0?
    let v2 = ScalarField::abs_power(2.0);
    let points: Vec<Vec<f64>> = (1..=10).map(|k| vec![0.05 * k as f64]).collect();
    let amps: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    let sweep = generator_sign_sweep(&|s| linear(-1.0, s), &v2, &points, &amps, 0.0)?;
    println!(
        "L|x|² ≤ 0 up to noise amplitude {:?} on the grid (exact threshold √2)",
        sweep.largest_nonpositive
    );

    let (x0, delta, t_end, h, n) = ([0.01], 0.5, 10.0, 1e-3, 500);
    let stable = stability_probability(&Solver::for_model(linear(-1.0, 1.0)?), &x0, delta, t_end, h, n, 1, None)?;
    let unstable = stability_probability(&Solver::for_model(linear(1.0, 1.0)?), &x0, delta, t_end, h, n, 1, None)?;
    println!(
        "P(sup |x| > {delta}) before T = {t_end}: stable {:.3} ± {:.3}, unstable {:.3} ± {:.3}",
        stable.fraction, stable.half_width, unstable.fraction, unstable.half_width
    );
    Ok((stable.fraction, unstable.fraction))
}

fn main() {
    run_example().unwrap();
}
