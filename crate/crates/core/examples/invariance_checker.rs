// Analytic persistence checks: sphere invariance under each calculus and
// which equilibria survive the noise.

use stochlab::analyze::{check_equilibrium, check_invariance, fibonacci_sphere, EquilibriumOptions, InvarianceOptions};
use stochlab::integrate::{Interpretation, ModelSpec};
use stochlab::models::{build_model, CatalogEntry, ModelId, ModelParams};
use stochlab::vecalg::ScalarField;

fn build(id: ModelId, interpretation: Interpretation, params: ModelParams) -> stochlab::Result<ModelSpec> {
    build_model(&CatalogEntry::new(id, params).with_interpretation(interpretation))
}

/// Returns the invariance verdicts for (Stratonovich ELL, Itô ELL).
pub fn run_example() -> stochlab::Result<(bool, bool)> {
    let sphere = ScalarField::unit_sphere(3);
    let points = fibonacci_sphere(200);
    let ell = ModelParams {
        b: Some([0.0, 0.0, 1.0]),
        alpha: Some(1.0),
        epsilon: Some(1.0),
        ..Default::default()
    };
    let opts = InvarianceOptions::default();

    let strat = check_invariance(
        &build(ModelId::Ell, Interpretation::Stratonovich, ell.clone())?,
        &sphere,
        &points,
        &opts,
    )?;
    let ito = check_invariance(&build(ModelId::Ell, Interpretation::Ito, ell)?, &sphere, &points, &opts)?;
    print!("{}", strat.to_text());
    print!("{}", ito.to_text());

    let me = build(
        ModelId::ModifiedEtore,
        Interpretation::Ito,
        ModelParams {
            b: Some([0.0, 0.0, 1.0]),
            alpha: Some(1.0),
            epsilon: Some(0.5),
            ..Default::default()
        },
    )?;
    let rep = check_equilibrium(&me, &[0.0, 0.0, 1.0], &EquilibriumOptions::default())?;
    for t in &rep.terms {
        println!(
            "modified Etore at b: {:<12} max {:.2e} vanishes {}",
            t.name, t.max, t.vanishes
        );
    }
    Ok((strat.invariant, ito.invariant))
}

fn main() {
    run_example().unwrap();
}
