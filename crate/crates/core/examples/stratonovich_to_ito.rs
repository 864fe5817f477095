// Wong-Zakai conversion: Heun on a Stratonovich model and Euler-Maruyama on
// its Itô form converge to the same solution on coupled paths.

use stochlab::analyze::{coupled_gap, ConvergenceOptions};
use stochlab::integrate::{strat_to_ito, Interpretation, Scheme, Solver};
use stochlab::models::{build_model, CatalogEntry, ModelId, ModelParams};

/// Returns the gap ratios per halving of the step.
pub fn run_example() -> stochlab::Result<Vec<f64>> {
    let params = ModelParams {
        kubo_a: Some(1.0),
        kubo_sigma: Some(0.5),
        ..Default::default()
    };
    let kubo =
        build_model(&CatalogEntry::new(ModelId::Kubo, params).with_interpretation(Interpretation::Stratonovich))?;
    let ito = strat_to_ito(&kubo)?;
    let x = [0.6, 0.8];
    println!("Stratonovich drift at {x:?}: {:?}", kubo.drift(0.0, &x, &[]));
    println!("Itô drift (with correction): {:?}", ito.drift(0.0, &x, &[]));
    for t in ito.drift_terms() {
        let mut v = [0.0; 2];
        (t.f)(0.0, &x, &[], &mut v);
        println!("  term {:<10} {v:?}", t.name);
    }

    let heun = Solver::new(kubo, Scheme::StochasticHeun)?;
    let em = Solver::new(ito, Scheme::EulerMaruyama)?;
    let opts = ConvergenceOptions {
        levels: 5,
        n_paths: 100,
        seed: 3,
        t_end: 1.0,
        h0: 1.0 / 16.0,
        threads: None,
    };
    let gap = coupled_gap(&heun, &em, &[1.0, 0.0], &opts)?;
    for (h, e) in gap.hs.iter().zip(&gap.errors) {
        println!("h = {h:.6}  mean terminal gap {e:.3e}");
    }
    println!("ratios {:.3?}, slope {:.3}", gap.ratios(), gap.slope);
    Ok(gap.ratios())
}

fn main() {
    run_example().unwrap();
}
