// Reproducible Brownian paths: per-path streams, exact dyadic refinement
// and the iterated-logarithm parameter process.

use stochlab::integrate::ensemble_path;
use stochlab::noise::{iterated_log_eta, sample_brownian};

/// Returns the largest refinement mismatch (always exactly zero).
pub fn run_example() -> stochlab::Result<f64> {
    let path = sample_brownian(42, 1.0, 1.0 / 8.0, 2)?;
    let fine = path.refine().refine();
    let back = fine.coarsen()?.coarsen()?;
    let mismatch = path
        .increments()
        .iter()
        .zip(back.increments())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "{} steps refined to {}, coarsened back with max mismatch {mismatch:e}",
        path.steps(),
        fine.steps()
    );
    let w: Vec<f64> = fine.cumulative();
    println!("W_T (first channel) = {:.6}", w[w.len() - 2]);

    // Path `i` of an ensemble depends only on (seed, i).
    let a = ensemble_path(7, 3, 1.0, 1e-3, 1)?;
    let b = ensemble_path(7, 3, 1.0, 1e-3, 1)?;
    assert_eq!(a.increments(), b.increments());

    let long = ensemble_path(7, 0, 100.0, 1e-2, 1)?;
    let eta = iterated_log_eta(&long, 3.0)?;
    let bound = eta.bound().expect("observed bound");
    println!(
        "η over [0, 100]: {} samples in [{:.4}, {:.4}]",
        eta.len(),
        bound.lower,
        bound.upper
    );
    Ok(mismatch)
}

fn main() {
    run_example().unwrap();
}
