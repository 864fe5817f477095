use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;

use super::Solver;
use crate::noise::{rng_for, sample_brownian, step_count, stream_seed, NoisePath, INITIAL_CONDITION_STREAM};
use crate::vecalg::ScalarField;
use crate::{Error, Result};

/// Runs `f(0..n)` on a pool of `threads` workers (the global pool when
/// `None`) and returns the results in index order.
pub fn par_map_indexed<T, F>(n: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    match threads {
        None => Ok((0..n).into_par_iter().map(&f).collect()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
        }
    }
}

/// Noise path `index` of an ensemble; a bare grid when `dims == 0`.
pub fn ensemble_path(seed: u64, index: usize, t_end: f64, h: f64, dims: usize) -> Result<NoisePath> {
    if dims == 0 {
        if !(t_end > 0.0) || !(h > 0.0) || h > t_end {
            return Err(Error::InvalidArgument(format!("invalid horizon/step ({t_end}, {h})")));
        }
        return Ok(NoisePath::grid_only(0.0, h, step_count(t_end, h)));
    }
    sample_brownian(stream_seed(seed, index as u64), t_end, h, dims)
}

type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum InitialCondition {
    Fixed(Vec<f64>),
    /// Drawn per path from a stream reserved for initial conditions.
    Sampled(Sampler),
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Fixed(x) => f.debug_tuple("Fixed").field(x).finish(),
            InitialCondition::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

impl InitialCondition {
    pub fn sampled(f: impl Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static) -> Self {
        InitialCondition::Sampled(Arc::new(f))
    }

    pub(crate) fn draw(&self, seed: u64, index: usize) -> Vec<f64> {
        match self {
            InitialCondition::Fixed(x) => x.clone(),
            InitialCondition::Sampled(s) => {
                let mut rng = rng_for(stream_seed(seed, index as u64), INITIAL_CONDITION_STREAM);
                s(&mut rng)
            }
        }
    }
}

impl From<Vec<f64>> for InitialCondition {
    fn from(x: Vec<f64>) -> Self {
        InitialCondition::Fixed(x)
    }
}

/// Per-time mean and sample variance of functionals over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `mean[f][k]` for functional `f` at time index `k`.
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    pub n_paths: usize,
    pub seed: u64,
}

impl EnsembleStats {
    /// Standard error of the mean of functional `f` at time index `k`.
    pub fn std_error(&self, f: usize, k: usize) -> f64 {
        (self.variance[f][k] / self.n_paths as f64).sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for n in &self.names {
            write!(w, ",mean_{n},var_{n}")?;
        }
        writeln!(w)?;
        for (k, t) in self.times.iter().enumerate() {
            write!(w, "{t:.16e}")?;
            for f in 0..self.names.len() {
                write!(w, ",{:.16e},{:.16e}", self.mean[f][k], self.variance[f][k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

const CHUNK: usize = 64;

/// Integrates `n_paths` independent paths and aggregates each functional.
///
/// Path `i` is driven by `stream_seed(seed, i)`. Aggregation runs in path
/// order, so results do not depend on `threads`.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    solver: &Solver,
    x0: &InitialCondition,
    t_end: f64,
    h: f64,
    n_paths: usize,
    seed: u64,
    functionals: &[ScalarField],
    threads: Option<usize>,
) -> Result<EnsembleStats> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one path".into()));
    }
    let m = functionals.len();
    let dims = solver.noise_dim();
    let mut times = Vec::new();
    let mut count = 0usize;
    let mut mean: Vec<Vec<f64>> = Vec::new();
    let mut m2: Vec<Vec<f64>> = Vec::new();
    for start in (0..n_paths).step_by(CHUNK) {
        let len = CHUNK.min(n_paths - start);
        let results = par_map_indexed(len, threads, |j| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
            let index = start + j;
            let wrap = |e| Error::PathAborted {
                index,
                source: Box::new(e),
            };
            let path = ensemble_path(seed, index, t_end, h, dims).map_err(wrap)?;
            let traj = solver.solve(&x0.draw(seed, index), &path).map_err(wrap)?;
            let values = functionals.iter().map(|f| traj.map_field(f)).collect();
            Ok((traj.times().to_vec(), values))
        })?;
        for r in results {
            let (t, values) = r?;
            if times.is_empty() {
                times = t;
                mean = vec![vec![0.0; times.len()]; m];
                m2 = vec![vec![0.0; times.len()]; m];
            }
            count += 1;
            let c = count as f64;
            for f in 0..m {
                for (k, &v) in values[f].iter().enumerate() {
                    let d = v - mean[f][k];
                    mean[f][k] += d / c;
                    m2[f][k] += d * (v - mean[f][k]);
                }
            }
        }
    }
    let variance = m2
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|s| if count > 1 { s / (count - 1) as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(EnsembleStats {
        times,
        names: functionals.iter().map(|f| f.name().to_string()).collect(),
        mean,
        variance,
        n_paths,
        seed,
    })
}
