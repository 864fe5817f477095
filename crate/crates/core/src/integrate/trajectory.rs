use std::io::Write;

use crate::vecalg::ScalarField;
use crate::Result;

/// Time-indexed states of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    /// Row-major `(N + 1) × n`.
    states: Vec<f64>,
    dim: usize,
    model: String,
    seed: Option<u64>,
}

impl Trajectory {
    pub(crate) fn with_capacity(dim: usize, points: usize, model: &str, seed: Option<u64>) -> Self {
        Self {
            times: Vec::with_capacity(points),
            states: Vec::with_capacity(points * dim),
            dim,
            model: model.to_string(),
            seed,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64]) {
        self.times.push(t);
        self.states.extend_from_slice(x);
    }

    /// Applies `f` to every stored state in place.
    pub fn map_states(&mut self, f: impl FnMut(&mut [f64])) {
        self.states.chunks_exact_mut(self.dim).for_each(f);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states_flat(&self) -> &[f64] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn first(&self) -> &[f64] {
        self.state(0)
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    /// `F(x_k)` along the trajectory.
    pub fn map_field(&self, f: &ScalarField) -> Vec<f64> {
        self.states().map(|x| f.eval(x)).collect()
    }

    /// CSV with header `t, x1..xn` plus one column per functional.
    pub fn write_csv<W: Write>(&self, mut w: W, functionals: &[ScalarField]) -> Result<()> {
        write!(w, "t")?;
        for i in 1..=self.dim {
            write!(w, ",x{i}")?;
        }
        for f in functionals {
            write!(w, ",{}", f.name())?;
        }
        writeln!(w)?;
        for (k, x) in self.states().enumerate() {
            write!(w, "{:.16e}", self.times[k])?;
            for v in x {
                write!(w, ",{v:.16e}")?;
            }
            for f in functionals {
                write!(w, ",{:.16e}", f.eval(x))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
