//! Seeded Brownian paths with dyadic refinement, and the parameter processes
//! `η_t` that drive random ODEs.
//!
//! Paths store increments, not cumulative values. Every path is a pure
//! function of `(seed, T, h, dims)` plus the number of refinements applied.

use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::integrate::{euler_maruyama, Interpretation, ModelSpec};
use crate::{Error, Result};

/// RNG stream reserved for drawing initial conditions in ensemble runs.
pub(crate) const INITIAL_CONDITION_STREAM: u64 = u64::MAX;

/// Seed for path `index` of an ensemble with master seed `master`.
///
/// Each index reads a distinct ChaCha stream of the master key, so distinct
/// indices give independent, non-overlapping streams.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of uniform steps of size `h` covering `[0, t_end]`.
pub fn step_count(t_end: f64, h: f64) -> usize {
    let ratio = t_end / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// A discretised `l`-dimensional Brownian path on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    t0: f64,
    h: f64,
    steps: usize,
    dims: usize,
    /// Row-major `steps × dims`.
    increments: Vec<f64>,
    seed: u64,
    level: u32,
}

impl NoisePath {
    /// Builds a path from explicit increments (row-major `steps × dims`).
    pub fn from_increments(t0: f64, h: f64, dims: usize, increments: Vec<f64>, seed: u64, level: u32) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
        }
        let steps = if dims == 0 {
            0
        } else {
            if !increments.len().is_multiple_of(dims) {
                return Err(Error::DimensionMismatch {
                    context: "noise increments",
                    expected: dims,
                    found: increments.len() % dims,
                });
            }
            increments.len() / dims
        };
        Ok(Self {
            t0,
            h,
            steps,
            dims,
            increments,
            seed,
            level,
        })
    }

    /// A noiseless grid of `steps` uniform steps, used for deterministic runs.
    pub fn grid_only(t0: f64, h: f64, steps: usize) -> Self {
        Self {
            t0,
            h,
            steps,
            dims: 0,
            increments: Vec::new(),
            seed: 0,
            level: 0,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Increment over `[t_k, t_{k+1}]`.
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dims..(k + 1) * self.dims]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(t_k)` for `k = 0..=steps`, row-major, with `W(t_0) = 0`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut w = vec![0.0; (self.steps + 1) * self.dims];
        for k in 0..self.steps {
            for j in 0..self.dims {
                w[(k + 1) * self.dims + j] = w[k * self.dims + j] + self.increments[k * self.dims + j];
            }
        }
        w
    }

    /// The path restricted to its first `steps` steps.
    pub fn truncated(&self, steps: usize) -> Self {
        let steps = steps.min(self.steps);
        Self {
            steps,
            increments: self.increments[..steps * self.dims].to_vec(),
            ..self.clone()
        }
    }

    /// The same path sampled at half the step size.
    ///
    /// Midpoints are drawn from the Brownian bridge (mean half the parent
    /// increment, variance `h/4`). Each pair of fine increments sums to the
    /// parent increment exactly in floating point.
    pub fn refine(&self) -> Self {
        let level = self.level + 1;
        let mut rng = rng_for(self.seed, level as u64);
        let sd = (self.h / 4.0).sqrt();
        // Fine increments live on a power-of-two grid that divides every
        // parent, so each pair sums back exactly.
        let grain = self
            .increments
            .iter()
            .filter_map(|&v| lowest_bit(v))
            .min()
            .unwrap_or(i32::MAX);
        let e = quantum_exponent((self.h / 2.0).sqrt()).min(grain);
        let mut fine = Vec::with_capacity(2 * self.increments.len());
        for k in 0..self.steps {
            let parent = self.increment(k);
            let mut second = Vec::with_capacity(self.dims);
            for &dw in parent {
                let z: f64 = StandardNormal.sample(&mut rng);
                let (a, b) = split_exact(dw, 0.5 * dw + sd * z, e);
                fine.push(a);
                second.push(b);
            }
            fine.extend_from_slice(&second);
        }
        Self {
            t0: self.t0,
            h: self.h / 2.0,
            steps: self.steps * 2,
            dims: self.dims,
            increments: fine,
            seed: self.seed,
            level,
        }
    }

    /// Sum of consecutive pairs of increments: the inverse of [`refine`](Self::refine).
    pub fn coarsen(&self) -> Result<Self> {
        if !self.steps.is_multiple_of(2) {
            return Err(Error::InvalidArgument("coarsening needs an even step count".into()));
        }
        let mut coarse = Vec::with_capacity(self.increments.len() / 2);
        for k in (0..self.steps).step_by(2) {
            let (a, b) = (self.increment(k), self.increment(k + 1));
            coarse.extend(a.iter().zip(b).map(|(x, y)| x + y));
        }
        Ok(Self {
            t0: self.t0,
            h: self.h * 2.0,
            steps: self.steps / 2,
            dims: self.dims,
            increments: coarse,
            seed: self.seed,
            level: self.level.saturating_sub(1),
        })
    }

    /// CSV with columns `t, dW_1..dW_l`, one row per step, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# level: {}", self.level)?;
        writeln!(w, "# h: {:.16e}", self.h)?;
        write!(w, "t")?;
        for j in 1..=self.dims {
            write!(w, ",dW_{j}")?;
        }
        writeln!(w)?;
        for k in 0..self.steps {
            write!(w, "{:.16e}", self.time(k))?;
            for v in self.increment(k) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut seed = 0;
        let mut level = 0;
        let mut h = None;
        let mut dims = None;
        let mut t0 = None;
        let mut increments = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    let v = v.trim();
                    match k.trim() {
                        "seed" => seed = parse_num(v)?,
                        "level" => level = parse_num(v)?,
                        "h" => h = Some(parse_num::<f64>(v)?),
                        _ => {}
                    }
                }
                continue;
            }
            if dims.is_none() {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.first().map(|c| c.trim()) != Some("t") {
                    return Err(Error::Parse(format!("expected header starting with `t`, got `{line}`")));
                }
                dims = Some(cols.len() - 1);
                continue;
            }
            let mut fields = line.split(',');
            let t: f64 = parse_num(fields.next().unwrap_or(""))?;
            t0.get_or_insert(t);
            let row: Vec<f64> = fields.map(parse_num).collect::<Result<_>>()?;
            if Some(row.len()) != dims {
                return Err(Error::Parse(format!("row at t = {t} has {} increments", row.len())));
            }
            increments.extend(row);
        }
        let dims = dims.ok_or_else(|| Error::Parse("missing header".into()))?;
        let h = h.ok_or_else(|| Error::Parse("missing `# h:` line".into()))?;
        Self::from_increments(t0.unwrap_or(0.0), h, dims, increments, seed, level)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

fn pow2(e: i32) -> f64 {
    let e = e.max(-1074);
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// Largest power of two dividing `x` (`None` for zero).
fn lowest_bit(x: f64) -> Option<i32> {
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    let bits = x.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i32;
    let mut mant = bits & ((1u64 << 52) - 1);
    let base = if field == 0 {
        -1074
    } else {
        mant |= 1u64 << 52;
        field - 1075
    };
    Some(base + mant.trailing_zeros() as i32)
}

/// Exponent of the quantum for increments of standard deviation `sd`: values
/// up to `2^10·sd` are exact multiples of it.
fn quantum_exponent(sd: f64) -> i32 {
    sd.log2().ceil() as i32 + 10 - 52
}

const MAX_UNITS: i128 = (1i128 << 53) - 1;

/// Splits `total` into `a + b` with `a` close to `guess`, both multiples of
/// `2^e`, and `a + b == total` exactly. `total` must be a multiple of `2^e`.
fn split_exact(total: f64, guess: f64, mut e: i32) -> (f64, f64) {
    loop {
        let q = pow2(e);
        let t = (total / q) as i128;
        let lo = (-MAX_UNITS).max(t.saturating_sub(MAX_UNITS));
        let hi = MAX_UNITS.min(t.saturating_add(MAX_UNITS));
        if lo <= hi {
            let g = (guess / q).round();
            let units = if g.is_nan() {
                t / 2
            } else {
                (g.clamp(-1e38, 1e38) as i128).clamp(lo, hi)
            };
            return ((units as f64) * q, ((t - units) as f64) * q);
        }
        e += 1;
    }
}
/// `l` independent Brownian motions on `[0, ceil(T/h)·h]` with `N(0, h)`
/// increments.
pub fn sample_brownian(seed: u64, t_end: f64, h: f64, dims: usize) -> Result<NoisePath> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t_end}")));
    }
    if !(h > 0.0) || h > t_end {
        return Err(Error::InvalidArgument(format!("step size must lie in (0, T], got {h}")));
    }
    let steps = step_count(t_end, h);
    let mut rng = rng_for(seed, 0);
    let sd = h.sqrt();
    // Rounded to a power-of-two grid (relative resolution 2^-42 of `sd`) so
    // that refinements can split increments exactly.
    let q = pow2(quantum_exponent(sd));
    let limit = MAX_UNITS as f64;
    let increments = (0..steps * dims)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (sd * z / q).round().clamp(-limit, limit) * q
        })
        .collect();
    Ok(NoisePath {
        t0: 0.0,
        h,
        steps,
        dims,
        increments,
        seed,
        level: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Constant,
    BrownianFunctional,
    SdeDriven,
}

/// Observed range of a bounded process; every sample lies in `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessBound {
    pub lower: f64,
    pub upper: f64,
}

/// A sampled parameter process `η_t ∈ R^d` on a path grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterProcess {
    times: Vec<f64>,
    /// Row-major `(N + 1) × d`.
    values: Vec<f64>,
    dim: usize,
    provenance: Provenance,
    bound: Option<ProcessBound>,
}

impl ParameterProcess {
    pub fn new(times: Vec<f64>, values: Vec<f64>, dim: usize, provenance: Provenance) -> Result<Self> {
        if dim == 0 || values.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                context: "parameter process values",
                expected: times.len() * dim,
                found: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch(
                "parameter process times must increase strictly".into(),
            ));
        }
        Ok(Self {
            times,
            values,
            dim,
            provenance,
            bound: None,
        })
    }

    /// `η_t = value` on the grid of `path`.
    pub fn constant(path: &NoisePath, value: &[f64]) -> Self {
        let times = path.times();
        let values = times.iter().flat_map(|_| value.iter().copied()).collect();
        let mut p = Self {
            times,
            values,
            dim: value.len(),
            provenance: Provenance::Constant,
            bound: None,
        };
        p.attach_observed_bound();
        p
    }

    /// Records the observed min/max as the process bound.
    pub fn attach_observed_bound(&mut self) {
        let (lower, upper) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        self.bound = Some(ProcessBound { lower, upper });
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn bound(&self) -> Option<ProcessBound> {
        self.bound
    }

    /// Up to `max` sample values spread evenly over the grid.
    pub fn sampled_values(&self, max: usize) -> Vec<Vec<f64>> {
        let n = self.len();
        let stride = (n / max.max(1)).max(1);
        (0..n).step_by(stride).map(|k| self.value(k).to_vec()).collect()
    }
}

/// Normalised exponent `B_t / √(2 t log log t)` on the path grid, `0` for `t ≤ t_min`.
pub fn iterated_log_exponent(path: &NoisePath, t_min: f64) -> Result<Vec<f64>> {
    if path.dims() != 1 {
        return Err(Error::DimensionMismatch {
            context: "iterated-log process",
            expected: 1,
            found: path.dims(),
        });
    }
    if !(t_min > std::f64::consts::E) {
        return Err(Error::InvalidArgument(format!("t_min must exceed e, got {t_min}")));
    }
    let w = path.cumulative();
    Ok((0..=path.steps())
        .map(|k| {
            let t = path.time(k);
            if t <= t_min {
                0.0
            } else {
                w[k] / (2.0 * t * t.ln().ln()).sqrt()
            }
        })
        .collect())
}

/// `η_t = exp(B_t / √(2 t log log t))` for `t > t_min` and `η_t = 1` before.
pub fn iterated_log_eta(path: &NoisePath, t_min: f64) -> Result<ParameterProcess> {
    let values: Vec<f64> = iterated_log_exponent(path, t_min)?.into_iter().map(f64::exp).collect();
    let mut p = ParameterProcess::new(path.times(), values, 1, Provenance::BrownianFunctional)?;
    p.attach_observed_bound();
    Ok(p)
}

/// Euler–Maruyama sample of `dη = g(t, η) dt + σ(t, η) dW` on the path grid.
/// `model` must be an Itô model whose state is `η`.
pub fn parameter_sde(model: &ModelSpec, eta0: &[f64], path: &NoisePath) -> Result<ParameterProcess> {
    if model.interpretation() != Interpretation::Ito {
        return Err(Error::WrongInterpretation {
            model: model.name().to_string(),
            expected: Interpretation::Ito,
            found: model.interpretation(),
        });
    }
    let traj = euler_maruyama(model, eta0, path)?;
    let mut p = ParameterProcess::new(
        traj.times().to_vec(),
        traj.states_flat().to_vec(),
        model.dim(),
        Provenance::SdeDriven,
    )?;
    p.attach_observed_bound();
    Ok(p)
}
