use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{Interpretation, ModelSpec, Trajectory};
use crate::noise::{NoisePath, ParameterProcess};
use crate::{Error, Result};

fn require(model: &ModelSpec, expected: Interpretation) -> Result<()> {
    if model.interpretation() != expected {
        return Err(Error::WrongInterpretation {
            model: model.name().to_string(),
            expected,
            found: model.interpretation(),
        });
    }
    Ok(())
}

fn check_x0(model: &ModelSpec, x0: &[f64]) -> Result<()> {
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: model.dim(),
            found: x0.len(),
        });
    }
    Ok(())
}

fn check_noise(model: &ModelSpec, path: &NoisePath) -> Result<()> {
    if path.dims() != model.noise_dim() {
        return Err(Error::DimensionMismatch {
            context: "noise path channels",
            expected: model.noise_dim(),
            found: path.dims(),
        });
    }
    Ok(())
}

fn push_checked(traj: &mut Trajectory, step: usize, t: f64, x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        traj.push(t, x);
        return Err(Error::NonFinite {
            step,
            time: t,
            partial: Box::new(traj.clone()),
        });
    }
    traj.push(t, x);
    Ok(())
}

/// `σ ΔW` accumulated into `out`.
#[inline]
fn add_noise(out: &mut [f64], sigma: &[f64], dw: &[f64], scale: f64) {
    let l = dw.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &sigma[i * l..(i + 1) * l];
        *o += scale * row.iter().zip(dw).map(|(s, w)| s * w).sum::<f64>();
    }
}

/// `x_{k+1} = x_k + f(t_k, x_k) h + σ(t_k, x_k) ΔW_k`.
pub fn euler_maruyama(model: &ModelSpec, x0: &[f64], path: &NoisePath) -> Result<Trajectory> {
    require(model, Interpretation::Ito)?;
    check_x0(model, x0)?;
    check_noise(model, path)?;
    let (n, l, h) = (model.dim(), model.noise_dim(), path.h());
    let mut traj = Trajectory::with_capacity(n, path.steps() + 1, model.name(), Some(path.seed()));
    let mut x = x0.to_vec();
    push_checked(&mut traj, 0, path.time(0), &x)?;
    let mut f = vec![0.0; n];
    let mut s = vec![0.0; n * l];
    for k in 0..path.steps() {
        let t = path.time(k);
        model.eval_drift(t, &x, &[], &mut f);
        model.eval_diffusion(t, &x, &mut s);
        for i in 0..n {
            x[i] += f[i] * h;
        }
        add_noise(&mut x, &s, path.increment(k), 1.0);
        push_checked(&mut traj, k + 1, path.time(k + 1), &x)?;
    }
    Ok(traj)
}

/// Stochastic Heun predictor–corrector, consistent with the Stratonovich
/// interpretation.
pub fn heun_strat(model: &ModelSpec, x0: &[f64], path: &NoisePath) -> Result<Trajectory> {
    require(model, Interpretation::Stratonovich)?;
    check_x0(model, x0)?;
    check_noise(model, path)?;
    let (n, l, h) = (model.dim(), model.noise_dim(), path.h());
    let mut traj = Trajectory::with_capacity(n, path.steps() + 1, model.name(), Some(path.seed()));
    let mut x = x0.to_vec();
    push_checked(&mut traj, 0, path.time(0), &x)?;
    let (mut f0, mut f1) = (vec![0.0; n], vec![0.0; n]);
    let (mut s0, mut s1) = (vec![0.0; n * l], vec![0.0; n * l]);
    let mut pred = vec![0.0; n];
    for k in 0..path.steps() {
        let (t, t1) = (path.time(k), path.time(k + 1));
        let dw = path.increment(k);
        model.eval_drift(t, &x, &[], &mut f0);
        model.eval_diffusion(t, &x, &mut s0);
        for i in 0..n {
            pred[i] = x[i] + f0[i] * h;
        }
        add_noise(&mut pred, &s0, dw, 1.0);
        model.eval_drift(t1, &pred, &[], &mut f1);
        model.eval_diffusion(t1, &pred, &mut s1);
        for i in 0..n {
            x[i] += 0.5 * (f0[i] + f1[i]) * h;
        }
        add_noise(&mut x, &s0, dw, 0.5);
        add_noise(&mut x, &s1, dw, 0.5);
        push_checked(&mut traj, k + 1, t1, &x)?;
    }
    Ok(traj)
}

/// Classical fourth-order Runge–Kutta on an arbitrary increasing grid.
pub fn rk4(model: &ModelSpec, x0: &[f64], grid: &[f64]) -> Result<Trajectory> {
    require(model, Interpretation::Ode)?;
    check_x0(model, x0)?;
    if grid.is_empty() {
        return Err(Error::EmptyInput("time grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch("time grid must increase strictly".into()));
    }
    let n = model.dim();
    let mut traj = Trajectory::with_capacity(n, grid.len(), model.name(), None);
    let mut x = x0.to_vec();
    push_checked(&mut traj, 0, grid[0], &x)?;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for (step, w) in grid.windows(2).enumerate() {
        let (t, h) = (w[0], w[1] - w[0]);
        model.eval_drift(t, &x, &[], &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        model.eval_drift(t + 0.5 * h, &tmp, &[], &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        model.eval_drift(t + 0.5 * h, &tmp, &[], &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        model.eval_drift(w[1], &tmp, &[], &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        push_checked(&mut traj, step + 1, w[1], &x)?;
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RodeScheme {
    /// Heun on the piecewise-linear interpolant of `η`.
    #[default]
    Heun,
    /// Explicit Euler with `η` frozen over each step.
    Euler,
}

/// Pathwise integration of `dx/dt = f(t, x, η_t)` on the grid of `eta`.
pub fn solve_rode(model: &ModelSpec, x0: &[f64], eta: &ParameterProcess, scheme: RodeScheme) -> Result<Trajectory> {
    require(model, Interpretation::Rode)?;
    check_x0(model, x0)?;
    if eta.dim() != model.param_dim() {
        return Err(Error::DimensionMismatch {
            context: "parameter process",
            expected: model.param_dim(),
            found: eta.dim(),
        });
    }
    if eta.is_empty() {
        return Err(Error::GridMismatch("parameter process has no samples".into()));
    }
    let n = model.dim();
    let times = eta.times();
    let mut traj = Trajectory::with_capacity(n, times.len(), model.name(), None);
    let mut x = x0.to_vec();
    push_checked(&mut traj, 0, times[0], &x)?;
    let (mut f0, mut f1) = (vec![0.0; n], vec![0.0; n]);
    let mut pred = vec![0.0; n];
    for k in 0..times.len() - 1 {
        let (t, t1) = (times[k], times[k + 1]);
        let h = t1 - t;
        model.eval_drift(t, &x, eta.value(k), &mut f0);
        match scheme {
            RodeScheme::Euler => {
                for i in 0..n {
                    x[i] += h * f0[i];
                }
            }
            RodeScheme::Heun => {
                for i in 0..n {
                    pred[i] = x[i] + h * f0[i];
                }
                model.eval_drift(t1, &pred, eta.value(k + 1), &mut f1);
                for i in 0..n {
                    x[i] += 0.5 * h * (f0[i] + f1[i]);
                }
            }
        }
        push_checked(&mut traj, k + 1, t1, &x)?;
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
    StochasticHeun,
    Rk4,
    Rode(RodeScheme),
}

impl Scheme {
    pub fn interpretation(self) -> Interpretation {
        match self {
            Scheme::EulerMaruyama => Interpretation::Ito,
            Scheme::StochasticHeun => Interpretation::Stratonovich,
            Scheme::Rk4 => Interpretation::Ode,
            Scheme::Rode(_) => Interpretation::Rode,
        }
    }

    pub fn default_for(interpretation: Interpretation) -> Scheme {
        match interpretation {
            Interpretation::Ito => Scheme::EulerMaruyama,
            Interpretation::Stratonovich => Scheme::StochasticHeun,
            Interpretation::Ode => Scheme::Rk4,
            Interpretation::Rode => Scheme::Rode(RodeScheme::Heun),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::EulerMaruyama => "euler-maruyama",
            Scheme::StochasticHeun => "heun",
            Scheme::Rk4 => "rk4",
            Scheme::Rode(RodeScheme::Heun) => "rode-heun",
            Scheme::Rode(RodeScheme::Euler) => "rode-euler",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "euler-maruyama" | "em" => Scheme::EulerMaruyama,
            "heun" => Scheme::StochasticHeun,
            "rk4" => Scheme::Rk4,
            "rode-heun" => Scheme::Rode(RodeScheme::Heun),
            "rode-euler" => Scheme::Rode(RodeScheme::Euler),
            other => return Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        })
    }
}

/// Builds the RODE parameter process from a driving noise path.
pub type EtaBuilder = Arc<dyn Fn(&NoisePath) -> Result<ParameterProcess> + Send + Sync>;

/// A model bound to a scheme; solves one path at a time from a [`NoisePath`].
///
/// RK4 uses only the path grid. RODE schemes turn the path into `η` with the
/// attached [`EtaBuilder`].
#[derive(Clone)]
pub struct Solver {
    model: ModelSpec,
    scheme: Scheme,
    eta: Option<(usize, EtaBuilder)>,
}

impl fmt::Debug for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solver")
            .field("model", &self.model.name())
            .field("scheme", &self.scheme)
            .field("eta_noise_dim", &self.eta.as_ref().map(|e| e.0))
            .finish()
    }
}

impl Solver {
    pub fn new(model: ModelSpec, scheme: Scheme) -> Result<Self> {
        require(&model, scheme.interpretation())?;
        Ok(Self {
            model,
            scheme,
            eta: None,
        })
    }

    /// The default scheme for the model's interpretation.
    pub fn for_model(model: ModelSpec) -> Self {
        let scheme = Scheme::default_for(model.interpretation());
        Self {
            model,
            scheme,
            eta: None,
        }
    }

    /// Attaches the parameter-process builder of a RODE solver. `noise_dim`
    /// is the number of Brownian channels the builder consumes.
    pub fn with_eta(
        mut self,
        noise_dim: usize,
        builder: impl Fn(&NoisePath) -> Result<ParameterProcess> + Send + Sync + 'static,
    ) -> Self {
        self.eta = Some((noise_dim, Arc::new(builder)));
        self
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Brownian channels a path must carry for [`solve`](Self::solve).
    pub fn noise_dim(&self) -> usize {
        match self.scheme {
            Scheme::Rode(_) => self.eta.as_ref().map_or(0, |e| e.0),
            Scheme::Rk4 => 0,
            _ => self.model.noise_dim(),
        }
    }

    /// The parameter process a RODE solver would build from `path`.
    pub fn parameter_process(&self, path: &NoisePath) -> Result<Option<ParameterProcess>> {
        self.eta.as_ref().map(|(_, b)| b(path)).transpose()
    }

    pub fn solve(&self, x0: &[f64], path: &NoisePath) -> Result<Trajectory> {
        match self.scheme {
            Scheme::EulerMaruyama => euler_maruyama(&self.model, x0, path),
            Scheme::StochasticHeun => heun_strat(&self.model, x0, path),
            Scheme::Rk4 => rk4(&self.model, x0, &path.times()),
            Scheme::Rode(rs) => {
                let (_, builder) = self.eta.as_ref().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "RODE solver for `{}` has no parameter process",
                        self.model.name()
                    ))
                })?;
                let eta = builder(path)?;
                if eta.len() != path.steps() + 1 {
                    return Err(Error::GridMismatch(format!(
                        "parameter process has {} samples, path grid has {}",
                        eta.len(),
                        path.steps() + 1
                    )));
                }
                solve_rode(&self.model, x0, &eta, rs)
            }
        }
    }
}
