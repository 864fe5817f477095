use crate::analyze::{fibonacci_sphere, random_sphere};
use crate::integrate::{Interpretation, ModelSpec, Scheme, Solver};
use crate::models::{build_model, CatalogEntry, ModelId};
use crate::noise::{iterated_log_eta, parameter_sde, ParameterProcess, Provenance};
use crate::vecalg::{ScalarField, Vec3};
use crate::{Error, Result};

use super::config::{EtaConfig, ExperimentConfig, SamplerKind};

/// A validated config with its model and solver built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub id: ModelId,
    pub entry: CatalogEntry,
    pub model: ModelSpec,
    pub solver: Solver,
    pub functionals: Vec<ScalarField>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Built-in scalar fields by name: `norm_sq`, `half_norm_sq`, `sphere`,
/// `norm`, `mu_dot_b`, `neg_mu_dot_b` and `abs_power:<r>`.
pub fn resolve_field(name: &str, dim: usize, b: Option<[f64; 3]>) -> Result<ScalarField> {
    let need_b = || b.ok_or_else(|| bad(format!("field `{name}` needs the model parameter `b`")));
    let need_dim = |d: usize| {
        if dim == d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "scalar field",
                expected: d,
                found: dim,
            })
        }
    };
    Ok(match name {
        "norm_sq" => ScalarField::norm_sq(dim),
        "half_norm_sq" => ScalarField::half_norm_sq(dim),
        "sphere" => ScalarField::unit_sphere(dim),
        "norm" => ScalarField::new(
            "norm",
            dim,
            |x| x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            |x| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v / r).collect()
            },
        ),
        "mu_dot_b" => {
            need_dim(3)?;
            ScalarField::linear(&need_b()?).renamed("mu_dot_b")
        }
        "neg_mu_dot_b" => {
            need_dim(3)?;
            let b = need_b()?;
            ScalarField::linear(&[-b[0], -b[1], -b[2]]).renamed("neg_mu_dot_b")
        }
        other => match other.strip_prefix("abs_power:") {
            Some(r) => {
                need_dim(1)?;
                let r: f64 = r.parse().map_err(|_| bad(format!("bad exponent in `{other}`")))?;
                ScalarField::abs_power(r).renamed(format!("abs_power_{r}"))
            }
            None => return Err(bad(format!("unknown field `{other}`"))),
        },
    })
}

fn eta_solver(solver: Solver, model: &ModelSpec, eta: &EtaConfig, b: Option<[f64; 3]>) -> Result<Solver> {
    let d = model.param_dim();
    Ok(match eta.clone() {
        EtaConfig::IteratedLog { t_min } => {
            if !(t_min > std::f64::consts::E) {
                return Err(bad(format!("eta.t_min must exceed e, got {t_min}")));
            }
            match d {
                1 => solver.with_eta(1, move |p| iterated_log_eta(p, t_min)),
                3 => {
                    let b = b.ok_or_else(|| bad("a vector iterated-log field needs `b`"))?;
                    solver.with_eta(1, move |p| {
                        let eta = iterated_log_eta(p, t_min)?;
                        let vals = eta.values().iter().flat_map(|e| b.map(|c| c * e)).collect();
                        let mut out =
                            ParameterProcess::new(eta.times().to_vec(), vals, 3, Provenance::BrownianFunctional)?;
                        out.attach_observed_bound();
                        Ok(out)
                    })
                }
                _ => {
                    return Err(bad(format!(
                        "iterated-log process cannot drive a {d}-dimensional parameter"
                    )))
                }
            }
        }
        EtaConfig::Constant { value } => {
            if value.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "eta.value",
                    expected: d,
                    found: value.len(),
                });
            }
            solver.with_eta(0, move |p| Ok(ParameterProcess::constant(p, &value)))
        }
        EtaConfig::OrnsteinUhlenbeck { eta0, theta, sigma } => {
            if eta0.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "eta.eta0",
                    expected: d,
                    found: eta0.len(),
                });
            }
            let center = eta0.clone();
            let ou = ModelSpec::ito(
                "ornstein_uhlenbeck",
                d,
                d,
                move |_, x, o| {
                    for i in 0..d {
                        o[i] = -theta * (x[i] - center[i]);
                    }
                },
                move |_, _, o| {
                    o.iter_mut().for_each(|v| *v = 0.0);
                    for i in 0..d {
                        o[i * d + i] = sigma;
                    }
                },
            );
            ou.validate()?;
            solver.with_eta(d, move |p| parameter_sde(&ou, &eta0, p))
        }
    })
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let id = config.model_id()?;
        let entry = CatalogEntry {
            id,
            params: config.model.params.clone(),
            interpretation: config.model.interpretation,
        };
        let model = build_model(&entry)?;
        let scheme = config
            .scheme()?
            .unwrap_or_else(|| Scheme::default_for(model.interpretation()));
        let mut solver = Solver::new(model.clone(), scheme)?;
        if model.interpretation() == Interpretation::Rode {
            let eta = config
                .model
                .eta
                .as_ref()
                .ok_or_else(|| bad("RODE models need a [model.eta] section"))?;
            solver = eta_solver(solver, &model, eta, entry.params.b)?;
        } else if config.model.eta.is_some() {
            return Err(bad("[model.eta] applies only to RODE models"));
        }
        if config.run.x0.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                context: "run.x0",
                expected: model.dim(),
                found: config.run.x0.len(),
            });
        }
        let functionals = config
            .run
            .functionals
            .iter()
            .map(|f| resolve_field(f, model.dim(), entry.params.b))
            .collect::<Result<Vec<_>>>()?;
        let mut config = config.clone();
        config.model.interpretation = Some(model.interpretation());
        config.run.scheme = Some(scheme.to_string());
        Ok(Self {
            config,
            id,
            entry,
            model,
            solver,
            functionals,
        })
    }

    pub fn field(&self, name: &str) -> Result<ScalarField> {
        resolve_field(name, self.model.dim(), self.entry.params.b)
    }

    /// `±b/‖b‖`.
    pub fn poles(&self) -> Result<Vec<Vec<f64>>> {
        let b = self
            .entry
            .params
            .b
            .ok_or_else(|| bad("default equilibrium points need `b`"))?;
        let u = Vec3::from(b).normalized().ok_or_else(|| bad("`b` must be nonzero"))?;
        Ok(vec![u.to_vec(), (-u).to_vec()])
    }

    pub fn sphere_points(&self, n: usize, sampler: SamplerKind) -> Result<Vec<Vec<f64>>> {
        if self.model.dim() != 3 {
            return Err(bad("invariance sampling covers the unit sphere in R³ only"));
        }
        Ok(match sampler {
            SamplerKind::Fibonacci => fibonacci_sphere(n),
            SamplerKind::Random => random_sphere(self.config.run.seed, n),
        })
    }
}
