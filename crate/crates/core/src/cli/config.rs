//! The experiment file format (TOML, `version = 1`).
//!
//! ```toml
//! version = 1
//!
//! [model]
//! id = "ell"
//! interpretation = "stratonovich"   # optional, entry default otherwise
//!
//! [model.params]
//! b = [0.0, 0.0, 1.0]
//! alpha = 1.0
//! epsilon = 1.0
//!
//! [run]
//! t_end = 10.0
//! h = 1e-4
//! seed = 1
//! n_paths = 1
//! x0 = [0.0, 0.6, 0.8]
//! functionals = ["norm_sq"]
//!
//! [[analysis]]
//! kind = "invariance"
//! field = "sphere"
//! ```
//!
//! Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use crate::integrate::{Interpretation, Scheme};
use crate::models::{ModelId, ModelParams};
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: ModelSection,
    pub run: RunSection,
    #[serde(default)]
    pub analysis: Vec<Analysis>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub id: String,
    pub interpretation: Option<Interpretation>,
    #[serde(default)]
    pub params: ModelParams,
    /// Parameter process of `rode_ll`.
    pub eta: Option<EtaConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EtaConfig {
    /// `η_t = exp(B_t / √(2t log log t))`, `η = 1` up to `t_min`.
    IteratedLog {
        #[serde(default = "default_t_min")]
        t_min: f64,
    },
    Constant {
        value: Vec<f64>,
    },
    /// `dη = −θ (η − η₀) dt + c dW` per component, started at `η₀`.
    OrnsteinUhlenbeck {
        eta0: Vec<f64>,
        theta: f64,
        sigma: f64,
    },
}

fn default_t_min() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Scheme name; the interpretation's default when absent.
    pub scheme: Option<String>,
    pub t_end: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub n_paths: usize,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub functionals: Vec<String>,
    /// Output directory; `--out` takes precedence.
    pub output: Option<String>,
}

fn default_h() -> f64 {
    1e-4
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    #[default]
    Fibonacci,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    ClosedForm,
    Finest,
    FirstIntegral,
    /// Gap between Heun on the Stratonovich model and Euler–Maruyama on its
    /// Itô conversion.
    ConvertedIto,
}

/// Initial conditions for attraction runs.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StartConfig {
    /// `run.x0` for every path.
    Fixed,
    /// Uniform on the unit sphere outside the cap `x·pole > cos_max`.
    SphereOutsideCap { pole: [f64; 3], cos_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Analysis {
    Invariance {
        #[serde(default = "sphere")]
        field: String,
        #[serde(default = "tol_identity")]
        tol: f64,
        #[serde(default = "two_hundred")]
        samples: usize,
        #[serde(default)]
        sampler: SamplerKind,
        /// Parameter values drawn from a sampled process (RODE models).
        #[serde(default = "fifty")]
        eta_samples: usize,
    },
    Equilibrium {
        /// Points to test; `±b/‖b‖` when empty.
        #[serde(default)]
        points: Vec<Vec<f64>>,
        #[serde(default = "tol_equilibrium")]
        tol: f64,
        #[serde(default = "default_times")]
        times: Vec<f64>,
        /// Terms entering the verdict; the full drift and every diffusion
        /// column when empty.
        #[serde(default)]
        terms: Vec<String>,
    },
    Lyapunov {
        field: String,
        #[serde(default = "tol_step")]
        step_tol: f64,
    },
    FirstIntegral {
        field: String,
        tol: f64,
    },
    Attraction {
        target: Vec<f64>,
        eps: f64,
        #[serde(default = "fixed_start")]
        start: StartConfig,
        min_fraction: Option<f64>,
    },
    Stability {
        delta: f64,
        max_probability: Option<f64>,
        min_probability: Option<f64>,
    },
    Convergence {
        oracle: OracleKind,
        #[serde(default = "three")]
        levels: usize,
        h0: f64,
        /// Conserved field for the `first-integral` oracle.
        field: Option<String>,
        expect_order: Option<f64>,
        order_tol: Option<f64>,
        /// Minimum ratio between successive errors.
        min_ratio: Option<f64>,
    },
    Symplecticity {
        tol: f64,
    },
}

fn sphere() -> String {
    "sphere".into()
}
fn tol_identity() -> f64 {
    1e-12
}
fn tol_equilibrium() -> f64 {
    1e-14
}
fn tol_step() -> f64 {
    1e-12
}
fn two_hundred() -> usize {
    200
}
fn fifty() -> usize {
    50
}
fn three() -> usize {
    3
}
fn default_times() -> Vec<f64> {
    vec![0.0, 1.0, 10.0]
}
fn fixed_start() -> StartConfig {
    StartConfig::Fixed
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Invariance { .. } => "invariance",
            Analysis::Equilibrium { .. } => "equilibrium",
            Analysis::Lyapunov { .. } => "lyapunov",
            Analysis::FirstIntegral { .. } => "first-integral",
            Analysis::Attraction { .. } => "attraction",
            Analysis::Stability { .. } => "stability",
            Analysis::Convergence { .. } => "convergence",
            Analysis::Symplecticity { .. } => "symplecticity",
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn model_id(&self) -> Result<ModelId> {
        self.model.id.parse()
    }

    pub fn scheme(&self) -> Result<Option<Scheme>> {
        self.run.scheme.as_deref().map(str::parse).transpose()
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(bad(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.model_id()?;
        self.scheme()?;
        let r = &self.run;
        if !(r.t_end > 0.0 && r.t_end.is_finite()) {
            return Err(bad("run.t_end must be positive"));
        }
        if !(r.h > 0.0) || r.h > r.t_end {
            return Err(bad("run.h must lie in (0, t_end]"));
        }
        if r.n_paths == 0 {
            return Err(bad("run.n_paths must be at least 1"));
        }
        for a in &self.analysis {
            match a {
                Analysis::Invariance { tol, samples, .. } if !(*tol >= 0.0) || *samples == 0 => {
                    return Err(bad("invariance needs tol ≥ 0 and samples ≥ 1"))
                }
                Analysis::Equilibrium { times, .. } if times.is_empty() => {
                    return Err(bad("equilibrium needs at least one time"))
                }
                Analysis::Attraction { eps, .. } if !(*eps > 0.0) => {
                    return Err(bad("attraction eps must be positive"))
                }
                Analysis::Stability { delta, .. } => {
                    let radius = r.x0.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(radius > 0.0 && *delta > radius) {
                        return Err(bad(format!(
                            "stability needs delta > |x0| > 0 (delta = {delta}, |x0| = {radius})"
                        )));
                    }
                }
                Analysis::Convergence {
                    levels,
                    h0,
                    oracle,
                    field,
                    ..
                } => {
                    if *levels < 3 {
                        return Err(bad(format!("convergence needs at least 3 levels, got {levels}")));
                    }
                    if !(*h0 > 0.0) || *h0 > r.t_end {
                        return Err(bad("convergence h0 must lie in (0, t_end]"));
                    }
                    if *oracle == OracleKind::FirstIntegral && field.is_none() {
                        return Err(bad("the first-integral oracle needs a field"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The configuration as TOML, with the seed override applied and the
    /// output directory dropped.
    pub fn resolved_toml(&self) -> String {
        let mut c = self.clone();
        c.run.output = None;
        toml::to_string(&c).unwrap_or_default()
    }
}
