use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// `(t, x, η, out)`. `η` is empty except for RODE models.
pub type DriftFn = Arc<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;
/// `(t, x, out)` with `out` row-major `n × l`. Also used for the diffusion
/// Jacobian, where `out[(i·l + k)·n + j] = ∂σ_ik/∂x_j`.
pub type DiffusionFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Ode,
    Ito,
    Stratonovich,
    Rode,
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpretation::Ode => "ode",
            Interpretation::Ito => "ito",
            Interpretation::Stratonovich => "stratonovich",
            Interpretation::Rode => "rode",
        })
    }
}

/// A named summand of the drift, kept for per-term equilibrium reports.
#[derive(Clone)]
pub struct DriftTerm {
    pub name: String,
    pub f: DriftFn,
}

/// Drift, diffusion and interpretation of a (stochastic) differential equation.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    dim: usize,
    noise_dim: usize,
    param_dim: usize,
    interpretation: Interpretation,
    drift: DriftFn,
    drift_terms: Vec<DriftTerm>,
    diffusion: Option<DiffusionFn>,
    diffusion_jacobian: Option<DiffusionFn>,
    params: Vec<(String, f64)>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .field("param_dim", &self.param_dim)
            .field("interpretation", &self.interpretation)
            .field(
                "drift_terms",
                &self.drift_terms.iter().map(|t| &t.name).collect::<Vec<_>>(),
            )
            .field("has_jacobian", &self.diffusion_jacobian.is_some())
            .field("params", &self.params)
            .finish()
    }
}

impl ModelSpec {
    pub fn ode(
        name: impl Into<String>,
        dim: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::base(
            name,
            dim,
            0,
            0,
            Interpretation::Ode,
            Arc::new(move |t, x, _, out| drift(t, x, out)),
            None,
        )
    }

    pub fn ito(
        name: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::sde(name, dim, noise_dim, Interpretation::Ito, drift, diffusion)
    }

    pub fn stratonovich(
        name: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::sde(name, dim, noise_dim, Interpretation::Stratonovich, drift, diffusion)
    }

    /// `interpretation` must be `Ito` or `Stratonovich`.
    pub fn sde(
        name: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        interpretation: Interpretation,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        assert!(
            matches!(interpretation, Interpretation::Ito | Interpretation::Stratonovich),
            "sde models are Itô or Stratonovich"
        );
        Self::base(
            name,
            dim,
            noise_dim,
            0,
            interpretation,
            Arc::new(move |t, x, _, out| drift(t, x, out)),
            Some(Arc::new(diffusion)),
        )
    }

    /// `dx/dt = f(t, x, η_t)` with `η_t ∈ R^param_dim`.
    pub fn rode(
        name: impl Into<String>,
        dim: usize,
        param_dim: usize,
        drift: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::base(name, dim, 0, param_dim, Interpretation::Rode, Arc::new(drift), None)
    }

    fn base(
        name: impl Into<String>,
        dim: usize,
        noise_dim: usize,
        param_dim: usize,
        interpretation: Interpretation,
        drift: DriftFn,
        diffusion: Option<DiffusionFn>,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            noise_dim,
            param_dim,
            interpretation,
            drift,
            drift_terms: Vec::new(),
            diffusion,
            diffusion_jacobian: None,
            params: Vec::new(),
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.diffusion_jacobian = Some(Arc::new(jac));
        self
    }

    /// Adds a named drift summand. The summands are reported separately by
    /// equilibrium checks; they must add up to the full drift.
    pub fn with_term(
        mut self,
        name: impl Into<String>,
        f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.drift_terms.push(DriftTerm {
            name: name.into(),
            f: Arc::new(f),
        });
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn has_diffusion(&self) -> bool {
        self.diffusion.is_some()
    }

    pub fn has_jacobian(&self) -> bool {
        self.diffusion_jacobian.is_some()
    }

    pub fn drift_terms(&self) -> &[DriftTerm] {
        &self.drift_terms
    }

    pub(crate) fn drift_fn(&self) -> &DriftFn {
        &self.drift
    }

    pub(crate) fn diffusion_fn(&self) -> Option<&DiffusionFn> {
        self.diffusion.as_ref()
    }

    pub(crate) fn jacobian_fn(&self) -> Option<&DiffusionFn> {
        self.diffusion_jacobian.as_ref()
    }

    pub(crate) fn replace_drift(mut self, drift: DriftFn, interpretation: Interpretation) -> Self {
        self.drift = drift;
        self.interpretation = interpretation;
        self
    }

    #[inline]
    pub fn eval_drift(&self, t: f64, x: &[f64], eta: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, eta, out)
    }

    /// Fills `out` (`n × l`, row-major); zero when the model has no diffusion.
    #[inline]
    pub fn eval_diffusion(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.diffusion {
            Some(d) => d(t, x, out),
            None => out.iter_mut().for_each(|v| *v = 0.0),
        }
    }

    pub fn drift(&self, t: f64, x: &[f64], eta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_drift(t, x, eta, &mut out);
        out
    }

    pub fn diffusion(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.noise_dim];
        self.eval_diffusion(t, x, &mut out);
        out
    }

    /// `∂σ_ik/∂x_j` at `out[(i·l + k)·n + j]`, when available.
    pub fn diffusion_jacobian(&self, t: f64, x: &[f64]) -> Option<Vec<f64>> {
        self.diffusion_jacobian.as_ref().map(|j| {
            let mut out = vec![0.0; self.dim * self.noise_dim * self.dim];
            j(t, x, &mut out);
            out
        })
    }

    /// Structural validation plus a finite evaluation at a probe point.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidParams {
            model: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.dim == 0 {
            return Err(bad("state dimension must be positive"));
        }
        match self.interpretation {
            Interpretation::Ode | Interpretation::Rode => {
                if self.diffusion.is_some() || self.noise_dim != 0 {
                    return Err(bad("ODE and RODE models carry no diffusion on the state"));
                }
                if (self.interpretation == Interpretation::Rode) != (self.param_dim > 0) {
                    return Err(bad("only RODE models take a parameter process"));
                }
            }
            Interpretation::Ito | Interpretation::Stratonovich => {
                if self.diffusion.is_none() || self.noise_dim == 0 {
                    return Err(bad("SDE models need a diffusion with at least one noise channel"));
                }
            }
        }
        let probe: Vec<f64> = (0..self.dim).map(|i| 0.5 + 0.1 * i as f64).collect();
        let eta = vec![1.0; self.param_dim];
        if self.drift(0.0, &probe, &eta).iter().any(|v| !v.is_finite()) {
            return Err(bad("drift is not finite at the probe point"));
        }
        if self.diffusion(0.0, &probe).iter().any(|v| !v.is_finite()) {
            return Err(bad("diffusion is not finite at the probe point"));
        }
        if !self.drift_terms.is_empty() {
            let total = self.drift(0.5, &probe, &eta);
            let mut sum = vec![0.0; self.dim];
            let mut buf = vec![0.0; self.dim];
            for term in &self.drift_terms {
                (term.f)(0.5, &probe, &eta, &mut buf);
                sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
            }
            let scale = total.iter().map(|v| v.abs()).fold(1.0, f64::max);
            if total.iter().zip(&sum).any(|(a, b)| (a - b).abs() > 1e-12 * scale) {
                return Err(bad("drift summands do not add up to the drift"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_inconsistent_models() {
        let ok = ModelSpec::ito("gbm", 1, 1, |_, x, o| o[0] = -x[0], |_, x, o| o[0] = x[0]);
        ok.validate().unwrap();
        let no_dim = ModelSpec::ode("empty", 0, |_, _, _| {});
        assert!(no_dim.validate().is_err());
        let no_noise = ModelSpec::ito("bad", 1, 0, |_, x, o| o[0] = x[0], |_, _, _| {});
        assert!(no_noise.validate().is_err());
        let nan = ModelSpec::ode("nan", 1, |_, _, o| o[0] = f64::NAN);
        assert!(nan.validate().is_err());
        let terms = ModelSpec::ode("split", 1, |_, x, o| o[0] = 2.0 * x[0])
            .with_term("a", |_, x, _, o| o[0] = x[0])
            .with_term("b", |_, x, _, o| o[0] = 0.5 * x[0]);
        assert!(terms.validate().is_err());
    }

    #[test]
    fn ode_has_zero_diffusion() {
        let m = ModelSpec::ode("decay", 2, |_, x, o| {
            o[0] = -x[0];
            o[1] = -x[1];
        });
        assert!(m.diffusion(0.0, &[1.0, 1.0]).is_empty());
        assert_eq!(m.drift(0.0, &[1.0, 2.0], &[]), vec![-1.0, -2.0]);
    }
}
