use std::sync::Arc;

use super::{Interpretation, ModelSpec};
use crate::vecalg::ScalarField;
use crate::{Error, Result};

/// The Itô model with the same solutions as a Stratonovich model.
///
/// The drift gains the Wong–Zakai correction
/// `f_cor,i = f_i + ½ Σ_k Σ_j σ_jk ∂σ_ik/∂x_j`; the diffusion is unchanged.
pub fn strat_to_ito(model: &ModelSpec) -> Result<ModelSpec> {
    if model.interpretation() != Interpretation::Stratonovich {
        return Err(Error::WrongInterpretation {
            model: model.name().to_string(),
            expected: Interpretation::Stratonovich,
            found: model.interpretation(),
        });
    }
    let jac = model
        .jacobian_fn()
        .cloned()
        .ok_or_else(|| Error::MissingJacobian(model.name().to_string()))?;
    let diffusion = model
        .diffusion_fn()
        .cloned()
        .expect("validated Stratonovich model has a diffusion");
    let drift = model.drift_fn().clone();
    let (n, l) = (model.dim(), model.noise_dim());
    let correction = Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
        let mut sigma = vec![0.0; n * l];
        let mut d = vec![0.0; n * l * n];
        diffusion(t, x, &mut sigma);
        jac(t, x, &mut d);
        for (i, o) in out.iter_mut().enumerate() {
            let mut c = 0.0;
            for k in 0..l {
                for j in 0..n {
                    c += sigma[j * l + k] * d[(i * l + k) * n + j];
                }
            }
            *o = 0.5 * c;
        }
    });
    let cor = correction.clone();
    let corrected = Arc::new(move |t: f64, x: &[f64], eta: &[f64], out: &mut [f64]| {
        drift(t, x, eta, out);
        let mut c = vec![0.0; n];
        cor(t, x, &mut c);
        out.iter_mut().zip(&c).for_each(|(o, c)| *o += c);
    });
    let mut ito = model.clone().replace_drift(corrected, Interpretation::Ito);
    if !model.drift_terms().is_empty() {
        ito = ito.with_term("wong_zakai", move |t, x, _, out| correction(t, x, out));
    }
    ito = ito.renamed(format!("{}[ito]", model.name()));
    Ok(ito)
}

/// `LV(t, x) = ∇V·f + ½ Σ_ij ∂²V/∂x_i∂x_j (σσᵀ)_ij` for an Itô model and an
/// autonomous `V`.
pub fn apply_generator(model: &ModelSpec, v: &ScalarField, t: f64, x: &[f64]) -> Result<f64> {
    if model.interpretation() != Interpretation::Ito {
        return Err(Error::WrongInterpretation {
            model: model.name().to_string(),
            expected: Interpretation::Ito,
            found: model.interpretation(),
        });
    }
    let hess = v.hess(x).ok_or(Error::MissingHessian)?;
    let (n, l) = (model.dim(), model.noise_dim());
    let f = model.drift(t, x, &[]);
    let grad = v.grad(x);
    let mut lv: f64 = grad.iter().zip(&f).map(|(g, fi)| g * fi).sum();
    let sigma = model.diffusion(t, x);
    let mut second = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a: f64 = (0..l).map(|k| sigma[i * l + k] * sigma[j * l + k]).sum();
            second += hess[i * n + j] * a;
        }
    }
    lv += 0.5 * second;
    Ok(lv)
}
