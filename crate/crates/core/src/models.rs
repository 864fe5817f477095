//! The model catalog: Larmor and Landau–Lifshitz families, the Kubo
//! oscillator, the scalar linear SDE and the isochronous oscillator bank.
//!
//! Every builder returns a validated [`ModelSpec`]. Stratonovich-capable
//! entries carry analytic diffusion Jacobians so they can be converted with
//! [`strat_to_ito`](crate::integrate::strat_to_ito).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::integrate::{Interpretation, ModelSpec};
use crate::vecalg::{cross, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelId {
    /// `dμ/dt = μ ∧ b`.
    Larmor,
    /// `dμ = μ ∧ b dt + ε μ ∧ (S ⋆dW)` with a constant 3×3 matrix `S`.
    LarmorExternal,
    /// `dZ = (Z ∧ b)(dt + γ ⋆dB)`, one-dimensional `B`.
    LarmorPreserving,
    /// `dμ/dt = −μ ∧ b − α μ ∧ (μ ∧ b)`.
    Ll,
    /// Landau–Lifshitz with external noise on the effective field.
    Ell,
    EtoreInvariantized,
    ModifiedEtore,
    RodeLl,
    Kubo,
    ScalarLinear,
    Isochronous,
}

impl ModelId {
    pub const ALL: [ModelId; 11] = [
        ModelId::Larmor,
        ModelId::LarmorExternal,
        ModelId::LarmorPreserving,
        ModelId::Ll,
        ModelId::Ell,
        ModelId::EtoreInvariantized,
        ModelId::ModifiedEtore,
        ModelId::RodeLl,
        ModelId::Kubo,
        ModelId::ScalarLinear,
        ModelId::Isochronous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Larmor => "larmor",
            ModelId::LarmorExternal => "larmor_external",
            ModelId::LarmorPreserving => "larmor_preserving",
            ModelId::Ll => "ll",
            ModelId::Ell => "ell",
            ModelId::EtoreInvariantized => "etore_invariantized",
            ModelId::ModifiedEtore => "modified_etore",
            ModelId::RodeLl => "rode_ll",
            ModelId::Kubo => "kubo",
            ModelId::ScalarLinear => "scalar_linear",
            ModelId::Isochronous => "isochronous",
        }
    }

    /// Interpretations the entry can be built with; the first is the default.
    pub fn interpretations(self) -> &'static [Interpretation] {
        use Interpretation::*;
        match self {
            ModelId::Larmor | ModelId::Ll => &[Ode],
            ModelId::LarmorExternal | ModelId::LarmorPreserving | ModelId::Ell => &[Stratonovich, Ito],
            ModelId::EtoreInvariantized | ModelId::ModifiedEtore => &[Ito],
            ModelId::RodeLl => &[Rode],
            ModelId::Kubo | ModelId::Isochronous => &[Stratonovich, Ito],
            ModelId::ScalarLinear => &[Ito, Stratonovich],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Named parameters of a catalog entry. Which fields are required depends on
/// the entry.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Effective field.
    pub b: Option<[f64; 3]>,
    /// Damping, `α ≥ 0`.
    pub alpha: Option<f64>,
    /// Noise amplitude, `ε ≥ 0`.
    pub epsilon: Option<f64>,
    /// Noise gain of `larmor_preserving` and `isochronous`.
    pub gamma: Option<f64>,
    /// Drift rate of `scalar_linear`.
    pub a: Option<f64>,
    /// Noise rate of `scalar_linear`.
    pub b_scalar: Option<f64>,
    /// Frequencies of `isochronous`.
    pub omega: Option<Vec<f64>>,
    pub kubo_a: Option<f64>,
    pub kubo_sigma: Option<f64>,
    /// Constant noise matrix of `larmor_external` (rows); identity by default.
    pub sigma: Option<[[f64; 3]; 3]>,
    /// `rode_ll` only: drive with a scalar `η_t` along `b` instead of a full
    /// vector process `b_t = η_t`.
    #[serde(default)]
    pub eta_along_b: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: ModelId,
    pub params: ModelParams,
    /// `None` selects the entry's default interpretation.
    pub interpretation: Option<Interpretation>,
}

impl CatalogEntry {
    pub fn new(id: ModelId, params: ModelParams) -> Self {
        Self {
            id,
            params,
            interpretation: None,
        }
    }

    pub fn with_interpretation(mut self, i: Interpretation) -> Self {
        self.interpretation = Some(i);
        self
    }
}

/// Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Landau–Lifshitz drift `−μ ∧ b − α μ ∧ (μ ∧ b)`.
pub fn ll_drift(mu: Vec3, b: Vec3, alpha: f64) -> Vec3 {
    let mb = cross(mu, b);
    -mb - cross(mu, mb) * alpha
}

/// The matrix of `v ↦ −x ∧ v − α x ∧ (x ∧ v)`, with entries
/// `σ_ik = −ε_ijk x_j − α (x_i x_k − δ_ik ‖x‖²)`.
pub fn sigma_ell(x: Vec3, alpha: f64) -> [[f64; 3]; 3] {
    let xs = x.to_array();
    let n2 = x.norm_sq();
    let mut s = [[0.0; 3]; 3];
    for (i, row) in s.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            let rot: f64 = (0..3).map(|j| -levi_civita(i, j, k) * xs[j]).sum();
            let delta = if i == k { n2 } else { 0.0 };
            *v = rot - alpha * (xs[i] * xs[k] - delta);
        }
    }
    s
}

/// `∂σ_ik/∂x_j` of [`sigma_ell`], flattened as `(i·3 + k)·3 + j`.
fn sigma_ell_jacobian(x: Vec3, alpha: f64, out: &mut [f64]) {
    let xs = x.to_array();
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                out[(i * 3 + k) * 3 + j] =
                    -levi_civita(i, j, k) - alpha * (d(i, j) * xs[k] + xs[i] * d(k, j) - 2.0 * d(i, k) * xs[j]);
            }
        }
    }
}

struct Checked<'a> {
    id: ModelId,
    p: &'a ModelParams,
}

impl Checked<'_> {
    fn bad(&self, reason: impl Into<String>) -> Error {
        Error::InvalidParams {
            model: self.id.to_string(),
            reason: reason.into(),
        }
    }

    fn real(&self, name: &str, v: Option<f64>) -> Result<f64> {
        let v = v.ok_or_else(|| self.bad(format!("missing `{name}`")))?;
        if !v.is_finite() {
            return Err(self.bad(format!("`{name}` must be finite")));
        }
        Ok(v)
    }

    fn nonneg(&self, name: &str, v: Option<f64>) -> Result<f64> {
        let v = self.real(name, v)?;
        if v < 0.0 {
            return Err(self.bad(format!("`{name}` must be nonnegative, got {v}")));
        }
        Ok(v)
    }

    fn field(&self) -> Result<Vec3> {
        let b = Vec3::from(self.p.b.ok_or_else(|| self.bad("missing `b`"))?);
        if !b.to_array().iter().all(|v| v.is_finite()) || b.norm() == 0.0 {
            return Err(self.bad("effective field `b` must be finite and nonzero"));
        }
        Ok(b)
    }
}

fn v3(x: &[f64]) -> Vec3 {
    Vec3::from_slice(x)
}

pub fn build_model(entry: &CatalogEntry) -> Result<ModelSpec> {
    let id = entry.id;
    let c = Checked { id, p: &entry.params };
    let interp = match entry.interpretation {
        None => id.interpretations()[0],
        Some(i) if id.interpretations().contains(&i) => i,
        Some(i) => return Err(c.bad(format!("interpretation {i:?} is not available"))),
    };
    let p = &entry.params;
    let model = match id {
        ModelId::Larmor => {
            let b = c.field()?;
            ModelSpec::ode(id.as_str(), 3, move |_, x, o| cross(v3(x), b).write_to(o))
                .with_term("precession", move |_, x, _, o| cross(v3(x), b).write_to(o))
        }
        ModelId::LarmorExternal => {
            let b = c.field()?;
            let eps = c.nonneg("epsilon", p.epsilon)?;
            let s = p.sigma.unwrap_or([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
            if s.iter().flatten().any(|v| !v.is_finite()) {
                return Err(c.bad("`sigma` must be finite"));
            }
            ModelSpec::sde(
                id.as_str(),
                3,
                3,
                interp,
                move |_, x, o| cross(v3(x), b).write_to(o),
                move |_, x, o| {
                    // column k: ε x ∧ S e_k
                    for k in 0..3 {
                        let col = cross(v3(x), Vec3::new(s[0][k], s[1][k], s[2][k])) * eps;
                        let a = col.to_array();
                        for i in 0..3 {
                            o[i * 3 + k] = a[i];
                        }
                    }
                },
            )
            .with_jacobian(move |_, _, o| {
                for i in 0..3 {
                    for k in 0..3 {
                        for j in 0..3 {
                            o[(i * 3 + k) * 3 + j] = eps * (0..3).map(|m| levi_civita(i, j, m) * s[m][k]).sum::<f64>();
                        }
                    }
                }
            })
            .with_term("precession", move |_, x, _, o| cross(v3(x), b).write_to(o))
            .with_param("epsilon", eps)
        }
        ModelId::LarmorPreserving => {
            let b = c.field()?;
            let gamma = c.real("gamma", p.gamma)?;
            if gamma == 0.0 {
                return Err(c.bad("`gamma` must be nonzero"));
            }
            let bs = b.to_array();
            ModelSpec::sde(
                id.as_str(),
                3,
                1,
                interp,
                move |_, x, o| cross(v3(x), b).write_to(o),
                move |_, x, o| (cross(v3(x), b) * gamma).write_to(o),
            )
            .with_jacobian(move |_, _, o| {
                for i in 0..3 {
                    for j in 0..3 {
                        o[i * 3 + j] = gamma * (0..3).map(|k| levi_civita(i, j, k) * bs[k]).sum::<f64>();
                    }
                }
            })
            .with_term("precession", move |_, x, _, o| cross(v3(x), b).write_to(o))
            .with_param("gamma", gamma)
        }
        ModelId::Ll => {
            let b = c.field()?;
            let alpha = c.nonneg("alpha", p.alpha)?;
            ModelSpec::ode(id.as_str(), 3, move |_, x, o| ll_drift(v3(x), b, alpha).write_to(o))
                .with_term("precession", move |_, x, _, o| (-cross(v3(x), b)).write_to(o))
                .with_term("damping", move |_, x, _, o| {
                    (cross(v3(x), cross(v3(x), b)) * -alpha).write_to(o)
                })
                .with_param("alpha", alpha)
        }
        ModelId::Ell => {
            let b = c.field()?;
            let alpha = c.nonneg("alpha", p.alpha)?;
            let eps = c.nonneg("epsilon", p.epsilon)?;
            ModelSpec::sde(
                id.as_str(),
                3,
                3,
                interp,
                move |_, x, o| ll_drift(v3(x), b, alpha).write_to(o),
                move |_, x, o| {
                    let s = sigma_ell(v3(x), alpha);
                    for i in 0..3 {
                        for k in 0..3 {
                            o[i * 3 + k] = eps * s[i][k];
                        }
                    }
                },
            )
            .with_jacobian(move |_, x, o| {
                sigma_ell_jacobian(v3(x), alpha, o);
                o.iter_mut().for_each(|v| *v *= eps);
            })
            .with_term("precession", move |_, x, _, o| (-cross(v3(x), b)).write_to(o))
            .with_term("damping", move |_, x, _, o| {
                (cross(v3(x), cross(v3(x), b)) * -alpha).write_to(o)
            })
            .with_param("alpha", alpha)
            .with_param("epsilon", eps)
        }
        ModelId::EtoreInvariantized | ModelId::ModifiedEtore => {
            let b = c.field()?;
            let alpha = c.nonneg("alpha", p.alpha)?;
            let eps = c.nonneg("epsilon", p.epsilon)?;
            let rate = 2.0 * eps * eps * (alpha * alpha + 1.0);
            let scale = move |t: f64| 1.0 / (rate * t + 1.0).sqrt();
            let rescale = move |t: f64| -0.5 * rate / (rate * t + 1.0);
            let along_b = id == ModelId::ModifiedEtore;
            let l = if along_b { 1 } else { 3 };
            ModelSpec::ito(
                id.as_str(),
                3,
                l,
                move |t, x, o| (v3(x) * rescale(t) + ll_drift(v3(x), b, alpha) * scale(t)).write_to(o),
                move |t, x, o| {
                    let s = sigma_ell(v3(x), alpha);
                    let g = eps * scale(t);
                    if along_b {
                        let bb = b.to_array();
                        for i in 0..3 {
                            o[i] = g * (0..3).map(|k| s[i][k] * bb[k]).sum::<f64>();
                        }
                    } else {
                        for i in 0..3 {
                            for k in 0..3 {
                                o[i * 3 + k] = g * s[i][k];
                            }
                        }
                    }
                },
            )
            .with_term("rescaling", move |t, x, _, o| (v3(x) * rescale(t)).write_to(o))
            .with_term("ll_drift", move |t, x, _, o| {
                (ll_drift(v3(x), b, alpha) * scale(t)).write_to(o)
            })
            .with_param("alpha", alpha)
            .with_param("epsilon", eps)
        }
        ModelId::RodeLl => {
            let alpha = c.nonneg("alpha", p.alpha)?;
            if p.eta_along_b {
                let b = c.field()?;
                let field = move |eta: &[f64]| b * eta[0];
                ModelSpec::rode(id.as_str(), 3, 1, move |_, x, eta, o| {
                    ll_drift(v3(x), field(eta), alpha).write_to(o)
                })
                .with_term("precession", move |_, x, eta, o| {
                    (-cross(v3(x), field(eta))).write_to(o)
                })
                .with_term("damping", move |_, x, eta, o| {
                    (cross(v3(x), cross(v3(x), field(eta))) * -alpha).write_to(o)
                })
                .with_param("alpha", alpha)
            } else {
                ModelSpec::rode(id.as_str(), 3, 3, move |_, x, eta, o| {
                    ll_drift(v3(x), v3(eta), alpha).write_to(o)
                })
                .with_term("precession", move |_, x, eta, o| (-cross(v3(x), v3(eta))).write_to(o))
                .with_term("damping", move |_, x, eta, o| {
                    (cross(v3(x), cross(v3(x), v3(eta))) * -alpha).write_to(o)
                })
                .with_param("alpha", alpha)
            }
        }
        ModelId::Kubo => {
            let a = c.real("kubo_a", p.kubo_a)?;
            let s = c.real("kubo_sigma", p.kubo_sigma)?;
            ModelSpec::sde(
                id.as_str(),
                2,
                1,
                interp,
                move |_, x, o| {
                    o[0] = -a * x[1];
                    o[1] = a * x[0];
                },
                move |_, x, o| {
                    o[0] = -s * x[1];
                    o[1] = s * x[0];
                },
            )
            .with_jacobian(move |_, _, o| o.copy_from_slice(&[0.0, -s, s, 0.0]))
            .with_term("rotation", move |_, x, _, o| {
                o[0] = -a * x[1];
                o[1] = a * x[0];
            })
            .with_param("kubo_a", a)
            .with_param("kubo_sigma", s)
        }
        ModelId::ScalarLinear => {
            let a = c.real("a", p.a)?;
            let bs = c.real("b_scalar", p.b_scalar)?;
            ModelSpec::sde(
                id.as_str(),
                1,
                1,
                interp,
                move |_, x, o| o[0] = a * x[0],
                move |_, x, o| o[0] = bs * x[0],
            )
            .with_jacobian(move |_, _, o| o[0] = bs)
            .with_term("linear", move |_, x, _, o| o[0] = a * x[0])
            .with_param("a", a)
            .with_param("b_scalar", bs)
        }
        ModelId::Isochronous => {
            let omega = p.omega.clone().ok_or_else(|| c.bad("missing `omega`"))?;
            if omega.is_empty() || omega.iter().any(|w| !w.is_finite()) {
                return Err(c.bad("`omega` must be a nonempty list of finite frequencies"));
            }
            let gamma = match p.gamma {
                Some(_) => c.real("gamma", p.gamma)?,
                None => 0.0,
            };
            let m = omega.len();
            let w2 = omega.clone();
            // State (I_1..I_m, θ_1..θ_m); noise from K(I) = γ/2 Σ I_i².
            ModelSpec::sde(
                id.as_str(),
                2 * m,
                1,
                interp,
                move |_, _, o| {
                    o[..m].iter_mut().for_each(|v| *v = 0.0);
                    o[m..].copy_from_slice(&omega);
                },
                move |_, x, o| {
                    o[..m].iter_mut().for_each(|v| *v = 0.0);
                    for i in 0..m {
                        o[m + i] = gamma * x[i];
                    }
                },
            )
            .with_jacobian(move |_, _, o| {
                o.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..m {
                    o[(m + i) * 2 * m + i] = gamma;
                }
            })
            .with_term("frequencies", move |_, _, _, o| {
                o[..m].iter_mut().for_each(|v| *v = 0.0);
                o[m..].copy_from_slice(&w2);
            })
            .with_param("gamma", gamma)
        }
    };
    let model = match p.b {
        Some(b)
            if matches!(
                id,
                ModelId::Larmor
                    | ModelId::LarmorExternal
                    | ModelId::LarmorPreserving
                    | ModelId::Ll
                    | ModelId::Ell
                    | ModelId::EtoreInvariantized
                    | ModelId::ModifiedEtore
            ) || p.eta_along_b =>
        {
            model
                .with_param("b1", b[0])
                .with_param("b2", b[1])
                .with_param("b3", b[2])
        }
        _ => model,
    };
    model.validate()?;
    Ok(model)
}

/// Reduces the angle coordinates of an isochronous state to `[0, 2π)`.
/// Integrators keep the unreduced angles.
pub fn reduce_angles(state: &mut [f64]) {
    let m = state.len() / 2;
    for th in &mut state[m..] {
        *th = th.rem_euclid(std::f64::consts::TAU);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecalg::fd_gradient;
    use crate::vecalg::ScalarField;

    fn params() -> ModelParams {
        ModelParams {
            b: Some([0.0, 0.0, 1.0]),
            alpha: Some(1.0),
            epsilon: Some(0.5),
            gamma: Some(0.7),
            a: Some(-1.0),
            b_scalar: Some(1.0),
            omega: Some(vec![1.0, 2.0]),
            kubo_a: Some(1.0),
            kubo_sigma: Some(0.5),
            ..Default::default()
        }
    }

    fn build(id: ModelId, i: Option<Interpretation>) -> ModelSpec {
        build_model(&CatalogEntry {
            id,
            params: params(),
            interpretation: i,
        })
        .unwrap()
    }

    #[test]
    fn every_entry_builds_with_its_interpretations() {
        for id in ModelId::ALL {
            for &i in id.interpretations() {
                let m = build(id, Some(i));
                assert_eq!(m.interpretation(), i);
                assert_eq!(m.name(), id.as_str());
            }
            assert_eq!(id.as_str().parse::<ModelId>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<ModelId>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn ll_drift_hand_value() {
        let m = build(ModelId::Ll, None);
        assert_eq!(m.drift(0.0, &[1.0, 0.0, 0.0], &[]), vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn ell_diffusion_at_north_pole() {
        let mut p = params();
        p.epsilon = Some(1.0);
        for alpha in [0.0, 0.5, 2.0] {
            p.alpha = Some(alpha);
            let m = build_model(&CatalogEntry::new(ModelId::Ell, p.clone()).with_interpretation(Interpretation::Ito))
                .unwrap();
            let s = m.diffusion(0.0, &[0.0, 0.0, 1.0]);
            assert_eq!(s, vec![alpha, 1.0, 0.0, -1.0, alpha, 0.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn sigma_ell_matches_cross_products() {
        let x = Vec3::new(0.3, -0.8, 0.5);
        let s = sigma_ell(x, 0.7);
        for (k, v) in [Vec3::E1, Vec3::E2, Vec3::E3].into_iter().enumerate() {
            let direct = -cross(x, v) - cross(x, cross(x, v)) * 0.7;
            let col = Vec3::new(s[0][k], s[1][k], s[2][k]);
            assert!((direct - col).norm() < 1e-15);
        }
    }

    #[test]
    fn kubo_drift_value() {
        let mut p = params();
        p.kubo_a = Some(2.5);
        let m = build_model(&CatalogEntry::new(ModelId::Kubo, p)).unwrap();
        assert_eq!(m.drift(0.0, &[1.0, 0.0], &[]), vec![0.0, 2.5]);
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let x = [0.3, -0.8, 0.5];
        for id in [ModelId::Ell, ModelId::LarmorExternal, ModelId::LarmorPreserving] {
            let m = build(id, Some(Interpretation::Stratonovich));
            let (n, l) = (m.dim(), m.noise_dim());
            let jac = m.diffusion_jacobian(0.0, &x).unwrap();
            for i in 0..n {
                for k in 0..l {
                    let mm = m.clone();
                    let entry = ScalarField::new("s", n, move |y| mm.diffusion(0.0, y)[i * l + k], |_| vec![]);
                    let fd = fd_gradient(&entry, &x);
                    for j in 0..n {
                        assert!((jac[(i * l + k) * n + j] - fd[j]).abs() < 1e-6, "{id} {i} {k} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn tangency_on_sphere() {
        let pts = crate::analyze::fibonacci_sphere(100);
        let ids = [
            ModelId::Larmor,
            ModelId::Ll,
            ModelId::Ell,
            ModelId::LarmorExternal,
            ModelId::LarmorPreserving,
        ];
        for id in ids {
            let m = build(id, None);
            for x in &pts {
                let f = m.drift(0.3, x, &[]);
                assert!(x.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-13, "{id}");
                let s = m.diffusion(0.3, x);
                let l = m.noise_dim();
                for k in 0..l {
                    let dot: f64 = (0..3).map(|i| x[i] * s[i * l + k]).sum();
                    assert!(dot.abs() <= 1e-13, "{id}");
                }
            }
        }
    }

    #[test]
    fn preserving_and_modified_vanish_at_poles() {
        let mut p = params();
        p.b = Some([0.3, -0.4, 1.2]);
        let b = Vec3::from(p.b.unwrap()).normalized().unwrap();
        let lp = build_model(&CatalogEntry::new(ModelId::LarmorPreserving, p.clone())).unwrap();
        let me = build_model(&CatalogEntry::new(ModelId::ModifiedEtore, p)).unwrap();
        for pole in [b, -b] {
            let x = pole.to_array();
            assert!(lp.drift(0.0, &x, &[]).iter().all(|v| v.abs() <= 1e-15));
            assert!(lp.diffusion(0.0, &x).iter().all(|v| v.abs() <= 1e-15));
            assert!(me.diffusion(1.0, &x).iter().all(|v| v.abs() <= 1e-14));
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.b = Some([0.0, 0.0, 0.0]);
        assert!(build_model(&CatalogEntry::new(ModelId::Ll, p)).is_err());
        let mut p = params();
        p.alpha = Some(-1.0);
        assert!(build_model(&CatalogEntry::new(ModelId::Ell, p)).is_err());
        let mut p = params();
        p.epsilon = None;
        assert!(build_model(&CatalogEntry::new(ModelId::Ell, p)).is_err());
        let mut p = params();
        p.gamma = Some(0.0);
        assert!(build_model(&CatalogEntry::new(ModelId::LarmorPreserving, p)).is_err());
        assert!(
            build_model(&CatalogEntry::new(ModelId::Ll, params()).with_interpretation(Interpretation::Ito)).is_err()
        );
    }

    #[test]
    fn angles_reduced_only_on_output() {
        let mut s = [1.0, 2.0, 7.0, -1.0];
        reduce_angles(&mut s);
        assert_eq!(s[..2], [1.0, 2.0]);
        assert!((s[2] - (7.0 - std::f64::consts::TAU)).abs() < 1e-15);
        assert!((s[3] - (std::f64::consts::TAU - 1.0)).abs() < 1e-15);
    }
}
