use std::fmt::Write as _;
use std::io::Write;

use crate::integrate::{Interpretation, ModelSpec};
use crate::vecalg::ScalarField;
use crate::{Error, Result};

/// One invariance condition evaluated over the sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    /// Maximum absolute residual over samples, times and `η` values.
    pub max_residual: f64,
    /// Whether the condition enters the verdict; others are diagnostics.
    pub required: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct InvarianceOptions {
    pub tol: f64,
    /// Maximum `|F|` accepted for a sample point.
    pub manifold_tol: f64,
    /// Times at which time-dependent fields are evaluated.
    pub times: Vec<f64>,
    /// Parameter values for RODE models.
    pub eta_samples: Vec<Vec<f64>>,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            manifold_tol: 1e-10,
            times: vec![0.0, 1.0],
            eta_samples: Vec::new(),
        }
    }
}

/// Result of [`check_invariance`].
///
/// Itô models are judged on diffusion tangency `∇F·σ_k = 0` and on the Itô
/// drift condition `∇F·f + ½ Σ_ij ∂²F/∂x_i∂x_j (σσᵀ)_ij = 0`. The bare drift
/// tangency and the second-order trace are reported alongside; on a manifold
/// where the drift is tangent the trace alone decides.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub model: String,
    pub field: String,
    pub interpretation: Interpretation,
    pub tol: f64,
    pub samples: usize,
    pub eta_samples: usize,
    pub conditions: Vec<Condition>,
    pub invariant: bool,
    /// Per-sample maxima, one entry per condition.
    pub rows: Vec<(Vec<f64>, Vec<f64>)>,
}

impl InvarianceReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "report: invariance");
        let _ = writeln!(s, "model: {}", self.model);
        let _ = writeln!(s, "field: {}", self.field);
        let _ = writeln!(s, "interpretation: {}", self.interpretation);
        let _ = writeln!(s, "tolerance: {:e}", self.tol);
        let _ = writeln!(s, "samples: {}", self.samples);
        if self.interpretation == Interpretation::Rode {
            let _ = writeln!(s, "eta_samples: {}", self.eta_samples);
        }
        for c in &self.conditions {
            let role = if c.required { "required" } else { "diagnostic" };
            let v = if c.pass { "pass" } else { "fail" };
            let _ = writeln!(s, "{}: {:.16e} ({role}, {v})", c.name, c.max_residual);
        }
        let _ = writeln!(
            s,
            "verdict: {}",
            if self.invariant { "invariant" } else { "not invariant" }
        );
        s
    }

    /// Residual table: sample coordinates, then one column per condition.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.rows.first().map_or(0, |r| r.0.len());
        write!(w, "sample")?;
        for i in 1..=n {
            write!(w, ",x{i}")?;
        }
        for c in &self.conditions {
            write!(w, ",{}", c.name)?;
        }
        writeln!(w)?;
        for (k, (x, r)) in self.rows.iter().enumerate() {
            write!(w, "{k}")?;
            for v in x.iter().chain(r) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Evaluates the strong-invariance conditions of the level set `F = 0` at
/// the sample points.
pub fn check_invariance(
    model: &ModelSpec,
    f: &ScalarField,
    points: &[Vec<f64>],
    opts: &InvarianceOptions,
) -> Result<InvarianceReport> {
    if points.is_empty() {
        return Err(Error::EmptyInput("invariance sample points"));
    }
    if opts.times.is_empty() {
        return Err(Error::EmptyInput("invariance sample times"));
    }
    let n = model.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "invariance field",
            expected: n,
            found: f.dim(),
        });
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "invariance sample",
                expected: n,
                found: p.len(),
            });
        }
        let value = f.eval(p);
        if !(value.abs() <= opts.manifold_tol) {
            return Err(Error::OffManifold { index, value });
        }
    }
    let interp = model.interpretation();
    let names: &[(&'static str, bool)] = match interp {
        Interpretation::Ode => &[("drift_tangency", true)],
        Interpretation::Stratonovich => &[("drift_tangency", true), ("diffusion_tangency", true)],
        Interpretation::Ito => &[
            ("drift_tangency", false),
            ("diffusion_tangency", true),
            ("second_order_trace", false),
            ("ito_drift", true),
        ],
        Interpretation::Rode => &[("drift_tangency", true)],
    };
    let no_eta = [Vec::new()];
    let etas: &[Vec<f64>] = if interp == Interpretation::Rode {
        if opts.eta_samples.is_empty() {
            return Err(Error::EmptyInput("parameter samples for a RODE model"));
        }
        for e in &opts.eta_samples {
            if e.len() != model.param_dim() {
                return Err(Error::DimensionMismatch {
                    context: "parameter sample",
                    expected: model.param_dim(),
                    found: e.len(),
                });
            }
        }
        &opts.eta_samples
    } else {
        &no_eta
    };
    let l = model.noise_dim();
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let g = f.grad(p);
        let hess = if interp == Interpretation::Ito {
            Some(f.hess(p).ok_or(Error::MissingHessian)?)
        } else {
            None
        };
        let mut r = vec![0.0f64; names.len()];
        for &t in &opts.times {
            for eta in etas {
                let drift = dot(&g, &model.drift(t, p, eta));
                r[0] = r[0].max(drift.abs());
                if matches!(interp, Interpretation::Ito | Interpretation::Stratonovich) {
                    let s = model.diffusion(t, p);
                    for k in 0..l {
                        let col: f64 = (0..n).map(|i| g[i] * s[i * l + k]).sum();
                        r[1] = r[1].max(col.abs());
                    }
                    if let Some(hm) = &hess {
                        let mut trace = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                let ss: f64 = (0..l).map(|k| s[i * l + k] * s[j * l + k]).sum();
                                trace += hm[i * n + j] * ss;
                            }
                        }
                        let half = 0.5 * trace;
                        r[2] = r[2].max(half.abs());
                        r[3] = r[3].max((drift + half).abs());
                    }
                }
            }
        }
        rows.push((p.clone(), r));
    }
    let conditions: Vec<Condition> = names
        .iter()
        .enumerate()
        .map(|(c, &(name, required))| {
            let max_residual = rows.iter().map(|r| r.1[c]).fold(0.0, f64::max);
            Condition {
                name,
                max_residual,
                required,
                pass: max_residual <= opts.tol,
            }
        })
        .collect();
    let invariant = conditions.iter().filter(|c| c.required).all(|c| c.pass);
    Ok(InvarianceReport {
        model: model.name().to_string(),
        field: f.name().to_string(),
        interpretation: interp,
        tol: opts.tol,
        samples: points.len(),
        eta_samples: if interp == Interpretation::Rode { etas.len() } else { 0 },
        conditions,
        invariant,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct EquilibriumOptions {
    pub tol: f64,
    pub times: Vec<f64>,
    pub eta_samples: Vec<Vec<f64>>,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            times: vec![0.0, 1.0, 10.0],
            eta_samples: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// One named summand of the drift.
    DriftTerm,
    /// The full drift.
    Drift,
    /// One column of the diffusion matrix.
    Diffusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermMagnitude {
    pub name: String,
    pub kind: TermKind,
    /// Euclidean norm at each sample time (maximised over `η` samples).
    pub magnitudes: Vec<f64>,
    pub max: f64,
    pub vanishes: bool,
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub model: String,
    pub point: Vec<f64>,
    pub times: Vec<f64>,
    pub tol: f64,
    pub terms: Vec<TermMagnitude>,
    /// The full drift and every diffusion column vanish.
    pub persists: bool,
}

impl EquilibriumReport {
    pub fn term(&self, name: &str) -> Option<&TermMagnitude> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "report: equilibrium");
        let _ = writeln!(s, "model: {}", self.model);
        let pt: Vec<String> = self.point.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "point: {}", pt.join(" "));
        let _ = writeln!(s, "tolerance: {:e}", self.tol);
        for t in &self.terms {
            let v = if t.vanishes { "vanishes" } else { "nonzero" };
            let _ = writeln!(s, "{}: {:.16e} ({v})", t.name, t.max);
        }
        let _ = writeln!(
            s,
            "verdict: {}",
            if self.persists {
                "equilibrium persists"
            } else {
                "not an equilibrium"
            }
        );
        s
    }

    /// Columns `t` then one magnitude column per term.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for t in &self.terms {
            write!(w, ",{}", t.name)?;
        }
        writeln!(w)?;
        for (k, time) in self.times.iter().enumerate() {
            write!(w, "{time:.16e}")?;
            for t in &self.terms {
                write!(w, ",{:.16e}", t.magnitudes[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Magnitudes of each drift summand and diffusion column at `point`.
pub fn check_equilibrium(model: &ModelSpec, point: &[f64], opts: &EquilibriumOptions) -> Result<EquilibriumReport> {
    let n = model.dim();
    if point.len() != n {
        return Err(Error::DimensionMismatch {
            context: "equilibrium point",
            expected: n,
            found: point.len(),
        });
    }
    if opts.times.is_empty() {
        return Err(Error::EmptyInput("equilibrium sample times"));
    }
    let no_eta = [Vec::new()];
    let etas: &[Vec<f64>] = if model.interpretation() == Interpretation::Rode {
        if opts.eta_samples.is_empty() {
            return Err(Error::EmptyInput("parameter samples for a RODE model"));
        }
        &opts.eta_samples
    } else {
        &no_eta
    };
    let l = model.noise_dim();
    let mut terms: Vec<TermMagnitude> = Vec::new();
    let mut add = |name: String, kind: TermKind, eval: &dyn Fn(f64, &[f64]) -> f64| {
        let magnitudes: Vec<f64> = opts
            .times
            .iter()
            .map(|&t| etas.iter().map(|e| eval(t, e)).fold(0.0, f64::max))
            .collect();
        let max = magnitudes.iter().copied().fold(0.0, f64::max);
        terms.push(TermMagnitude {
            name,
            kind,
            vanishes: max <= opts.tol,
            magnitudes,
            max,
        });
    };
    for term in model.drift_terms() {
        add(term.name.clone(), TermKind::DriftTerm, &|t, e| {
            let mut o = vec![0.0; n];
            (term.f)(t, point, e, &mut o);
            norm(&o)
        });
    }
    add("drift".into(), TermKind::Drift, &|t, e| norm(&model.drift(t, point, e)));
    if model.has_diffusion() {
        for k in 0..l {
            add(format!("diffusion_{}", k + 1), TermKind::Diffusion, &|t, _| {
                let s = model.diffusion(t, point);
                (0..n).map(|i| s[i * l + k].powi(2)).sum::<f64>().sqrt()
            });
        }
    }
    let persists = terms
        .iter()
        .filter(|t| t.kind != TermKind::DriftTerm)
        .all(|t| t.vanishes);
    Ok(EquilibriumReport {
        model: model.name().to_string(),
        point: point.to_vec(),
        times: opts.times.clone(),
        tol: opts.tol,
        terms,
        persists,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::fibonacci_sphere;
    use crate::integrate::strat_to_ito;
    use crate::models::{build_model, CatalogEntry, ModelId, ModelParams};

    fn ell(interp: Interpretation) -> ModelSpec {
        let p = ModelParams {
            b: Some([0.0, 0.0, 1.0]),
            alpha: Some(1.0),
            epsilon: Some(1.0),
            ..Default::default()
        };
        build_model(&CatalogEntry::new(ModelId::Ell, p).with_interpretation(interp)).unwrap()
    }

    #[test]
    fn stratonovich_ell_keeps_sphere() {
        let r = check_invariance(
            &ell(Interpretation::Stratonovich),
            &ScalarField::unit_sphere(3),
            &fibonacci_sphere(200),
            &InvarianceOptions {
                tol: 1e-13,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.invariant, "{}", r.to_text());
    }

    #[test]
    fn ito_ell_leaves_sphere() {
        let r = check_invariance(
            &ell(Interpretation::Ito),
            &ScalarField::unit_sphere(3),
            &fibonacci_sphere(200),
            &InvarianceOptions::default(),
        )
        .unwrap();
        assert!(!r.invariant);
        assert!(r.condition("diffusion_tangency").unwrap().pass);
        // ½ tr(Hσσᵀ) = tr(σσᵀ) = 2ε²(1 + α²) on the sphere.
        assert!((r.condition("second_order_trace").unwrap().max_residual - 4.0).abs() < 1e-12);
    }

    #[test]
    fn converted_model_is_judged_like_original() {
        let s = ell(Interpretation::Stratonovich);
        let i = strat_to_ito(&s).unwrap();
        let pts = fibonacci_sphere(50);
        let f = ScalarField::unit_sphere(3);
        let o = InvarianceOptions::default();
        assert!(check_invariance(&i, &f, &pts, &o).unwrap().invariant);
        assert!(check_invariance(&s, &f, &pts, &o).unwrap().invariant);
    }

    #[test]
    fn off_manifold_sample_rejected() {
        let r = check_invariance(
            &ell(Interpretation::Stratonovich),
            &ScalarField::unit_sphere(3),
            &[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.1]],
            &InvarianceOptions::default(),
        );
        assert!(matches!(r, Err(Error::OffManifold { index: 1, .. })));
        let e = check_invariance(
            &ell(Interpretation::Stratonovich),
            &ScalarField::unit_sphere(3),
            &[],
            &InvarianceOptions::default(),
        );
        assert!(matches!(e, Err(Error::EmptyInput(_))));
    }

    #[test]
    fn ll_generic_point_is_not_equilibrium() {
        let p = ModelParams {
            b: Some([0.0, 0.0, 1.0]),
            alpha: Some(1.0),
            ..Default::default()
        };
        let m = build_model(&CatalogEntry::new(ModelId::Ll, p)).unwrap();
        let r = check_equilibrium(&m, &[0.6, 0.0, 0.8], &EquilibriumOptions::default()).unwrap();
        assert!(!r.persists);
        assert!(r.term("drift").unwrap().max > 0.1);
        let r = check_equilibrium(&m, &[0.0, 0.0, 1.0], &EquilibriumOptions::default()).unwrap();
        assert!(r.persists, "{}", r.to_text());
        assert!(r.terms.iter().all(|t| t.magnitudes.iter().all(|&v| v >= 0.0)));
    }
}
