use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::fit_loglog;
use crate::integrate::{
    apply_generator, ensemble_path, par_map_indexed, InitialCondition, Interpretation, ModelSpec, Solver,
};
use crate::noise::{rng_for, stream_seed, NoisePath};
use crate::vecalg::ScalarField;
use crate::{Error, Result};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Binomial frequency with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub hits: usize,
    pub n: usize,
    pub fraction: f64,
    pub half_width: f64,
}

impl FrequencyEstimate {
    fn new(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            hits,
            n,
            fraction: p,
            half_width: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn wrap(index: usize) -> impl Fn(Error) -> Error {
    move |e| Error::PathAborted {
        index,
        source: Box::new(e),
    }
}

/// Exact terminal state given `x0` and the driving path.
pub type ExactSolution = Arc<dyn Fn(&[f64], &NoisePath) -> Vec<f64> + Send + Sync>;

/// Reference solution for strong-error estimates.
#[derive(Clone)]
pub enum Oracle {
    /// `x_T` as a function of `x₀` and the driving path.
    ClosedForm(ExactSolution),
    /// The same scheme three dyadic levels below the finest level.
    FinestRefinement,
    /// `|F(x_T) − F(x₀)|` for a first integral `F` of the exact flow.
    Conserved(ScalarField),
}

impl Oracle {
    pub fn closed_form(f: impl Fn(&[f64], &NoisePath) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Oracle::ClosedForm(Arc::new(f))
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::ClosedForm(_) => f.write_str("ClosedForm(..)"),
            Oracle::FinestRefinement => f.write_str("FinestRefinement"),
            Oracle::Conserved(c) => write!(f, "Conserved({})", c.name()),
        }
    }
}

/// Extra refinements of the finest level used by [`Oracle::FinestRefinement`].
pub const REFERENCE_REFINEMENTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceOptions {
    /// Number of step sizes `h0, h0/2, …`; at least 3.
    pub levels: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub t_end: f64,
    pub h0: f64,
    pub threads: Option<usize>,
}

/// Strong errors per step size and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub half_width: f64,
}

impl OrderEstimate {
    fn fit(hs: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        let f = fit_loglog(&hs, &errors)?;
        Ok(Self {
            hs,
            errors,
            slope: f.slope,
            half_width: f.half_width,
        })
    }

    /// Successive error ratios `e(h) / e(h/2)`.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }

    /// Columns `h,error`; the fit goes in trailing comment lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "h,error")?;
        for (h, e) in self.hs.iter().zip(&self.errors) {
            writeln!(w, "{h:.16e},{e:.16e}")?;
        }
        writeln!(w, "# slope: {:.16e}", self.slope)?;
        writeln!(w, "# half_width: {:.16e}", self.half_width)?;
        Ok(())
    }
}

fn check_levels(opts: &ConvergenceOptions) -> Result<()> {
    if opts.levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 levels, got {}",
            opts.levels
        )));
    }
    if opts.n_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    Ok(())
}

fn mean_rows(rows: Vec<Vec<f64>>, levels: usize) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut out = vec![0.0; levels];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out.iter().map(|s| s / n).collect()
}

fn level_steps(opts: &ConvergenceOptions) -> Vec<f64> {
    (0..opts.levels).map(|k| opts.h0 / 2f64.powi(k as i32)).collect()
}

/// Mean strong error at `T` over coupled dyadic refinements of each path.
pub fn empirical_convergence_order(
    solver: &Solver,
    x0: &[f64],
    oracle: &Oracle,
    opts: &ConvergenceOptions,
) -> Result<OrderEstimate> {
    check_levels(opts)?;
    let dims = solver.noise_dim();
    let rows = par_map_indexed(opts.n_paths, opts.threads, |i| -> Result<Vec<f64>> {
        let mut path = ensemble_path(opts.seed, i, opts.t_end, opts.h0, dims).map_err(wrap(i))?;
        let mut errs = Vec::with_capacity(opts.levels);
        let mut finals = Vec::with_capacity(opts.levels);
        for lvl in 0..opts.levels {
            if lvl > 0 {
                path = path.refine();
            }
            let tr = solver.solve(x0, &path).map_err(wrap(i))?;
            let last = tr.last();
            match oracle {
                Oracle::ClosedForm(f) => errs.push(dist(last, &f(x0, &path))),
                Oracle::Conserved(f) => errs.push((f.eval(last) - f.eval(x0)).abs()),
                Oracle::FinestRefinement => finals.push(last.to_vec()),
            }
        }
        if let Oracle::FinestRefinement = oracle {
            for _ in 0..REFERENCE_REFINEMENTS {
                path = path.refine();
            }
            let reference = solver.solve(x0, &path).map_err(wrap(i))?;
            errs = finals.iter().map(|x| dist(x, reference.last())).collect();
        }
        Ok(errs)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    OrderEstimate::fit(level_steps(opts), mean_rows(rows, opts.levels))
}

/// Mean terminal gap between two solvers driven by the same coupled paths.
pub fn coupled_gap(a: &Solver, b: &Solver, x0: &[f64], opts: &ConvergenceOptions) -> Result<OrderEstimate> {
    check_levels(opts)?;
    if a.noise_dim() != b.noise_dim() {
        return Err(Error::DimensionMismatch {
            context: "coupled solvers",
            expected: a.noise_dim(),
            found: b.noise_dim(),
        });
    }
    let dims = a.noise_dim();
    let rows = par_map_indexed(opts.n_paths, opts.threads, |i| -> Result<Vec<f64>> {
        let mut path = ensemble_path(opts.seed, i, opts.t_end, opts.h0, dims).map_err(wrap(i))?;
        let mut gaps = Vec::with_capacity(opts.levels);
        for lvl in 0..opts.levels {
            if lvl > 0 {
                path = path.refine();
            }
            let xa = a.solve(x0, &path).map_err(wrap(i))?;
            let xb = b.solve(x0, &path).map_err(wrap(i))?;
            gaps.push(dist(xa.last(), xb.last()));
        }
        Ok(gaps)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    OrderEstimate::fit(level_steps(opts), mean_rows(rows, opts.levels))
}

/// Frequency of paths with `sup_{t ≤ T} ‖x_t‖ > delta`, started at `x0`.
#[allow(clippy::too_many_arguments)]
pub fn stability_probability(
    solver: &Solver,
    x0: &[f64],
    delta: f64,
    t_end: f64,
    h: f64,
    n_paths: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<FrequencyEstimate> {
    let r = norm(x0);
    if !(r > 0.0 && delta > r) {
        return Err(Error::InvalidArgument(format!(
            "need delta > |x0| > 0, got delta = {delta}, |x0| = {r}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let dims = solver.noise_dim();
    let hits = par_map_indexed(n_paths, threads, |i| -> Result<bool> {
        let path = ensemble_path(seed, i, t_end, h, dims).map_err(wrap(i))?;
        let tr = solver.solve(x0, &path).map_err(wrap(i))?;
        let hit = tr.states().any(|x| norm(x) > delta);
        Ok(hit)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyEstimate::new(hits.iter().filter(|&&b| b).count(), n_paths))
}

/// Frequency of paths with `‖x_T − target‖ ≤ eps`.
#[allow(clippy::too_many_arguments)]
pub fn equilibrium_attraction(
    solver: &Solver,
    x0: &InitialCondition,
    target: &[f64],
    eps: f64,
    t_end: f64,
    h: f64,
    n_paths: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<FrequencyEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "attraction radius must be positive, got {eps}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let dims = solver.noise_dim();
    let hits = par_map_indexed(n_paths, threads, |i| -> Result<bool> {
        let path = ensemble_path(seed, i, t_end, h, dims).map_err(wrap(i))?;
        let tr = solver.solve(&x0.draw(seed, i), &path).map_err(wrap(i))?;
        Ok(dist(tr.last(), target) <= eps)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyEstimate::new(hits.iter().filter(|&&b| b).count(), n_paths))
}

const FD_STEP: f64 = 1e-6;

/// Frobenius norm of `DΦᵀ J DΦ − J` for the pathwise flow map of a planar
/// model, with `DΦ` from central differences in `x₀`.
pub fn check_symplecticity(solver: &Solver, x0: &[f64], path: &NoisePath) -> Result<f64> {
    let n = solver.model().dim();
    if n != 2 || x0.len() != 2 {
        return Err(Error::DimensionMismatch {
            context: "symplecticity check",
            expected: 2,
            found: n,
        });
    }
    let mut d = [[0.0; 2]; 2];
    for j in 0..2 {
        let mut plus = x0.to_vec();
        let mut minus = x0.to_vec();
        plus[j] += FD_STEP;
        minus[j] -= FD_STEP;
        let a = solver.solve(&plus, path)?;
        let b = solver.solve(&minus, path)?;
        // Divide by the realised spacing, which absorbs the rounding of x₀ ± δ.
        let spacing = plus[j] - minus[j];
        for i in 0..2 {
            d[i][j] = (a.last()[i] - b.last()[i]) / spacing;
        }
    }
    // DΦᵀ J DΦ = det(DΦ)·J for 2×2 matrices.
    let j = [[0.0, 1.0], [-1.0, 0.0]];
    let mut sq = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let mut v = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    v += d[p][r] * j[p][q] * d[q][c];
                }
            }
            sq += (v - j[r][c]).powi(2);
        }
    }
    Ok(sq.sqrt())
}

/// Monte Carlo estimate of `(E[V(x_{t+h})] − V(x_t)) / h` for one
/// Euler–Maruyama step from `x`.
#[allow(clippy::too_many_arguments)]
pub fn one_step_generator_estimate(
    model: &ModelSpec,
    v: &ScalarField,
    t: f64,
    x: &[f64],
    h: f64,
    n_samples: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Estimate> {
    if model.interpretation() != Interpretation::Ito {
        return Err(Error::WrongInterpretation {
            model: model.name().to_string(),
            expected: Interpretation::Ito,
            found: model.interpretation(),
        });
    }
    if n_samples < 2 || !(h > 0.0) {
        return Err(Error::InvalidArgument("need h > 0 and at least two samples".into()));
    }
    let (n, l) = (model.dim(), model.noise_dim());
    let f = model.drift(t, x, &[]);
    let s = model.diffusion(t, x);
    let v0 = v.eval(x);
    let sd = h.sqrt();
    let samples = par_map_indexed(n_samples, threads, |i| {
        let mut rng = rng_for(stream_seed(seed, i as u64), 0);
        let dw: Vec<f64> = (0..l).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
        let x1: Vec<f64> = (0..n)
            .map(|r| x[r] + f[r] * h + (0..l).map(|k| s[r * l + k] * dw[k]).sum::<f64>())
            .collect();
        (v.eval(&x1) - v0) / h
    })?;
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, y) in samples.iter().enumerate() {
        let d = y - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (y - mean);
    }
    let var = m2 / (n_samples - 1) as f64;
    Ok(Estimate {
        mean,
        std_error: (var / n_samples as f64).sqrt(),
        n: n_samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub amplitudes: Vec<f64>,
    /// `max LV` over the sample points at each amplitude.
    pub max_lv: Vec<f64>,
    /// Largest amplitude up to which `LV ≤ 0` holds at every smaller amplitude.
    pub largest_nonpositive: Option<f64>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "amplitude,max_lv")?;
        for (a, v) in self.amplitudes.iter().zip(&self.max_lv) {
            writeln!(w, "{a:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Sign of the generator `LV` over a grid of noise amplitudes. `build` maps an
/// amplitude to an Itô model; `points` should avoid the equilibrium itself.
pub fn generator_sign_sweep(
    build: &dyn Fn(f64) -> Result<ModelSpec>,
    v: &ScalarField,
    points: &[Vec<f64>],
    amplitudes: &[f64],
    t: f64,
) -> Result<SweepResult> {
    if points.is_empty() || amplitudes.is_empty() {
        return Err(Error::EmptyInput("generator sweep points or amplitudes"));
    }
    let mut max_lv = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let m = build(a)?;
        let mut worst = f64::NEG_INFINITY;
        for p in points {
            worst = worst.max(apply_generator(&m, v, t, p)?);
        }
        max_lv.push(worst);
    }
    let mut order: Vec<usize> = (0..amplitudes.len()).collect();
    order.sort_by(|&i, &j| amplitudes[i].total_cmp(&amplitudes[j]));
    let mut largest = None;
    for i in order {
        if max_lv[i] <= 0.0 {
            largest = Some(amplitudes[i]);
        } else {
            break;
        }
    }
    Ok(SweepResult {
        amplitudes: amplitudes.to_vec(),
        max_lv,
        largest_nonpositive: largest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{Scheme, Solver};
    use crate::models::{build_model, CatalogEntry, ModelId, ModelParams};
    use crate::noise::sample_brownian;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn scalar(a: f64, b: f64) -> Solver {
        let p = ModelParams {
            a: Some(a),
            b_scalar: Some(b),
            ..Default::default()
        };
        Solver::for_model(build_model(&CatalogEntry::new(ModelId::ScalarLinear, p)).unwrap())
    }

    fn kubo() -> Solver {
        let p = ModelParams {
            kubo_a: Some(1.0),
            kubo_sigma: Some(1.0),
            ..Default::default()
        };
        Solver::for_model(build_model(&CatalogEntry::new(ModelId::Kubo, p)).unwrap())
    }

    #[test]
    fn deterministic_decay_never_exceeds() {
        let e = stability_probability(&scalar(-1.0, 0.0), &[0.01], 0.5, 10.0, 1e-2, 50, 1, None).unwrap();
        assert_eq!(e.hits, 0);
        assert_eq!(e.half_width, 0.0);
    }

    #[test]
    fn bad_radius_rejected() {
        assert!(stability_probability(&scalar(-1.0, 1.0), &[0.5], 0.5, 1.0, 0.1, 5, 1, None).is_err());
        assert!(stability_probability(&scalar(-1.0, 1.0), &[0.0], 0.5, 1.0, 0.1, 5, 1, None).is_err());
    }

    #[test]
    fn unstable_exceedance_matches_first_passage_law() {
        // log x_t = log x0 + t/2 + W_t; P(max ≥ m) for drift μ = ½ over T = 10.
        let (mu, t, m) = (0.5f64, 10.0f64, (0.5f64 / 0.01).ln());
        let phi = |z: f64| Normal::standard().cdf(z);
        let exact = phi((mu * t - m) / t.sqrt()) + (2.0 * mu * m).exp() * phi((-m - mu * t) / t.sqrt());
        assert!((exact - 0.755).abs() < 0.01);
        let e = stability_probability(&scalar(1.0, 1.0), &[0.01], 0.5, 10.0, 1e-3, 2000, 42, None).unwrap();
        // Discrete monitoring only lowers the estimate slightly.
        assert!(
            (e.fraction - exact).abs() <= 4.0 * (exact * (1.0 - exact) / 2000.0).sqrt() + 0.01,
            "{e:?}"
        );
    }

    #[test]
    fn symplectic_defect_vanishes_at_zero_horizon_and_is_small_for_kubo() {
        let s = kubo();
        let p = sample_brownian(7, 1.0, 1e-3, 1).unwrap();
        assert_eq!(check_symplecticity(&s, &[1.0, 0.0], &p.truncated(0)).unwrap(), 0.0);
        let d = check_symplecticity(&s, &[1.0, 0.0], &p).unwrap();
        assert!(d <= 1e-2, "{d}");
    }

    #[test]
    fn contracting_flow_is_not_symplectic() {
        let m = ModelSpec::ode("contract", 2, |_, x, o| {
            o[0] = -x[0];
            o[1] = -x[1];
        });
        let s = Solver::new(m, Scheme::Rk4).unwrap();
        let p = NoisePath::grid_only(0.0, 1e-2, 100);
        let d = check_symplecticity(&s, &[1.0, 1.0], &p).unwrap();
        assert!((d - 2f64.sqrt() * (1.0 - (-2.0f64).exp())).abs() < 1e-6, "{d}");
    }

    #[test]
    fn levels_below_three_rejected() {
        let opts = ConvergenceOptions {
            levels: 2,
            n_paths: 4,
            seed: 1,
            t_end: 1.0,
            h0: 0.1,
            threads: None,
        };
        assert!(empirical_convergence_order(&kubo(), &[1.0, 0.0], &Oracle::FinestRefinement, &opts).is_err());
    }

    #[test]
    fn kubo_heun_order_near_one() {
        let opts = ConvergenceOptions {
            levels: 4,
            n_paths: 200,
            seed: 11,
            t_end: 1.0,
            h0: 2f64.powi(-4),
            threads: None,
        };
        let est = empirical_convergence_order(&kubo(), &[1.0, 0.0], &Oracle::FinestRefinement, &opts).unwrap();
        assert!((est.slope - 1.0).abs() <= 0.2, "{est:?}");
    }

    #[test]
    fn rk4_ll_order_four() {
        let p = ModelParams {
            b: Some([0.0, 0.0, 1.0]),
            alpha: Some(1.0),
            ..Default::default()
        };
        let s = Solver::for_model(build_model(&CatalogEntry::new(ModelId::Ll, p)).unwrap());
        let opts = ConvergenceOptions {
            levels: 3,
            n_paths: 1,
            seed: 0,
            t_end: 1.0,
            h0: 0.1,
            threads: None,
        };
        let est = empirical_convergence_order(&s, &[0.6, 0.0, 0.8], &Oracle::FinestRefinement, &opts).unwrap();
        assert!((est.slope - 4.0).abs() < 0.3, "{est:?}");
    }

    #[test]
    fn generator_sweep_finds_threshold() {
        // L|x|² = (2a + b²)|x|², a = −1: stable for b² ≤ 2.
        let build = |b: f64| {
            let p = ModelParams {
                a: Some(-1.0),
                b_scalar: Some(b),
                ..Default::default()
            };
            build_model(&CatalogEntry::new(ModelId::ScalarLinear, p))
        };
        let v = ScalarField::norm_sq(1);
        let pts = vec![vec![0.1], vec![-0.05], vec![0.2]];
        let amps = [0.0, 0.5, 1.0, 1.4, 1.5, 2.0];
        let r = generator_sign_sweep(&build, &v, &pts, &amps, 0.0).unwrap();
        assert_eq!(r.largest_nonpositive, Some(1.4));
    }

    #[test]
    fn one_step_estimate_matches_generator_for_gbm() {
        let m = ModelSpec::ito("gbm", 1, 1, |_, x, o| o[0] = -x[0], |_, x, o| o[0] = x[0]);
        let v = ScalarField::norm_sq(1);
        let lv = apply_generator(&m, &v, 0.0, &[1.0]).unwrap();
        let h = 1e-3;
        let e = one_step_generator_estimate(&m, &v, 0.0, &[1.0], h, 20_000, 5, None).unwrap();
        // Bias is h·f² exactly for V = x².
        assert!((e.mean - lv - h).abs() <= 4.0 * e.std_error, "{e:?} vs {lv}");
    }
}
