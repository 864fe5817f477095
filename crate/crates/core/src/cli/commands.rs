use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analyze::{
    check_equilibrium, check_invariance, check_symplecticity, coupled_gap, empirical_convergence_order,
    equilibrium_attraction, first_integral_drift, lyapunov_monotonicity, sphere_outside_cap, stability_probability,
    ConvergenceOptions, EquilibriumOptions, EquilibriumReport, InvarianceOptions, Oracle, TermKind,
};
use crate::integrate::{
    ensemble_path, par_map_indexed, run_ensemble, strat_to_ito, InitialCondition, Interpretation, Scheme, Solver,
    Trajectory,
};
use crate::models::{reduce_angles, ModelId};
use crate::noise::NoisePath;
use crate::vecalg::{ScalarField, Vec3};
use crate::{Error, Result};

use super::config::{Analysis, ExperimentConfig, OracleKind, StartConfig};
use super::setup::Experiment;
use super::Command;

/// Files written and the overall verdict of a command.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    /// One line per analysis (or per run for `simulate`).
    pub summary: Vec<String>,
}

struct Output<'a> {
    dir: &'a Path,
    header: String,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        w.write_all(self.header.as_bytes())?;
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

fn header(cmd: Command, exp: &Experiment) -> String {
    let mut s = format!(
        "# stochlab {}\n# command: {cmd}\n# seed: {}\n# config:\n",
        env!("CARGO_PKG_VERSION"),
        exp.config.run.seed
    );
    for line in exp.config.resolved_toml().lines() {
        s.push('#');
        if !line.is_empty() {
            s.push_str("   ");
            s.push_str(line);
        }
        s.push('\n');
    }
    s
}

/// Runs `cmd` on a parsed config, writing into `out`. Nothing is written when
/// the configuration is invalid.
pub fn execute(cmd: Command, cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<Outcome> {
    let exp = Experiment::new(cfg)?;
    let analyses: Vec<&Analysis> = exp.config.analysis.iter().filter(|a| cmd.runs(a)).collect();
    if cmd != Command::Simulate && analyses.is_empty() {
        return Err(Error::InvalidArgument(format!("no analyses for `{cmd}` in the config")));
    }
    let plans = analyses.iter().map(|a| plan(&exp, a)).collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out)?;
    let mut o = Output {
        dir: out,
        header: header(cmd, &exp),
        files: Vec::new(),
    };
    let mut outcome = Outcome {
        passed: true,
        ..Default::default()
    };
    if cmd == Command::Simulate {
        outcome.summary.push(simulate(&exp, &mut o, threads)?);
    }
    let mut used: Vec<&'static str> = Vec::new();
    for (a, p) in analyses.into_iter().zip(plans) {
        let n = used.iter().filter(|&&u| u == a.name()).count();
        used.push(a.name());
        let stem = if n == 0 {
            a.name().to_string()
        } else {
            format!("{}_{}", a.name(), n + 1)
        };
        let (pass, line) = run_analysis(&exp, a, p, &stem, &mut o, threads)?;
        outcome.passed &= pass;
        outcome
            .summary
            .push(format!("{stem}: {} ({line})", if pass { "pass" } else { "fail" }));
    }
    outcome.files = o.files;
    Ok(outcome)
}

/// Inputs resolved before anything is written.
enum Plan {
    None,
    Field(ScalarField),
    Points(Vec<Vec<f64>>),
    Invariance(ScalarField, Vec<Vec<f64>>),
    Converge(Option<ScalarField>),
}

fn plan(exp: &Experiment, a: &Analysis) -> Result<Plan> {
    Ok(match a {
        Analysis::Invariance {
            field,
            samples,
            sampler,
            ..
        } => Plan::Invariance(exp.field(field)?, exp.sphere_points(*samples, *sampler)?),
        Analysis::Equilibrium { points, terms, .. } => {
            let m = &exp.model;
            let known = |t: &str| {
                t == "drift"
                    || m.drift_terms().iter().any(|d| d.name == t)
                    || t.strip_prefix("diffusion_")
                        .and_then(|k| k.parse::<usize>().ok())
                        .is_some_and(|k| k >= 1 && k <= m.noise_dim() && m.has_diffusion())
            };
            if let Some(t) = terms.iter().find(|t| !known(t)) {
                return Err(Error::InvalidArgument(format!(
                    "model `{}` has no term `{t}`",
                    m.name()
                )));
            }
            let pts = if points.is_empty() {
                exp.poles()?
            } else {
                points.clone()
            };
            Plan::Points(pts)
        }
        Analysis::Lyapunov { field, .. } | Analysis::FirstIntegral { field, .. } => Plan::Field(exp.field(field)?),
        Analysis::Attraction { target, start, .. } => {
            if target.len() != exp.model.dim() {
                return Err(Error::DimensionMismatch {
                    context: "attraction target",
                    expected: exp.model.dim(),
                    found: target.len(),
                });
            }
            if matches!(start, StartConfig::SphereOutsideCap { .. }) && exp.model.dim() != 3 {
                return Err(Error::InvalidArgument("sphere starts need a model in R³".into()));
            }
            Plan::None
        }
        Analysis::Convergence { oracle, field, .. } => {
            match oracle {
                OracleKind::ClosedForm => {
                    closed_form(exp)?;
                }
                OracleKind::ConvertedIto => {
                    converted_pair(exp)?;
                }
                _ => {}
            }
            Plan::Converge(field.as_deref().map(|f| exp.field(f)).transpose()?)
        }
        Analysis::Symplecticity { .. } => {
            if exp.model.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    context: "symplecticity model",
                    expected: 2,
                    found: exp.model.dim(),
                });
            }
            Plan::None
        }
        Analysis::Stability { .. } => Plan::None,
    })
}

fn eta_samples(exp: &Experiment, n: usize) -> Result<Vec<Vec<f64>>> {
    if exp.model.interpretation() != Interpretation::Rode {
        return Ok(Vec::new());
    }
    let r = &exp.config.run;
    let path = ensemble_path(r.seed, 0, r.t_end, r.h, exp.solver.noise_dim())?;
    let eta = exp
        .solver
        .parameter_process(&path)?
        .ok_or_else(|| Error::InvalidArgument("RODE model needs an `eta` section".into()))?;
    Ok(eta.sampled_values(n))
}

fn write_trajectory(w: &mut dyn Write, exp: &Experiment, tr: &Trajectory) -> Result<()> {
    if exp.id == ModelId::Isochronous {
        let mut reduced = tr.clone();
        reduced.map_states(reduce_angles);
        reduced.write_csv(w, &exp.functionals)
    } else {
        tr.write_csv(w, &exp.functionals)
    }
}

fn simulate(exp: &Experiment, o: &mut Output, threads: Option<usize>) -> Result<String> {
    let r = &exp.config.run;
    if r.n_paths == 1 {
        let path = ensemble_path(r.seed, 0, r.t_end, r.h, exp.solver.noise_dim())?;
        let tr = exp.solver.solve(&r.x0, &path).map_err(|e| Error::PathAborted {
            index: 0,
            source: Box::new(e),
        })?;
        o.write("trajectory.csv", |w| write_trajectory(w, exp, &tr))?;
        let mut line = format!(
            "simulate: {} steps of `{}`, x(T) = {:?}",
            tr.len() - 1,
            exp.model.name(),
            tr.last()
        );
        for f in &exp.functionals {
            let v = tr.map_field(f);
            let (lo, hi) = v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            line.push_str(&format!(", {} in [{lo:.6e}, {hi:.6e}]", f.name()));
        }
        Ok(line)
    } else {
        let x0 = InitialCondition::Fixed(r.x0.clone());
        let stats = run_ensemble(
            &exp.solver,
            &x0,
            r.t_end,
            r.h,
            r.n_paths,
            r.seed,
            &exp.functionals,
            threads,
        )?;
        o.write("ensemble.csv", |w| stats.write_csv(w))?;
        let mut line = format!("simulate: {} paths of `{}`", r.n_paths, exp.model.name());
        let last = stats.times.len() - 1;
        for (f, name) in stats.names.iter().enumerate() {
            line.push_str(&format!(
                ", E[{name}](T) = {:.6e} ± {:.1e}",
                stats.mean[f][last],
                stats.std_error(f, last)
            ));
        }
        Ok(line)
    }
}

fn per_path<T: Send>(
    exp: &Experiment,
    threads: Option<usize>,
    f: impl Fn(&Trajectory, &NoisePath) -> T + Send + Sync,
) -> Result<Vec<T>> {
    let r = &exp.config.run;
    let dims = exp.solver.noise_dim();
    par_map_indexed(r.n_paths, threads, |i| -> Result<T> {
        let wrap = |e| Error::PathAborted {
            index: i,
            source: Box::new(e),
        };
        let path = ensemble_path(r.seed, i, r.t_end, r.h, dims).map_err(wrap)?;
        let tr = exp.solver.solve(&r.x0, &path).map_err(wrap)?;
        Ok(f(&tr, &path))
    })?
    .into_iter()
    .collect()
}

fn closed_form(exp: &Experiment) -> Result<Oracle> {
    let p = &exp.entry.params;
    let interp = exp.model.interpretation();
    match exp.id {
        ModelId::ScalarLinear => {
            let (a, b) = (p.a.unwrap_or(0.0), p.b_scalar.unwrap_or(0.0));
            let rate = if interp == Interpretation::Ito {
                a - 0.5 * b * b
            } else {
                a
            };
            Ok(Oracle::closed_form(move |x0, path| {
                let w: f64 = path.increments().iter().sum();
                vec![x0[0] * (rate * path.t_end() + b * w).exp()]
            }))
        }
        ModelId::Kubo if interp == Interpretation::Stratonovich => {
            let (a, s) = (p.kubo_a.unwrap_or(0.0), p.kubo_sigma.unwrap_or(0.0));
            Ok(Oracle::closed_form(move |x0, path| {
                let w: f64 = path.increments().iter().sum();
                let (sn, cs) = (a * path.t_end() + s * w).sin_cos();
                vec![cs * x0[0] - sn * x0[1], sn * x0[0] + cs * x0[1]]
            }))
        }
        _ => Err(Error::InvalidArgument(format!(
            "no closed-form solution for `{}` ({interp})",
            exp.model.name()
        ))),
    }
}

fn converted_pair(exp: &Experiment) -> Result<(Solver, Solver)> {
    let heun = Solver::new(exp.model.clone(), Scheme::StochasticHeun)?;
    let em = Solver::new(strat_to_ito(&exp.model)?, Scheme::EulerMaruyama)?;
    Ok((heun, em))
}

fn equilibrium_csv(w: &mut dyn Write, reports: &[EquilibriumReport]) -> Result<()> {
    let names: Vec<&str> = reports[0].terms.iter().map(|t| t.name.as_str()).collect();
    write!(w, "point,t")?;
    for n in &names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for (p, r) in reports.iter().enumerate() {
        for (k, t) in r.times.iter().enumerate() {
            write!(w, "{p},{t:.16e}")?;
            for term in &r.terms {
                write!(w, ",{:.16e}", term.magnitudes[k])?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn run_analysis(
    exp: &Experiment,
    a: &Analysis,
    plan: Plan,
    stem: &str,
    o: &mut Output,
    threads: Option<usize>,
) -> Result<(bool, String)> {
    let r = &exp.config.run;
    match (a, plan) {
        (
            Analysis::Invariance {
                tol, eta_samples: ne, ..
            },
            Plan::Invariance(field, points),
        ) => {
            let opts = InvarianceOptions {
                tol: *tol,
                eta_samples: eta_samples(exp, *ne)?,
                ..Default::default()
            };
            let rep = check_invariance(&exp.model, &field, &points, &opts)?;
            o.write(&format!("{stem}.txt"), |w| Ok(w.write_all(rep.to_text().as_bytes())?))?;
            o.write(&format!("{stem}.csv"), |w| rep.write_csv(w))?;
            let worst: Vec<String> = rep
                .conditions
                .iter()
                .map(|c| format!("{} {:.3e}", c.name, c.max_residual))
                .collect();
            Ok((rep.invariant, worst.join(", ")))
        }
        (Analysis::Equilibrium { tol, times, terms, .. }, Plan::Points(points)) => {
            let opts = EquilibriumOptions {
                tol: *tol,
                times: times.clone(),
                eta_samples: eta_samples(exp, 50)?,
            };
            let reports = points
                .iter()
                .map(|p| check_equilibrium(&exp.model, p, &opts))
                .collect::<Result<Vec<_>>>()?;
            let ok = reports.iter().all(|rep| {
                if terms.is_empty() {
                    rep.persists
                } else {
                    terms.iter().all(|t| rep.term(t).is_some_and(|m| m.vanishes))
                }
            });
            o.write(&format!("{stem}.txt"), |w| {
                for rep in &reports {
                    w.write_all(rep.to_text().as_bytes())?;
                }
                Ok(())
            })?;
            o.write(&format!("{stem}.csv"), |w| equilibrium_csv(w, &reports))?;
            let nonzero: Vec<String> = reports[0]
                .terms
                .iter()
                .filter(|t| t.kind != TermKind::Drift && !t.vanishes)
                .map(|t| t.name.clone())
                .collect();
            Ok((
                ok,
                format!("{} points, nonzero terms: [{}]", reports.len(), nonzero.join(", ")),
            ))
        }
        (Analysis::Lyapunov { step_tol, .. }, Plan::Field(v)) => {
            let rows = per_path(exp, threads, |tr, _| lyapunov_monotonicity(tr, &v, *step_tol))?;
            o.write(&format!("{stem}.csv"), |w| {
                writeln!(w, "path,violations,max_increase")?;
                for (i, m) in rows.iter().enumerate() {
                    writeln!(w, "{i},{},{:.16e}", m.violations, m.max_increase)?;
                }
                Ok(())
            })?;
            let total: usize = rows.iter().map(|m| m.violations).sum();
            Ok((total == 0, format!("{total} violations over {} paths", rows.len())))
        }
        (Analysis::FirstIntegral { tol, .. }, Plan::Field(f)) => {
            let rows = per_path(exp, threads, |tr, _| first_integral_drift(tr, &f))?;
            o.write(&format!("{stem}.csv"), |w| {
                writeln!(w, "path,max_drift,terminal_drift")?;
                for (i, d) in rows.iter().enumerate() {
                    writeln!(w, "{i},{:.16e},{:.16e}", d.max, d.terminal)?;
                }
                Ok(())
            })?;
            let worst = rows.iter().map(|d| d.max).fold(0.0, f64::max);
            Ok((worst <= *tol, format!("max drift {worst:.3e}")))
        }
        (Analysis::Symplecticity { tol }, _) => {
            let defects = per_path(exp, threads, |_, path| check_symplecticity(&exp.solver, &r.x0, path))?
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            o.write(&format!("{stem}.csv"), |w| {
                writeln!(w, "path,defect")?;
                for (i, d) in defects.iter().enumerate() {
                    writeln!(w, "{i},{d:.16e}")?;
                }
                Ok(())
            })?;
            let worst = defects.iter().copied().fold(0.0, f64::max);
            Ok((worst <= *tol, format!("max defect {worst:.3e}")))
        }
        (
            Analysis::Stability {
                delta,
                max_probability,
                min_probability,
            },
            _,
        ) => {
            let e = stability_probability(&exp.solver, &r.x0, *delta, r.t_end, r.h, r.n_paths, r.seed, threads)?;
            o.write(&format!("{stem}.csv"), |w| {
                writeln!(w, "delta,exceedances,n_paths,probability,half_width")?;
                writeln!(
                    w,
                    "{delta:.16e},{},{},{:.16e},{:.16e}",
                    e.hits, e.n, e.fraction, e.half_width
                )?;
                Ok(())
            })?;
            let ok = max_probability.is_none_or(|m| e.fraction <= m) && min_probability.is_none_or(|m| e.fraction >= m);
            Ok((ok, format!("P(exceed) = {:.4} ± {:.4}", e.fraction, e.half_width)))
        }
        (
            Analysis::Attraction {
                target,
                eps,
                start,
                min_fraction,
            },
            _,
        ) => {
            let x0 = match *start {
                StartConfig::Fixed => InitialCondition::Fixed(r.x0.clone()),
                StartConfig::SphereOutsideCap { pole, cos_max } => {
                    let pole = Vec3::from(pole)
                        .normalized()
                        .ok_or_else(|| Error::InvalidArgument("cap pole must be nonzero".into()))?;
                    InitialCondition::sampled(move |rng| sphere_outside_cap(rng, pole, cos_max))
                }
            };
            let e = equilibrium_attraction(&exp.solver, &x0, target, *eps, r.t_end, r.h, r.n_paths, r.seed, threads)?;
            o.write(&format!("{stem}.csv"), |w| {
                writeln!(w, "eps,hits,n_paths,fraction,half_width")?;
                writeln!(
                    w,
                    "{eps:.16e},{},{},{:.16e},{:.16e}",
                    e.hits, e.n, e.fraction, e.half_width
                )?;
                Ok(())
            })?;
            let ok = min_fraction.is_none_or(|m| e.fraction >= m);
            Ok((ok, format!("fraction {:.4} ± {:.4}", e.fraction, e.half_width)))
        }
        (
            Analysis::Convergence {
                oracle,
                levels,
                h0,
                expect_order,
                order_tol,
                min_ratio,
                ..
            },
            Plan::Converge(field),
        ) => {
            let opts = ConvergenceOptions {
                levels: *levels,
                n_paths: r.n_paths,
                seed: r.seed,
                t_end: r.t_end,
                h0: *h0,
                threads,
            };
            let est = match oracle {
                OracleKind::ClosedForm => empirical_convergence_order(&exp.solver, &r.x0, &closed_form(exp)?, &opts)?,
                OracleKind::Finest => {
                    empirical_convergence_order(&exp.solver, &r.x0, &Oracle::FinestRefinement, &opts)?
                }
                OracleKind::FirstIntegral => {
                    let f = field.expect("validated: first-integral oracle has a field");
                    empirical_convergence_order(&exp.solver, &r.x0, &Oracle::Conserved(f), &opts)?
                }
                OracleKind::ConvertedIto => {
                    let (heun, em) = converted_pair(exp)?;
                    coupled_gap(&heun, &em, &r.x0, &opts)?
                }
            };
            o.write(&format!("{stem}.csv"), |w| est.write_csv(w))?;
            let mut ok = true;
            if let Some(p) = expect_order {
                ok &= (est.slope - p).abs() <= order_tol.unwrap_or(est.half_width);
            }
            if let Some(m) = min_ratio {
                ok &= est.ratios().iter().all(|q| q >= m);
            }
            Ok((ok, format!("slope {:.4} ± {:.4}", est.slope, est.half_width)))
        }
        _ => unreachable!("plan built for a different analysis"),
    }
}
