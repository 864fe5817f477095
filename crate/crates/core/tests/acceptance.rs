//! Acceptance criteria 1-12. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! gives the full table.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochlab::analyze::{
    check_equilibrium, check_invariance, check_symplecticity, coupled_gap, empirical_convergence_order,
    equilibrium_attraction, fibonacci_sphere, first_integral_drift, ll_decomposition_residual, lyapunov_monotonicity,
    one_step_generator_estimate, random_sphere, sphere_outside_cap, stability_probability, ConvergenceOptions,
    EquilibriumOptions, InvarianceOptions, Oracle,
};
use stochlab::cli::{execute, Analysis, Command, Experiment, ExperimentConfig, StartConfig};
use stochlab::integrate::{
    apply_generator, ensemble_path, par_map_indexed, run_ensemble, strat_to_ito, InitialCondition, Interpretation,
    Scheme, Solver,
};
use stochlab::models::{build_model, sigma_ell, CatalogEntry, ModelId, ModelParams};
use stochlab::vecalg::{casimir_residual, cross, rigid_body_bracket, PoissonStructure, ScalarField, Vec3};

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    let text = fs::read_to_string(configs_dir().join(name)).unwrap();
    ExperimentConfig::parse(&text).unwrap()
}

fn model(id: ModelId, interp: Interpretation, f: impl FnOnce(&mut ModelParams)) -> stochlab::integrate::ModelSpec {
    let mut p = ModelParams::default();
    f(&mut p);
    build_model(&CatalogEntry::new(id, p).with_interpretation(interp)).unwrap()
}

fn random_points(seed: u64, n: usize, scale: f64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1. bracket algebra

struct Quad {
    q: [[f64; 3]; 3],
    c: Vec3,
}

impl Quad {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut q = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                q[i][j] = rng.random_range(-1.0..1.0);
                q[j][i] = q[i][j];
            }
        }
        let c = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        Self { q, c }
    }

    fn field(&self) -> ScalarField {
        let q: Vec<f64> = self.q.iter().flatten().copied().collect();
        ScalarField::quadratic(&q, &self.c.to_array())
    }

    fn apply(&self, v: Vec3) -> Vec3 {
        let r = |i: usize| self.q[i][0] * v.x + self.q[i][1] * v.y + self.q[i][2] * v.z;
        Vec3::new(r(0), r(1), r(2))
    }

    fn grad(&self, z: Vec3) -> Vec3 {
        self.apply(z) + self.c
    }
}

/// `{G, H}` as a scalar field with its exact gradient
/// `∇[z·(a∧b)] = a∧b + Q_Gᵀ(b∧z) + Q_Hᵀ(z∧a)` for `a = ∇G`, `b = ∇H`.
fn bracket_field(g: &Quad, h: &Quad, sign: f64) -> ScalarField {
    let (g1, h1) = (Quad { q: g.q, c: g.c }, Quad { q: h.q, c: h.c });
    let (g2, h2) = (Quad { q: g.q, c: g.c }, Quad { q: h.q, c: h.c });
    ScalarField::new(
        "bracket",
        3,
        move |x| {
            let z = Vec3::from_slice(x);
            sign * z.dot(cross(g1.grad(z), h1.grad(z)))
        },
        move |x| {
            let z = Vec3::from_slice(x);
            let (a, b) = (g2.grad(z), h2.grad(z));
            let v = cross(a, b) + g2.apply(cross(b, z)) + h2.apply(cross(z, a));
            (v * sign).to_vec()
        },
    )
}

fn product_field(f: ScalarField, g: ScalarField) -> ScalarField {
    let (f1, g1) = (f.clone(), g.clone());
    ScalarField::new(
        "product",
        3,
        move |x| f1.eval(x) * g1.eval(x),
        move |x| {
            let (a, b) = (f.eval(x), g.eval(x));
            f.grad(x)
                .iter()
                .zip(g.grad(x))
                .map(|(df, dg)| df * b + a * dg)
                .collect()
        },
    )
}

#[test]
fn criterion_01_bracket_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let points = random_points(102, 100, 2.0);
    let s = PoissonStructure::MINUS;
    let (mut anti, mut leib, mut jac) = (0.0f64, 0.0f64, 0.0f64);
    for &z in &points {
        let (qf, qg, qh) = (Quad::random(&mut rng), Quad::random(&mut rng), Quad::random(&mut rng));
        let (f, g, h) = (qf.field(), qg.field(), qh.field());
        anti = anti.max((rigid_body_bracket(&f, &g, z, s) + rigid_body_bracket(&g, &f, z, s)).abs());

        let fg = product_field(f.clone(), g.clone());
        let lhs = rigid_body_bracket(&fg, &h, z, s);
        let rhs = f.eval3(z) * rigid_body_bracket(&g, &h, z, s) + g.eval3(z) * rigid_body_bracket(&f, &h, z, s);
        leib = leib.max((lhs - rhs).abs());

        let sv = s.sign.value();
        let gh = bracket_field(&qg, &qh, sv);
        let hf = bracket_field(&qh, &qf, sv);
        let fg = bracket_field(&qf, &qg, sv);
        let cyc =
            rigid_body_bracket(&f, &gh, z, s) + rigid_body_bracket(&g, &hf, z, s) + rigid_body_bracket(&h, &fg, z, s);
        jac = jac.max(cyc.abs());
    }
    let casimir = ScalarField::half_norm_sq(3);
    let probes: Vec<ScalarField> = (0..5).map(|_| Quad::random(&mut rng).field()).collect();
    let cas = casimir_residual(&casimir, s, &points, &probes).unwrap();
    let pass = anti <= 1e-10 && leib <= 1e-10 && jac <= 1e-10 && cas <= 1e-12;
    report(
        1,
        pass,
        format!("antisymmetry {anti:.2e}, Leibniz {leib:.2e}, Jacobi {jac:.2e}, Casimir {cas:.2e}"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 2. LL decomposition

#[test]
fn criterion_02_ll_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let zs = random_points(202, 100, 2.0);
    let bs = random_points(203, 100, 3.0);
    let mut worst = 0.0f64;
    for (z, b) in zs.into_iter().zip(bs) {
        let alpha = rng.random_range(0.0..3.0);
        worst = worst.max(ll_decomposition_residual(z, b, alpha).unwrap());
    }
    let pass = worst <= 1e-14;
    report(2, pass, format!("max relative residual {worst:.2e}"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 3. Stratonovich sphere invariance under Heun

#[test]
fn criterion_03_stratonovich_sphere() {
    let cfg = load("ell_stratonovich.toml");
    let exp = Experiment::new(&cfg).unwrap();
    let r = &exp.config.run;
    assert_eq!((r.t_end, r.h), (10.0, 1e-4));
    assert_eq!(exp.solver.scheme(), Scheme::StochasticHeun);
    let start = Instant::now();
    let path = ensemble_path(r.seed, 0, r.t_end, r.h, exp.solver.noise_dim()).unwrap();
    let tr = exp.solver.solve(&r.x0, &path).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let dev = tr
        .states()
        .map(|x| (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = dev <= 1e-3 && secs <= 30.0;
    report(3, pass, format!("max |‖μ‖² − 1| = {dev:.3e} (bound 1e-3), {secs:.2} s"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 4. Itô sphere drift rate

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn criterion_04_ito_sphere_drift() {
    let cfg = load("ell_ito.toml");
    let exp = Experiment::new(&cfg).unwrap();
    let r = &exp.config.run;
    assert_eq!((r.t_end, r.h, r.n_paths), (1.0, 1e-3, 1000));
    assert_eq!(exp.solver.scheme(), Scheme::EulerMaruyama);
    let (eps, alpha) = (0.1, 1.0);
    let x0 = InitialCondition::Fixed(r.x0.clone());
    let stats = run_ensemble(
        &exp.solver,
        &x0,
        r.t_end,
        r.h,
        r.n_paths,
        r.seed,
        &[ScalarField::norm_sq(3)],
        None,
    )
    .unwrap();
    let slope = ls_slope(&stats.times, &stats.mean[0]);
    let expected = 2.0 * eps * eps * (1.0 + alpha * alpha);
    let rel = (slope - expected).abs() / expected;
    let pass = rel <= 0.10;
    report(
        4,
        pass,
        format!("slope {slope:.5} vs {expected:.5}, relative error {:.1}%", 100.0 * rel),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 5. Stratonovich-to-Itô conversion

#[test]
fn criterion_05_conversion() {
    let kubo = model(ModelId::Kubo, Interpretation::Stratonovich, |p| {
        p.kubo_a = Some(1.0);
        p.kubo_sigma = Some(0.5);
    });
    let heun = Solver::new(kubo.clone(), Scheme::StochasticHeun).unwrap();
    let em = Solver::new(strat_to_ito(&kubo).unwrap(), Scheme::EulerMaruyama).unwrap();
    let opts = ConvergenceOptions {
        levels: 5,
        n_paths: 200,
        seed: 5,
        t_end: 1.0,
        h0: 1.0 / 16.0,
        threads: None,
    };
    let est = coupled_gap(&heun, &em, &[1.0, 0.0], &opts).unwrap();
    let ratios = est.ratios();
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = ratios.len() == 4 && worst >= 1.3;
    report(
        5,
        pass,
        format!("gap ratios per halving {ratios:.3?}, min {worst:.3} (bound 1.3)"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 6. Kubo first integral and symplecticity

#[test]
fn criterion_06_kubo() {
    let kubo = model(ModelId::Kubo, Interpretation::Stratonovich, |p| {
        p.kubo_a = Some(1.0);
        p.kubo_sigma = Some(0.5);
    });
    let solver = Solver::new(kubo, Scheme::StochasticHeun).unwrap();
    let x0 = [1.0, 0.0];
    let opts = ConvergenceOptions {
        levels: 5,
        n_paths: 200,
        seed: 6,
        t_end: 1.0,
        h0: 1.0 / 16.0,
        threads: None,
    };
    let est =
        empirical_convergence_order(&solver, &x0, &Oracle::Conserved(ScalarField::half_norm_sq(2)), &opts).unwrap();

    let h = 1e-3;
    let defects = par_map_indexed(20, None, |i| {
        let path = ensemble_path(6, i, 1.0, h, 1).unwrap();
        check_symplecticity(&solver, &x0, &path).unwrap()
    })
    .unwrap();
    let defect = defects.iter().copied().fold(0.0, f64::max);
    let pass = est.slope >= 1.0 && defect <= 10.0 * h;
    report(
        6,
        pass,
        format!(
            "H₀ drift order {:.3} ± {:.3} (need ≥ 1), symplectic defect {defect:.2e} (bound {:.0e})",
            est.slope,
            est.half_width,
            10.0 * h
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 7. scalar linear SDE

#[test]
fn criterion_07_scalar_linear() {
    let lin = |a: f64, b: f64| {
        model(ModelId::ScalarLinear, Interpretation::Ito, |p| {
            p.a = Some(a);
            p.b_scalar = Some(b);
        })
    };
    let em = Solver::new(lin(-1.0, 1.0), Scheme::EulerMaruyama).unwrap();
    let opts = ConvergenceOptions {
        levels: 5,
        n_paths: 500,
        seed: 7,
        t_end: 1.0,
        h0: 1.0 / 16.0,
        threads: None,
    };
    let exact = Oracle::closed_form(|x0, path| {
        let w: f64 = path.increments().iter().sum();
        vec![x0[0] * (-1.5 * path.t_end() + w).exp()]
    });
    let order = empirical_convergence_order(&em, &[1.0], &exact, &opts).unwrap();
    let order_ok = (order.slope - 0.5).abs() <= 0.15;

    let (x0, delta, t_end, h, n) = ([0.01], 0.5, 10.0, 1e-3, 2000);
    let stable = stability_probability(&em, &x0, delta, t_end, h, n, 71, None).unwrap();
    let unstable_solver = Solver::new(lin(1.0, 1.0), Scheme::EulerMaruyama).unwrap();
    let unstable = stability_probability(&unstable_solver, &x0, delta, t_end, h, n, 72, None).unwrap();
    let stable_ok = stable.fraction <= 0.05;
    let unstable_ok = unstable.fraction >= 0.95;

    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut gen_err = 0.0f64;
    for &(a, b) in &[(-1.0, 1.0), (1.0, 1.0), (0.5, 2.0), (-2.0, 0.3)] {
        let m = lin(a, b);
        for &r in &[0.5, 1.0, 2.0, 3.0] {
            let v = ScalarField::abs_power(r);
            for _ in 0..25 {
                let x = rng.random_range(0.05..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let lv = apply_generator(&m, &v, 0.0, &[x]).unwrap();
                let want = (a + 0.5 * b * b * (r - 1.0)) * r * x.abs().powf(r);
                gen_err = gen_err.max((lv - want).abs() / want.abs().max(1.0));
            }
        }
    }
    let gen_ok = gen_err <= 1e-12;

    let pass = order_ok && stable_ok && unstable_ok && gen_ok;
    report(
        7,
        pass,
        format!(
            "EM order {:.3} (0.5 ± 0.15): {}; P_exceed stable {:.4} (≤ 0.05): {}; unstable {:.4} (≥ 0.95): {}; generator error {gen_err:.1e}: {}",
            order.slope,
            ok(order_ok),
            stable.fraction,
            ok(stable_ok),
            unstable.fraction,
            ok(unstable_ok),
            ok(gen_ok)
        ),
    );
    assert!(pass);
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fail"
    }
}

// ---------------------------------------------------------------------------
// 8. generator vs one-step statistics

#[test]
fn criterion_08_generator_vs_statistics() {
    let (alpha, b) = (1.0, [0.0, 0.0, 1.0]);
    let ell = model(ModelId::Ell, Interpretation::Ito, |p| {
        p.b = Some(b);
        p.alpha = Some(alpha);
        p.epsilon = Some(1.0);
    });
    let v = ScalarField::norm_sq(3);
    let h = 1e-3;
    let bias = h * (1.0 + alpha * alpha) * b.iter().map(|c| c * c).sum::<f64>();
    let mut details = Vec::new();
    let mut pass = true;
    for (k, x) in [vec![0.0, 0.6, 0.8], vec![1.0, 0.0, 0.0], vec![0.48, -0.6, 0.64]]
        .iter()
        .enumerate()
    {
        let lv = apply_generator(&ell, &v, 0.0, x).unwrap();
        let est = one_step_generator_estimate(&ell, &v, 0.0, x, h, 100_000, 80 + k as u64, None).unwrap();
        let tol = 4.0 * est.std_error + bias;
        let gap = (est.mean - lv).abs();
        pass &= gap <= tol;
        details.push(format!(
            "LV {lv:.5} vs MC {:.5} (gap {gap:.2e}, tol {tol:.2e})",
            est.mean
        ));
    }
    report(8, pass, details.join("; "));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 9. checker classification matrix

#[test]
fn criterion_09_classification() {
    let sphere = ScalarField::unit_sphere(3);
    let points = fibonacci_sphere(200);
    let opts = InvarianceOptions::default();
    let ell = |i: Interpretation| {
        model(ModelId::Ell, i, |p| {
            p.b = Some([0.0, 0.0, 1.0]);
            p.alpha = Some(1.0);
            p.epsilon = Some(1.0);
        })
    };
    let strat = check_invariance(&ell(Interpretation::Stratonovich), &sphere, &points, &opts).unwrap();
    let ito = check_invariance(&ell(Interpretation::Ito), &sphere, &points, &opts).unwrap();
    let diag = points
        .iter()
        .map(|p| {
            let s = sigma_ell(Vec3::from_slice(p), 1.0);
            (0..3).map(|i| s[i][i].abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let ell_ok = strat.invariant
        && !ito.invariant
        && ito.condition("diffusion_tangency").unwrap().pass
        && !ito.condition("ito_drift").unwrap().pass
        && diag > 0.0;

    let eps = 0.3;
    let ext = model(ModelId::LarmorExternal, Interpretation::Ito, |p| {
        p.b = Some([0.0, 0.0, 1.0]);
        p.epsilon = Some(eps);
        p.sigma = Some([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    });
    let ext_rep = check_invariance(&ext, &sphere, &points, &opts).unwrap();
    let trace = ext_rep.condition("second_order_trace").unwrap().max_residual;
    let ext_ok = !ext_rep.invariant && (trace - 2.0 * eps * eps).abs() <= 1e-12;

    let poles = [vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
    let eq_opts = EquilibriumOptions::default();
    let pres = model(ModelId::LarmorPreserving, Interpretation::Stratonovich, |p| {
        p.b = Some([0.0, 0.0, 2.0]);
        p.gamma = Some(0.5);
    });
    let pres_ok = poles
        .iter()
        .all(|p| check_equilibrium(&pres, p, &eq_opts).unwrap().persists);

    let me = model(ModelId::ModifiedEtore, Interpretation::Ito, |p| {
        p.b = Some([0.0, 0.0, 1.0]);
        p.alpha = Some(1.0);
        p.epsilon = Some(0.5);
    });
    let me_ok = poles.iter().all(|p| {
        let r = check_equilibrium(&me, p, &eq_opts).unwrap();
        r.term("ll_drift").unwrap().vanishes
            && r.term("diffusion_1").unwrap().vanishes
            && !r.term("rescaling").unwrap().vanishes
    });

    let pass = ell_ok && ext_ok && pres_ok && me_ok;
    report(
        9,
        pass,
        format!(
            "ELL strat invariant {}, ELL Itô not invariant {}, external Larmor trace {trace:.15} vs {:.15} {}, preserving poles persist {}, modified Etore terms {}",
            strat.invariant,
            !ito.invariant,
            2.0 * eps * eps,
            ok(ext_ok),
            ok(pres_ok),
            ok(me_ok)
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 10. RODE persistence

#[test]
fn criterion_10_rode_persistence() {
    let cfg = load("rode_ll.toml");
    let exp = Experiment::new(&cfg).unwrap();
    let r = exp.config.run.clone();
    assert_eq!((r.t_end, r.n_paths), (50.0, 100));
    let start = Instant::now();
    let v = ScalarField::linear(&[0.0, 0.0, -1.0]);
    let rows = par_map_indexed(r.n_paths, None, |i| {
        let path = ensemble_path(r.seed, i, r.t_end, r.h, exp.solver.noise_dim()).unwrap();
        let tr = exp.solver.solve(&r.x0, &path).unwrap();
        let dev = tr
            .states()
            .map(|x| (x.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max);
        (dev, lyapunov_monotonicity(&tr, &v, 1e-6).violations)
    })
    .unwrap();
    let dev = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let violations: usize = rows.iter().map(|r| r.1).sum();
    let Some(Analysis::Attraction {
        target,
        eps,
        start: StartConfig::SphereOutsideCap { pole, cos_max },
        ..
    }) = exp
        .config
        .analysis
        .iter()
        .find(|a| matches!(a, Analysis::Attraction { .. }))
        .cloned()
    else {
        panic!("rode_ll.toml has no attraction analysis");
    };
    assert_eq!(eps, 1e-2);
    let pole = Vec3::from(pole).normalized().unwrap();
    let x0 = InitialCondition::sampled(move |rng| sphere_outside_cap(rng, pole, cos_max));
    let attraction =
        equilibrium_attraction(&exp.solver, &x0, &target, eps, r.t_end, r.h, r.n_paths, r.seed, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = dev <= 10.0 * r.h && violations == 0 && attraction.fraction >= 0.95 && secs <= 60.0;
    report(
        10,
        pass,
        format!(
            "max |‖μ‖ − 1| {dev:.2e} (bound {:.0e}), {violations} Lyapunov violations, attraction {:.3}, {secs:.1} s",
            10.0 * r.h,
            attraction.fraction
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 11. deterministic LL baseline

#[test]
fn criterion_11_ll_baseline() {
    let ll = model(ModelId::Ll, Interpretation::Ode, |p| {
        p.b = Some([0.0, 0.0, 1.0]);
        p.alpha = Some(1.0);
    });
    let solver = Solver::new(ll, Scheme::Rk4).unwrap();
    let (t_end, h) = (20.0, 1e-3);
    let cap = 1e-3f64;
    let mut starts: Vec<Vec<f64>> = fibonacci_sphere(500)
        .into_iter()
        .filter(|p| -p[2] < cap.cos())
        .collect();
    starts.extend((0..64).map(|k| {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
        let th = std::f64::consts::PI - cap;
        vec![th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos()]
    }));
    starts.extend(random_sphere(110, 200).into_iter().filter(|p| -p[2] < cap.cos()));
    let v = ScalarField::linear(&[0.0, 0.0, -1.0]);
    let norm = ScalarField::new(
        "norm",
        3,
        |x| x.iter().map(|c| c * c).sum::<f64>().sqrt(),
        |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            x.iter().map(|c| c / r).collect()
        },
    );
    let grid = ensemble_path(0, 0, t_end, h, 0).unwrap();
    let rows = par_map_indexed(starts.len(), None, |i| {
        let tr = solver.solve(&starts[i], &grid).unwrap();
        let drift = first_integral_drift(&tr, &norm).max;
        // Strict decrease wherever the exact one-step decrement, about
        // 2αh(V + 1), is above the rounding resolution of the state; never an
        // increase anywhere.
        let vs = tr.map_field(&v);
        let strict = vs
            .windows(2)
            .all(|w| w[1] <= w[0] && (w[1] < w[0] || w[0] + 1.0 <= 1e-12));
        let last = tr.last();
        let dist = ((last[0]).powi(2) + (last[1]).powi(2) + (last[2] - 1.0).powi(2)).sqrt();
        (drift, strict, dist)
    })
    .unwrap();
    let drift = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let strict = rows.iter().all(|r| r.1);
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let pass = drift <= 1e-10 && strict && worst <= 1e-2;
    report(
        11,
        pass,
        format!(
            "{} starts: ‖μ‖ drift {drift:.2e}, V strictly decreasing {strict}, max final distance {worst:.2e}",
            starts.len()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 12. reproducibility

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_12_reproducibility() {
    let tmp = tempfile::tempdir().unwrap();
    let mut names: Vec<PathBuf> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    names.sort();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for path in &names {
        let cfg = ExperimentConfig::parse(&fs::read_to_string(path).unwrap()).unwrap();
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        for cmd in [
            Command::Simulate,
            Command::Check,
            Command::Convergence,
            Command::Stability,
        ] {
            if cmd != Command::Simulate && !cfg.analysis.iter().any(|a| cmd.runs(a)) {
                continue;
            }
            let runs: Vec<BTreeMap<String, Vec<u8>>> = [Some(1), Some(1), Some(4)]
                .iter()
                .enumerate()
                .map(|(k, &threads)| {
                    let out = tmp.path().join(format!("{stem}-{cmd}-{k}"));
                    execute(cmd, &cfg, &out, threads).unwrap();
                    outputs(&out)
                })
                .collect();
            compared += runs[0].len();
            if runs[0].is_empty() || runs[1..].iter().any(|r| r != &runs[0]) {
                mismatches.push(format!("{stem}/{cmd}"));
            }
        }
    }
    let pass = mismatches.is_empty();
    report(
        12,
        pass,
        format!(
            "{compared} files from {} configs, identical across reruns and threads 1/4; mismatches {mismatches:?}",
            names.len()
        ),
    );
    assert!(pass);
}
