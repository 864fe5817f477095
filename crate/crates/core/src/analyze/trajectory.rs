use crate::integrate::Trajectory;
use crate::vecalg::ScalarField;

/// `|F(x_t) − F(x₀)|` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegralDrift {
    pub max: f64,
    pub terminal: f64,
}

pub fn first_integral_drift(traj: &Trajectory, f: &ScalarField) -> FirstIntegralDrift {
    let v = traj.map_field(f);
    let v0 = v[0];
    let max = v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max);
    FirstIntegralDrift {
        max,
        terminal: (v[v.len() - 1] - v0).abs(),
    }
}

/// Steps where a Lyapunov candidate increases by more than the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Monotonicity {
    pub violations: usize,
    /// Largest single-step increase (0 when `V` never increases).
    pub max_increase: f64,
    /// Step indices `k` with `V(x_{k+1}) − V(x_k) > step_tol`.
    pub steps: Vec<usize>,
}

pub fn lyapunov_monotonicity(traj: &Trajectory, v: &ScalarField, step_tol: f64) -> Monotonicity {
    let vals = traj.map_field(v);
    let mut out = Monotonicity {
        violations: 0,
        max_increase: 0.0,
        steps: Vec::new(),
    };
    for (k, w) in vals.windows(2).enumerate() {
        let inc = w[1] - w[0];
        out.max_increase = out.max_increase.max(inc);
        if inc > step_tol {
            out.violations += 1;
            out.steps.push(k);
        }
    }
    out
}
