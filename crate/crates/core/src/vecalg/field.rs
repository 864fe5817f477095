use std::fmt;
use std::sync::Arc;

use super::Vec3;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A scalar function on `R^n` with an analytic gradient and, optionally, an
/// analytic Hessian (row-major `n × n`).
///
/// Manifold functions `F`, Lyapunov functions `V` and Hamiltonians `H` are all
/// represented this way. Fields are autonomous: `∂/∂t = 0`.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    dim: usize,
    eval: EvalFn,
    grad: GradFn,
    hess: Option<GradFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_hessian", &self.hess.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            hess: None,
        }
    }

    pub fn with_hessian(mut self, hess: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    pub fn has_hessian(&self) -> bool {
        self.hess.is_some()
    }

    pub fn hess(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.hess.as_ref().map(|h| h(x))
    }

    pub fn grad3(&self, z: Vec3) -> Vec3 {
        Vec3::from_slice(&self.grad(&z.to_array()))
    }

    pub fn eval3(&self, z: Vec3) -> f64 {
        self.eval(&z.to_array())
    }

    /// `F(x) = c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new("constant", dim, move |_| c, move |_| vec![0.0; dim]).with_hessian(move |_| vec![0.0; dim * dim])
    }

    /// `F(x) = c · x`.
    pub fn linear(c: &[f64]) -> Self {
        let dim = c.len();
        let c1: Vec<f64> = c.to_vec();
        let c2 = c1.clone();
        Self::new(
            "linear",
            dim,
            move |x| c1.iter().zip(x).map(|(a, b)| a * b).sum(),
            move |_| c2.clone(),
        )
        .with_hessian(move |_| vec![0.0; dim * dim])
    }

    /// `F(x) = ½ xᵀ Q x + c · x` for a symmetric row-major `Q`.
    pub fn quadratic(q: &[f64], c: &[f64]) -> Self {
        let dim = c.len();
        assert_eq!(q.len(), dim * dim, "quadratic form must be dim × dim");
        let (q1, q2, q3) = (q.to_vec(), q.to_vec(), q.to_vec());
        let (c1, c2) = (c.to_vec(), c.to_vec());
        let qx = move |q: &[f64], x: &[f64], i: usize| -> f64 { (0..dim).map(|j| q[i * dim + j] * x[j]).sum() };
        Self::new(
            "quadratic",
            dim,
            move |x| (0..dim).map(|i| 0.5 * x[i] * qx(&q1, x, i) + c1[i] * x[i]).sum(),
            move |x| (0..dim).map(|i| qx(&q2, x, i) + c2[i]).collect(),
        )
        .with_hessian(move |_| q3.clone())
    }

    /// `F(x) = ‖x‖²`.
    pub fn norm_sq(dim: usize) -> Self {
        Self::new(
            "norm_sq",
            dim,
            |x| x.iter().map(|v| v * v).sum(),
            |x| x.iter().map(|v| 2.0 * v).collect(),
        )
        .with_hessian(move |_| diag(dim, 2.0))
    }

    /// `F(x) = ½‖x‖²`, the Casimir of the rigid-body bracket.
    pub fn half_norm_sq(dim: usize) -> Self {
        Self::new(
            "half_norm_sq",
            dim,
            |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            |x| x.to_vec(),
        )
        .with_hessian(move |_| diag(dim, 1.0))
    }

    /// `F(x) = ‖x‖² − 1`, the unit sphere as a level set.
    pub fn unit_sphere(dim: usize) -> Self {
        Self::new(
            "sphere",
            dim,
            |x| x.iter().map(|v| v * v).sum::<f64>() - 1.0,
            |x| x.iter().map(|v| 2.0 * v).collect(),
        )
        .with_hessian(move |_| diag(dim, 2.0))
    }

    /// `V(x) = |x|^r` on `R`.
    pub fn abs_power(r: f64) -> Self {
        Self::new(
            "abs_power",
            1,
            move |x| x[0].abs().powf(r),
            move |x| vec![r * x[0].abs().powf(r - 1.0) * x[0].signum()],
        )
        .with_hessian(move |x| vec![r * (r - 1.0) * x[0].abs().powf(r - 2.0)])
    }

    /// `V(x) = −log|x|` on `R \ {0}`.
    pub fn neg_log_abs() -> Self {
        Self::new("neg_log_abs", 1, |x| -x[0].abs().ln(), |x| vec![-1.0 / x[0]])
            .with_hessian(|x| vec![1.0 / (x[0] * x[0])])
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Largest relative gap between the analytic gradient and a central
    /// finite-difference gradient over `points`.
    pub fn gradient_consistency(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|x| {
                let g = self.grad(x);
                let fd = fd_gradient(self, x);
                g.iter()
                    .zip(&fd)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn diag(dim: usize, v: f64) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = v;
    }
    m
}

fn fd_step(x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-6 * norm.max(1.0)
}

/// Central finite-difference gradient, step `1e-6·max(1, ‖x‖)`. Only for
/// cross-validating analytic gradients.
pub fn fd_gradient(field: &ScalarField, x: &[f64]) -> Vec<f64> {
    let h = fd_step(x);
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = field.eval(&xp);
            xp[i] = x[i] - h;
            let fm = field.eval(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central finite differences of the analytic gradient, symmetrised.
pub fn fd_hessian(field: &ScalarField, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h = fd_step(x);
    let mut xp = x.to_vec();
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        xp[j] = x[j] + h;
        let gp = field.grad(&xp);
        xp[j] = x[j] - h;
        let gm = field.grad(&xp);
        xp[j] = x[j];
        for i in 0..n {
            m[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    #[test]
    fn builtin_gradients_match_finite_differences() {
        let pts = random_points(50, 3, 1);
        let q = [2.0, 0.5, -1.0, 0.5, 1.0, 0.3, -1.0, 0.3, 4.0];
        for f in [
            ScalarField::norm_sq(3),
            ScalarField::half_norm_sq(3),
            ScalarField::unit_sphere(3),
            ScalarField::linear(&[1.0, -2.0, 0.5]),
            ScalarField::quadratic(&q, &[0.1, 0.2, 0.3]),
        ] {
            assert!(f.gradient_consistency(&pts) < 1e-5, "{}", f.name());
        }
    }

    #[test]
    fn scalar_powers_match_finite_differences() {
        let pts: Vec<Vec<f64>> = [0.3, -0.7, 1.9, -2.4].iter().map(|&v| vec![v]).collect();
        assert!(ScalarField::abs_power(0.5).gradient_consistency(&pts) < 1e-5);
        assert!(ScalarField::abs_power(2.5).gradient_consistency(&pts) < 1e-5);
        assert!(ScalarField::neg_log_abs().gradient_consistency(&pts) < 1e-5);
    }

    #[test]
    fn hessians_symmetric_and_match_finite_differences() {
        let q = [2.0, 0.5, -1.0, 0.5, 1.0, 0.3, -1.0, 0.3, 4.0];
        let f = ScalarField::quadratic(&q, &[0.1, 0.2, 0.3]);
        for x in random_points(20, 3, 2) {
            let h = f.hess(&x).unwrap();
            let fd = fd_hessian(&f, &x);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(h[i * 3 + j], h[j * 3 + i]);
                    assert!((h[i * 3 + j] - fd[i * 3 + j]).abs() < 1e-6);
                }
            }
        }
        let p = ScalarField::abs_power(1.5);
        let x = [0.8];
        assert!((p.hess(&x).unwrap()[0] - fd_hessian(&p, &x)[0]).abs() < 1e-5);
    }
}
