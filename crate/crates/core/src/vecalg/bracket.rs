use super::{cross, ScalarField, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Rigid-body Poisson structure `{F, G}±(z) = ± z · (∇F ∧ ∇G)` on `R³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoissonStructure {
    pub sign: Sign,
}

impl PoissonStructure {
    pub const PLUS: PoissonStructure = PoissonStructure { sign: Sign::Plus };
    pub const MINUS: PoissonStructure = PoissonStructure { sign: Sign::Minus };
}

/// Landau–Lifshitz double bracket `{{F, G}}(z) = α (z ∧ ∇F) · (z ∧ ∇G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleBracketStructure {
    alpha: f64,
}

impl DoubleBracketStructure {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "double-bracket damping must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn rigid_body_bracket(f: &ScalarField, g: &ScalarField, z: Vec3, s: PoissonStructure) -> f64 {
    s.sign.value() * z.dot(cross(f.grad3(z), g.grad3(z)))
}

/// The vector field `X_H` with `X_H[G] = {G, H}` for every `G`, namely
/// `X_H(z) = −s · z ∧ ∇H(z)`.
pub fn hamiltonian_vf(h: &ScalarField, z: Vec3, s: PoissonStructure) -> Vec3 {
    match s.sign {
        Sign::Minus => cross(z, h.grad3(z)),
        Sign::Plus => -cross(z, h.grad3(z)),
    }
}

pub fn double_bracket(f: &ScalarField, g: &ScalarField, z: Vec3, d: DoubleBracketStructure) -> f64 {
    d.alpha * cross(z, f.grad3(z)).dot(cross(z, g.grad3(z)))
}

/// The vector field `X` with `∇F · X = {{F, H}}` for every `F`:
/// `X(z) = −α z ∧ (z ∧ ∇H(z))`.
pub fn double_bracket_vf(h: &ScalarField, z: Vec3, d: DoubleBracketStructure) -> Vec3 {
    -(cross(z, cross(z, h.grad3(z))) * d.alpha)
}

/// `max |{F, G}(z)|` over `samples × probes`. Zero certifies that `F` is a
/// Casimir on the sampled set.
pub fn casimir_residual(f: &ScalarField, s: PoissonStructure, samples: &[Vec3], probes: &[ScalarField]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("casimir samples"));
    }
    if probes.is_empty() {
        return Err(Error::EmptyInput("casimir probes"));
    }
    Ok(samples
        .iter()
        .flat_map(|&z| probes.iter().map(move |g| rigid_body_bracket(f, g, z, s).abs()))
        .fold(0.0, f64::max))
}
