use crate::error::{domain, EgpeError, Result};
use crate::model::{Field, ModelParams};

/// The four integrals from which both E and μ are assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// ½∫|∇φ|²
    pub kinetic: f64,
    /// ∫V|φ|²
    pub potential: f64,
    /// ∫|φ|⁴
    pub quartic: f64,
    /// ∫|φ|⁵
    pub quintic: f64,
}

impl EnergyTerms {
    pub fn energy(&self, beta: f64, lambda: f64) -> f64 {
        self.kinetic + self.potential + 0.5 * beta * self.quartic + 0.4 * lambda * self.quintic
    }

    pub fn chemical_potential(&self, beta: f64, lambda: f64, mass: f64) -> f64 {
        (self.kinetic + self.potential + beta * self.quartic + lambda * self.quintic)
            / (mass * mass)
    }
}

pub(crate) fn energy_terms_with(f: &Field, v: &[f64]) -> EnergyTerms {
    let grid = f.grid();
    let phi = f.values();
    let w = grid.weights();
    let mut potential = 0.0;
    let mut quartic = 0.0;
    let mut quintic = 0.0;
    for ((p, vv), wi) in phi.iter().zip(v).zip(&w) {
        let p2 = p * p;
        potential += wi * vv * p2;
        quartic += wi * p2 * p2;
        quintic += wi * p2 * p2 * p.abs();
    }
    EnergyTerms {
        kinetic: grid.kinetic(phi),
        potential,
        quartic,
        quintic,
    }
}

fn check_compatible(f: &Field, m: &ModelParams) -> Result<Vec<f64>> {
    if f.grid().dimension() != m.dimension() {
        return domain(format!(
            "field lives on a {}-dimensional grid but the model is {}-dimensional",
            f.grid().dimension(),
            m.dimension()
        ));
    }
    f.grid().sample_potential(&m.potential)
}

impl EnergyTerms {
    pub fn of(f: &Field, m: &ModelParams) -> Result<Self> {
        let v = check_compatible(f, m)?;
        Ok(energy_terms_with(f, &v))
    }
}

/// Discrete energy ∫ ½|∇φ|² + V|φ|² + (β/2)|φ|⁴ + (2λ/5)|φ|⁵.
pub fn energy(f: &Field, m: &ModelParams) -> Result<f64> {
    Ok(EnergyTerms::of(f, m)?.energy(m.beta, m.lambda))
}

/// Lagrange multiplier μ = c⁻² ∫ ½|∇φ|² + V|φ|² + β|φ|⁴ + λ|φ|⁵.
///
/// Requires ‖φ‖₂ = c to 1e-8 relative.
pub fn chemical_potential(f: &Field, m: &ModelParams) -> Result<f64> {
    let c = m.mass();
    let n = f.norm();
    if ((n - c) / c).abs() > 1e-8 {
        return Err(EgpeError::Precondition(format!(
            "field norm {n} differs from the prescribed mass {c}"
        )));
    }
    Ok(EnergyTerms::of(f, m)?.chemical_potential(m.beta, m.lambda, c))
}

/// ‖−½Δφ + Vφ + β|φ|²φ + λ|φ|³φ − μφ‖ / ‖μφ‖ on the discrete grid.
pub(crate) fn euler_lagrange_residual(f: &Field, m: &ModelParams, v: &[f64], mu: f64) -> f64 {
    let grid = f.grid();
    let phi = f.values();
    let lap = grid.laplacian(phi);
    let r: Vec<f64> = phi
        .iter()
        .zip(&lap)
        .zip(v)
        .map(|((p, l), vv)| {
            let a = p.abs();
            -0.5 * l + vv * p + m.beta * a * a * p + m.lambda * a * a * a * p - mu * p
        })
        .collect();
    let scale = mu.abs().max(f64::MIN_POSITIVE) * grid.norm(phi);
    grid.norm(&r) / scale
}
