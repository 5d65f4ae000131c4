use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::Potential;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical description of a condensate prior to scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atomic mass in kg.
    pub mass_kg: f64,
    /// s-wave scattering length in m.
    pub scattering_length: f64,
    /// Number of particles.
    pub particle_number: f64,
    /// Length unit x_s in m.
    pub length_scale: f64,
    /// Dimensionless LHY prefactor C_L.
    pub lhy_constant: f64,
    /// Target L² norm c of the scaled wave function.
    pub norm_constant: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass_kg),
            ("scattering_length", self.scattering_length),
            ("particle_number", self.particle_number),
            ("length_scale", self.length_scale),
            ("lhy_constant", self.lhy_constant),
            ("norm_constant", self.norm_constant),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return domain(format!("{name} must be positive and finite, got {value}"));
            }
        }
        Ok(())
    }

    /// Time unit t_s = m x_s² / ħ.
    pub fn time_scale(&self) -> f64 {
        self.mass_kg * self.length_scale * self.length_scale / HBAR
    }

    /// Dimensionless trap strength γ = m x_s² ω / ħ for angular frequency ω.
    pub fn trap_gamma(&self, omega: f64) -> f64 {
        self.time_scale() * omega
    }
}

/// Dimensionless interaction coefficients (β, λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionCoefficients {
    pub beta: f64,
    pub lambda: f64,
}

/// β = 4πN a_s/(c² x_s), λ = 4π C_L (N^{3/2}/c³)(a_s/x_s)^{5/2}.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<InteractionCoefficients> {
    p.validate()?;
    let n = p.particle_number;
    let c = p.norm_constant;
    let ratio = p.scattering_length / p.length_scale;
    let beta = 4.0 * PI * n * ratio / (c * c);
    let lambda = 4.0 * PI * p.lhy_constant * n.powf(1.5) / (c * c * c) * ratio.powf(2.5);
    Ok(InteractionCoefficients { beta, lambda })
}

/// Dimensionless problem in unified form on ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    dimension: usize,
    pub beta: f64,
    pub lambda: f64,
    mass: f64,
    pub potential: Potential,
}

impl ModelParams {
    pub fn new(
        dimension: usize,
        beta: f64,
        lambda: f64,
        mass: f64,
        potential: Potential,
    ) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return domain(format!("dimension must be 1, 2 or 3, got {dimension}"));
        }
        if !beta.is_finite() {
            return domain("beta must be finite");
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return domain(format!("lambda must be nonnegative, got {lambda}"));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return domain(format!("mass c must be positive, got {mass}"));
        }
        potential.check_dimension(dimension)?;
        Ok(Self {
            dimension,
            beta,
            lambda,
            mass,
            potential,
        })
    }

    /// Free-space model, V ≡ 0.
    pub fn free(dimension: usize, beta: f64, lambda: f64, mass: f64) -> Result<Self> {
        Self::new(dimension, beta, lambda, mass, Potential::Zero)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The prescribed norm c.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Same problem with c replaced.
    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Self::new(
            self.dimension,
            self.beta,
            self.lambda,
            mass,
            self.potential.clone(),
        )
    }
}
