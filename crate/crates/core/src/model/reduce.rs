use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::model::{ModelParams, Potential};

/// Which directions are frozen into a Gaussian ground mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionCase {
    /// Strong z confinement; the result is two-dimensional.
    Disk,
    /// Strong (y, z) confinement; the result is one-dimensional.
    Cigar,
}

/// Coefficients of the reduced lower-dimensional model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedModel {
    pub beta_reduced: f64,
    pub lambda_reduced: f64,
    /// Energy shift C of the frozen mode; removable by a global phase.
    pub phase_constant: f64,
    pub target_dimension: usize,
}

impl ReducedModel {
    /// The reduced problem with the residual in-plane harmonic trap of `parent`.
    pub fn model(&self, parent: &ModelParams) -> Result<ModelParams> {
        let gammas = parent_gammas(parent)?;
        let potential = if gammas.iter().all(|&g| g == 0.0) {
            Potential::Zero
        } else {
            Potential::Harmonic(gammas[..self.target_dimension].to_vec())
        };
        ModelParams::new(
            self.target_dimension,
            self.beta_reduced,
            self.lambda_reduced,
            parent.mass(),
            potential,
        )
    }
}

fn parent_gammas(m: &ModelParams) -> Result<[f64; 3]> {
    if m.dimension() != 3 {
        return domain("dimensional reduction starts from a three-dimensional model");
    }
    match &m.potential {
        Potential::Zero => Ok([0.0; 3]),
        Potential::Harmonic(g) => Ok([g[0], g[1], g[2]]),
        _ => domain("dimensional reduction requires a harmonic or zero potential"),
    }
}

// Trapezoidal rule on [-L σ, L σ]; exponentially accurate for Gaussians.
const HALF_WIDTH: f64 = 14.0;
const STEPS_PER_SIGMA: f64 = 24.0;

fn nodes(sigma: f64) -> (Vec<f64>, f64) {
    let n = (2.0 * HALF_WIDTH * STEPS_PER_SIGMA) as usize;
    let h = 2.0 * HALF_WIDTH * sigma / n as f64;
    (
        (0..=n)
            .map(|k| -HALF_WIDTH * sigma + k as f64 * h)
            .collect(),
        h,
    )
}

struct Moments {
    fourth: f64,
    fifth: f64,
    // ∫ Σ γᵢ² xᵢ² |ψ|² over the frozen directions.
    trap: f64,
    // ∫ |∇ψ|² over the frozen directions.
    gradient: f64,
}

fn disk_moments(sigma: f64, gamma_z: f64) -> Moments {
    let amp = (PI * sigma * sigma).powf(-0.25);
    let (zs, h) = nodes(sigma);
    let mut m = Moments {
        fourth: 0.0,
        fifth: 0.0,
        trap: 0.0,
        gradient: 0.0,
    };
    for z in zs {
        let psi = amp * (-z * z / (2.0 * sigma * sigma)).exp();
        let dpsi = -z / (sigma * sigma) * psi;
        let p2 = psi * psi;
        m.fourth += h * p2 * p2;
        m.fifth += h * p2 * p2 * psi;
        m.trap += h * gamma_z * gamma_z * z * z * p2;
        m.gradient += h * dpsi * dpsi;
    }
    m
}

fn cigar_moments(sigma: f64, gamma_y: f64, gamma_z: f64) -> Moments {
    let amp = 1.0 / (PI.sqrt() * sigma);
    let (xs, h) = nodes(sigma);
    let area = h * h;
    let mut m = Moments {
        fourth: 0.0,
        fifth: 0.0,
        trap: 0.0,
        gradient: 0.0,
    };
    for &y in &xs {
        for &z in &xs {
            let psi = amp * (-(y * y + z * z) / (2.0 * sigma * sigma)).exp();
            let gy = -y / (sigma * sigma) * psi;
            let gz = -z / (sigma * sigma) * psi;
            let p2 = psi * psi;
            m.fourth += area * p2 * p2;
            m.fifth += area * p2 * p2 * psi;
            m.trap += area * (gamma_y * gamma_y * y * y + gamma_z * gamma_z * z * z) * p2;
            m.gradient += area * (gy * gy + gz * gz);
        }
    }
    m
}

/// Projects a 3D model onto a Gaussian transverse mode of width `sigma`.
pub fn reduce_dimension(m: &ModelParams, sigma: f64, case: ReductionCase) -> Result<ReducedModel> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return domain(format!("transverse width must be positive, got {sigma}"));
    }
    let g = parent_gammas(m)?;
    let (moments, target_dimension) = match case {
        ReductionCase::Disk => (disk_moments(sigma, g[2]), 2),
        ReductionCase::Cigar => (cigar_moments(sigma, g[1], g[2]), 1),
    };
    Ok(ReducedModel {
        beta_reduced: m.beta * moments.fourth,
        lambda_reduced: m.lambda * moments.fifth,
        phase_constant: moments.trap + moments.gradient,
        target_dimension,
    })
}
