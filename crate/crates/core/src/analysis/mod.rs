//! Post-processing of computed ground states: the η_θ concentration
//! indicator, the flat-top droplet estimate and phase-plane sweeps.

mod sweep;

pub use sweep::{phase_sweep, PhaseDiagramCell, RadiusPolicy, Regime, SweepConfig};

use std::f64::consts::PI;

use crate::error::{domain, EgpeError, Result};
use crate::flow::{Classification, GroundStateResult};
use crate::model::{Field, ModelParams};

/// Fraction of the mass carried where ρ = |φ|² ≥ θ·max ρ.
///
/// Membership is inclusive and the maximum is taken over grid values.
pub fn eta_indicator(f: &Field, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("θ must lie in (0, 1), got {theta}"));
    }
    let rho: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    let max = rho.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return domain("η_θ needs a field with positive mass");
    }
    let cut = theta * max;
    let core: Vec<f64> = rho
        .iter()
        .map(|&r| if r >= cut { r } else { 0.0 })
        .collect();
    let grid = f.grid();
    Ok((grid.integrate(&core) / grid.integrate(&rho)).clamp(0.0, 1.0))
}

/// Kinetic-free flat-top ansatz φ ≈ a·χ_D with a|D|^{1/2} = c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatTopEstimate {
    pub plateau_value: f64,
    pub approx_energy: f64,
    pub support_volume: f64,
}

impl FlatTopEstimate {
    /// Radius of a ball in `d` dimensions with the support volume.
    pub fn support_radius(&self, d: usize) -> f64 {
        let v = self.support_volume;
        match d {
            1 => 0.5 * v,
            2 => (v / PI).sqrt(),
            _ => (3.0 * v / (4.0 * PI)).cbrt(),
        }
    }
}

/// a = −5β/(6λ) and E_app = (βc/6)(5β/(6λ))².
pub fn flat_top_estimate(m: &ModelParams) -> Result<FlatTopEstimate> {
    flat_top_from(m.beta, m.lambda, m.mass())
}

pub(crate) fn flat_top_from(beta: f64, lambda: f64, c: f64) -> Result<FlatTopEstimate> {
    if !(beta < 0.0 && lambda > 0.0) {
        return domain(format!(
            "flat-top ansatz needs β < 0 and λ > 0, got β={beta}, λ={lambda}"
        ));
    }
    let a = -5.0 * beta / (6.0 * lambda);
    Ok(FlatTopEstimate {
        plateau_value: a,
        approx_energy: beta * c / 6.0 * a * a,
        support_volume: (c / a) * (c / a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub e_a: f64,
    pub e_e: f64,
    pub computed_peak: f64,
    pub computed_energy: f64,
}

/// Relative errors of the flat-top plateau and energy against a ground state.
pub fn compare_to_flat_top(
    result: &GroundStateResult,
    est: &FlatTopEstimate,
) -> Result<ComparisonReport> {
    if result.classification != Classification::GroundState {
        return Err(EgpeError::Precondition(format!(
            "flat-top comparison needs a ground state, got {}",
            result.classification.as_str()
        )));
    }
    Ok(compare_values(result.peak_value, result.energy, est))
}

/// [`compare_to_flat_top`] on bare numbers.
pub fn compare_values(peak: f64, energy: f64, est: &FlatTopEstimate) -> ComparisonReport {
    ComparisonReport {
        e_a: (peak - est.plateau_value).abs() / peak.abs(),
        e_e: (energy - est.approx_energy).abs() / energy.abs(),
        computed_peak: peak,
        computed_energy: energy,
    }
}
