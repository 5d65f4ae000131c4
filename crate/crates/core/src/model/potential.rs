use crate::error::{domain, Result};

/// External potential V(x).
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// V = ½ Σ γᵢ² xᵢ², one γ per axis.
    Harmonic(Vec<f64>),
    /// V = V₀ Σ cos(k xᵢ).
    OpticalLattice {
        amplitude: f64,
        wavenumber: f64,
    },
    /// V = coefficient · |x|^exponent.
    RadialPower {
        coefficient: f64,
        exponent: f64,
    },
    /// Values sampled at the nodes of one specific grid.
    Tabulated(Vec<f64>),
}

impl Potential {
    pub fn harmonic_isotropic(dimension: usize, gamma: f64) -> Self {
        Potential::Harmonic(vec![gamma; dimension])
    }

    pub(crate) fn check_dimension(&self, dimension: usize) -> Result<()> {
        match self {
            Potential::Harmonic(g) if g.len() != dimension => domain(format!(
                "harmonic potential has {} frequencies for a {dimension}-dimensional model",
                g.len()
            )),
            Potential::Harmonic(g) if g.iter().any(|v| !v.is_finite()) => {
                domain("harmonic frequencies must be finite")
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Harmonic(g) => g.iter().all(|&v| v == 0.0),
            Potential::OpticalLattice { amplitude, .. } => *amplitude == 0.0,
            Potential::RadialPower { coefficient, .. } => *coefficient == 0.0,
            Potential::Tabulated(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    /// True when V ≥ 0 everywhere, one of the hypotheses of the
    /// nonnegativity guarantee.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Potential::Zero | Potential::Harmonic(_) => true,
            Potential::OpticalLattice { amplitude, .. } => *amplitude == 0.0,
            Potential::RadialPower { coefficient, .. } => *coefficient >= 0.0,
            Potential::Tabulated(v) => v.iter().all(|&x| x >= 0.0),
        }
    }

    /// V as a function of radius, for radially symmetric potentials.
    pub(crate) fn radial_profile(&self, r: f64) -> Result<f64> {
        match self {
            Potential::Zero => Ok(0.0),
            Potential::Harmonic(g) => {
                let g0 = g.first().copied().unwrap_or(0.0);
                if g.iter().any(|&v| v != g0) {
                    return domain("anisotropic harmonic potential has no radial reduction");
                }
                Ok(0.5 * g0 * g0 * r * r)
            }
            Potential::RadialPower {
                coefficient,
                exponent,
            } => Ok(coefficient * r.powf(*exponent)),
            Potential::OpticalLattice { .. } => {
                domain("optical lattice potential has no radial reduction")
            }
            Potential::Tabulated(_) => domain("tabulated potential cannot be evaluated at a point"),
        }
    }
}

/// V evaluated at a point of ℝ^d.
pub fn evaluate_potential(v: &Potential, point: &[f64]) -> Result<f64> {
    match v {
        Potential::Zero => Ok(0.0),
        Potential::Harmonic(g) => {
            if g.len() != point.len() {
                return domain(format!(
                    "point has dimension {} but potential has {}",
                    point.len(),
                    g.len()
                ));
            }
            Ok(0.5 * g.iter().zip(point).map(|(g, x)| g * g * x * x).sum::<f64>())
        }
        Potential::OpticalLattice {
            amplitude,
            wavenumber,
        } => Ok(amplitude * point.iter().map(|x| (wavenumber * x).cos()).sum::<f64>()),
        Potential::RadialPower {
            coefficient,
            exponent,
        } => {
            let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(coefficient * r.powf(*exponent))
        }
        Potential::Tabulated(_) => domain("tabulated potential cannot be evaluated at a point"),
    }
}
