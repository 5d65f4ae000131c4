//! Problem definition: parameters, potentials, discrete fields and the
//! energy / chemical-potential functionals shared by every discretization.

mod field;
mod functional;
mod params;
mod potential;
mod reduce;

pub use field::{Field, Grid};
pub use functional::{chemical_potential, energy, EnergyTerms};
pub use params::{nondimensionalize, InteractionCoefficients, ModelParams, PhysicalParams, HBAR};
pub use potential::{evaluate_potential, Potential};
pub use reduce::{reduce_dimension, ReducedModel, ReductionCase};

pub(crate) use functional::{energy_terms_with, euler_lagrange_residual};
