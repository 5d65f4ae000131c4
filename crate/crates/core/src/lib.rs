//! Ground states of the extended Gross–Pitaevskii equation with the
//! Lee–Huang–Yang correction,
//!
//! ```text
//! E(φ) = ∫ ½|∇φ|² + V|φ|² + (β/2)|φ|⁴ + (2λ/5)|φ|⁵ dx,   ‖φ‖₂ = c,
//! ```
//!
//! computed by a normalized gradient flow with an explicit Lagrange
//! multiplier and a sign-split implicit–explicit step.
//!
//! The crate is organised as:
//!
//! - [`model`]: problem data, potentials, fields, discrete energy and
//!   chemical potential, unit conversion and dimensional reduction.
//! - [`radial`]: symmetric reduction on a midpoint grid with tridiagonal
//!   implicit solves.
//! - [`tensor`]: uniform tensor grids in 1–3 dimensions with a
//!   Jacobi-preconditioned conjugate-gradient implicit solve.
//! - [`flow`]: the discretization-agnostic gradient-flow driver.
//! - [`analysis`]: η_θ indicator, flat-top estimates and phase sweeps.

pub mod analysis;
pub mod error;
pub mod flow;
pub mod model;
pub mod radial;
pub mod tensor;

#[cfg(test)]
mod proptests;

pub use analysis::{
    compare_to_flat_top, eta_indicator, flat_top_estimate, phase_sweep, ComparisonReport,
    FlatTopEstimate, PhaseDiagramCell, RadiusPolicy, Regime, SweepConfig,
};
pub use error::{EgpeError, Result};
pub use flow::{
    default_initial_gaussian, gradient_flow_step, run_to_convergence, run_with_observer, solve,
    solver_for, Classification, GroundStateResult, ImplicitSolver, IterationState, SolverConfig,
    SpreadDetection, StopMetric,
};
pub use model::{
    chemical_potential, energy, evaluate_potential, nondimensionalize, reduce_dimension, Field,
    Grid, ModelParams, PhysicalParams, Potential, ReducedModel, ReductionCase,
};
pub use radial::{RadialGrid, TridiagonalSystem};
pub use tensor::{SparseOperator, TensorGrid};
