//! Normalized gradient flow with a discrete Lagrange multiplier.
//!
//! Each iteration computes μⁿ from φⁿ, solves the sign-split linear
//! implicit step for φ̃ⁿ⁺¹ and rescales it back to the mass sphere
//! ‖φⁿ⁺¹‖₂ = c. The driver is agnostic of the spatial discretization; the
//! linear solve is delegated to an [`ImplicitSolver`].

use log::warn;

use crate::error::{domain, EgpeError, Result};
use crate::model::{
    energy_terms_with, euler_lagrange_residual, EnergyTerms, Field, Grid, ModelParams,
};
use crate::radial::RadialSolver;
use crate::tensor::TensorSolver;

/// Quantity compared against the stopping tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMetric {
    /// max_j |φⁿ⁺¹_j − φⁿ_j|
    MaxDiff,
    /// ‖φⁿ⁺¹ − φⁿ‖₂ in the grid norm
    L2Diff,
}

/// Peak-decay heuristic for runs that delocalize instead of converging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadDetection {
    /// Consecutive iterations over which the peak must strictly decrease.
    pub window: usize,
    /// Fraction of the initial peak the current peak must fall below.
    pub peak_decay_threshold: f64,
}

impl Default for SpreadDetection {
    fn default() -> Self {
        Self {
            window: 200,
            peak_decay_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_step: f64,
    pub stop_tolerance: f64,
    pub stop_metric: StopMetric,
    pub max_iterations: usize,
    pub spread_detection: SpreadDetection,
    /// Relative residual target of iterative linear solves.
    pub linear_tolerance: f64,
    pub linear_max_iterations: usize,
}

impl SolverConfig {
    /// Largest Euler–Lagrange residual accepted for a converged run.
    pub const RESIDUAL_LIMIT: f64 = 1e-4;

    /// τ = 10⁻², max-norm difference below 10⁻¹⁰.
    pub fn radial_default() -> Self {
        Self {
            time_step: 1e-2,
            stop_tolerance: 1e-10,
            stop_metric: StopMetric::MaxDiff,
            max_iterations: 100_000,
            spread_detection: SpreadDetection::default(),
            linear_tolerance: TensorSolver::DEFAULT_TOLERANCE,
            linear_max_iterations: 20_000,
        }
    }

    /// τ = 10⁻², L² difference below 10⁻⁶.
    pub fn tensor_default() -> Self {
        Self {
            stop_tolerance: 1e-6,
            stop_metric: StopMetric::L2Diff,
            ..Self::radial_default()
        }
    }

    pub fn default_for(grid: &Grid) -> Self {
        match grid {
            Grid::Radial(_) => Self::radial_default(),
            Grid::Tensor(_) => Self::tensor_default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return domain(format!(
                "time step must be positive, got {}",
                self.time_step
            ));
        }
        if !(self.stop_tolerance.is_finite() && self.stop_tolerance > 0.0) {
            return domain(format!(
                "stop tolerance must be positive, got {}",
                self.stop_tolerance
            ));
        }
        if self.spread_detection.window < 10 {
            return domain("spread detection window must be at least 10");
        }
        if !(self.linear_tolerance > 0.0) {
            return domain("linear tolerance must be positive");
        }
        Ok(())
    }
}

/// Implicit solve of
/// `(1/τ − ½Δ + V + λ|φⁿ|³ + β⁺|φⁿ|² − (μⁿ)⁻) φ̃ = (1/τ + (μⁿ)⁺ − β⁻|φⁿ|²) φⁿ`.
pub trait ImplicitSolver {
    fn solve(
        &mut self,
        phi: &Field,
        model: &ModelParams,
        potential: &[f64],
        tau: f64,
        mu: f64,
    ) -> Result<Vec<f64>>;
}

/// The direct tridiagonal solver on radial grids, CG on tensor grids.
pub fn solver_for(grid: &Grid, config: &SolverConfig) -> Box<dyn ImplicitSolver + Send> {
    match grid {
        Grid::Radial(_) => Box::new(RadialSolver),
        Grid::Tensor(_) => Box::new(TensorSolver::new(
            config.linear_tolerance,
            config.linear_max_iterations,
        )),
    }
}

/// One normalized iterate together with its multiplier and energy.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub field: Field,
    /// μ evaluated at `field`.
    pub mu: f64,
    /// E evaluated at `field`.
    pub energy: f64,
    /// Difference to the previous iterate; infinite for the initial state.
    pub diff_metric: f64,
    pub iteration: usize,
}

impl IterationState {
    /// Normalizes `initial` to the model mass and evaluates μ and E.
    pub fn initial(initial: &Field, m: &ModelParams) -> Result<Self> {
        let v = initial.grid().sample_potential(&m.potential)?;
        Self::initial_with(initial, m, &v)
    }

    fn initial_with(initial: &Field, m: &ModelParams, v: &[f64]) -> Result<Self> {
        if initial.grid().dimension() != m.dimension() {
            return domain("initial field and model dimensions differ");
        }
        let field = initial.normalized(m.mass())?;
        let terms = energy_terms_with(&field, v);
        Ok(Self {
            mu: terms.chemical_potential(m.beta, m.lambda, m.mass()),
            energy: terms.energy(m.beta, m.lambda),
            field,
            diff_metric: f64::INFINITY,
            iteration: 0,
        })
    }
}

fn diff_metric(metric: StopMetric, grid: &Grid, new: &[f64], old: &[f64]) -> f64 {
    match metric {
        StopMetric::MaxDiff => new
            .iter()
            .zip(old)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        StopMetric::L2Diff => {
            let d: Vec<f64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
            grid.norm(&d)
        }
    }
}

fn step_with(
    state: &IterationState,
    m: &ModelParams,
    v: &[f64],
    config: &SolverConfig,
    solver: &mut dyn ImplicitSolver,
) -> Result<IterationState> {
    let c = m.mass();
    let grid = state.field.grid();
    let tilde = solver.solve(&state.field, m, v, config.time_step, state.mu)?;
    let norm = grid.norm(&tilde);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(EgpeError::Numerical(format!(
            "intermediate state has norm {norm} at iteration {}",
            state.iteration + 1
        )));
    }
    let s = c / norm;
    let values: Vec<f64> = tilde.into_iter().map(|x| s * x).collect();
    let diff = diff_metric(config.stop_metric, grid, &values, state.field.values());
    let field = Field::from_parts_unchecked(grid.clone(), values);
    let terms = energy_terms_with(&field, v);
    Ok(IterationState {
        mu: terms.chemical_potential(m.beta, m.lambda, c),
        energy: terms.energy(m.beta, m.lambda),
        field,
        diff_metric: diff,
        iteration: state.iteration + 1,
    })
}

/// Advances the flow by one normalized implicit step.
pub fn gradient_flow_step(
    state: &IterationState,
    m: &ModelParams,
    config: &SolverConfig,
    solver: &mut dyn ImplicitSolver,
) -> Result<IterationState> {
    config.validate()?;
    let v = state.field.grid().sample_potential(&m.potential)?;
    step_with(state, m, &v, config, solver)
}

/// Outcome of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    GroundState,
    /// The flow delocalizes: either the peak-decay detector fired or, in
    /// free space, the converged state has E ≥ 0 (the constrained infimum
    /// is zero and not attained).
    SpreadingNoGroundState,
    MaxIterations,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::GroundState => "ground_state",
            Classification::SpreadingNoGroundState => "spreading_no_ground_state",
            Classification::MaxIterations => "max_iterations",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ground_state" => Some(Classification::GroundState),
            "spreading_no_ground_state" => Some(Classification::SpreadingNoGroundState),
            "max_iterations" => Some(Classification::MaxIterations),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub field: Field,
    pub energy: f64,
    pub chemical_potential: f64,
    pub peak_value: f64,
    pub peak_location: Vec<f64>,
    pub iterations: usize,
    /// The stopping criterion was met with an Euler–Lagrange residual
    /// below [`SolverConfig::RESIDUAL_LIMIT`].
    pub converged: bool,
    pub classification: Classification,
    /// Relative Euler–Lagrange residual of the final field.
    pub residual: f64,
    /// Largest |φ| on the nodes next to the truncation boundary, over the peak.
    pub boundary_ratio: f64,
    /// E(φⁿ) for n = 0..=iterations.
    pub energy_trace: Vec<f64>,
}

impl GroundStateResult {
    pub fn energy_terms(&self, m: &ModelParams) -> Result<EnergyTerms> {
        EnergyTerms::of(&self.field, m)
    }
}

fn boundary_ratio(field: &Field) -> f64 {
    let peak = field.peak().1.abs();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = match field.grid() {
        Grid::Radial(g) => field.values()[g.cells() - 1].abs(),
        Grid::Tensor(g) => {
            let mut worst = 0.0f64;
            for (i, v) in field.values().iter().enumerate() {
                let idx = g.multi_index(i);
                if idx
                    .iter()
                    .zip(g.nodes())
                    .any(|(&k, &n)| k == 0 || k + 1 == n)
                {
                    worst = worst.max(v.abs());
                }
            }
            worst
        }
    };
    edge / peak
}

/// Runs the flow until the stop metric drops below tolerance, the spread
/// detector fires, or `max_iterations` is reached.
pub fn run_to_convergence(
    initial: &Field,
    m: &ModelParams,
    config: &SolverConfig,
    solver: &mut dyn ImplicitSolver,
) -> Result<GroundStateResult> {
    run_with_observer(initial, m, config, solver, |_| {})
}

/// [`run_to_convergence`] calling `observer` on every normalized iterate,
/// the initial one included.
pub fn run_with_observer(
    initial: &Field,
    m: &ModelParams,
    config: &SolverConfig,
    solver: &mut dyn ImplicitSolver,
    mut observer: impl FnMut(&IterationState),
) -> Result<GroundStateResult> {
    config.validate()?;
    let v = initial.grid().sample_potential(&m.potential)?;
    let mut state = IterationState::initial_with(initial, m, &v)?;
    observer(&state);
    let initial_peak = state.field.peak().1.abs();
    let mut energy_trace = vec![state.energy];
    let mut last_peak = initial_peak;
    let mut decreasing = 0usize;
    let detector = config.spread_detection;

    let outcome = loop {
        if state.iteration >= config.max_iterations {
            break (false, Classification::MaxIterations);
        }
        state = step_with(&state, m, &v, config, solver)?;
        observer(&state);
        energy_trace.push(state.energy);

        let peak = state.field.peak().1.abs();
        decreasing = if peak < last_peak { decreasing + 1 } else { 0 };
        last_peak = peak;
        if decreasing >= detector.window && peak < detector.peak_decay_threshold * initial_peak {
            break (false, Classification::SpreadingNoGroundState);
        }

        if state.diff_metric < config.stop_tolerance {
            let residual = euler_lagrange_residual(&state.field, m, &v, state.mu);
            if residual < SolverConfig::RESIDUAL_LIMIT {
                let class = if m.potential.is_zero() && state.energy >= 0.0 {
                    Classification::SpreadingNoGroundState
                } else {
                    Classification::GroundState
                };
                break (true, class);
            }
        }
    };

    let (converged, classification) = outcome;
    let residual = euler_lagrange_residual(&state.field, m, &v, state.mu);
    let ratio = boundary_ratio(&state.field);
    if classification == Classification::GroundState && ratio > 1e-6 {
        warn!(
            "solution at the truncation boundary is {ratio:.2e} of the peak; the domain may be too small"
        );
    }
    let (peak_index, peak_value) = state.field.peak();
    Ok(GroundStateResult {
        peak_location: state.field.grid().coordinates(peak_index),
        peak_value,
        energy: state.energy,
        chemical_potential: state.mu,
        iterations: state.iteration,
        converged,
        classification,
        residual,
        boundary_ratio: ratio,
        energy_trace,
        field: state.field,
    })
}

/// Normalized Gaussian exp(−|x − x₀|²/(2w²)); `width` defaults to a quarter
/// of the domain half-width.
pub fn default_initial_gaussian(grid: &Grid, c: f64, width: Option<f64>) -> Result<Field> {
    let (half_width, center) = match grid {
        Grid::Radial(g) => (g.outer_radius(), vec![0.0]),
        Grid::Tensor(g) => {
            let hw = (0..g.dimension())
                .map(|a| 0.5 * (g.upper()[a] - g.lower()[a]))
                .fold(f64::INFINITY, f64::min);
            (hw, g.center())
        }
    };
    let w = width.unwrap_or(0.25 * half_width);
    if !(w.is_finite() && w > 0.0) {
        return domain(format!("Gaussian width must be positive, got {w}"));
    }
    if !(c.is_finite() && c > 0.0) {
        return domain(format!("mass must be positive, got {c}"));
    }
    let is_radial = matches!(grid, Grid::Radial(_));
    let values = (0..grid.node_count())
        .map(|i| {
            let x = grid.coordinates(i);
            let r2: f64 = if is_radial {
                x[0] * x[0]
            } else {
                x.iter().zip(&center).map(|(x, c)| (x - c) * (x - c)).sum()
            };
            (-r2 / (2.0 * w * w)).exp()
        })
        .collect();
    Field::new(grid.clone(), values)?.normalized(c)
}

/// Convenience wrapper: Gaussian start, default solver for the grid.
pub fn solve(grid: &Grid, m: &ModelParams, config: &SolverConfig) -> Result<GroundStateResult> {
    let initial = default_initial_gaussian(grid, m.mass(), None)?;
    let mut solver = solver_for(grid, config);
    run_to_convergence(&initial, m, config, solver.as_mut())
}
