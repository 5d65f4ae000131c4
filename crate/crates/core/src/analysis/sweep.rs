use rayon::prelude::*;

use super::{eta_indicator, flat_top_from};
use crate::error::{domain, Result};
use crate::flow::{default_initial_gaussian, run_to_convergence, Classification, SolverConfig};
use crate::model::{Field, Grid, ModelParams};
use crate::radial::{RadialGrid, RadialSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NoGroundState,
    SolitonLike,
    DropletLike,
    /// The cell's run failed; the message is kept on the cell.
    Error,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NoGroundState => "no_ground_state",
            Regime::SolitonLike => "soliton",
            Regime::DropletLike => "droplet",
            Regime::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Regime::NoGroundState,
            Regime::SolitonLike,
            Regime::DropletLike,
            Regime::Error,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// How the truncation radius of each cell is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusPolicy {
    Fixed(f64),
    /// The given multiple of the flat-top support radius of the cell.
    FlatTopScaled(f64),
}

impl RadiusPolicy {
    fn radius(&self, beta: f64, lambda: f64, c: f64) -> Result<f64> {
        match *self {
            RadiusPolicy::Fixed(r) => Ok(r),
            RadiusPolicy::FlatTopScaled(k) => {
                Ok(k * flat_top_from(beta, lambda, c)?.support_radius(3))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Inclusive β endpoints, sampled linearly.
    pub beta_range: (f64, f64),
    /// Inclusive λ endpoints, sampled geometrically.
    pub lambda_range: (f64, f64),
    /// Samples along β and λ.
    pub resolution: (usize, usize),
    pub theta: f64,
    pub eta_threshold: f64,
    pub mass: f64,
    pub radius: RadiusPolicy,
    pub cells: usize,
    pub solver: SolverConfig,
    /// Start each cell from the previous converged cell of its β row.
    pub warm_start: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            beta_range: (-25.0, -1.0),
            lambda_range: (0.002, 1.0),
            resolution: (8, 8),
            theta: 0.99,
            eta_threshold: 0.62,
            mass: 1.0,
            radius: RadiusPolicy::FlatTopScaled(8.0),
            cells: 512,
            solver: SolverConfig::radial_default(),
            warm_start: true,
        }
    }
}

impl SweepConfig {
    /// Distance to the threshold under which a cell is flagged.
    pub const BOUNDARY_BAND: f64 = 0.02;

    pub fn betas(&self) -> Vec<f64> {
        let (lo, hi) = self.beta_range;
        let n = self.resolution.0;
        (0..n)
            .map(|k| {
                if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let (lo, hi) = self.lambda_range;
        let n = self.resolution.1;
        (0..n)
            .map(|k| {
                if n == 1 {
                    lo
                } else {
                    lo * (hi / lo).powf(k as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (b0, b1) = self.beta_range;
        let (l0, l1) = self.lambda_range;
        if !(b0 < 0.0 && b1 < 0.0 && b0 <= b1) {
            return domain(format!(
                "β range must be negative and ordered, got [{b0}, {b1}]"
            ));
        }
        if !(l0 > 0.0 && l1 > 0.0 && l0 <= l1) {
            return domain(format!(
                "λ range must be positive and ordered, got [{l0}, {l1}]"
            ));
        }
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return domain("sweep resolution must be at least 1 per axis");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return domain(format!("θ must lie in (0, 1), got {}", self.theta));
        }
        if !(self.mass > 0.0) {
            return domain("mass must be positive");
        }
        let (RadiusPolicy::Fixed(r) | RadiusPolicy::FlatTopScaled(r)) = self.radius;
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("radius parameter must be positive, got {r}"));
        }
        if self.cells < 8 {
            return domain("radial grid needs at least 8 cells");
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramCell {
    pub beta: f64,
    pub lambda: f64,
    /// `None` exactly when no ground state was found or the run failed.
    pub eta: Option<f64>,
    pub regime: Regime,
    pub iterations: usize,
    pub converged: bool,
    /// η lies within [`SweepConfig::BOUNDARY_BAND`] of the threshold.
    pub near_threshold: bool,
    pub error: Option<String>,
}

fn failed(beta: f64, lambda: f64, msg: String) -> PhaseDiagramCell {
    PhaseDiagramCell {
        beta,
        lambda,
        eta: None,
        regime: Regime::Error,
        iterations: 0,
        converged: false,
        near_threshold: false,
        error: Some(msg),
    }
}

/// Resamples a radial field onto `grid`, matching points at equal r/R.
fn rescale(prev: &Field, grid: &RadialGrid) -> Option<Field> {
    let Grid::Radial(old) = prev.grid() else {
        return None;
    };
    let v = prev.values();
    let m = old.cells();
    let values = (0..grid.cells())
        .map(|j| {
            let s = (j as f64 + 0.5) / grid.cells() as f64 * m as f64 - 0.5;
            if s <= 0.0 {
                v[0]
            } else if s >= (m - 1) as f64 {
                v[m - 1]
            } else {
                let k = s.floor() as usize;
                let t = s - k as f64;
                (1.0 - t) * v[k] + t * v[k + 1]
            }
        })
        .collect();
    Field::new(grid.clone(), values).ok()
}

fn run_cell(
    beta: f64,
    lambda: f64,
    cfg: &SweepConfig,
    warm: Option<&Field>,
) -> Result<(PhaseDiagramCell, Field)> {
    let radius = cfg.radius.radius(beta, lambda, cfg.mass)?;
    let rgrid = RadialGrid::new(3, radius, cfg.cells)?;
    let grid = Grid::Radial(rgrid.clone());
    let m = ModelParams::free(3, beta, lambda, cfg.mass)?;
    let initial = match warm.and_then(|f| rescale(f, &rgrid)) {
        Some(f) if f.norm() > 0.0 => f,
        _ => default_initial_gaussian(&grid, cfg.mass, None)?,
    };
    let r = run_to_convergence(&initial, &m, &cfg.solver, &mut RadialSolver)?;
    let eta = match r.classification {
        Classification::SpreadingNoGroundState => None,
        _ => Some(eta_indicator(&r.field, cfg.theta)?),
    };
    let regime = match eta {
        None => Regime::NoGroundState,
        Some(e) if e >= cfg.eta_threshold => Regime::DropletLike,
        Some(_) => Regime::SolitonLike,
    };
    let cell = PhaseDiagramCell {
        beta,
        lambda,
        eta,
        regime,
        iterations: r.iterations,
        converged: r.converged,
        near_threshold: eta
            .is_some_and(|e| (e - cfg.eta_threshold).abs() < SweepConfig::BOUNDARY_BAND),
        error: None,
    };
    Ok((cell, r.field))
}

/// Classifies every (β, λ) cell of the sweep with a radial 3D free-space solve.
///
/// β rows run in parallel on the current rayon pool; the cells of a row run
/// in order of increasing λ so that warm starts are reproducible. Output is
/// sorted by (β, λ). Failures are recorded in the cell.
pub fn phase_sweep(cfg: &SweepConfig) -> Result<Vec<PhaseDiagramCell>> {
    cfg.validate()?;
    let lambdas = cfg.lambdas();
    let rows: Vec<Vec<PhaseDiagramCell>> = cfg
        .betas()
        .into_par_iter()
        .map(|beta| {
            let mut warm: Option<Field> = None;
            lambdas
                .iter()
                .map(|&lambda| {
                    let start = if cfg.warm_start { warm.as_ref() } else { None };
                    match run_cell(beta, lambda, cfg, start) {
                        Ok((cell, field)) => {
                            warm = (cell.regime != Regime::NoGroundState).then_some(field);
                            cell
                        }
                        Err(e) => {
                            warm = None;
                            failed(beta, lambda, e.to_string())
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut cells: Vec<PhaseDiagramCell> = rows.into_iter().flatten().collect();
    cells.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(a.lambda.total_cmp(&b.lambda))
    });
    Ok(cells)
}
