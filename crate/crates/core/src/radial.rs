//! Symmetric (even / radial / spherical) reduction of the d-dimensional
//! problem on the midpoint grid r_{j+½} = (j+½)Δr, j = 0..M-1, with the
//! Neumann ghost φ_{-½} = φ_{½} at the origin and φ_{M+½} = 0 at r = R.

use std::f64::consts::PI;

use crate::error::{domain, EgpeError, Result};
use crate::model::{Field, Grid, ModelParams};

/// Midpoint grid on [0, R].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dimension: usize,
    outer_radius: f64,
    cells: usize,
}

impl RadialGrid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(dimension: usize, outer_radius: f64, cells: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return domain(format!("dimension must be 1, 2 or 3, got {dimension}"));
        }
        if !(outer_radius.is_finite() && outer_radius > 0.0) {
            return domain(format!("outer radius must be positive, got {outer_radius}"));
        }
        if cells < Self::MIN_CELLS {
            return domain(format!(
                "need at least {} cells, got {cells}",
                Self::MIN_CELLS
            ));
        }
        Ok(Self {
            dimension,
            outer_radius,
            cells,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.outer_radius / self.cells as f64
    }

    /// r_{j+½}
    pub fn midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    /// r_j
    pub fn edge(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Surface measure ω(d) of the unit sphere.
    pub fn sphere_measure(&self) -> f64 {
        match self.dimension {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    fn metric(&self, r: f64) -> f64 {
        r.powi(self.dimension as i32 - 1)
    }

    /// r_j^{d-1}, j = 0..=M.
    fn edge_metric(&self) -> Vec<f64> {
        (0..=self.cells)
            .map(|j| self.metric(self.edge(j)))
            .collect()
    }

    /// r_{j+½}^{d-1}, j = 0..M-1.
    fn midpoint_metric(&self) -> Vec<f64> {
        (0..self.cells)
            .map(|j| self.metric(self.midpoint(j)))
            .collect()
    }

    /// ω(d) Δr r_{j+½}^{d-1}
    pub fn weights(&self) -> Vec<f64> {
        let s = self.sphere_measure() * self.spacing();
        self.midpoint_metric().into_iter().map(|m| s * m).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        let s = self.sphere_measure() * self.spacing();
        s * f
            .iter()
            .enumerate()
            .map(|(j, v)| v * self.metric(self.midpoint(j)))
            .sum::<f64>()
    }

    /// Discrete L² norm (ω(d) Δr Σ |φ_{j+½}|² r_{j+½}^{d-1})^{1/2}.
    pub fn norm(&self, values: &[f64]) -> f64 {
        let s = self.sphere_measure() * self.spacing();
        let sum: f64 = values
            .iter()
            .enumerate()
            .map(|(j, v)| v * v * self.metric(self.midpoint(j)))
            .sum();
        (s * sum).sqrt()
    }

    /// δ²_{r,d} at every midpoint.
    pub fn laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let m = self.cells;
        let dr2 = self.spacing() * self.spacing();
        let e = self.edge_metric();
        let w = self.midpoint_metric();
        (0..m)
            .map(|j| {
                let left = if j == 0 { phi[0] } else { phi[j - 1] };
                let right = if j + 1 < m { phi[j + 1] } else { 0.0 };
                (e[j + 1] * (right - phi[j]) - e[j] * (phi[j] - left)) / (dr2 * w[j])
            })
            .collect()
    }

    /// ½∫|φ_r|², differences taken across each edge r_{j+1}.
    pub fn kinetic(&self, phi: &[f64]) -> f64 {
        let m = self.cells;
        let dr = self.spacing();
        let e = self.edge_metric();
        let mut sum = 0.0;
        for j in 0..m {
            let right = if j + 1 < m { phi[j + 1] } else { 0.0 };
            let g = right - phi[j];
            sum += e[j + 1] * g * g;
        }
        0.5 * self.sphere_measure() * sum / dr
    }
}

/// Tridiagonal system A x = rhs, row j holding
/// `sub[j] x[j-1] + main[j] x[j] + sup[j] x[j+1]`.
///
/// `sub[0]` and `sup[M-1]` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub main: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.main.len()
    }

    pub fn is_empty(&self) -> bool {
        self.main.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut v = self.main[j] * x[j];
                if j > 0 {
                    v += self.sub[j] * x[j - 1];
                }
                if j + 1 < n {
                    v += self.sup[j] * x[j + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas algorithm. Fails on a vanishing or non-finite pivot.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if self.sub.len() != n || self.sup.len() != n || self.rhs.len() != n {
            return domain("tridiagonal arrays have inconsistent lengths");
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.main[0];
        for j in 0..n {
            if j > 0 {
                pivot = self.main[j] - self.sub[j] * c[j - 1];
            }
            if !pivot.is_finite() || pivot.abs() <= f64::MIN_POSITIVE {
                return Err(EgpeError::Numerical(format!("zero pivot in row {j}")));
            }
            c[j] = self.sup[j] / pivot;
            d[j] = if j == 0 {
                self.rhs[0] / pivot
            } else {
                (self.rhs[j] - self.sub[j] * d[j - 1]) / pivot
            };
        }
        let mut x = d;
        for j in (0..n - 1).rev() {
            x[j] -= c[j] * x[j + 1];
        }
        Ok(x)
    }
}

/// x⁺ = max(x, 0), x⁻ = min(x, 0)
pub(crate) fn split(x: f64) -> (f64, f64) {
    (x.max(0.0), x.min(0.0))
}

/// Assembles the implicit step
///
/// ```text
/// (1/τ − ½δ² + V + λ|φⁿ|³ + β⁺|φⁿ|² − (μⁿ)⁻) φ̃ = (1/τ + (μⁿ)⁺ − β⁻|φⁿ|²) φⁿ
/// ```
pub(crate) fn assemble_with(
    grid: &RadialGrid,
    phi: &[f64],
    potential: &[f64],
    beta: f64,
    lambda: f64,
    tau: f64,
    mu: f64,
) -> Result<TridiagonalSystem> {
    if !(tau.is_finite() && tau > 0.0) {
        return domain(format!("time step must be positive, got {tau}"));
    }
    let m = grid.cells();
    let dr2 = grid.spacing() * grid.spacing();
    let e = grid.edge_metric();
    let w = grid.midpoint_metric();
    let (beta_p, beta_m) = split(beta);
    let (mu_p, mu_m) = split(mu);
    let inv_tau = 1.0 / tau;
    let mut sys = TridiagonalSystem {
        sub: vec![0.0; m],
        main: vec![0.0; m],
        sup: vec![0.0; m],
        rhs: vec![0.0; m],
    };
    for j in 0..m {
        let s = 0.5 / (dr2 * w[j]);
        let left = if j == 0 { 0.0 } else { s * e[j] };
        let right = s * e[j + 1];
        if j > 0 {
            sys.sub[j] = -left;
        }
        if j + 1 < m {
            sys.sup[j] = -right;
        }
        let a = phi[j].abs();
        let a2 = a * a;
        sys.main[j] = inv_tau + left + right + potential[j] + lambda * a2 * a + beta_p * a2 - mu_m;
        sys.rhs[j] = (inv_tau + mu_p - beta_m * a2) * phi[j];
    }
    Ok(sys)
}

fn radial_grid(f: &Field) -> Result<&RadialGrid> {
    match f.grid() {
        Grid::Radial(g) => Ok(g),
        Grid::Tensor(_) => domain("expected a field on a radial grid"),
    }
}

/// δ²_{r,d} applied to a field.
pub fn radial_laplacian_apply(f: &Field) -> Result<Field> {
    let g = radial_grid(f)?;
    let values = g.laplacian(f.values());
    Ok(Field::from_parts_unchecked(f.grid().clone(), values))
}

pub fn radial_norm(f: &Field) -> Result<f64> {
    Ok(radial_grid(f)?.norm(f.values()))
}

/// Implicit step matrix and right-hand side for the current iterate.
pub fn assemble_implicit_system(
    f: &Field,
    m: &ModelParams,
    tau: f64,
    mu: f64,
) -> Result<TridiagonalSystem> {
    let g = radial_grid(f)?;
    let v = f.grid().sample_potential(&m.potential)?;
    assemble_with(g, f.values(), &v, m.beta, m.lambda, tau, mu)
}

pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    sys.solve()
}

/// Direct tridiagonal implicit step for radial grids.
#[derive(Debug, Clone, Default)]
pub struct RadialSolver;

impl crate::flow::ImplicitSolver for RadialSolver {
    fn solve(
        &mut self,
        phi: &Field,
        model: &ModelParams,
        potential: &[f64],
        tau: f64,
        mu: f64,
    ) -> Result<Vec<f64>> {
        let g = radial_grid(phi)?;
        let sys = assemble_with(
            g,
            phi.values(),
            potential,
            model.beta,
            model.lambda,
            tau,
            mu,
        )?;
        sys.solve()
    }
}
