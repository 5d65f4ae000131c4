//! Uniform tensor grids in one to three dimensions with homogeneous
//! Dirichlet walls, the (2d+1)-point Laplacian, and a Jacobi-preconditioned
//! conjugate-gradient solve for the implicit step.
//!
//! Reductions use fixed-size chunks whose partial sums are combined in
//! index order, so results do not depend on the rayon thread count.

use rayon::prelude::*;

use crate::error::{domain, EgpeError, Result};
use crate::model::{Field, Grid, ModelParams};
use crate::radial::split;

const CHUNK: usize = 4096;
const PARALLEL_MIN: usize = 1 << 15;

fn chunked_sum(n: usize, f: impl Fn(std::ops::Range<usize>) -> f64 + Sync) -> f64 {
    let ranges: Vec<_> = (0..n)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(n))
        .collect();
    let partials: Vec<f64> = if n >= PARALLEL_MIN {
        ranges.into_par_iter().map(&f).collect()
    } else {
        ranges.into_iter().map(&f).collect()
    };
    partials.into_iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    chunked_sum(a.len(), |r| r.map(|i| a[i] * b[i]).sum())
}

/// Interior nodes of the box Π[aᵢ, bᵢ]; node k on axis i sits at aᵢ + (k+1)hᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
}

impl TensorGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let d = nodes.len();
        if !(1..=3).contains(&d) || lower.len() != d || upper.len() != d {
            return domain("tensor grid needs 1 to 3 axes with matching extents");
        }
        for i in 0..d {
            if !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return domain(format!("axis {i}: need upper > lower"));
            }
            if nodes[i] < Self::MIN_NODES {
                return domain(format!("axis {i}: need at least {} nodes", Self::MIN_NODES));
            }
        }
        Ok(Self {
            lower,
            upper,
            nodes,
        })
    }

    /// [−L, L]^d with `n` interior nodes per axis.
    pub fn cube(dimension: usize, half_width: f64, n: usize) -> Result<Self> {
        Self::new(
            vec![-half_width; dimension],
            vec![half_width; dimension],
            vec![n; dimension],
        )
    }

    pub fn dimension(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.nodes[axis] + 1) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dimension()).map(|i| self.spacing(i)).product()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dimension();
        let mut s = vec![1; d];
        for i in (0..d - 1).rev() {
            s[i] = s[i + 1] * self.nodes[i + 1];
        }
        s
    }

    pub fn axis_coordinate(&self, axis: usize, k: usize) -> f64 {
        self.lower[axis] + (k + 1) as f64 * self.spacing(axis)
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dimension()];
        for a in (0..self.dimension()).rev() {
            idx[a] = i % self.nodes[a];
            i /= self.nodes[a];
        }
        idx
    }

    pub(crate) fn fill_coordinates(&self, i: usize, x: &mut [f64]) {
        let idx = self.multi_index(i);
        for (a, k) in idx.into_iter().enumerate() {
            x[a] = self.axis_coordinate(a, k);
        }
    }

    pub fn coordinates(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dimension()];
        self.fill_coordinates(i, &mut x);
        x
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn distance_from_center(&self, i: usize) -> f64 {
        let c = self.center();
        self.coordinates(i)
            .iter()
            .zip(&c)
            .map(|(x, c)| (x - c) * (x - c))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self, values: &[f64]) -> f64 {
        (self.cell_volume() * dot(values, values)).sqrt()
    }

    // Neighbour values along `axis` with zero beyond the wall.
    #[inline]
    fn neighbours(
        &self,
        phi: &[f64],
        i: usize,
        k: usize,
        axis: usize,
        stride: usize,
    ) -> (f64, f64) {
        let lo = if k > 0 { phi[i - stride] } else { 0.0 };
        let hi = if k + 1 < self.nodes[axis] {
            phi[i + stride]
        } else {
            0.0
        };
        (lo, hi)
    }

    /// Applies Σᵢ coeff[i]·(x[+eᵢ] + x[−eᵢ]) + diag·x slab by slab.
    fn stencil_apply(
        &self,
        x: &[f64],
        diag: impl Fn(usize) -> f64 + Sync,
        off: &[f64],
    ) -> Vec<f64> {
        let n = self.node_count();
        let strides = self.strides();
        let d = self.dimension();
        let mut out = vec![0.0; n];
        let slab = strides[0];
        let body = |(s, chunk): (usize, &mut [f64])| {
            let base = s * slab;
            for (o, y) in chunk.iter_mut().enumerate() {
                let i = base + o;
                let mut rem = i;
                let mut acc = diag(i) * x[i];
                for a in (0..d).rev() {
                    let k = rem % self.nodes[a];
                    rem /= self.nodes[a];
                    let (lo, hi) = self.neighbours(x, i, k, a, strides[a]);
                    acc += off[a] * (lo + hi);
                }
                *y = acc;
            }
        };
        if n >= PARALLEL_MIN {
            out.par_chunks_mut(slab).enumerate().for_each(body);
        } else {
            out.chunks_mut(slab).enumerate().for_each(body);
        }
        out
    }

    /// Second-order central-difference Laplacian with zero Dirichlet data.
    pub fn laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let d = self.dimension();
        let inv_h2: Vec<f64> = (0..d)
            .map(|a| 1.0 / (self.spacing(a) * self.spacing(a)))
            .collect();
        let centre: f64 = -2.0 * inv_h2.iter().sum::<f64>();
        self.stencil_apply(phi, |_| centre, &inv_h2)
    }

    /// ½∫|∇φ|² summed over every edge, wall edges included.
    pub fn kinetic(&self, phi: &[f64]) -> f64 {
        let d = self.dimension();
        let strides = self.strides();
        let mut total = 0.0;
        for a in 0..d {
            let h = self.spacing(a);
            let n_a = self.nodes[a];
            let s = strides[a];
            let edges = chunked_sum(phi.len(), |r| {
                let mut acc = 0.0;
                for i in r {
                    let k = (i / s) % n_a;
                    // Edge between node i and its +axis neighbour (or the wall).
                    let hi = if k + 1 < n_a { phi[i + s] } else { 0.0 };
                    let g = hi - phi[i];
                    acc += g * g;
                    if k == 0 {
                        acc += phi[i] * phi[i];
                    }
                }
                acc
            });
            total += edges / (h * h);
        }
        0.5 * self.cell_volume() * total
    }
}

/// (2d+1)-point operator: a diagonal per node plus one off-diagonal
/// coefficient per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub grid: TensorGrid,
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl SparseOperator {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.grid
            .stencil_apply(x, |i| self.diagonal[i], &self.off_diagonal)
    }

    /// Positive diagonal, nonpositive off-diagonals, weak row dominance.
    pub fn is_m_matrix(&self) -> bool {
        let off_sum: f64 = self.off_diagonal.iter().map(|o| 2.0 * o.abs()).sum();
        self.off_diagonal.iter().all(|&o| o <= 0.0)
            && self.diagonal.iter().all(|&d| d > 0.0 && d >= off_sum)
    }

    /// Symmetric Gauss–Seidel sweep, natural ordering then reversed.
    fn gauss_seidel(&self, b: &[f64], x: &mut [f64]) {
        let g = &self.grid;
        let strides = g.strides();
        let d = g.dimension();
        let n = x.len();
        let relax = |i: usize, x: &mut [f64]| {
            let mut rem = i;
            let mut acc = 0.0;
            for a in (0..d).rev() {
                let k = rem % g.nodes[a];
                rem /= g.nodes[a];
                let (lo, hi) = g.neighbours(x, i, k, a, strides[a]);
                acc += self.off_diagonal[a] * (lo + hi);
            }
            x[i] = (b[i] - acc) / self.diagonal[i];
        };
        for i in 0..n {
            relax(i, x);
        }
        for i in (0..n).rev() {
            relax(i, x);
        }
    }
}

/// Outcome of one implicit solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Operator and right-hand side of the sign-split implicit step on a tensor grid.
pub(crate) fn assemble_with(
    grid: &TensorGrid,
    phi: &[f64],
    potential: &[f64],
    beta: f64,
    lambda: f64,
    tau: f64,
    mu: f64,
) -> Result<(SparseOperator, Vec<f64>)> {
    if !(tau.is_finite() && tau > 0.0) {
        return domain(format!("time step must be positive, got {tau}"));
    }
    let d = grid.dimension();
    let off: Vec<f64> = (0..d)
        .map(|a| -0.5 / (grid.spacing(a) * grid.spacing(a)))
        .collect();
    let stencil_centre: f64 = off.iter().map(|o| -2.0 * o).sum();
    let (beta_p, beta_m) = split(beta);
    let (mu_p, mu_m) = split(mu);
    let inv_tau = 1.0 / tau;
    let mut diagonal = Vec::with_capacity(phi.len());
    let mut rhs = Vec::with_capacity(phi.len());
    for (p, v) in phi.iter().zip(potential) {
        let a = p.abs();
        let a2 = a * a;
        diagonal.push(inv_tau + stencil_centre + v + lambda * a2 * a + beta_p * a2 - mu_m);
        rhs.push((inv_tau + mu_p - beta_m * a2) * p);
    }
    Ok((
        SparseOperator {
            grid: grid.clone(),
            diagonal,
            off_diagonal: off,
        },
        rhs,
    ))
}

fn tensor_grid(f: &Field) -> Result<&TensorGrid> {
    match f.grid() {
        Grid::Tensor(g) => Ok(g),
        Grid::Radial(_) => domain("expected a field on a tensor grid"),
    }
}

pub fn grid_laplacian_apply(f: &Field) -> Result<Field> {
    let g = tensor_grid(f)?;
    Ok(Field::from_parts_unchecked(
        f.grid().clone(),
        g.laplacian(f.values()),
    ))
}

pub fn assemble_step_operator(
    f: &Field,
    m: &ModelParams,
    tau: f64,
    mu: f64,
) -> Result<(SparseOperator, Vec<f64>)> {
    let g = tensor_grid(f)?;
    let v = f.grid().sample_potential(&m.potential)?;
    assemble_with(g, f.values(), &v, m.beta, m.lambda, tau, mu)
}

/// Jacobi-preconditioned CG to `‖b − Ax‖/‖b‖ < tolerance`.
///
/// When the operator is an M-matrix and `rhs ≥ 0` the exact solution is
/// nonnegative; any negative round-off in the CG iterate is projected out
/// and smoothed with a symmetric Gauss–Seidel sweep, which keeps the
/// iterate in the nonnegative cone.
pub fn solve_step(
    op: &SparseOperator,
    rhs: &[f64],
    initial: Option<&[f64]>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<StepSolution> {
    let n = rhs.len();
    if op.diagonal.len() != n {
        return domain("operator and right-hand side sizes differ");
    }
    if op.diagonal.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(EgpeError::Numerical(
            "operator diagonal is not positive".into(),
        ));
    }
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(StepSolution {
            values: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    // A supplied guess is rescaled to minimize the energy norm of the error
    // along its own direction; φⁿ and φ̃ differ mostly by a scale factor.
    let (x, ax) = match initial {
        Some(x0) if x0.len() == n => {
            let ax0 = op.apply(x0);
            let curvature = dot(x0, &ax0);
            let s = if curvature > 0.0 {
                dot(x0, rhs) / curvature
            } else {
                0.0
            };
            (
                x0.iter().map(|v| s * v).collect::<Vec<f64>>(),
                ax0.iter().map(|v| s * v).collect::<Vec<f64>>(),
            )
        }
        _ => {
            let x0: Vec<f64> = rhs.iter().zip(&op.diagonal).map(|(b, d)| b / d).collect();
            let ax0 = op.apply(&x0);
            (x0, ax0)
        }
    };
    let mut x = x;
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&op.diagonal).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut iterations = 0;
    while res >= tolerance {
        if iterations >= max_iterations {
            return Err(EgpeError::Numerical(format!(
                "conjugate gradient stalled: relative residual {res:.3e} after {iterations} iterations \
                 (tolerance {tolerance:.1e})"
            )));
        }
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(EgpeError::Numerical(format!(
                "operator is not positive definite (pᵀAp = {pap:.3e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] / op.diagonal[i];
        }
        let rz_next = dot(&r, &z);
        let gamma = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + gamma * p[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        iterations += 1;
    }
    if x.iter().any(|&v| v < 0.0) && rhs.iter().all(|&b| b >= 0.0) && op.is_m_matrix() {
        for v in x.iter_mut() {
            *v = v.max(0.0);
        }
        op.gauss_seidel(rhs, &mut x);
        let ax = op.apply(&x);
        let rr: f64 = rhs.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum();
        res = rr.sqrt() / b_norm;
    }
    Ok(StepSolution {
        values: x,
        iterations,
        relative_residual: res,
    })
}

/// Conjugate-gradient implicit step for tensor grids, warm-started from φⁿ.
#[derive(Debug, Clone)]
pub struct TensorSolver {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// CG iterations used by the most recent solve.
    pub last_iterations: usize,
}

impl TensorSolver {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(tolerance: f64, max_iterations: usize) -> Self {
        Self {
            tolerance,
            max_iterations,
            last_iterations: 0,
        }
    }
}

impl Default for TensorSolver {
    fn default() -> Self {
        Self::new(Self::DEFAULT_TOLERANCE, 20_000)
    }
}

impl crate::flow::ImplicitSolver for TensorSolver {
    fn solve(
        &mut self,
        phi: &Field,
        model: &ModelParams,
        potential: &[f64],
        tau: f64,
        mu: f64,
    ) -> Result<Vec<f64>> {
        let g = tensor_grid(phi)?;
        let (op, rhs) = assemble_with(
            g,
            phi.values(),
            potential,
            model.beta,
            model.lambda,
            tau,
            mu,
        )?;
        let sol = solve_step(
            &op,
            &rhs,
            Some(phi.values()),
            self.tolerance,
            self.max_iterations,
        )?;
        self.last_iterations = sol.iterations;
        Ok(sol.values)
    }
}
