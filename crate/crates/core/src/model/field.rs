use crate::error::{domain, Result};
use crate::model::{evaluate_potential, Potential};
use crate::radial::RadialGrid;
use crate::tensor::TensorGrid;

/// Spatial discretization a [`Field`] lives on.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Radial(RadialGrid),
    Tensor(TensorGrid),
}

impl Grid {
    pub fn dimension(&self) -> usize {
        match self {
            Grid::Radial(g) => g.dimension(),
            Grid::Tensor(g) => g.dimension(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Grid::Radial(g) => g.cells(),
            Grid::Tensor(g) => g.node_count(),
        }
    }

    /// Quadrature weight attached to each node.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Grid::Radial(g) => g.weights(),
            Grid::Tensor(g) => vec![g.cell_volume(); g.node_count()],
        }
    }

    /// Coordinates of node `i`; a single radius on radial grids.
    pub fn coordinates(&self, i: usize) -> Vec<f64> {
        match self {
            Grid::Radial(g) => vec![g.midpoint(i)],
            Grid::Tensor(g) => g.coordinates(i),
        }
    }

    /// Distance of node `i` from the symmetry centre.
    pub fn radius(&self, i: usize) -> f64 {
        match self {
            Grid::Radial(g) => g.midpoint(i),
            Grid::Tensor(g) => g.distance_from_center(i),
        }
    }

    pub fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        match self {
            Grid::Radial(g) => g.laplacian(values),
            Grid::Tensor(g) => g.laplacian(values),
        }
    }

    /// ½∫|∇φ|² with first differences between adjacent nodes.
    pub fn kinetic(&self, values: &[f64]) -> f64 {
        match self {
            Grid::Radial(g) => g.kinetic(values),
            Grid::Tensor(g) => g.kinetic(values),
        }
    }

    /// ∫ f with the grid's native quadrature.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        match self {
            Grid::Radial(g) => g.integrate(f),
            Grid::Tensor(g) => g.cell_volume() * f.iter().sum::<f64>(),
        }
    }

    /// Discrete L² norm.
    pub fn norm(&self, values: &[f64]) -> f64 {
        match self {
            Grid::Radial(g) => g.norm(values),
            Grid::Tensor(g) => g.norm(values),
        }
    }

    /// Potential values at every node.
    pub fn sample_potential(&self, v: &Potential) -> Result<Vec<f64>> {
        if let Potential::Tabulated(values) = v {
            if values.len() != self.node_count() {
                return domain(format!(
                    "tabulated potential has {} values but the grid has {} nodes",
                    values.len(),
                    self.node_count()
                ));
            }
            return Ok(values.clone());
        }
        match self {
            Grid::Radial(g) => (0..g.cells())
                .map(|j| v.radial_profile(g.midpoint(j)))
                .collect(),
            Grid::Tensor(g) => {
                let mut out = Vec::with_capacity(g.node_count());
                let mut x = vec![0.0; g.dimension()];
                for i in 0..g.node_count() {
                    g.fill_coordinates(i, &mut x);
                    out.push(evaluate_potential(v, &x)?);
                }
                Ok(out)
            }
        }
    }
}

impl From<RadialGrid> for Grid {
    fn from(g: RadialGrid) -> Self {
        Grid::Radial(g)
    }
}

impl From<TensorGrid> for Grid {
    fn from(g: TensorGrid) -> Self {
        Grid::Tensor(g)
    }
}

/// Real wave function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: impl Into<Grid>, values: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.node_count() {
            return domain(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.node_count()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("field value at node {i} is not finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let values = vec![0.0; grid.node_count()];
        Self { grid, values }
    }

    /// Builds a field by evaluating `f` at each node's coordinates.
    pub fn from_fn(grid: impl Into<Grid>, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let grid = grid.into();
        let values = (0..grid.node_count())
            .map(|i| f(&grid.coordinates(i)))
            .collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.values)
    }

    /// Index and value of the node with largest |φ| (first one on ties).
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0, 0.0f64);
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > best.1.abs() {
                best = (i, *v);
            }
        }
        best
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    /// Rescales to norm `c`.
    pub fn normalized(&self, c: f64) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return domain("cannot normalize a field with zero or non-finite norm");
        }
        Ok(self.scaled(c / n))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
