use nalgebra::DMatrix;

use crate::array::Tensor3;
use crate::dynamics::ForceField;
use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::jets::ParamMap;

/// Minimum node count per axis (room for two-node stencil margins).
pub const MIN_NODES: usize = 5;

/// A uniform rectangular grid in ℝᵏ. Nodes are numbered with the last
/// axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let k = lower.len();
        if k == 0 || upper.len() != k || nodes.len() != k {
            return Err(Error::dim("grid extents and node counts must all have length k ≥ 1"));
        }
        for a in 0..k {
            if nodes[a] < MIN_NODES {
                return Err(Error::pre(format!("axis {} has {} nodes, at least {MIN_NODES} needed", a + 1, nodes[a])));
            }
            if !(lower[a].is_finite() && upper[a].is_finite() && upper[a] > lower[a]) {
                return Err(Error::pre(format!("axis {} has an empty or non-finite extent", a + 1)));
            }
        }
        Ok(Self { lower, upper, nodes })
    }

    /// Grid with spacing `h` on every axis and `nodes` nodes centred on `center`.
    pub fn centered(center: &[f64], h: f64, nodes: usize) -> Result<Self> {
        let half = h * (nodes - 1) as f64 / 2.0;
        Self::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
            vec![nodes; center.len()],
        )
    }

    pub fn k(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, a: usize) -> f64 {
        (self.upper[a] - self.lower[a]) / (self.nodes[a] - 1) as f64
    }

    /// Per-axis indices of a linear node number.
    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.k()];
        for a in (0..self.k()).rev() {
            idx[a] = node % self.nodes[a];
            node /= self.nodes[a];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.nodes).fold(0, |acc, (i, n)| acc * n + i)
    }

    /// Neighbour `offset` steps along axis `a`, if inside the grid.
    pub fn shift(&self, node: usize, a: usize, offset: isize) -> Option<usize> {
        let mut idx = self.multi_index(node);
        let moved = idx[a] as isize + offset;
        if moved < 0 || moved >= self.nodes[a] as isize {
            return None;
        }
        idx[a] = moved as usize;
        Some(self.linear_index(&idx))
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + i as f64 * self.spacing(a))
            .collect()
    }

    /// True when every axis index keeps at least `margin` nodes to each edge.
    pub fn is_interior(&self, node: usize, margin: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.nodes)
            .all(|(&i, &n)| i >= margin && i + margin < n)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        !self.is_interior(node, 1)
    }
}

/// Values qⁱ sampled at every node of a grid: a discretized γ: 𝒰 → Q.
#[derive(Debug, Clone, PartialEq)]
pub struct Sheet {
    grid: Grid,
    n: usize,
    values: Vec<f64>,
}

impl Sheet {
    /// `values[node·n + i]`.
    pub fn new(grid: Grid, n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != grid.len() * n {
            return Err(Error::dim(format!("sheet needs {} values", grid.len() * n)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite sheet value"));
        }
        Ok(Self { grid, n, values })
    }

    pub fn from_fn(grid: Grid, n: usize, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * n);
        for node in 0..grid.len() {
            let q = f(&grid.point(node))?;
            if q.len() != n {
                return Err(Error::dim("sheet function returned the wrong number of coordinates"));
            }
            values.extend(q);
        }
        Self::new(grid, n, values)
    }

    /// Samples a parameterized map.
    pub fn sample<G: ParamMap>(gamma: &G, grid: Grid) -> Result<Self> {
        if gamma.params() != grid.k() {
            return Err(Error::dim("map and grid have different parameter counts"));
        }
        let n = gamma.eval(&grid.point(0))?.len();
        Self::from_fn(grid, n, |t| gamma.eval(t))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.n..(node + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `qⁱ(t) = aⁱ + bⁱ_α tᵅ + ½ g^{ij} F_{jαβ} tᵅ tᵝ`, the exact solution of the
/// Newton system for a constant metric and a constant force.
pub fn flat_newton_sheet(
    g: &MetricField,
    f: &ForceField,
    a: &[f64],
    b: &DMatrix<f64>,
    grid: Grid,
) -> Result<Sheet> {
    let n = g.dim();
    let k = grid.k();
    if !g.is_constant() {
        return Err(Error::pre("closed-form Newton sheets need a constant metric"));
    }
    if !f.is_constant() {
        return Err(Error::pre("closed-form Newton sheets need a constant force"));
    }
    if f.n() != n || f.k() != k || a.len() != n || b.shape() != (n, k) {
        return Err(Error::dim("sheet data shapes do not match n and k"));
    }
    let zero_q = vec![0.0; n];
    let inv = g.eval(&zero_q)?.inv;
    let fv = Tensor3::from_vec(n, k, f.eval(&zero_q, &vec![0.0; n * k])?)?;
    let acc = Tensor3::from_fn(n, k, |i, al, be| (0..n).map(|j| inv[(i, j)] * fv.get(j, al, be)).sum());
    Sheet::from_fn(grid, n, |t| {
        Ok((0..n)
            .map(|i| {
                let mut q = a[i];
                for al in 0..k {
                    q += b[(i, al)] * t[al];
                    for be in 0..k {
                        q += 0.5 * acc.get(i, al, be) * t[al] * t[be];
                    }
                }
                q
            })
            .collect())
    })
}
