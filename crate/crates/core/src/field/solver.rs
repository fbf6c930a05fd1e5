use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::geometry::CellSet;
use crate::{Error, Result};

/// Heat equation coefficients and iterative-solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    /// Thermal diffusivity.
    pub alpha: f64,
    /// Global cooling coefficient.
    pub beta: f64,
    #[serde(default = "FieldParams::default_tol")]
    pub solver_tol: f64,
    #[serde(default = "FieldParams::default_max_iter")]
    pub solver_max_iter: usize,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, solver_tol: Self::default_tol(), solver_max_iter: Self::default_max_iter() }
    }
}

impl FieldParams {
    fn default_tol() -> f64 {
        1e-10
    }

    fn default_max_iter() -> usize {
        20_000
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::param("alpha", "alpha must be positive"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", "beta must be positive"));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::param("solver_tol", "solver_tol must be positive"));
        }
        if self.solver_max_iter == 0 {
            return Err(Error::param("solver_max_iter", "solver_max_iter must be positive"));
        }
        Ok(())
    }
}

/// The matrix `β·I − α·Δ_h` restricted to a cell set, with zero-flux faces
/// wherever a neighbour is missing. Symmetric positive definite and an
/// M-matrix.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    cells: Arc<CellSet>,
    params: FieldParams,
    coupling: f64,
    /// Local indices of in-set 4-neighbours, `u32::MAX` padded.
    neighbors: Vec<[u32; 4]>,
    diag: Vec<f64>,
}

impl HeatOperator {
    pub fn new(cells: Arc<CellSet>, params: FieldParams) -> Self {
        let g = *cells.geometry();
        let coupling = params.alpha / (g.spacing * g.spacing);
        let mut neighbors = Vec::with_capacity(cells.len());
        let mut diag = Vec::with_capacity(cells.len());
        for &c in cells.members() {
            let mut nb = [u32::MAX; 4];
            let mut deg = 0;
            for n in g.neighbors4(c) {
                if let Some(l) = cells.local_index(n) {
                    nb[deg] = l as u32;
                    deg += 1;
                }
            }
            neighbors.push(nb);
            diag.push(params.beta + coupling * deg as f64);
        }
        Self { cells, params, coupling, neighbors, diag }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn cells(&self) -> &Arc<CellSet> {
        &self.cells
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    /// `y ← A·x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, (nb, d)) in self.neighbors.iter().zip(&self.diag).enumerate() {
            let mut acc = d * x[i];
            for &j in nb.iter().take_while(|&&j| j != u32::MAX) {
                acc -= self.coupling * x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// Euclidean norm of `b − A·x`.
    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.apply(x, &mut ax);
        ax.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    fn target(&self, b: &[f64]) -> f64 {
        self.params.solver_tol * (norm(b) + 1.0)
    }

    /// Jacobi-preconditioned conjugate gradients from `x`, stopping once the
    /// residual drops to `solver_tol · (‖b‖ + 1)`.
    pub fn pcg(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let n = self.len();
        let target = self.target(b);
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut res = norm(&r);
        if res <= target {
            return Ok(0);
        }
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=self.params.solver_max_iter {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            res = norm(&r);
            if res <= target {
                return Ok(it);
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::SolverDiverged { iterations: self.params.solver_max_iter, residual: res, target })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_source(source: &ScalarField) -> Result<()> {
    for (&c, &v) in source.cells().members().iter().zip(source.values()) {
        if !(v >= 0.0) {
            return Err(Error::NegativeSource { cell: c, value: v });
        }
    }
    Ok(())
}

/// Solves the heat equation on the source's cell set.
///
/// Uses a one-off [`HeatSolver`]; the triangular sweeps of a Stieltjes
/// matrix's Cholesky factor never subtract, so a nonnegative source yields
/// a nonnegative temperature exactly, even far below round-off of the peak.
pub fn solve_heat_field(source: &ScalarField, params: &FieldParams) -> Result<ScalarField> {
    HeatSolver::new(source.cells().clone(), *params)?.solve(source)
}

/// Same equation solved with Jacobi-preconditioned conjugate gradients from
/// a zero initial guess.
pub fn solve_heat_field_pcg(source: &ScalarField, params: &FieldParams) -> Result<ScalarField> {
    params.validate()?;
    check_source(source)?;
    let op = HeatOperator::new(source.cells().clone(), *params);
    let mut t = vec![0.0; op.len()];
    op.pcg(source.values(), &mut t)?;
    Ok(ScalarField::new(source.cells().clone(), t))
}

/// Reusable solver for one cell set: the operator is factored once with an
/// envelope (skyline) Cholesky decomposition, so each further solve costs
/// two triangular sweeps. Every result is checked against the residual
/// target and polished with PCG if needed.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    op: HeatOperator,
    /// `order[k]` is the local cell index eliminated k-th.
    order: Vec<usize>,
    /// First column of each factor row in the envelope.
    first: Vec<usize>,
    /// Start of each row's `first..=k` slice in `factor`.
    offset: Vec<usize>,
    factor: Vec<f64>,
}

impl HeatSolver {
    pub fn new(cells: Arc<CellSet>, params: FieldParams) -> Result<Self> {
        params.validate()?;
        if cells.is_empty() {
            return Err(Error::EmptyCellSet);
        }
        let op = HeatOperator::new(cells, params);
        let order = band_order(op.cells());
        let n = order.len();
        let mut rank = vec![0usize; n];
        for (k, &l) in order.iter().enumerate() {
            rank[l] = k;
        }
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for &l in &order {
            let k = rank[l];
            let f = op.neighbors[l]
                .iter()
                .take_while(|&&j| j != u32::MAX)
                .map(|&j| rank[j as usize])
                .fold(k, usize::min);
            first.push(f);
            offset.push(offset.last().unwrap() + (k - f + 1));
        }
        let mut factor = vec![0.0; *offset.last().unwrap()];
        // Scatter A's lower triangle into the envelope.
        for (k, &l) in order.iter().enumerate() {
            factor[offset[k] + (k - first[k])] = op.diag[l];
            for &j in op.neighbors[l].iter().take_while(|&&j| j != u32::MAX) {
                let kj = rank[j as usize];
                if kj < k {
                    factor[offset[k] + (kj - first[k])] = -op.coupling;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_i = &factor[offset[i] + (lo - fi)..offset[i] + (j - fi)];
                let row_j = &factor[offset[j] + (lo - fj)..offset[j] + (j - fj)];
                let s = factor[offset[i] + (j - fi)] - dot(row_i, row_j);
                if j < i {
                    let ljj = factor[offset[j] + (j - fj)];
                    factor[offset[i] + (j - fi)] = s / ljj;
                } else {
                    debug_assert!(s > 0.0, "heat operator is positive definite");
                    factor[offset[i] + (i - fi)] = s.sqrt();
                }
            }
        }
        Ok(Self { op, order, first, offset, factor })
    }

    pub fn operator(&self) -> &HeatOperator {
        &self.op
    }

    pub fn cells(&self) -> &Arc<CellSet> {
        self.op.cells()
    }

    /// Solves for per-cell `source` values ordered like the cell set.
    pub fn solve_values(&self, source: &[f64]) -> Result<Vec<f64>> {
        let n = self.order.len();
        assert_eq!(source.len(), n);
        let mut y: Vec<f64> = self.order.iter().map(|&l| source[l]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.factor[self.offset[i]..self.offset[i + 1]];
            let s = y[i] - dot(&row[..i - fi], &y[fi..i]);
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.factor[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, lik) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= lik * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &l) in self.order.iter().enumerate() {
            x[l] = y[k];
        }
        if self.op.residual_norm(&x, source) > self.op.target(source) {
            self.op.pcg(source, &mut x)?;
        }
        Ok(x)
    }

    pub fn solve(&self, source: &ScalarField) -> Result<ScalarField> {
        assert!(Arc::ptr_eq(source.cells(), self.cells()) || **source.cells() == **self.cells());
        check_source(source)?;
        Ok(ScalarField::new(self.cells().clone(), self.solve_values(source.values())?))
    }
}

/// Row-major or column-major elimination order, whichever gives the
/// narrower band.
fn band_order(cells: &CellSet) -> Vec<usize> {
    let g = cells.geometry();
    let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
    for &c in cells.members() {
        let (ix, iy) = g.coords(c);
        x0 = x0.min(ix);
        x1 = x1.max(ix);
        y0 = y0.min(iy);
        y1 = y1.max(iy);
    }
    let mut order: Vec<usize> = (0..cells.len()).collect();
    if x1 - x0 > y1 - y0 {
        order.sort_by_key(|&l| {
            let (ix, iy) = g.coords(cells.members()[l]);
            (ix, iy)
        });
    }
    order
}
