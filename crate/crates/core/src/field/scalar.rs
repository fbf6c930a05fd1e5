use std::sync::Arc;

use crate::geometry::CellSet;
use crate::Vec2;

/// Scalar values attached to the cells of a [`CellSet`], read back with
/// bilinear interpolation between cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    cells: Arc<CellSet>,
    values: Vec<f64>,
}

impl ScalarField {
    /// `values` are ordered like `cells.members()`.
    pub fn new(cells: Arc<CellSet>, values: Vec<f64>) -> Self {
        assert_eq!(cells.len(), values.len(), "one value per member cell");
        Self { cells, values }
    }

    pub fn constant(cells: Arc<CellSet>, value: f64) -> Self {
        let n = cells.len();
        Self::new(cells, vec![value; n])
    }

    pub fn zeros(cells: Arc<CellSet>) -> Self {
        Self::constant(cells, 0.0)
    }

    /// Samples `f` at every member cell center.
    pub fn from_fn(cells: Arc<CellSet>, f: impl Fn(Vec2) -> f64) -> Self {
        let g = *cells.geometry();
        let values = cells.members().iter().map(|&c| f(g.center(c))).collect();
        Self::new(cells, values)
    }

    pub fn cells(&self) -> &Arc<CellSet> {
        &self.cells
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a grid cell, if the cell belongs to the field.
    pub fn at_cell(&self, grid_idx: usize) -> Option<f64> {
        self.cells.local_index(grid_idx).map(|l| self.values[l])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral over the field's cells.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cells.cell_area()
    }

    /// Moves `p` into the nearest member cell when it falls outside the set.
    pub fn clamp_point(&self, p: Vec2) -> Vec2 {
        let g = self.cells.geometry();
        if g.cell_at(p).is_some_and(|c| self.cells.contains(c)) {
            return p;
        }
        let nearest = self
            .cells
            .members()
            .iter()
            .copied()
            .min_by(|&a, &b| g.center(a).dist_sq(p).total_cmp(&g.center(b).dist_sq(p)))
            .expect("field has at least one cell");
        g.center(nearest)
    }

    /// Bilinear corner values and weights around `p` (already clamped).
    /// Corners outside the set are linear ghosts: the plane through the
    /// other three corners, or the continuation of the row/column across a
    /// straight wall, so the slope just inside the set carries through to
    /// its edge.
    fn stencil(&self, p: Vec2) -> ([f64; 4], [f64; 4]) {
        let g = self.cells.geometry();
        let h = g.spacing;
        let u = (p.x - g.origin.x) / h - 0.5;
        let v = (p.y - g.origin.y) / h - 0.5;
        let i0 = u.floor();
        let j0 = v.floor();
        let fx = u - i0;
        let fy = v - j0;
        let value = |ix: f64, iy: f64| {
            if ix < 0.0 || iy < 0.0 || ix >= g.nx as f64 || iy >= g.ny as f64 {
                return None;
            }
            self.at_cell(g.index(ix as usize, iy as usize))
        };
        // Corner k sits at (i0 + (k & 1), j0 + (k >> 1)).
        let corner = |k: usize| (i0 + (k & 1) as f64, j0 + (k >> 1) as f64);
        let raw: [Option<f64>; 4] = std::array::from_fn(|k| {
            let (ix, iy) = corner(k);
            value(ix, iy)
        });
        let present = raw.iter().filter(|r| r.is_some()).count();
        let vals: [f64; 4] = std::array::from_fn(|k| {
            if let Some(x) = raw[k] {
                return x;
            }
            let (ix, iy) = corner(k);
            match (raw[k ^ 2], raw[k ^ 1], raw[k ^ 3]) {
                (Some(col), Some(row), Some(diag)) => col + row - diag,
                (Some(col), None, _) => {
                    // Horizontal wall: continue the column.
                    let jp = corner(k ^ 2).1;
                    value(ix, 2.0 * jp - iy).map_or(col, |beyond| 2.0 * col - beyond)
                }
                (None, Some(row), _) => {
                    let ip = corner(k ^ 1).0;
                    value(2.0 * ip - ix, iy).map_or(row, |beyond| 2.0 * row - beyond)
                }
                (Some(col), Some(row), None) => 0.5 * (col + row),
                (None, None, Some(diag)) => diag,
                (None, None, None) => {
                    debug_assert_eq!(present, 0);
                    g.cell_at(p)
                        .and_then(|c| self.cells.local_index(c))
                        .map(|l| self.values[l])
                        .unwrap_or_else(|| self.nearest_value(p))
                }
            }
        });
        let w = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
        (vals, w)
    }

    /// Bilinear interpolation between cell centers; points outside the set
    /// are first clamped to the nearest member cell.
    pub fn interpolate(&self, p: Vec2) -> f64 {
        let p = self.clamp_point(p);
        let (vals, w) = self.stencil(p);
        (0..4).map(|k| w[k] * vals[k]).sum()
    }

    /// Gradient at `p`: central differences at the surrounding cell centers
    /// (one-sided at the set boundary), bilinearly interpolated. Unlike the
    /// piecewise derivative of [`Self::interpolate`], this is continuous, so
    /// gradient ascent does not chatter across cell edges.
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let p = self.clamp_point(p);
        let g = self.cells.geometry();
        let h = g.spacing;
        let u = (p.x - g.origin.x) / h - 0.5;
        let v = (p.y - g.origin.y) / h - 0.5;
        let i0 = u.floor();
        let j0 = v.floor();
        let fx = u - i0;
        let fy = v - j0;
        let corner = |k: usize| {
            let ix = i0 + (k & 1) as f64;
            let iy = j0 + (k >> 1) as f64;
            if ix < 0.0 || iy < 0.0 || ix >= g.nx as f64 || iy >= g.ny as f64 {
                return None;
            }
            let c = g.index(ix as usize, iy as usize);
            self.cells.contains(c).then(|| self.cell_gradient(c))
        };
        let raw: [Option<Vec2>; 4] = std::array::from_fn(corner);
        let own = || g.cell_at(p).map_or(Vec2::ZERO, |c| self.cell_gradient(c));
        // Missing corners copy a neighbour across the wall.
        let grads: [Vec2; 4] = std::array::from_fn(|k| {
            raw[k].or(raw[k ^ 2]).or(raw[k ^ 1]).or(raw[k ^ 3]).unwrap_or_else(own)
        });
        let w = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
        let mut grad = Vec2::ZERO;
        for k in 0..4 {
            grad += grads[k] * w[k];
        }
        grad
    }

    /// Central differences at a member cell, one-sided at the set boundary.
    pub fn cell_gradient(&self, grid_idx: usize) -> Vec2 {
        let g = self.cells.geometry();
        let h = g.spacing;
        let Some(center) = self.at_cell(grid_idx) else {
            return Vec2::ZERO;
        };
        let (ix, iy) = g.coords(grid_idx);
        let value = |ok: bool, idx: usize| if ok { self.at_cell(idx) } else { None };
        let diff = |lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
            (Some(a), Some(b)) => (b - a) / (2.0 * h),
            (None, Some(b)) => (b - center) / h,
            (Some(a), None) => (center - a) / h,
            (None, None) => 0.0,
        };
        let west = value(ix > 0, grid_idx.wrapping_sub(1));
        let east = value(ix + 1 < g.nx, grid_idx + 1);
        let south = value(iy > 0, grid_idx.wrapping_sub(g.nx));
        let north = value(iy + 1 < g.ny, grid_idx + g.nx);
        Vec2::new(diff(west, east), diff(south, north))
    }

    fn nearest_value(&self, p: Vec2) -> f64 {
        let g = self.cells.geometry();
        let (l, _) = self
            .cells
            .members()
            .iter()
            .enumerate()
            .min_by(|a, b| g.center(*a.1).dist_sq(p).total_cmp(&g.center(*b.1).dist_sq(p)))
            .expect("field has at least one cell");
        self.values[l]
    }
}

/// Interpolated central-difference gradient of `field` at `p`.
pub fn sample_gradient(field: &ScalarField, p: Vec2) -> Vec2 {
    field.gradient(p)
}
