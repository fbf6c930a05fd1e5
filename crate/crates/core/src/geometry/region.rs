use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Closed containment.
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Open containment; points on the boundary are outside.
    pub fn contains_strict(&self, p: Vec2) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }
}

/// Outer rectangle minus rectangular holes, sampled at `spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub outer: Rect,
    #[serde(default)]
    pub holes: Vec<Rect>,
    #[serde(default = "RegionSpec::default_spacing")]
    pub spacing: f64,
}

impl RegionSpec {
    pub const DEFAULT_SPACING: f64 = 0.1;

    fn default_spacing() -> f64 {
        Self::DEFAULT_SPACING
    }
}

/// Uniform grid layout: cell `(ix, iy)` has its center at
/// `origin + ((ix + ½)·h, (iy + ½)·h)`; grid index is `iy·nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeometry {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, idx: usize) -> Vec2 {
        let (ix, iy) = self.coords(idx);
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.spacing,
            self.origin.y + (iy as f64 + 0.5) * self.spacing,
        )
    }

    /// Grid cell containing `p`, if it is on the grid.
    pub fn cell_at(&self, p: Vec2) -> Option<usize> {
        let fx = ((p.x - self.origin.x) / self.spacing).floor();
        let fy = ((p.y - self.origin.y) / self.spacing).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some(self.index(fx as usize, fy as usize))
    }

    /// 4-neighbours of a grid index (W, E, S, N order, skipping the grid edge).
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (ix, iy) = self.coords(idx);
        let nx = self.nx;
        let ny = self.ny;
        [
            (ix > 0).then(|| idx - 1),
            (ix + 1 < nx).then(|| idx + 1),
            (iy > 0).then(|| idx - nx),
            (iy + 1 < ny).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    /// 8-neighbours of a grid index, skipping the grid edge.
    pub fn neighbors8(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (ix, iy) = self.coords(idx);
        (-1i64..=1)
            .flat_map(move |dy| (-1i64..=1).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| dx != 0 || dy != 0)
            .filter_map(move |(dx, dy)| {
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
                    None
                } else {
                    Some(self.index(jx as usize, jy as usize))
                }
            })
    }
}

/// A set of grid cells, stored as sorted grid indices plus a dense
/// grid-index → local-index lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    geom: GridGeometry,
    members: Vec<usize>,
    local: Vec<u32>,
}

impl CellSet {
    const ABSENT: u32 = u32::MAX;

    pub fn new(geom: GridGeometry, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        let mut local = vec![Self::ABSENT; geom.len()];
        for (k, &c) in members.iter().enumerate() {
            local[c] = k as u32;
        }
        Self { geom, members, local }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, grid_idx: usize) -> bool {
        self.local.get(grid_idx).is_some_and(|&l| l != Self::ABSENT)
    }

    pub fn local_index(&self, grid_idx: usize) -> Option<usize> {
        match self.local.get(grid_idx) {
            Some(&l) if l != Self::ABSENT => Some(l as usize),
            _ => None,
        }
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        self.geom.cell_at(p).is_some_and(|c| self.contains(c))
    }

    pub fn cell_area(&self) -> f64 {
        self.geom.spacing * self.geom.spacing
    }

    pub fn area(&self) -> f64 {
        self.len() as f64 * self.cell_area()
    }

    /// Number of 4-connected components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(self.members[start]);
            while let Some(c) = queue.pop_front() {
                for n in self.geom.neighbors4(c) {
                    if let Some(l) = self.local_index(n) {
                        if !seen[l] {
                            seen[l] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        count
    }

    /// Cells with at least one 4-neighbour outside the set.
    pub fn boundary_cells(&self) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .filter(|&c| {
                let (ix, iy) = self.geom.coords(c);
                let on_grid_edge =
                    ix == 0 || iy == 0 || ix + 1 == self.geom.nx || iy + 1 == self.geom.ny;
                on_grid_edge || self.geom.neighbors4(c).any(|n| !self.contains(n))
            })
            .collect()
    }

    /// Number of cell faces between a member and a non-member (or grid edge).
    pub fn boundary_faces(&self) -> usize {
        self.members
            .iter()
            .map(|&c| 4 - self.geom.neighbors4(c).filter(|&n| self.contains(n)).count())
            .sum()
    }
}

/// The masked workspace grid `D`.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    geom: GridGeometry,
    mask: Vec<bool>,
    cells: Arc<CellSet>,
}

impl RegionGrid {
    /// Builds a region from an explicit mask over `geom`.
    pub fn from_mask(geom: GridGeometry, mask: Vec<bool>) -> Result<Self> {
        if !(geom.spacing > 0.0) || !geom.spacing.is_finite() {
            return Err(Error::InvalidSpacing(geom.spacing));
        }
        assert_eq!(mask.len(), geom.len(), "mask size must match the grid");
        let members: Vec<usize> = (0..geom.len()).filter(|&i| mask[i]).collect();
        if members.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let cells = CellSet::new(geom, members);
        let components = cells.components();
        if components != 1 {
            return Err(Error::DisconnectedRegion { components });
        }
        Ok(Self { geom, mask, cells: Arc::new(cells) })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn spacing(&self) -> f64 {
        self.geom.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.geom.spacing * self.geom.spacing
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_inside(&self, grid_idx: usize) -> bool {
        self.mask.get(grid_idx).copied().unwrap_or(false)
    }

    /// Whether `p` falls in a masked-in cell.
    pub fn contains_point(&self, p: Vec2) -> bool {
        self.geom.cell_at(p).is_some_and(|c| self.mask[c])
    }

    /// All masked-in cells.
    pub fn cells(&self) -> &Arc<CellSet> {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn area(&self) -> f64 {
        self.cells.area()
    }

    /// Integral of per-grid-cell `values` over the whole region.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.cells.members().iter().map(|&c| values[c]).sum::<f64>() * self.cell_area()
    }

    /// Largest distance between two cell centers of the region's bounding box.
    pub fn diameter(&self) -> f64 {
        let h = self.geom.spacing;
        ((self.geom.nx as f64 * h).powi(2) + (self.geom.ny as f64 * h).powi(2)).sqrt()
    }
}

/// Rasterises a [`RegionSpec`]: a cell is inside when its center lies in
/// the closed outer rectangle and in no hole's open interior.
pub fn build_region(spec: &RegionSpec) -> Result<RegionGrid> {
    let h = spec.spacing;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidSpacing(h));
    }
    let outer = spec.outer;
    if !(outer.width() > 0.0 && outer.height() > 0.0) {
        return Err(Error::EmptyRegion);
    }
    let cells_along = |len: f64| {
        let n = len / h;
        // Tolerate representation error such as 15 / 0.1 = 149.99999999999997.
        if (n - n.round()).abs() < 1e-9 * n.max(1.0) {
            n.round() as usize
        } else {
            n.ceil() as usize
        }
    };
    let geom = GridGeometry {
        origin: Vec2::new(outer.x0, outer.y0),
        spacing: h,
        nx: cells_along(outer.width()).max(1),
        ny: cells_along(outer.height()).max(1),
    };
    let mask = (0..geom.len())
        .map(|i| {
            let c = geom.center(i);
            outer.contains(c) && !spec.holes.iter().any(|hole| hole.contains_strict(c))
        })
        .collect();
    RegionGrid::from_mask(geom, mask)
}
