use std::sync::Arc;

use super::{CellSet, RegionGrid};
use crate::{Error, Result, Vec2};

/// Discrete Voronoi partition of the region's cells among agents, together
/// with the communication graph of agents whose cells touch.
#[derive(Debug, Clone)]
pub struct Partition {
    /// Owner per grid index; `None` for masked-out cells.
    owners: Vec<Option<usize>>,
    cells: Vec<Arc<CellSet>>,
    adjacency: Vec<Vec<bool>>,
}

impl Partition {
    /// Partition of the whole region owned by a single agent.
    pub fn whole(region: &RegionGrid) -> Self {
        let owners = region.mask().iter().map(|&m| m.then_some(0)).collect();
        Self {
            owners,
            cells: vec![region.cells().clone()],
            adjacency: vec![vec![false]],
        }
    }

    pub fn num_agents(&self) -> usize {
        self.cells.len()
    }

    /// Owner of a grid cell (0-based agent index).
    pub fn owner(&self, grid_idx: usize) -> Option<usize> {
        self.owners.get(grid_idx).copied().flatten()
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owners
    }

    pub fn cells(&self, agent: usize) -> &Arc<CellSet> {
        &self.cells[agent]
    }

    pub fn all_cells(&self) -> &[Arc<CellSet>] {
        &self.cells
    }

    /// Communication weight `w_ij`.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().enumerate().filter(|(_, &w)| w).map(|(j, _)| j)
    }

    /// Row-major label raster: agent index starting at 1, `-1` when masked out.
    pub fn label_raster(&self) -> Vec<i64> {
        self.owners.iter().map(|o| o.map_or(-1, |a| a as i64 + 1)).collect()
    }
}

/// Assigns every masked-in cell to the agent nearest (Euclidean) to its
/// center, ties going to the lowest agent index.
pub fn voronoi_labels(region: &RegionGrid, positions: &[Vec2]) -> Result<Partition> {
    if positions.is_empty() {
        return Err(Error::NoAgents);
    }
    for (agent, p) in positions.iter().enumerate() {
        if !region.contains_point(*p) {
            return Err(Error::PositionOutside { agent, x: p.x, y: p.y });
        }
    }
    let geom = *region.geometry();
    let n = positions.len();
    let mut owners = vec![None; geom.len()];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &c in region.cells().members() {
        let center = geom.center(c);
        let mut best = 0;
        let mut best_d = center.dist_sq(positions[0]);
        for (j, p) in positions.iter().enumerate().skip(1) {
            let d = center.dist_sq(*p);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        owners[c] = Some(best);
        members[best].push(c);
    }

    let mut adjacency = vec![vec![false; n]; n];
    for &c in region.cells().members() {
        let a = owners[c].expect("masked-in cell has an owner");
        // East and north neighbours visit every 4-adjacent pair once.
        let (ix, iy) = geom.coords(c);
        let mut check = |other: usize| {
            if let Some(b) = owners[other] {
                if a != b {
                    adjacency[a][b] = true;
                    adjacency[b][a] = true;
                }
            }
        };
        if ix + 1 < geom.nx {
            check(c + 1);
        }
        if iy + 1 < geom.ny {
            check(c + geom.nx);
        }
    }

    let cells = members.into_iter().map(|m| Arc::new(CellSet::new(geom, m))).collect();
    Ok(Partition { owners, cells, adjacency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_region, Rect, RegionSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rect_region(w: f64, h: f64, s: f64) -> RegionGrid {
        build_region(&RegionSpec { outer: Rect::new(0.0, 0.0, w, h), holes: vec![], spacing: s })
            .unwrap()
    }

    #[test]
    fn single_agent_owns_everything() {
        let region = rect_region(3.0, 2.0, 0.25);
        let p = voronoi_labels(&region, &[Vec2::new(1.1, 0.3)]).unwrap();
        assert_eq!(p.cells(0).len(), region.num_cells());
        assert!(!p.adjacent(0, 0));
    }

    #[test]
    fn two_agents_split_at_bisector() {
        let region = rect_region(15.0, 10.0, 0.5);
        let p = voronoi_labels(&region, &[Vec2::new(2.5, 5.0), Vec2::new(12.5, 5.0)]).unwrap();
        let g = region.geometry();
        for &c in region.cells().members() {
            let want = if g.center(c).x < 7.5 { 0 } else { 1 };
            assert_eq!(p.owner(c), Some(want));
        }
        assert!(p.adjacent(0, 1) && p.adjacent(1, 0));
    }

    #[test]
    fn five_random_agents_match_exhaustive_scan() {
        let region = rect_region(30.0, 30.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pos: Vec<Vec2> =
            (0..5).map(|_| Vec2::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0))).collect();
        let p = voronoi_labels(&region, &pos).unwrap();
        let g = region.geometry();
        for &c in region.cells().members() {
            let x = g.center(c);
            let dists: Vec<f64> = pos.iter().map(|s| (x.x - s.x).powi(2) + (x.y - s.y).powi(2)).collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let first = dists.iter().position(|&d| d == min).unwrap();
            assert_eq!(p.owner(c), Some(first));
        }
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let region = rect_region(2.0, 1.0, 1.0);
        // Both cell centers equidistant from the two agents.
        let p = voronoi_labels(&region, &[Vec2::new(1.0, 0.75), Vec2::new(1.0, 0.25)]).unwrap();
        assert_eq!(p.cells(0).len(), 2);
        assert!(p.cells(1).is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let region = rect_region(2.0, 2.0, 0.5);
        assert!(matches!(voronoi_labels(&region, &[]), Err(Error::NoAgents)));
        assert!(matches!(
            voronoi_labels(&region, &[Vec2::new(5.0, 5.0)]),
            Err(Error::PositionOutside { agent: 0, .. })
        ));
    }

    #[test]
    fn raster_uses_one_based_labels() {
        let spec = RegionSpec {
            outer: Rect::new(0.0, 0.0, 2.0, 1.0),
            holes: vec![Rect::new(1.0, 0.0, 2.0, 0.5)],
            spacing: 0.5,
        };
        let region = build_region(&spec).unwrap();
        let p = voronoi_labels(&region, &[Vec2::new(0.2, 0.2)]).unwrap();
        assert_eq!(p.label_raster(), vec![1, 1, -1, -1, 1, 1, 1, 1]);
    }
}
