use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::CellSet;
use crate::{Error, Result, Vec2};

pub type Triangle = [usize; 3];

const BARY_EPS: f64 = 1e-12;

/// Triangle mesh over a subregion, with a bucket index for point location.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<Triangle>,
    h_max: f64,
    index: BucketIndex,
}

#[derive(Debug, Clone)]
struct BucketIndex {
    origin: Vec2,
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl BucketIndex {
    fn build(vertices: &[Vec2], triangles: &[Triangle], size_hint: f64) -> Self {
        let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for v in vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        if vertices.is_empty() {
            lo = Vec2::ZERO;
            hi = Vec2::ZERO;
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let size = if size_hint.is_finite() && size_hint > 0.0 {
            size_hint.max(extent / 1024.0)
        } else {
            extent / 16.0
        };
        let nx = ((hi.x - lo.x) / size).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / size).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in triangles.iter().enumerate() {
            let pts = tri.map(|i| vertices[i]);
            let bx0 = ((pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - lo.x) / size - BARY_EPS).floor().max(0.0) as usize;
            let by0 = ((pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - lo.y) / size - BARY_EPS).floor().max(0.0) as usize;
            let bx1 = (((pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) - lo.x) / size + BARY_EPS).floor() as usize).min(nx - 1);
            let by1 = (((pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) - lo.y) / size + BARY_EPS).floor() as usize).min(ny - 1);
            for by in by0..=by1 {
                for bx in bx0..=bx1 {
                    buckets[by * nx + bx].push(t as u32);
                }
            }
        }
        Self { origin: lo, size, nx, ny, buckets }
    }

    fn candidates(&self, p: Vec2) -> &[u32] {
        let fx = ((p.x - self.origin.x) / self.size).floor();
        let fy = ((p.y - self.origin.y) / self.size).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return &[];
        }
        &self.buckets[fy as usize * self.nx + fx as usize]
    }
}

impl TriMesh {
    /// Delaunay triangulation of an explicit point set (no clipping).
    pub fn from_points(points: &[Vec2]) -> Result<Self> {
        Self::triangulate(points, |_| true)
    }

    fn triangulate(points: &[Vec2], keep: impl Fn(&[Vec2; 3]) -> bool) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewSamples(points.len()));
        }
        let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
        let mut vertices = Vec::with_capacity(points.len());
        let mut handle_to_vertex = Vec::with_capacity(points.len());
        for p in points {
            let handle = dt
                .insert(Point2::new(p.x, p.y))
                .map_err(|e| Error::Parse(format!("bad sample point ({}, {}): {e:?}", p.x, p.y)))?;
            let h = handle.index();
            if h == handle_to_vertex.len() {
                handle_to_vertex.push(vertices.len());
                vertices.push(*p);
            }
        }
        let mut triangles: Vec<Triangle> = dt
            .inner_faces()
            .filter_map(|face| {
                let vs = face.vertices().map(|v| handle_to_vertex[v.fix().index()]);
                let pts = vs.map(|i| vertices[i]);
                let area2 = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
                (area2.abs() > 0.0 && keep(&pts)).then(|| {
                    if area2 > 0.0 { vs } else { [vs[0], vs[2], vs[1]] }
                })
            })
            .collect();
        // Deterministic ordering independent of the triangulation's internals.
        for t in triangles.iter_mut() {
            let min = (0..3).min_by_key(|&k| t[k]).unwrap();
            t.rotate_left(min);
        }
        triangles.sort_unstable();
        let h_max = triangles
            .iter()
            .map(|t| max_edge_of(&t.map(|i| vertices[i])))
            .fold(0.0, f64::max);
        let index = BucketIndex::build(&vertices, &triangles, h_max);
        Ok(Self { vertices, triangles, h_max, index })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Longest edge over all triangles.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn corners(&self, tri: usize) -> [Vec2; 3] {
        self.triangles[tri].map(|i| self.vertices[i])
    }

    pub fn area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.corners(tri);
        0.5 * (b - a).cross(c - a).abs()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.len()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, tri: usize) -> Vec2 {
        let [a, b, c] = self.corners(tri);
        (a + b + c) * (1.0 / 3.0)
    }

    /// Closed containment test with a small relative tolerance.
    pub fn contains(&self, tri: usize, p: Vec2) -> bool {
        point_in_triangle(&self.corners(tri), p)
    }

    /// Grid cells of `cells` whose centers lie in the closed triangle.
    pub fn cells_in_triangle(&self, tri: usize, cells: &CellSet) -> Vec<usize> {
        let g = cells.geometry();
        let pts = self.corners(tri);
        let h = g.spacing;
        let xs = pts.map(|p| p.x);
        let ys = pts.map(|p| p.y);
        let lo_x = ((xs.iter().cloned().fold(f64::INFINITY, f64::min) - g.origin.x) / h - 0.5).floor().max(0.0) as usize;
        let lo_y = ((ys.iter().cloned().fold(f64::INFINITY, f64::min) - g.origin.y) / h - 0.5).floor().max(0.0) as usize;
        let hi_x = (((xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - g.origin.x) / h - 0.5).ceil().max(0.0) as usize).min(g.nx - 1);
        let hi_y = (((ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - g.origin.y) / h - 0.5).ceil().max(0.0) as usize).min(g.ny - 1);
        let mut out = Vec::new();
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                let c = g.index(ix, iy);
                if cells.contains(c) && point_in_triangle(&pts, g.center(c)) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Circumcircle `(center, radius)` of a triangle.
    pub fn circumcircle(&self, tri: usize) -> (Vec2, f64) {
        let [a, b, c] = self.corners(tri);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let (a2, b2, c2) = (a.norm_sq(), b.norm_sq(), c.norm_sq());
        let center = Vec2::new(
            (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
            (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
        );
        (center, center.dist(a))
    }
}

pub(crate) fn point_in_triangle(pts: &[Vec2; 3], p: Vec2) -> bool {
    let [a, b, c] = *pts;
    let area2 = (b - a).cross(c - a);
    if area2 == 0.0 {
        return false;
    }
    let tol = BARY_EPS * area2.abs();
    let s = area2.signum();
    let w0 = s * (b - p).cross(c - p);
    let w1 = s * (c - p).cross(a - p);
    let w2 = s * (a - p).cross(b - p);
    w0 >= -tol && w1 >= -tol && w2 >= -tol
}

fn max_edge_of(pts: &[Vec2; 3]) -> f64 {
    pts[0].dist(pts[1]).max(pts[1].dist(pts[2])).max(pts[2].dist(pts[0]))
}

/// Triangulates a subregion for the maximal-update controller.
///
/// Cell centers are sampled on a coarsened lattice whose spacing is at most
/// `max_edge / 2` (never finer than the grid), plus every boundary cell
/// center. The Delaunay triangulation of the samples is clipped to the cell
/// set: a triangle survives when its centroid falls in a member cell and no
/// edge exceeds `max_edge`. `max_edge` must stay below `radius` so that an
/// agent anywhere inside a triangle covers all of it.
pub fn delaunay_triangulate(cells: &CellSet, max_edge: f64, radius: f64) -> Result<TriMesh> {
    if !(max_edge < radius) {
        return Err(Error::MeshEdgeTooLong { max_edge, radius });
    }
    if cells.is_empty() {
        return Err(Error::EmptyCellSet);
    }
    let g = *cells.geometry();
    let stride = ((max_edge / 2.0) / g.spacing).floor().max(1.0) as usize;
    let mut samples: Vec<usize> = cells
        .members()
        .iter()
        .copied()
        .filter(|&c| {
            let (ix, iy) = g.coords(c);
            ix % stride == 0 && iy % stride == 0
        })
        .chain(cells.boundary_cells())
        .collect();
    samples.sort_unstable();
    samples.dedup();
    let points: Vec<Vec2> = samples.iter().map(|&c| g.center(c)).collect();
    let mesh = TriMesh::triangulate(&points, |pts| {
        let centroid = (pts[0] + pts[1] + pts[2]) * (1.0 / 3.0);
        max_edge_of(pts) <= max_edge && cells.contains_point(centroid)
    })?;
    if mesh.is_empty() {
        return Err(Error::TooFewSamples(points.len()));
    }
    Ok(mesh)
}

/// Lowest-index triangle whose closed region contains `p`.
pub fn locate_triangle(mesh: &TriMesh, p: Vec2) -> Option<usize> {
    mesh.index
        .candidates(p)
        .iter()
        .map(|&t| t as usize)
        .find(|&t| mesh.contains(t, p))
}
