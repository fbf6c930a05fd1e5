use super::mesh::point_in_triangle;
use super::TriMesh;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.dist(p) <= self.radius
    }
}

/// Smallest circle centered at `p` that covers triangle `tri`: its radius is
/// the distance from `p` to the farthest vertex, which never exceeds the
/// mesh's longest edge.
pub fn min_cover_circle(mesh: &TriMesh, tri: usize, p: Vec2) -> Result<Circle> {
    let corners = mesh.corners(tri);
    if !point_in_triangle(&corners, p) {
        return Err(Error::PointOutsideTriangle { triangle: tri, x: p.x, y: p.y });
    }
    let radius = corners.iter().map(|v| v.dist(p)).fold(0.0, f64::max);
    assert!(
        radius <= mesh.h_max() * (1.0 + 1e-9),
        "covering radius {radius} exceeds the mesh's longest edge {}",
        mesh.h_max()
    );
    Ok(Circle { center: p, radius })
}
