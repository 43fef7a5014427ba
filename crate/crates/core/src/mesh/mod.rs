//! Triangular meshes: storage, validation, element geometry (edge matrix,
//! q-vectors, heights), connectivity, generators, edge flips and text I/O.

mod flip;
mod generate;
mod io;
mod topology;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry2d::Vec2;

pub use flip::{flip_edge, lawson_flip, EdgeQuad, TriangulationEditor};
pub use generate::{
    generate_delaunay_mesh, generate_delaunay_mesh_with_flips, generate_grid_mesh, DelaunayParams, GridPattern,
    DEFAULT_FOURWAY_FRACTION,
};
pub use io::{read_mesh, write_mesh};
pub use topology::{build_connectivity, BoundaryEdge, EdgeTopology, InteriorEdge};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
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

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }

    fn bounding(points: &[Vec2]) -> Self {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }
}

/// Twice the signed area of `(a, b, c)`; positive for counterclockwise.
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Relative threshold below which a triangle counts as degenerate.
pub(crate) const DEGENERACY_RTOL: f64 = 1e-14;

fn max_edge_len_sq(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let l = |u: Vec2| u.dot(u);
    l(b - a).max(l(c - b)).max(l(a - c))
}

/// A conforming triangulation with counterclockwise, nondegenerate triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    domain: Rect,
}

impl Mesh {
    /// Builds and validates a mesh. The domain is the bounding box of the
    /// vertices.
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some((i, _)) = vertices.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("vertex {i} has non-finite coordinates")));
        }
        let mut seen = HashSet::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Validation(format!(
                    "triangle {t} references vertex {bad} but there are only {} vertices",
                    vertices.len()
                )));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area2 = orient(a, b, c);
            if area2 <= DEGENERACY_RTOL * max_edge_len_sq(a, b, c) {
                let what = if area2 < 0.0 { "clockwise" } else { "degenerate" };
                return Err(Error::Validation(format!(
                    "triangle {t} {tri:?} is {what} (signed area {})",
                    0.5 * area2
                )));
            }
            let mut key = *tri;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::Validation(format!("triangle {t} {tri:?} is a duplicate")));
            }
        }
        let domain = Rect::bounding(&vertices);
        let mesh = Self {
            vertices,
            triangles,
            domain,
        };
        // rejects edges shared by three triangles or by two with equal orientation
        topology::build_connectivity(&mesh).map_err(|e| Error::Validation(e.to_string()))?;
        Ok(mesh)
    }

    pub(crate) fn from_parts_unchecked(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Self {
        let domain = Rect::bounding(&vertices);
        Self {
            vertices,
            triangles,
            domain,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i]
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        ElementGeometry::new(self.triangle_points(t)).map_err(|e| match e {
            Error::DegenerateTriangle { det, .. } => Error::DegenerateTriangle { triangle: t, det },
            e => e,
        })
    }
}

pub fn element_geometry(m: &Mesh, t: usize) -> Result<ElementGeometry> {
    m.element_geometry(t)
}

/// Geometry of one triangle with local vertices `a_1, a_2, a_3`.
///
/// `edge_matrix` has columns `a_2 - a_1` and `a_3 - a_1`. The q-vectors
/// are the columns of its inverse transpose plus `q_1 = -q_2 - q_3`; `q_i`
/// is the gradient of the hat function of local vertex `i` and is an
/// inward normal of the opposite edge with length `1 / h_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub points: [Vec2; 3],
    pub edge_matrix: [[f64; 2]; 2],
    pub q: [Vec2; 3],
    pub area: f64,
    pub heights: [f64; 3],
}

impl ElementGeometry {
    pub fn new(points: [Vec2; 3]) -> Result<Self> {
        let [a1, a2, a3] = points;
        let e1 = a2 - a1;
        let e2 = a3 - a1;
        let det = e1.cross(e2);
        if !(det >= DEGENERACY_RTOL * max_edge_len_sq(a1, a2, a3)) || !det.is_finite() {
            return Err(Error::DegenerateTriangle { triangle: 0, det });
        }
        let q2 = Vec2::new(e2.y, -e2.x) * (1.0 / det);
        let q3 = Vec2::new(-e1.y, e1.x) * (1.0 / det);
        let q1 = -(q2 + q3);
        let q = [q1, q2, q3];
        Ok(Self {
            points,
            edge_matrix: [[e1.x, e2.x], [e1.y, e2.y]],
            q,
            area: 0.5 * det,
            heights: q.map(|qi| 1.0 / qi.norm()),
        })
    }

    /// Edge vectors from the vertex opposite the local edge `(i, j)` to the
    /// endpoints `i` and `j`.
    pub fn edges_at_opposite(&self, i: usize, j: usize) -> (Vec2, Vec2) {
        let k = 3 - i - j;
        (self.points[i] - self.points[k], self.points[j] - self.points[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference() -> [Vec2; 3] {
        [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn reference_triangle_geometry() {
        let g = ElementGeometry::new(reference()).unwrap();
        assert_eq!(g.q[1], Vec2::new(1.0, 0.0));
        assert_eq!(g.q[2], Vec2::new(0.0, 1.0));
        assert_eq!(g.q[0], Vec2::new(-1.0, -1.0));
        assert_eq!(g.area, 0.5);
        assert_abs_diff_eq!(g.heights[0], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(g.edge_matrix, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn scaling_halves_q_vectors() {
        let g = ElementGeometry::new(reference()).unwrap();
        let g2 = ElementGeometry::new(reference().map(|p| p * 2.0)).unwrap();
        for i in 0..3 {
            assert_eq!(g2.q[i], g.q[i] * 0.5);
        }
        assert_eq!(g2.area, 4.0 * g.area);
    }

    #[test]
    fn q_vectors_are_normals_of_opposite_edges() {
        let pts = [Vec2::new(0.3, -0.2), Vec2::new(2.1, 0.4), Vec2::new(0.9, 1.7)];
        let g = ElementGeometry::new(pts).unwrap();
        let s = g.q[0] + g.q[1] + g.q[2];
        assert!(s.norm() < 1e-15);
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let edge = pts[k] - pts[j];
            assert!(g.q[i].dot(edge).abs() < 1e-12);
            // inward: points from the edge toward vertex i
            assert!(g.q[i].dot(pts[i] - pts[j]) > 0.0);
            assert_abs_diff_eq!(g.q[i].norm() * g.heights[i], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 1e-16)];
        assert!(matches!(
            ElementGeometry::new(pts),
            Err(Error::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn mesh_validation() {
        let v = reference().to_vec();
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]]).is_ok());
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 2, 1]]), Err(Error::Validation(_))));
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 3]]), Err(Error::Validation(_))));
        assert!(matches!(
            Mesh::new(v, vec![[0, 1, 2], [1, 2, 0]]),
            Err(Error::Validation(_))
        ));
    }
}
