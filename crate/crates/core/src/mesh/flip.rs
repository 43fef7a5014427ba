use std::collections::HashMap;
use std::f64::consts::PI;

use super::{max_edge_len_sq, orient, EdgeTopology, Mesh, DEGENERACY_RTOL};
use crate::error::{Error, Result};
use crate::geometry2d::Vec2;

/// The two triangles around an interior edge `i -> j`: `left` is
/// `(i, j, k)` and `right` is `(j, i, l)`, both counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeQuad {
    pub i: usize,
    pub j: usize,
    pub left: usize,
    pub k: usize,
    pub right: usize,
    pub l: usize,
}

/// Mutable working copy of a triangulation that supports edge flips.
/// Triangle ids are stable: a flip rewrites the two triangles in place.
#[derive(Clone, Debug)]
pub struct TriangulationEditor {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    directed: HashMap<(usize, usize), usize>,
}

impl TriangulationEditor {
    pub fn new(m: &Mesh) -> Self {
        let mut directed = HashMap::with_capacity(3 * m.num_triangles());
        for (t, tri) in m.triangles().iter().enumerate() {
            for l in 0..3 {
                directed.insert((tri[l], tri[(l + 1) % 3]), t);
            }
        }
        Self {
            vertices: m.vertices().to_vec(),
            triangles: m.triangles().to_vec(),
            directed,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    fn third(&self, t: usize, a: usize, b: usize) -> usize {
        *self.triangles[t]
            .iter()
            .find(|&&v| v != a && v != b)
            .expect("triangle has a third vertex")
    }

    /// Quad around the interior edge `{a, b}`, oriented so that `left`
    /// traverses `i -> j`; `None` for boundary or absent edges.
    pub fn quad(&self, a: usize, b: usize) -> Option<EdgeQuad> {
        let left = *self.directed.get(&(a, b))?;
        let right = *self.directed.get(&(b, a))?;
        Some(EdgeQuad {
            i: a,
            j: b,
            left,
            k: self.third(left, a, b),
            right,
            l: self.third(right, a, b),
        })
    }

    /// Undirected interior edges `(lo, hi)`, sorted.
    pub fn interior_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .directed
            .keys()
            .filter(|&&(a, b)| a < b && self.directed.contains_key(&(b, a)))
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    pub fn can_flip(&self, q: &EdgeQuad) -> bool {
        let p = |v: usize| self.vertices[v];
        let ok = |a: usize, b: usize, c: usize| {
            orient(p(a), p(b), p(c)) > DEGENERACY_RTOL * max_edge_len_sq(p(a), p(b), p(c))
        };
        ok(q.k, q.i, q.l) && ok(q.l, q.j, q.k)
    }

    /// Replaces edge `{a, b}` by the edge between the two opposite vertices
    /// and returns the new edge.
    pub fn flip(&mut self, a: usize, b: usize) -> Result<(usize, usize)> {
        let q = self.quad(a, b).ok_or(Error::Validation(format!(
            "edge ({a}, {b}) is not an interior edge"
        )))?;
        if !self.can_flip(&q) {
            return Err(Error::NonConvexQuad(a.min(b), a.max(b)));
        }
        let EdgeQuad { i, j, left, k, right, l } = q;
        self.directed.remove(&(i, j));
        self.directed.remove(&(j, i));
        self.triangles[left] = [k, i, l];
        self.triangles[right] = [l, j, k];
        for (t, tri) in [(left, [k, i, l]), (right, [l, j, k])] {
            for s in 0..3 {
                self.directed.insert((tri[s], tri[(s + 1) % 3]), t);
            }
        }
        Ok((k, l))
    }

    /// Overwrites triangles `a` and `b`, keeping the edge map in sync. Used to
    /// undo a [`flip`](Self::flip) given the triangles it replaced.
    pub fn restore_pair(&mut self, a: (usize, [usize; 3]), b: (usize, [usize; 3])) {
        for t in [a.0, b.0] {
            let tri = self.triangles[t];
            for s in 0..3 {
                self.directed.remove(&(tri[s], tri[(s + 1) % 3]));
            }
        }
        for (t, tri) in [a, b] {
            self.triangles[t] = tri;
            for s in 0..3 {
                self.directed.insert((tri[s], tri[(s + 1) % 3]), t);
            }
        }
    }

    pub fn to_mesh(&self) -> Mesh {
        Mesh::from_parts_unchecked(self.vertices.clone(), self.triangles.clone())
    }
}

/// Flips interior edge number `e` of `topo`.
pub fn flip_edge(m: &Mesh, topo: &EdgeTopology, e: usize) -> Result<Mesh> {
    let edge = topo.interior_edges.get(e).ok_or(Error::NotInterior(e))?;
    let mut ed = TriangulationEditor::new(m);
    ed.flip(edge.endpoints.0, edge.endpoints.1)?;
    Ok(ed.to_mesh())
}

fn euclidean_angle(apex: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (u, v) = (a - apex, b - apex);
    u.cross(v).abs().atan2(u.dot(v))
}

/// Lawson's algorithm: flip edges whose opposite angles sum to more than
/// pi until none is left. Returns the Delaunay mesh and the flip count.
pub fn lawson_flip(m: &Mesh) -> Result<(Mesh, usize)> {
    let mut ed = TriangulationEditor::new(m);
    let mut stack = ed.interior_edges();
    stack.reverse();
    let n = m.num_triangles();
    let cap = 10 * n * n;
    let mut flips = 0;
    while let Some((a, b)) = stack.pop() {
        let Some(q) = ed.quad(a, b) else { continue };
        let p = |v: usize| ed.vertices[v];
        let sum = euclidean_angle(p(q.k), p(q.i), p(q.j)) + euclidean_angle(p(q.l), p(q.i), p(q.j));
        if sum <= PI + 1e-13 || !ed.can_flip(&q) {
            continue;
        }
        ed.flip(a, b)?;
        flips += 1;
        if flips >= cap {
            return Err(Error::Validation(format!("edge flipping exceeded {cap} flips")));
        }
        stack.extend([(q.i, q.l), (q.l, q.j), (q.j, q.k), (q.k, q.i)]);
    }
    Ok((ed.to_mesh(), flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_connectivity, generate_grid_mesh, GridPattern, Rect};

    fn sorted_tris(m: &Mesh) -> Vec<[usize; 3]> {
        let mut t: Vec<_> = m
            .triangles()
            .iter()
            .map(|t| {
                // rotate so the smallest index comes first, keeping orientation
                let r = (0..3).min_by_key(|&s| t[s]).unwrap();
                [t[r], t[(r + 1) % 3], t[(r + 2) % 3]]
            })
            .collect();
        t.sort_unstable();
        t
    }

    #[test]
    fn nw_flip_gives_ne() {
        let nw = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::Nw).unwrap();
        let ne = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::Ne).unwrap();
        let topo = build_connectivity(&nw).unwrap();
        let flipped = flip_edge(&nw, &topo, 0).unwrap();
        assert_eq!(sorted_tris(&flipped), sorted_tris(&ne));
        let back = flip_edge(&flipped, &build_connectivity(&flipped).unwrap(), 0).unwrap();
        assert_eq!(sorted_tris(&back), sorted_tris(&nw));
    }

    #[test]
    fn flip_preserves_area_and_validity() {
        let m = generate_grid_mesh(Rect::new(0.0, 0.0, 3.0, 2.0), 3, 2, GridPattern::Nw).unwrap();
        let topo = build_connectivity(&m).unwrap();
        for e in 0..topo.interior_edges.len() {
            if let Ok(f) = flip_edge(&m, &topo, e) {
                let f = Mesh::new(f.vertices().to_vec(), f.triangles().to_vec()).unwrap();
                assert!((f.total_area() - m.total_area()).abs() <= 1e-14 * m.total_area());
                assert_eq!(f.vertices(), m.vertices());
            }
        }
    }

    #[test]
    fn reflex_quad_rejected() {
        // quad 0-3-1-2 has a reflex corner at vertex 1
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(3.0, 1.0),
        ];
        let m = Mesh::new(v, vec![[0, 1, 2], [0, 3, 1]]).unwrap();
        let topo = build_connectivity(&m).unwrap();
        let e = topo.find_interior_edge(0, 1).unwrap();
        assert_eq!(flip_edge(&m, &topo, e), Err(Error::NonConvexQuad(0, 1)));
    }

    #[test]
    fn boundary_edge_is_not_interior() {
        let m = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::Nw).unwrap();
        let topo = build_connectivity(&m).unwrap();
        assert_eq!(flip_edge(&m, &topo, 3), Err(Error::NotInterior(3)));
    }
}
