use serde::Serialize;

use super::Mesh;
use crate::error::{Error, Result};

/// An edge shared by two triangles.
///
/// `left` is the triangle that traverses `endpoints.0 -> endpoints.1`
/// counterclockwise; `right` traverses it the other way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InteriorEdge {
    pub endpoints: (usize, usize),
    pub left: usize,
    pub right: usize,
    pub opposite_left: usize,
    pub opposite_right: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryEdge {
    pub endpoints: (usize, usize),
    pub triangle: usize,
    pub opposite: usize,
}

/// Edge adjacency of a mesh. Edges are sorted by their (ascending)
/// endpoint pair, so edge ids are stable for a given mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTopology {
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Triangles incident to each vertex, ascending.
    pub vertex_patches: Vec<Vec<usize>>,
    pub interior_vertex: Vec<bool>,
}

impl EdgeTopology {
    pub fn num_interior_vertices(&self) -> usize {
        self.interior_vertex.iter().filter(|&&b| b).count()
    }

    pub fn interior_ids(&self) -> Vec<usize> {
        (0..self.interior_vertex.len())
            .filter(|&i| self.interior_vertex[i])
            .collect()
    }

    pub fn boundary_ids(&self) -> Vec<usize> {
        (0..self.interior_vertex.len())
            .filter(|&i| !self.interior_vertex[i])
            .collect()
    }

    pub fn is_boundary_vertex(&self, i: usize) -> bool {
        !self.interior_vertex[i]
    }

    pub fn find_interior_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.interior_edges
            .binary_search_by(|e| e.endpoints.cmp(&key))
            .ok()
    }
}

pub fn build_connectivity(m: &Mesh) -> Result<EdgeTopology> {
    let nv = m.num_vertices();
    // (lo, hi, triangle, opposite vertex, traverses lo -> hi)
    let mut half_edges: Vec<(usize, usize, usize, usize, bool)> =
        Vec::with_capacity(3 * m.num_triangles());
    let mut vertex_patches = vec![Vec::new(); nv];
    for (t, tri) in m.triangles().iter().enumerate() {
        for l in 0..3 {
            let (a, b, c) = (tri[l], tri[(l + 1) % 3], tri[(l + 2) % 3]);
            half_edges.push((a.min(b), a.max(b), t, c, a < b));
            vertex_patches[a].push(t);
        }
    }
    half_edges.sort_unstable();

    let mut interior_edges = Vec::new();
    let mut boundary_edges = Vec::new();
    let mut on_boundary = vec![false; nv];
    let mut i = 0;
    while i < half_edges.len() {
        let (lo, hi, ..) = half_edges[i];
        let mut j = i + 1;
        while j < half_edges.len() && half_edges[j].0 == lo && half_edges[j].1 == hi {
            j += 1;
        }
        match &half_edges[i..j] {
            [(_, _, t, opp, _)] => {
                boundary_edges.push(BoundaryEdge {
                    endpoints: (lo, hi),
                    triangle: *t,
                    opposite: *opp,
                });
                on_boundary[lo] = true;
                on_boundary[hi] = true;
            }
            [first, second] if first.4 != second.4 => {
                let (l, r) = if first.4 { (first, second) } else { (second, first) };
                interior_edges.push(InteriorEdge {
                    endpoints: (lo, hi),
                    left: l.2,
                    right: r.2,
                    opposite_left: l.3,
                    opposite_right: r.3,
                });
            }
            _ => return Err(Error::NonManifold(lo, hi)),
        }
        i = j;
    }
    for p in &mut vertex_patches {
        p.sort_unstable();
    }
    Ok(EdgeTopology {
        interior_edges,
        boundary_edges,
        vertex_patches,
        interior_vertex: on_boundary.iter().map(|&b| !b).collect(),
    })
}
