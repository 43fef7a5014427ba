use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{flip::lawson_flip, orient, Mesh, Rect};
use crate::error::{Error, Result};
use crate::geometry2d::Vec2;

pub const DEFAULT_FOURWAY_FRACTION: f64 = 0.75;

/// How each grid cell is split into triangles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridPattern {
    /// Two triangles sharing the northwest diagonal (lower-right to upper-left).
    Nw,
    /// Two triangles sharing the northeast diagonal (lower-left to upper-right).
    Ne,
    /// Four triangles around an interior point at cell fraction `(f, f)`.
    FourWay(f64),
}

impl GridPattern {
    pub fn name(&self) -> &'static str {
        match self {
            GridPattern::Nw => "nw",
            GridPattern::Ne => "ne",
            GridPattern::FourWay(_) => "fourway",
        }
    }
}

fn grid_points(domain: Rect, nx: usize, ny: usize) -> Vec<Vec2> {
    let hx = domain.width() / nx as f64;
    let hy = domain.height() / ny as f64;
    let mut pts = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // pin the last row/column to the exact domain edge
        let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * hy };
        for i in 0..=nx {
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * hx };
            pts.push(Vec2::new(x, y));
        }
    }
    pts
}

/// Structured triangulation of `domain` with `nx * ny` cells, vertices
/// numbered row by row from the lower-left corner. FOURWAY cell centres are
/// appended after the grid vertices, again row by row.
pub fn generate_grid_mesh(domain: Rect, nx: usize, ny: usize, pattern: GridPattern) -> Result<Mesh> {
    if nx < 1 || ny < 1 {
        return Err(Error::BadResolution { nx, ny });
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(Error::InvalidParameter(format!("empty domain {domain:?}")));
    }
    let mut vertices = grid_points(domain, nx, ny);
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let per_cell = if matches!(pattern, GridPattern::FourWay(_)) { 4 } else { 2 };
    let mut triangles = Vec::with_capacity(per_cell * nx * ny);
    if let GridPattern::FourWay(f) = pattern {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "four-way fraction must lie in (0, 1), got {f}"
            )));
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            match pattern {
                GridPattern::Ne => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                GridPattern::Nw => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
                GridPattern::FourWay(f) => {
                    let (pa, pc) = (vertices[a], vertices[c]);
                    let p = vertices.len();
                    vertices.push(Vec2::new(pa.x + f * (pc.x - pa.x), pa.y + f * (pc.y - pa.y)));
                    triangles.push([a, b, p]);
                    triangles.push([b, c, p]);
                    triangles.push([c, d, p]);
                    triangles.push([d, a, p]);
                }
            }
        }
    }
    Mesh::new(vertices, triangles)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaunayParams {
    /// Maximum displacement per coordinate in cell widths, in `[0, 0.49]`.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for DelaunayParams {
    fn default() -> Self {
        Self {
            jitter: 0.3,
            seed: 42,
        }
    }
}

/// Jittered grid points triangulated cell by cell, then Lawson-flipped to a
/// Euclidean Delaunay triangulation. Boundary points only move along the
/// boundary and corners stay fixed.
pub fn generate_delaunay_mesh(domain: Rect, nx: usize, ny: usize, params: DelaunayParams) -> Result<Mesh> {
    Ok(generate_delaunay_mesh_with_flips(domain, nx, ny, params)?.0)
}

/// Like [`generate_delaunay_mesh`], also returning the number of flips done.
pub fn generate_delaunay_mesh_with_flips(
    domain: Rect,
    nx: usize,
    ny: usize,
    params: DelaunayParams,
) -> Result<(Mesh, usize)> {
    if nx < 1 || ny < 1 {
        return Err(Error::BadResolution { nx, ny });
    }
    if !(0.0..=0.49).contains(&params.jitter) {
        return Err(Error::InvalidParameter(format!(
            "jitter must lie in [0, 0.49], got {}",
            params.jitter
        )));
    }
    let hx = domain.width() / nx as f64;
    let hy = domain.height() / ny as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut vertices = grid_points(domain, nx, ny);
    for j in 0..=ny {
        for i in 0..=nx {
            // draw both coordinates for every point so the stream is layout independent
            let dx = params.jitter * hx * rng.gen_range(-1.0..=1.0);
            let dy = params.jitter * hy * rng.gen_range(-1.0..=1.0);
            let p = &mut vertices[j * (nx + 1) + i];
            if i > 0 && i < nx {
                p.x += dx;
            }
            if j > 0 && j < ny {
                p.y += dy;
            }
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            let [pa, pb, pc, pd] = [a, b, c, d].map(|v| vertices[v]);
            if orient(pa, pb, pc) > 0.0 && orient(pa, pc, pd) > 0.0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let start = Mesh::new(vertices, triangles)?;
    lawson_flip(&start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry2d::SpdTensor;
    use crate::mesh::build_connectivity;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn single_cell_ne() {
        let m = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::Ne).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 3], [0, 3, 2]]);
    }

    #[test]
    fn single_cell_fourway() {
        let m = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::FourWay(0.75)).unwrap();
        assert_eq!(m.num_triangles(), 4);
        assert_eq!(m.vertex(4), Vec2::new(0.75, 0.75));
        assert!(m.triangles().iter().all(|t| t.contains(&4)));
    }

    #[test]
    fn counts() {
        let d = Rect::new(0.0, 0.0, 16.0, 16.0);
        for (p, per) in [(GridPattern::Nw, 2), (GridPattern::Ne, 2), (GridPattern::FourWay(0.75), 4)] {
            let m = generate_grid_mesh(d, 5, 3, p).unwrap();
            assert_eq!(m.num_triangles(), per * 15);
            let extra = if per == 4 { 15 } else { 0 };
            assert_eq!(m.num_vertices(), 24 + extra);
            assert!((m.total_area() - 256.0).abs() <= 1e-10 * 256.0);
        }
    }

    #[test]
    fn bad_resolution() {
        assert_eq!(
            generate_grid_mesh(Rect::unit(), 0, 3, GridPattern::Nw),
            Err(Error::BadResolution { nx: 0, ny: 3 })
        );
        assert!(generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::FourWay(1.0)).is_err());
    }

    #[test]
    fn unjittered_grid_needs_no_flips() {
        let p = DelaunayParams { jitter: 0.0, seed: 1 };
        let (m, flips) = generate_delaunay_mesh_with_flips(Rect::unit(), 6, 6, p).unwrap();
        assert_eq!(flips, 0);
        assert_eq!(m, generate_grid_mesh(Rect::unit(), 6, 6, GridPattern::Ne).unwrap());
    }

    #[test]
    fn delaunay_is_deterministic() {
        let d = Rect::new(0.0, 0.0, 16.0, 16.0);
        let a = generate_delaunay_mesh(d, 12, 12, DelaunayParams::default()).unwrap();
        let b = generate_delaunay_mesh(d, 12, 12, DelaunayParams::default()).unwrap();
        assert_eq!(a, b);
    }

    fn assert_delaunay(m: &Mesh) {
        let topo = build_connectivity(m).unwrap();
        for e in &topo.interior_edges {
            let (i, j) = e.endpoints;
            let angle = |k: usize| {
                crate::geometry2d::metric_angle(
                    &SpdTensor::IDENTITY,
                    m.vertex(i) - m.vertex(k),
                    m.vertex(j) - m.vertex(k),
                )
                .unwrap()
                .radians()
            };
            let sum = angle(e.opposite_left) + angle(e.opposite_right);
            assert!(sum <= PI + 1e-12, "edge {:?} has angle sum {}", e.endpoints, sum);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn delaunay_mesh_properties(seed in 0u64..1000, n in 2usize..14, jitter in 0.0..0.49f64) {
            let d = Rect::new(-1.0, 2.0, 3.0, 5.0);
            let m = generate_delaunay_mesh(d, n, n + 1, DelaunayParams { jitter, seed }).unwrap();
            assert_delaunay(&m);
            prop_assert!((m.total_area() - d.area()).abs() <= 1e-10 * d.area());
            prop_assert_eq!(m.num_triangles(), 2 * n * (n + 1));
        }

        #[test]
        fn q_vector_identities_on_generated_meshes(n in 1usize..6, f in 0.05..0.95f64, which in 0usize..4) {
            let d = Rect::new(0.0, 0.0, 16.0, 16.0);
            let m = match which {
                0 => generate_grid_mesh(d, n, n, GridPattern::Nw),
                1 => generate_grid_mesh(d, n, n + 2, GridPattern::Ne),
                2 => generate_grid_mesh(d, n + 1, n, GridPattern::FourWay(f)),
                _ => generate_delaunay_mesh(d, n + 1, n + 1, DelaunayParams { jitter: f * 0.49, seed: n as u64 }),
            }.unwrap();
            for t in 0..m.num_triangles() {
                let g = m.element_geometry(t).unwrap();
                let s = g.q[0] + g.q[1] + g.q[2];
                prop_assert!(s.norm() <= 1e-12 * g.q[0].norm());
                for i in 0..3 {
                    prop_assert!((g.q[i].norm() * g.heights[i] - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}
