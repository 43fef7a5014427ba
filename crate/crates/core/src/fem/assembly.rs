use super::{average_diffusion, element_stiffness_gradient, ProblemSpec, QuadratureRule};
use crate::error::Result;
use crate::mesh::{EdgeTopology, Mesh};
use crate::solver::SparseMatrix;

/// Assembled system `A u = f` over all vertices in natural order.
///
/// Rows of interior vertices hold the stiffness entries (against every
/// vertex, interior or boundary) and the load; rows of boundary vertices
/// are identity rows with right-hand side `g(a_j)`. Under an interior-first
/// permutation this is the block matrix `[[A11, A12], [0, I]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub interior_ids: Vec<usize>,
    pub boundary_ids: Vec<usize>,
}

impl LinearSystem {
    pub fn num_unknowns(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior_ids.binary_search(&i).is_ok()
    }

    /// Dirichlet values at the boundary vertices, in `boundary_ids` order.
    pub fn boundary_values(&self) -> Vec<f64> {
        self.boundary_ids.iter().map(|&j| self.rhs[j]).collect()
    }
}

pub fn assemble(
    spec: &ProblemSpec,
    m: &Mesh,
    topo: &EdgeTopology,
    rule: &QuadratureRule,
) -> Result<LinearSystem> {
    let nv = m.num_vertices();
    let interior = &topo.interior_vertex;
    let mut triplets = Vec::with_capacity(9 * m.num_triangles() + nv);
    let mut rhs = vec![0.0; nv];

    for (t, tri) in m.triangles().iter().enumerate() {
        let geom = m.element_geometry(t)?;
        let dk = average_diffusion(spec, m, t, rule)?;
        let ak = element_stiffness_gradient(&geom, &dk);
        let mut load = [0.0; 3];
        for (w, p, bary) in rule.points_on(geom.points) {
            let fw = w * (spec.source)(p);
            for i in 0..3 {
                load[i] += fw * bary[i];
            }
        }
        for i in 0..3 {
            if !interior[tri[i]] {
                continue;
            }
            for j in 0..3 {
                triplets.push((tri[i], tri[j], ak[i][j]));
            }
            rhs[tri[i]] += geom.area * load[i];
        }
    }
    for j in 0..nv {
        if !interior[j] {
            triplets.push((j, j, 1.0));
            rhs[j] = (spec.dirichlet)(m.vertex(j));
        }
    }
    Ok(LinearSystem {
        matrix: SparseMatrix::from_triplets(nv, nv, &triplets),
        rhs,
        interior_ids: topo.interior_ids(),
        boundary_ids: topo.boundary_ids(),
    })
}
