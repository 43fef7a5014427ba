//! Linear finite elements for anisotropic diffusion on triangular meshes,
//! with auditing of the Delaunay-type mesh condition that guarantees a
//! discrete maximum principle (DMP).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry2d`]: vectors, SPD tensors, metric angles, `arccot`.
//! - [`mesh`]: triangle meshes, connectivity, q-vectors, generators, flips, I/O.
//! - [`fem`]: quadrature, element stiffness matrices, global assembly.
//! - [`solver`]: CSR storage, Dirichlet reduction, preconditioned CG.
//! - [`dmp`]: per-edge condition reports, M-matrix checks, solution bounds.
//! - [`swap`]: edge swapping driven by the Delaunay-type condition.
//! - [`experiment`]: the anisotropic benchmark, sweeps, region maps, contours.

pub mod dmp;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod geometry2d;
pub mod mesh;
pub mod solver;
pub mod swap;

pub use error::{Error, Result};
pub use geometry2d::{arccot, make_spd, metric_angle, metric_norm, Angle, SpdTensor, Vec2};
pub use mesh::{EdgeTopology, Mesh, Rect};
