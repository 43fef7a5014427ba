//! Linear finite elements for `-div(D grad u) = f` with Dirichlet data.
//!
//! Element matrices are available through two independent routes: the
//! q-vector form `|K| q_i^T D_K q_j` and the metric-cotangent form
//! `-sqrt(det D_K)/2 cot(alpha_ij)` with angles measured in `D_K^{-1}`.

mod assembly;
mod element;
mod problem;
mod quadrature;

pub use assembly::{assemble, LinearSystem};
pub use element::{
    average_diffusion, average_diffusion_on, element_stiffness_cotangent, element_stiffness_gradient,
    offdiag_from_metric_angle, ElementMatrix,
};
pub use problem::{Diffusion, ProblemSpec, ScalarField};
pub use quadrature::{builtin_rules, QuadratureRule, RuleKind};
