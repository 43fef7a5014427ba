use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry2d::Vec2;

/// Quadrature on the reference triangle in barycentric form:
/// `int_K v ~ |K| sum_k w_k v(b_k)` with `sum_k w_k = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    weights: Vec<f64>,
    nodes: Vec<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Centroid,
    ThreePoint,
}

impl RuleKind {
    pub fn rule(self) -> QuadratureRule {
        match self {
            RuleKind::Centroid => QuadratureRule::centroid(),
            RuleKind::ThreePoint => QuadratureRule::three_point(),
        }
    }
}

impl QuadratureRule {
    pub fn new(weights: Vec<f64>, nodes: Vec<[f64; 3]>) -> Result<Self> {
        if weights.is_empty() || weights.len() != nodes.len() {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs matching nonempty weights and nodes ({} vs {})",
                weights.len(),
                nodes.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-14 || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "quadrature weights must be nonnegative and sum to 1 (sum = {total})"
            )));
        }
        for b in &nodes {
            if b.iter().any(|c| !(*c >= 0.0)) || (b.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "barycentric node {b:?} must be nonnegative and sum to 1"
                )));
            }
        }
        Ok(Self { weights, nodes })
    }

    pub fn centroid() -> Self {
        let c = 1.0 / 3.0;
        Self {
            weights: vec![1.0],
            nodes: vec![[c, c, c]],
        }
    }

    /// Three interior points `(1/6, 1/6, 2/3)` and permutations, equal weights.
    pub fn three_point() -> Self {
        let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
        let w = 1.0 / 3.0;
        Self {
            weights: vec![w, w, w],
            nodes: vec![[a, a, b], [a, b, a], [b, a, a]],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(weight, physical point, barycentric coordinates)` for each node.
    pub fn points_on(&self, tri: [Vec2; 3]) -> impl Iterator<Item = (f64, Vec2, [f64; 3])> + '_ {
        self.weights.iter().zip(&self.nodes).map(move |(&w, &b)| {
            let p = tri[0] * b[0] + tri[1] * b[1] + tri[2] * b[2];
            (w, p, b)
        })
    }

    /// Integral of `f` over the triangle.
    pub fn integrate(&self, tri: [Vec2; 3], f: impl Fn(Vec2) -> f64) -> f64 {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).abs();
        area * self.points_on(tri).map(|(w, p, _)| w * f(p)).sum::<f64>()
    }
}

pub fn builtin_rules() -> [(RuleKind, QuadratureRule); 2] {
    [
        (RuleKind::Centroid, QuadratureRule::centroid()),
        (RuleKind::ThreePoint, QuadratureRule::three_point()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const REF: [Vec2; 3] = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];

    #[test]
    fn weights_sum_to_one_as_stored() {
        for (_, r) in builtin_rules() {
            assert_eq!(r.weights().iter().sum::<f64>(), 1.0);
            for b in r.nodes() {
                assert_abs_diff_eq!(b.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn three_point_nodes() {
        let r = QuadratureRule::three_point();
        assert_eq!(r.nodes()[0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]);
        assert_eq!(r.weights(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn exactness() {
        // int_ref xi*eta = 1/24, int_ref xi = 1/6, int_ref xi^2 = 1/12
        let tp = QuadratureRule::three_point();
        assert_abs_diff_eq!(tp.integrate(REF, |p| p.x * p.y), 1.0 / 24.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tp.integrate(REF, |p| p.x * p.x), 1.0 / 12.0, epsilon = 1e-15);
        let c = QuadratureRule::centroid();
        assert_abs_diff_eq!(c.integrate(REF, |p| p.x), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.integrate(REF, |p| 2.0 - p.y), 2.0 * 0.5 - 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_rules() {
        assert!(QuadratureRule::new(vec![0.5], vec![[1.0, 0.0, 0.0]]).is_err());
        assert!(QuadratureRule::new(vec![1.0], vec![[0.5, 0.6, -0.1]]).is_err());
        assert!(QuadratureRule::new(vec![1.0], vec![]).is_err());
        assert!(QuadratureRule::new(vec![1.0], vec![[0.2, 0.3, 0.5]]).is_ok());
    }
}
