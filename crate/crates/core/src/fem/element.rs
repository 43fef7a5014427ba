use super::{ProblemSpec, QuadratureRule};
use crate::error::{Error, Result};
use crate::geometry2d::{metric_angle, Angle, SpdTensor, Vec2};
use crate::mesh::{ElementGeometry, Mesh};

pub type ElementMatrix = [[f64; 3]; 3];

/// `D_K = sum_k w_k D(b_k)`, the quadrature average of the diffusion over
/// triangle `t`. Returns a constant field unchanged.
pub fn average_diffusion(
    spec: &ProblemSpec,
    m: &Mesh,
    t: usize,
    rule: &QuadratureRule,
) -> Result<SpdTensor> {
    average_diffusion_on(spec, m.triangle_points(t), rule).map_err(|e| e.in_triangle(t))
}

/// [`average_diffusion`] for a triangle given by its corner points.
pub fn average_diffusion_on(
    spec: &ProblemSpec,
    pts: [Vec2; 3],
    rule: &QuadratureRule,
) -> Result<SpdTensor> {
    if let Some(d) = spec.diffusion.as_constant() {
        return Ok(d);
    }
    let samples = rule
        .points_on(pts)
        .map(|(w, p, _)| Ok((w, spec.diffusion.at(p)?)))
        .collect::<Result<Vec<_>>>()?;
    SpdTensor::weighted_average(samples)
}

/// `A_K[i][j] = |K| q_i^T D_K q_j`.
pub fn element_stiffness_gradient(geom: &ElementGeometry, dk: &SpdTensor) -> ElementMatrix {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = geom.area * dk.inner(geom.q[i], geom.q[j]);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

/// Off-diagonal stiffness contribution of one element in terms of the
/// metric angle opposite the edge: `-sqrt(det D_K)/2 * cot(alpha)`.
#[inline]
pub fn offdiag_from_metric_angle(det_dk: f64, angle: Angle) -> f64 {
    -0.5 * det_dk.sqrt() * angle.cot()
}

/// Element matrix through metric cotangents: each off-diagonal entry is
/// [`offdiag_from_metric_angle`] of the angle at the third vertex, measured
/// in `D_K^{-1}`; diagonals make every row sum to zero.
pub fn element_stiffness_cotangent(m: &Mesh, t: usize, dk: &SpdTensor) -> Result<ElementMatrix> {
    let pts = m.triangle_points(t);
    if let Err(Error::DegenerateTriangle { det, .. }) = ElementGeometry::new(pts) {
        return Err(Error::DegenerateTriangle { triangle: t, det });
    }
    let metric = dk.inverse();
    let det = dk.det();
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in (i + 1)..3 {
            let k = 3 - i - j;
            let angle = metric_angle(&metric, pts[i] - pts[k], pts[j] - pts[k])
                .map_err(|e| e.in_triangle(t))?;
            let r = angle.radians();
            if r.min(std::f64::consts::PI - r) < 1e-12 {
                return Err(Error::DegenerateMetricAngle { triangle: t, angle: r });
            }
            let v = offdiag_from_metric_angle(det, angle);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    for i in 0..3 {
        a[i][i] = -(0..3).filter(|&j| j != i).map(|j| a[i][j]).sum::<f64>();
    }
    Ok(a)
}
