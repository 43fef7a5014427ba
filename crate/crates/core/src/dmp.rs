//! Mesh conditions for the discrete maximum principle and their checks.
//!
//! For an interior edge `e_ij` shared by triangles `K` and `K'`, let
//! `alpha` and `alpha'` be the angles opposite the edge measured in the
//! metrics `D_K^{-1}` and `D_K'^{-1}`. The stiffness entry is
//!
//! ```text
//! a_ij = -sqrt(det D_K)/2 cot(alpha) - sqrt(det D_K')/2 cot(alpha')
//! ```
//!
//! and `a_ij <= 0` is equivalent to both
//!
//! ```text
//! alpha + arccot(sqrt(det D_K'/det D_K) cot alpha') <= pi
//! 1/2 [alpha + alpha' + arccot(sqrt(det D_K/det D_K') cot alpha)
//!                     + arccot(sqrt(det D_K'/det D_K) cot alpha')] <= pi
//! ```
//!
//! [`edge_condition_report`] evaluates all three and insists they agree.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fem::{average_diffusion, LinearSystem, ProblemSpec, QuadratureRule};
use crate::geometry2d::{arccot, metric_angle, Angle, SpdTensor, Vec2};
use crate::mesh::{EdgeTopology, ElementGeometry, Mesh};
use crate::solver::{dense_inverse, reduce_system};

/// Vertex count up to which [`check_m_matrix`] also inverts `A11`.
pub const DENSE_INVERSE_LIMIT: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Absolute slack on angle conditions, radians.
    pub angle: f64,
    /// Relative slack on sign tests.
    pub relative: f64,
    /// Width of the band around the threshold inside which the forms may
    /// disagree through rounding.
    pub band: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            angle: 1e-10,
            relative: 1e-12,
            band: 1e-9,
        }
    }
}

/// Both condition left-hand sides and the off-diagonal entry for one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionForms {
    pub lhs_symmetric: f64,
    pub lhs_asymmetric: f64,
    pub a_ij: f64,
    /// `max(|c_K|, |c_K'|)` of the two element contributions.
    pub scale: f64,
}

impl ConditionForms {
    /// Evaluates the forms for opposite angles `alpha` (in `K`) and
    /// `alpha_p` (in `K'`) with `det_k = det D_K`, `det_kp = det D_K'`.
    pub fn new(alpha: Angle, det_k: f64, alpha_p: Angle, det_kp: f64) -> Self {
        let (a, ap) = (alpha.radians(), alpha_p.radians());
        let (cot, cot_p) = (alpha.cot(), alpha_p.cot());
        let r = (det_k / det_kp).sqrt();
        let lhs_symmetric = 0.5 * (a + ap + arccot(r * cot).radians() + arccot(cot_p / r).radians());
        let lhs_asymmetric = a + arccot(cot_p / r).radians();
        let c = -0.5 * det_k.sqrt() * cot;
        let c_p = -0.5 * det_kp.sqrt() * cot_p;
        Self {
            lhs_symmetric,
            lhs_asymmetric,
            a_ij: c + c_p,
            scale: c.abs().max(c_p.abs()),
        }
    }

    pub fn sign_verdict(&self, tol: &Tolerance) -> bool {
        self.a_ij <= tol.relative * self.scale
    }

    pub fn symmetric_verdict(&self, tol: &Tolerance) -> bool {
        self.lhs_symmetric <= PI + tol.angle
    }

    pub fn asymmetric_verdict(&self, tol: &Tolerance) -> bool {
        self.lhs_asymmetric <= PI + tol.angle
    }

    /// True when the three verdicts agree, or when the configuration is
    /// within `tol.band` of the threshold in either angle form.
    pub fn consistent(&self, tol: &Tolerance) -> bool {
        let s = self.sign_verdict(tol);
        let agree = s == self.symmetric_verdict(tol) && s == self.asymmetric_verdict(tol);
        agree
            || (self.lhs_symmetric - PI).abs() <= tol.band
            || (self.lhs_asymmetric - PI).abs() <= tol.band
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSide {
    pub triangle: usize,
    /// Angle opposite the edge in the metric `D_K^{-1}`.
    pub metric_angle: Angle,
    pub det: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeReport {
    pub edge: usize,
    pub endpoints: (usize, usize),
    /// `[K, K']` with `K` the left triangle of the edge.
    pub sides: [EdgeSide; 2],
    pub lhs_symmetric: f64,
    pub lhs_asymmetric: f64,
    pub a_ij_value: f64,
    /// Sum of the Euclidean opposite angles.
    pub euclid_angle_sum: f64,
    pub satisfied: bool,
    /// False when both endpoints are boundary vertices: such an entry never
    /// enters an interior row and does not count as a violation.
    pub affects_interior_row: bool,
}

impl EdgeReport {
    pub fn pair_sum(&self) -> f64 {
        self.sides[0].metric_angle.radians() + self.sides[1].metric_angle.radians()
    }

    pub fn is_violation(&self) -> bool {
        !self.satisfied && self.affects_interior_row
    }

    fn to_json(&self) -> Value {
        json!({
            "edge": self.edge,
            "endpoints": [self.endpoints.0, self.endpoints.1],
            "sides": self.sides.iter().map(|s| json!({
                "triangle": s.triangle,
                "metric_angle_over_pi": s.metric_angle.over_pi(),
                "det": s.det,
            })).collect::<Vec<_>>(),
            "lhs_symmetric_over_pi": self.lhs_symmetric / PI,
            "lhs_asymmetric_over_pi": self.lhs_asymmetric / PI,
            "pair_sum_over_pi": self.pair_sum() / PI,
            "a_ij": self.a_ij_value,
            "euclid_angle_sum_over_pi": self.euclid_angle_sum / PI,
            "satisfied": self.satisfied,
            "affects_interior_row": self.affects_interior_row,
        })
    }
}

/// One element angle flagged by [`check_nonobtuse`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObtuseAngle {
    pub triangle: usize,
    /// Global vertex at which the angle sits.
    pub vertex: usize,
    pub angle: Angle,
    /// `q_i^T D_K q_j` for the two other vertices.
    pub q_form: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub edges: Vec<EdgeReport>,
    pub violations_delaunay_type: usize,
    pub violations_nonobtuse: usize,
    /// Index into `edges` of the edge with the largest symmetric lhs.
    pub worst_edge: Option<usize>,
    pub max_metric_angle: f64,
    /// Largest `alpha + alpha'` over interior edges.
    pub max_pair_sum: f64,
}

impl ConditionReport {
    pub fn max_metric_angle_over_pi(&self) -> f64 {
        self.max_metric_angle / PI
    }

    pub fn max_pair_sum_over_pi(&self) -> f64 {
        self.max_pair_sum / PI
    }

    pub fn violating_edges(&self) -> impl Iterator<Item = &EdgeReport> {
        self.edges.iter().filter(|e| e.is_violation())
    }
}

/// Metric angle at `pts[k]` between the other two corners, plus a check
/// that it is usable in a cotangent.
fn opposite_angle(metric: &SpdTensor, pts: [Vec2; 3], k: usize, t: usize) -> Result<Angle> {
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    let a = metric_angle(metric, pts[i] - pts[k], pts[j] - pts[k]).map_err(|e| e.in_triangle(t))?;
    let r = a.radians();
    if r.min(PI - r) < 1e-12 {
        return Err(Error::DegenerateMetricAngle { triangle: t, angle: r });
    }
    Ok(a)
}

fn local_index(tri: &[usize; 3], v: usize) -> usize {
    tri.iter().position(|&x| x == v).expect("vertex belongs to triangle")
}

/// Quadrature-averaged tensor of every triangle.
pub fn element_tensors(m: &Mesh, spec: &ProblemSpec, rule: &QuadratureRule) -> Result<Vec<SpdTensor>> {
    (0..m.num_triangles())
        .map(|t| average_diffusion(spec, m, t, rule))
        .collect()
}

pub fn edge_condition_report(
    m: &Mesh,
    topo: &EdgeTopology,
    spec: &ProblemSpec,
    rule: &QuadratureRule,
    tol: &Tolerance,
) -> Result<ConditionReport> {
    let tensors = element_tensors(m, spec, rule)?;
    let metrics: Vec<SpdTensor> = tensors.iter().map(SpdTensor::inverse).collect();

    let mut edges = Vec::with_capacity(topo.interior_edges.len());
    for (id, e) in topo.interior_edges.iter().enumerate() {
        let side = |t: usize, opp: usize| -> Result<(EdgeSide, f64)> {
            let tri = &m.triangles()[t];
            let pts = m.triangle_points(t);
            let k = local_index(tri, opp);
            let angle = opposite_angle(&metrics[t], pts, k, t)?;
            let euclid = opposite_angle(&SpdTensor::IDENTITY, pts, k, t)?;
            Ok((
                EdgeSide {
                    triangle: t,
                    metric_angle: angle,
                    det: tensors[t].det(),
                },
                euclid.radians(),
            ))
        };
        let (s0, e0) = side(e.left, e.opposite_left).map_err(|err| err.on_edge(id))?;
        let (s1, e1) = side(e.right, e.opposite_right).map_err(|err| err.on_edge(id))?;
        let forms = ConditionForms::new(s0.metric_angle, s0.det, s1.metric_angle, s1.det);
        if !forms.consistent(tol) {
            return Err(Error::InconsistentVerdicts {
                edge: id,
                lhs_symmetric: forms.lhs_symmetric,
                lhs_asymmetric: forms.lhs_asymmetric,
                a_ij: forms.a_ij,
            });
        }
        let (i, j) = e.endpoints;
        edges.push(EdgeReport {
            edge: id,
            endpoints: e.endpoints,
            sides: [s0, s1],
            lhs_symmetric: forms.lhs_symmetric,
            lhs_asymmetric: forms.lhs_asymmetric,
            a_ij_value: forms.a_ij,
            euclid_angle_sum: e0 + e1,
            satisfied: forms.sign_verdict(tol),
            affects_interior_row: topo.interior_vertex[i] || topo.interior_vertex[j],
        });
    }

    let mut max_metric_angle: f64 = 0.0;
    for t in 0..m.num_triangles() {
        let pts = m.triangle_points(t);
        for k in 0..3 {
            let a = opposite_angle(&metrics[t], pts, k, t)?;
            max_metric_angle = max_metric_angle.max(a.radians());
        }
    }
    let obtuse = nonobtuse_with(m, &tensors, tol)?;
    let worst_edge = (0..edges.len()).max_by(|&a, &b| {
        edges[a].lhs_symmetric.total_cmp(&edges[b].lhs_symmetric)
    });
    Ok(ConditionReport {
        violations_delaunay_type: edges.iter().filter(|e| e.is_violation()).count(),
        violations_nonobtuse: obtuse.len(),
        worst_edge,
        max_metric_angle,
        max_pair_sum: edges.iter().map(EdgeReport::pair_sum).fold(0.0, f64::max),
        edges,
    })
}

/// Every element angle exceeding `pi/2` in the metric `D_K^{-1}`.
pub fn check_nonobtuse(
    m: &Mesh,
    spec: &ProblemSpec,
    rule: &QuadratureRule,
    tol: &Tolerance,
) -> Result<Vec<ObtuseAngle>> {
    nonobtuse_with(m, &element_tensors(m, spec, rule)?, tol)
}

fn nonobtuse_with(m: &Mesh, tensors: &[SpdTensor], tol: &Tolerance) -> Result<Vec<ObtuseAngle>> {
    let mut out = Vec::new();
    for (t, tri) in m.triangles().iter().enumerate() {
        let geom = ElementGeometry::new(m.triangle_points(t)).map_err(|e| e.in_triangle(t))?;
        let dk = &tensors[t];
        let metric = dk.inverse();
        let scale = (0..3).map(|i| dk.inner(geom.q[i], geom.q[i])).fold(0.0, f64::max);
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let angle = opposite_angle(&metric, geom.points, k, t)?;
            let q_form = dk.inner(geom.q[i], geom.q[j]);
            let by_angle = angle.radians() > FRAC_PI_2 + tol.angle;
            let by_q = q_form > tol.relative * scale;
            if by_angle != by_q
                && (angle.radians() - FRAC_PI_2).abs() > tol.band
                && q_form.abs() > tol.band * scale
            {
                return Err(Error::Validation(format!(
                    "angle and q-vector forms disagree at vertex {} of triangle {t}",
                    tri[k]
                )));
            }
            if by_q {
                out.push(ObtuseAngle {
                    triangle: t,
                    vertex: tri[k],
                    angle,
                    q_form,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MMatrixReport {
    pub offdiag_nonpositive: bool,
    pub row_sums_nonnegative: bool,
    pub diagonal_positive: bool,
    /// `(row, col, value)` of offending off-diagonal entries.
    pub positive_offdiagonals: Vec<(usize, usize, f64)>,
    pub min_row_sum: f64,
    /// Entrywise nonnegativity of `A11^{-1}`; only for small meshes.
    pub inverse_nonnegative: Option<bool>,
    pub verdict: bool,
}

/// Sign structure of the interior rows: nonpositive off-diagonals,
/// nonnegative row sums and positive diagonals, each relative to the
/// largest entry of the row.
pub fn check_m_matrix(sys: &LinearSystem, tol: &Tolerance) -> MMatrixReport {
    let mut positive = Vec::new();
    let mut row_sums_ok = true;
    let mut diag_ok = true;
    let mut min_row_sum = f64::INFINITY;
    for &i in &sys.interior_ids {
        let scale = sys.matrix.row(i).fold(0.0, |s: f64, (_, v)| s.max(v.abs()));
        let mut sum = 0.0;
        let mut diag = 0.0;
        for (j, v) in sys.matrix.row(i) {
            sum += v;
            if j == i {
                diag = v;
            } else if v > tol.relative * scale {
                positive.push((i, j, v));
            }
        }
        min_row_sum = min_row_sum.min(sum);
        row_sums_ok &= sum >= -tol.relative * scale;
        diag_ok &= diag > 0.0;
    }
    if sys.interior_ids.is_empty() {
        min_row_sum = 0.0;
    }
    let inverse_nonnegative = (sys.num_unknowns() <= DENSE_INVERSE_LIMIT).then(|| {
        let red = reduce_system(sys);
        match dense_inverse(&red.matrix.to_dense()) {
            Some(inv) => {
                let scale = inv.iter().flatten().fold(0.0, |s: f64, v| s.max(v.abs()));
                inv.iter().flatten().all(|&v| v >= -tol.relative * scale)
            }
            None => false,
        }
    });
    let offdiag_ok = positive.is_empty();
    MMatrixReport {
        offdiag_nonpositive: offdiag_ok,
        row_sums_nonnegative: row_sums_ok,
        diagonal_positive: diag_ok,
        positive_offdiagonals: positive,
        min_row_sum,
        inverse_nonnegative,
        verdict: offdiag_ok && row_sums_ok && diag_ok,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `None` when the mesh has no interior vertices.
    pub interior_min: Option<f64>,
    pub interior_max: Option<f64>,
    pub boundary_min: f64,
    pub boundary_max: f64,
    pub overshoot: f64,
    pub undershoot: f64,
}

/// Compares interior nodal values against the Dirichlet data held in the
/// boundary rows of `sys`.
pub fn measure_bounds(u: &[f64], sys: &LinearSystem) -> BoundsReport {
    assert_eq!(u.len(), sys.num_unknowns(), "solution length");
    let minmax = |ids: &[usize], vals: &[f64]| {
        ids.iter().fold(None, |acc: Option<(f64, f64)>, &i| {
            let v = vals[i];
            Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
        })
    };
    let (bmin, bmax) = minmax(&sys.boundary_ids, &sys.rhs).unwrap_or((0.0, 0.0));
    let inner = minmax(&sys.interior_ids, u);
    let (overshoot, undershoot) = match inner {
        Some((lo, hi)) => ((hi - bmax).max(0.0), (bmin - lo).max(0.0)),
        None => (0.0, 0.0),
    };
    BoundsReport {
        interior_min: inner.map(|x| x.0),
        interior_max: inner.map(|x| x.1),
        boundary_min: bmin,
        boundary_max: bmax,
        overshoot,
        undershoot,
    }
}

/// The audit document written by the `check` command.
pub fn report_json(
    cond: &ConditionReport,
    m_matrix: Option<&MMatrixReport>,
    bounds: Option<&BoundsReport>,
) -> Value {
    json!({
        "edges": cond.edges.iter().map(EdgeReport::to_json).collect::<Vec<_>>(),
        "violations_delaunay_type": cond.violations_delaunay_type,
        "violations_nonobtuse": cond.violations_nonobtuse,
        "max_metric_angle_over_pi": cond.max_metric_angle_over_pi(),
        "max_pair_sum_over_pi": cond.max_pair_sum_over_pi(),
        "m_matrix_verdict": m_matrix.map(|r| r.verdict),
        "overshoot": bounds.map(|b| b.overshoot),
        "undershoot": bounds.map(|b| b.undershoot),
    })
}
