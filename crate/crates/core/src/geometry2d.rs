//! Small fixed-size linear algebra in the plane: vectors, symmetric
//! positive-definite 2x2 tensors, metric norms and metric angles.
//!
//! Everything here is a plain `Copy` value type; all functions are pure.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Symmetric strictly positive-definite 2x2 tensor, stored as its upper
/// triangle `[[d11, d12], [d12, d22]]`.
///
/// The only way to obtain one is through [`SpdTensor::new`] (or the
/// operations on an existing tensor), so every value satisfies
/// `d11 > 0` and `d11 * d22 - d12^2 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpdTensor {
    d11: f64,
    d12: f64,
    d22: f64,
}

impl SpdTensor {
    pub const IDENTITY: SpdTensor = SpdTensor {
        d11: 1.0,
        d12: 0.0,
        d22: 1.0,
    };

    pub fn new(d11: f64, d12: f64, d22: f64) -> Result<Self> {
        let det = d11 * d22 - d12 * d12;
        let finite = d11.is_finite() && d12.is_finite() && d22.is_finite();
        if !finite || d11 <= 0.0 || !(det > 0.0) {
            return Err(Error::NotSpd { d11, d12, d22, det });
        }
        Ok(Self { d11, d12, d22 })
    }

    pub fn diag(a: f64, b: f64) -> Result<Self> {
        Self::new(a, 0.0, b)
    }

    pub fn d11(&self) -> f64 {
        self.d11
    }

    pub fn d12(&self) -> f64 {
        self.d12
    }

    pub fn d22(&self) -> f64 {
        self.d22
    }

    pub fn components(&self) -> [f64; 3] {
        [self.d11, self.d12, self.d22]
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.d11 * self.d22 - self.d12 * self.d12
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.d11 * v.x + self.d12 * v.y,
            self.d12 * v.x + self.d22 * v.y,
        )
    }

    /// Bilinear form `u^T T v`.
    #[inline]
    pub fn inner(&self, u: Vec2, v: Vec2) -> f64 {
        // written symmetric in u and v so that inner(u, v) == inner(v, u) bitwise
        self.d11 * (u.x * v.x) + self.d12 * (u.x * v.y + u.y * v.x) + self.d22 * (u.y * v.y)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.d11, c * self.d12, c * self.d22)
    }

    pub fn inverse(&self) -> SpdTensor {
        let det = self.det();
        SpdTensor {
            d11: self.d22 / det,
            d12: -self.d12 / det,
            d22: self.d11 / det,
        }
    }

    /// Eigenvalues sorted descending together with the unit eigenvector of
    /// the larger one. The second eigenvector is its rotation by +90 degrees.
    pub fn eigen(&self) -> ((f64, f64), Vec2) {
        let mean = 0.5 * (self.d11 + self.d22);
        let half_diff = 0.5 * (self.d11 - self.d22);
        let radius = half_diff.hypot(self.d12);
        let lambda1 = mean + radius;
        // det / lambda1 avoids cancellation in mean - radius.
        let lambda2 = self.det() / lambda1;
        let theta = 0.5 * (2.0 * self.d12).atan2(self.d11 - self.d22);
        ((lambda1, lambda2), Vec2::new(theta.cos(), theta.sin()))
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        self.eigen().0
    }

    /// `V diag(f(l1), f(l2)) V^T` for the eigen-decomposition `V`.
    fn spectral_map(&self, f: impl Fn(f64) -> f64) -> SpdTensor {
        let ((l1, l2), v) = self.eigen();
        let (c, s) = (v.x, v.y);
        let (f1, f2) = (f(l1), f(l2));
        SpdTensor {
            d11: f1 * c * c + f2 * s * s,
            d12: (f1 - f2) * c * s,
            d22: f1 * s * s + f2 * c * c,
        }
    }

    pub fn sqrt(&self) -> SpdTensor {
        self.spectral_map(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> SpdTensor {
        self.spectral_map(|l| 1.0 / l.sqrt())
    }

    pub fn invariants(&self) -> TensorInvariants {
        TensorInvariants {
            det: self.det(),
            inverse: self.inverse(),
            sqrt: self.sqrt(),
            inv_sqrt: self.inv_sqrt(),
            eigenvalues: self.eigenvalues(),
        }
    }

    /// Convex combination `sum w_k T_k`. Weights must be nonnegative and sum
    /// to one; the result is then SPD again.
    pub fn weighted_average(items: impl IntoIterator<Item = (f64, SpdTensor)>) -> Result<Self> {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (w, t) in items {
            a += w * t.d11;
            b += w * t.d12;
            c += w * t.d22;
        }
        Self::new(a, b, c)
    }
}

impl<'de> Deserialize<'de> for SpdTensor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            d11: f64,
            d12: f64,
            d22: f64,
        }
        let raw = Raw::deserialize(de)?;
        SpdTensor::new(raw.d11, raw.d12, raw.d22).map_err(serde::de::Error::custom)
    }
}

pub fn make_spd(d11: f64, d12: f64, d22: f64) -> Result<SpdTensor> {
    SpdTensor::new(d11, d12, d22)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorInvariants {
    pub det: f64,
    pub inverse: SpdTensor,
    pub sqrt: SpdTensor,
    pub inv_sqrt: SpdTensor,
    pub eigenvalues: (f64, f64),
}

pub fn tensor_invariants(t: &SpdTensor) -> TensorInvariants {
    t.invariants()
}

/// An angle in `[0, pi]`, in radians.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Angle(f64);

impl Angle {
    pub fn from_radians(radians: f64) -> Self {
        debug_assert!((0.0..=PI).contains(&radians), "angle {radians} out of [0, pi]");
        Angle(radians)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The angle in multiples of pi.
    #[inline]
    pub fn over_pi(self) -> f64 {
        self.0 / PI
    }

    #[inline]
    pub fn cot(self) -> f64 {
        1.0 / self.0.tan()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}pi", self.over_pi())
    }
}

/// `sqrt(v^T T v)`.
pub fn metric_norm(t: &SpdTensor, v: Vec2) -> f64 {
    t.inner(v, v).max(0.0).sqrt()
}

/// Angle between `u` and `v` in the inner product induced by `t`.
///
/// This is `arccos(u^T T v / (|u|_T |v|_T))`, evaluated through the
/// equivalent `atan2(sqrt(det T) |u x v|, u^T T v)` so that angles near 0
/// and pi keep full relative accuracy.
pub fn metric_angle(t: &SpdTensor, u: Vec2, v: Vec2) -> Result<Angle> {
    if metric_norm(t, u) < 1e-300 || metric_norm(t, v) < 1e-300 {
        return Err(Error::DegenerateVector);
    }
    let cos_part = t.inner(u, v);
    let sin_part = t.det().sqrt() * u.cross(v).abs();
    Ok(Angle(sin_part.atan2(cos_part)))
}

/// Inverse cotangent with range `(0, pi)`: the unique `theta` there with
/// `cot(theta) = x`. `+inf` maps to 0 and `-inf` to pi.
pub fn arccot(x: f64) -> Angle {
    Angle(1.0_f64.atan2(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn benchmark() -> SpdTensor {
        make_spd(500.5, 499.5, 500.5).unwrap()
    }

    fn mat_mul(a: &SpdTensor, b: &SpdTensor) -> [[f64; 2]; 2] {
        let a = [[a.d11, a.d12], [a.d12, a.d22]];
        let b = [[b.d11, b.d12], [b.d12, b.d22]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    fn assert_identity(m: [[f64; 2]; 2], tol: f64) {
        assert_abs_diff_eq!(m[0][0], 1.0, epsilon = tol);
        assert_abs_diff_eq!(m[1][1], 1.0, epsilon = tol);
        assert_abs_diff_eq!(m[0][1], 0.0, epsilon = tol);
        assert_abs_diff_eq!(m[1][0], 0.0, epsilon = tol);
    }

    // Textbook arccos form with clamping; independent of the atan2 route.
    fn angle_by_cosine(t: &SpdTensor, u: Vec2, v: Vec2) -> f64 {
        let c = t.inner(u, v) / (metric_norm(t, u) * metric_norm(t, v));
        c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn make_spd_cases() {
        assert_eq!(make_spd(1.0, 0.0, 1.0).unwrap(), SpdTensor::IDENTITY);
        let d = benchmark();
        assert_eq!(d.components(), [500.5, 499.5, 500.5]);
        match make_spd(1.0, 2.0, 1.0) {
            Err(Error::NotSpd { det, .. }) => assert_eq!(det, -3.0),
            other => panic!("expected NotSpd, got {other:?}"),
        }
        assert!(make_spd(-1.0, 0.0, -1.0).is_err());
        assert!(make_spd(0.0, 0.0, 1.0).is_err());
        assert!(make_spd(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn identity_invariants() {
        let inv = tensor_invariants(&SpdTensor::IDENTITY);
        assert_eq!(inv.det, 1.0);
        assert_eq!(inv.inverse, SpdTensor::IDENTITY);
        assert_eq!(inv.eigenvalues, (1.0, 1.0));
        assert_identity(mat_mul(&inv.sqrt, &inv.sqrt), 1e-15);
    }

    #[test]
    fn benchmark_invariants() {
        let d = benchmark();
        let inv = d.invariants();
        // 500.5^2 - 499.5^2 = (500.5 - 499.5)(500.5 + 499.5)
        assert_eq!(inv.det, 1000.0);
        let (l1, l2) = inv.eigenvalues;
        assert_abs_diff_eq!(l1, 1000.0, epsilon = 1e-10);
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-12);
        let (_, v) = d.eigen();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v.x, s, epsilon = 1e-15);
        assert_abs_diff_eq!(v.y, s, epsilon = 1e-15);
        let w = Vec2::new(1.0, -1.0);
        let dw = d.apply(w);
        assert_abs_diff_eq!(dw.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dw.y, -1.0, epsilon = 1e-12);
        assert_identity(mat_mul(&inv.inverse, &d), 1e-12);
        assert_identity(mat_mul(&inv.inv_sqrt, &inv.sqrt), 1e-12);
        let sq = mat_mul(&inv.sqrt, &inv.sqrt);
        assert_abs_diff_eq!(sq[0][0] / d.d11(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq[0][1] / d.d12(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn metric_norm_cases() {
        assert_eq!(metric_norm(&SpdTensor::IDENTITY, Vec2::new(3.0, 4.0)), 5.0);
        let t = SpdTensor::diag(4.0, 1.0).unwrap();
        assert_eq!(metric_norm(&t, Vec2::new(1.0, 0.0)), 2.0);
        assert_eq!(metric_norm(&benchmark(), Vec2::ZERO), 0.0);
    }

    #[test]
    fn metric_angle_cases() {
        let id = SpdTensor::IDENTITY;
        let a = metric_angle(&id, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(a.radians(), PI / 2.0, epsilon = 1e-15);
        let t = SpdTensor::diag(0.25, 1.0).unwrap();
        let a = metric_angle(&t, Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(a.radians(), (1.0 / 5f64.sqrt()).acos(), epsilon = 1e-14);
        assert_abs_diff_eq!(a.radians(), 1.10715, epsilon = 1e-5);
        let a = metric_angle(&id, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(a.radians(), 0.0);
        assert_eq!(
            metric_angle(&id, Vec2::ZERO, Vec2::new(1.0, 0.0)),
            Err(Error::DegenerateVector)
        );
    }

    #[test]
    fn arccot_cases() {
        assert_abs_diff_eq!(arccot(0.0).radians(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(arccot(1.0).radians(), PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(arccot(-1.0).radians(), 3.0 * PI / 4.0, epsilon = 1e-15);
        assert_eq!(arccot(f64::INFINITY).radians(), 0.0);
        assert_eq!(arccot(f64::NEG_INFINITY).radians(), PI);
    }

    fn spd_strategy() -> impl Strategy<Value = SpdTensor> {
        (0.0..PI, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(theta, a, b)| {
            let (l1, l2) = (10f64.powf(a), 10f64.powf(b));
            let (c, s) = (theta.cos(), theta.sin());
            SpdTensor::new(l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c)
                .unwrap()
        })
    }

    fn nonzero_vec() -> impl Strategy<Value = Vec2> {
        (0.0..2.0 * PI, 0.1..10.0f64).prop_map(|(phi, r)| Vec2::new(r * phi.cos(), r * phi.sin()))
    }

    proptest! {
        #[test]
        fn metric_angle_is_symmetric(t in spd_strategy(), u in nonzero_vec(), v in nonzero_vec()) {
            let a = metric_angle(&t, u, v).unwrap().radians();
            let b = metric_angle(&t, v, u).unwrap().radians();
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn metric_angle_matches_cosine_form(t in spd_strategy(), u in nonzero_vec(), v in nonzero_vec()) {
            let a = metric_angle(&t, u, v).unwrap().radians();
            let b = angle_by_cosine(&t, u, v);
            // compare cosines: arccos itself is ill-conditioned near 0 and pi
            prop_assert!((a.cos() - b.cos()).abs() <= 1e-12, "{a} vs {b}");
        }

        #[test]
        fn identity_metric_is_euclidean(u in nonzero_vec(), v in nonzero_vec()) {
            let a = metric_angle(&SpdTensor::IDENTITY, u, v).unwrap().radians();
            let e = u.cross(v).abs().atan2(u.dot(v));
            prop_assert!((a - e).abs() <= 1e-12);
        }

        #[test]
        fn metric_angle_scale_invariant(
            t in spd_strategy(), u in nonzero_vec(), v in nonzero_vec(),
            su in -6.0..6.0f64, sv in -6.0..6.0f64,
        ) {
            let a = metric_angle(&t, u, v).unwrap().radians();
            let b = metric_angle(&t, u * 10f64.powf(su), v * 10f64.powf(sv)).unwrap().radians();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn arccot_reflection(x in -1e6..1e6f64) {
            prop_assert!((arccot(x).radians() + arccot(-x).radians() - PI).abs() <= 1e-12);
            let a = arccot(x).radians();
            prop_assert!(a > 0.0 && a < PI);
        }

        #[test]
        fn arccot_strictly_decreasing(x in -1e3..1e3f64, dx in 1e-3..10.0f64) {
            prop_assert!(arccot(x + dx).radians() < arccot(x).radians());
        }

        #[test]
        fn sqrt_round_trip(t in spd_strategy()) {
            let inv = t.invariants();
            // roundoff in these products grows with the condition number
            let cond = inv.eigenvalues.0 / inv.eigenvalues.1;
            let tol = 1e-12 * (cond / 1e3).max(1.0);
            assert_identity(mat_mul(&inv.inv_sqrt, &inv.sqrt), tol);
            assert_identity(mat_mul(&t.inverse(), &t), tol);
            prop_assert!(inv.eigenvalues.0 >= inv.eigenvalues.1 && inv.eigenvalues.1 > 0.0);
        }
    }
}
