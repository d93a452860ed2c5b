//! Real 3-vector algebra over rays.
//!
//! Everything in the crate lives in ℝ³. A [`Ray`] is a unit vector up to
//! overall sign, the realization of a rank-one projector; the sign is fixed
//! canonically so that equal projectors compare equal.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numfmt;

/// Slack below which a slightly negative radicand or an out-of-range
/// arccos argument is treated as rounding noise.
pub const CLAMP_WINDOW: f64 = 1e-12;

/// Geometric tolerances shared by the constructions and validators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unit-norm and componentwise image checks.
    pub unit: f64,
    /// Orthogonality checks (`|⟨u|v⟩|` and `‖MᵀM − I‖_max`).
    pub orth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unit: 1e-10,
            orth: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3::new(0.0, 0.0, 0.0);
    pub const X: Vector3 = Vector3::new(1.0, 0.0, 0.0);
    pub const Y: Vector3 = Vector3::new(0.0, 1.0, 0.0);
    pub const Z: Vector3 = Vector3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vector3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, o: Vector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Right-handed cross product.
    pub fn cross(self, o: Vector3) -> Vector3 {
        Vector3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Result<Vector3> {
        if !self.is_finite() {
            return Err(Error::NonFinite(self.to_array()));
        }
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(self * (1.0 / n))
    }

    pub fn max_abs_diff(self, o: Vector3) -> f64 {
        (self.x - o.x)
            .abs()
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
    }

    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {i} out of range"),
        }
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Serialize for Vector3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        numfmt::ser_f64_array(&self.to_array(), s)
    }
}

impl<'de> Deserialize<'de> for Vector3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::from_array(a))
    }
}

pub fn cross(u: Vector3, v: Vector3) -> Vector3 {
    u.cross(v)
}

/// Unit vector modulo sign.
///
/// The stored representative has its first largest-magnitude component
/// positive, so `Ray` equality is projector equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray(Vector3);

impl Ray {
    /// Wraps a vector that is already unit length within `Tolerances::default().unit`.
    pub fn new(v: Vector3) -> Result<Ray> {
        Ray::with_tolerance(v, Tolerances::default().unit)
    }

    pub fn with_tolerance(v: Vector3, unit_tol: f64) -> Result<Ray> {
        if !v.is_finite() {
            return Err(Error::NonFinite(v.to_array()));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > unit_tol {
            return Err(Error::NotUnit { norm, tol: unit_tol });
        }
        Ok(Ray(canonical_sign(v)))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalize(v: Vector3) -> Result<Ray> {
        Ok(Ray(canonical_sign(v.normalized()?)))
    }

    pub fn vector(self) -> Vector3 {
        self.0
    }

    /// `|⟨self|other⟩|`.
    pub fn inner(self, other: Ray) -> f64 {
        inner(self, other)
    }

    /// True if both rays name the same projector within `tol`.
    pub fn same_as(self, other: Ray, tol: f64) -> bool {
        self.0.cross(other.0).norm() <= tol
    }

    pub fn x_axis() -> Ray {
        Ray(Vector3::X)
    }
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vector3::deserialize(d)?;
        Ray::new(v).map_err(serde::de::Error::custom)
    }
}

fn canonical_sign(v: Vector3) -> Vector3 {
    let mut lead = 0;
    for i in 1..3 {
        if v.component(i).abs() > v.component(lead).abs() {
            lead = i;
        }
    }
    if v.component(lead) < 0.0 {
        -v
    } else {
        v
    }
}

/// Overlap `|⟨u|v⟩|` of two rays.
pub fn inner(u: Ray, v: Ray) -> f64 {
    u.0.dot(v.0).abs()
}

/// `√x`, treating radicands in `[-CLAMP_WINDOW, 0)` as zero.
pub fn sqrt_clamped(x: f64, what: &'static str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -CLAMP_WINDOW {
        Ok(0.0)
    } else {
        Err(Error::NumericDomain { what, value: x })
    }
}

/// `arccos x`, clamping arguments within `CLAMP_WINDOW` of `[-1, 1]`.
pub fn acos_clamped(x: f64, what: &'static str) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + CLAMP_WINDOW {
        return Err(Error::NumericDomain { what, value: x });
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3 {
    pub rows: [[f64; 3]; 3],
}

impl Matrix3 {
    pub fn identity() -> Self {
        Matrix3::from_rows(Vector3::X, Vector3::Y, Vector3::Z)
    }

    pub fn from_rows(r0: Vector3, r1: Vector3, r2: Vector3) -> Self {
        Matrix3 {
            rows: [r0.to_array(), r1.to_array(), r2.to_array()],
        }
    }

    pub fn from_columns(c0: Vector3, c1: Vector3, c2: Vector3) -> Self {
        Matrix3::from_rows(c0, c1, c2).transpose()
    }

    pub fn row(&self, i: usize) -> Vector3 {
        Vector3::from_array(self.rows[i])
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Matrix3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn mul(&self, o: &Matrix3) -> Matrix3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Matrix3 { rows }
    }

    /// `max |(MᵀM − I)_ij|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.transpose().mul(self);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.rows[i][j] - target).abs());
            }
        }
        worst
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.orthogonality_defect() <= tol
    }

    pub fn determinant(&self) -> f64 {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }
}

/// Matrix-vector product.
pub fn apply(m: &Matrix3, v: Vector3) -> Vector3 {
    Vector3::new(m.row(0).dot(v), m.row(1).dot(v), m.row(2).dot(v))
}

/// Right-handed orthonormal frame adapted to a pair of unit vectors.
///
/// `e` is the first vector, `f` the normalized component of the second
/// orthogonal to `e`, `g = e × f`. In frame coordinates the pair reads
/// `(1,0,0)` and `(p,q,0)` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFrame {
    pub e: Vector3,
    pub f: Vector3,
    pub g: Vector3,
    /// Signed `⟨e|second⟩`.
    pub p: f64,
    pub q: f64,
}

impl PairFrame {
    /// Builds the frame from two signed unit vectors; `p` keeps the sign of
    /// their dot product.
    pub fn new(first: Vector3, second: Vector3) -> Result<PairFrame> {
        let p = first.dot(second);
        let q = sqrt_clamped(1.0 - p * p, "pair frame q = √(1−p²)")?;
        if q <= CLAMP_WINDOW.sqrt() {
            return Err(Error::DegeneratePair { overlap: p.abs() });
        }
        let f = ((second - first * p) * (1.0 / q)).normalized()?;
        let g = first.cross(f);
        Ok(PairFrame { e: first, f, g, p, q })
    }

    /// Frame coordinates → ambient coordinates.
    pub fn to_ambient(&self, local: Vector3) -> Vector3 {
        self.e * local.x + self.f * local.y + self.g * local.z
    }

    /// Ambient coordinates → frame coordinates.
    pub fn to_local(&self, v: Vector3) -> Vector3 {
        Vector3::new(self.e.dot(v), self.f.dot(v), self.g.dot(v))
    }

    /// Rows `e, f, g`: maps ambient vectors to frame coordinates.
    pub fn matrix(&self) -> Matrix3 {
        Matrix3::from_rows(self.e, self.f, self.g)
    }
}

/// Orthogonal matrix taking `a` to `(1,0,0)` and `b` to `±(p,q,0)`, with
/// `p = inner(a,b)` and `q = √(1−p²) > 0`.
///
/// `b` is flipped when its stored sign makes the dot product negative, so the
/// image of `b` matches `(p,q,0)` as a ray.
pub fn canonical_pair_basis(a: Ray, b: Ray, tol: &Tolerances) -> Result<Matrix3> {
    let s = a.0.dot(b.0);
    let overlap = s.abs();
    if overlap <= tol.unit || overlap >= 1.0 - tol.unit {
        return Err(Error::DegeneratePair { overlap });
    }
    let bv = if s < 0.0 { -b.0 } else { b.0 };
    Ok(PairFrame::new(a.0, bv)?.matrix())
}

/// Rotation (det +1) carrying `from_a ↦ to_a` and `from_b ↦ to_b`, for
/// two pairs with equal signed overlap.
pub fn pair_rotation(
    from_a: Vector3,
    from_b: Vector3,
    to_a: Vector3,
    to_b: Vector3,
) -> Result<Matrix3> {
    let src = PairFrame::new(from_a, from_b)?;
    let dst = PairFrame::new(to_a, to_b)?;
    if (src.p - dst.p).abs() > 1e-9 {
        return Err(Error::PreconditionViolated(format!(
            "pair overlaps differ: {} vs {}",
            src.p, dst.p
        )));
    }
    // ambient ← dst-local ← src-ambient
    let to_world = Matrix3::from_columns(dst.e, dst.f, dst.g);
    Ok(to_world.mul(&src.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3 {
        Vector3::new(x, y, z)
    }

    #[test]
    fn inner_of_canonical_pair() {
        let p: f64 = 0.3;
        let q = (1.0 - p * p).sqrt();
        let a = Ray::new(Vector3::X).unwrap();
        let b = Ray::new(v(p, q, 0.0)).unwrap();
        assert!((inner(a, b) - p).abs() < 1e-15);
        assert_eq!(inner(a, a), 1.0);
    }

    #[test]
    fn ray_sign_is_canonical() {
        let r = Ray::normalize(v(0.2, -0.9, 0.1)).unwrap();
        assert!(r.vector().y > 0.0);
        let s = Ray::normalize(v(-0.2, 0.9, -0.1)).unwrap();
        assert_eq!(r, s);
        // tie between x and y goes to x
        let t = Ray::normalize(v(-1.0, 1.0, 0.0)).unwrap();
        assert!(t.vector().x > 0.0 && t.vector().y < 0.0);
    }

    #[test]
    fn ray_rejects_non_unit_and_nan() {
        assert!(matches!(Ray::new(v(1.0, 1.0, 0.0)), Err(Error::NotUnit { .. })));
        assert!(matches!(
            Ray::new(v(f64::NAN, 0.0, 0.0)),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(Ray::normalize(Vector3::ZERO), Err(Error::ZeroVector)));
    }

    #[test]
    fn cross_basics() {
        assert_eq!(cross(Vector3::X, Vector3::Y), Vector3::Z);
        let u = v(0.3, -1.2, 2.0);
        assert_eq!(cross(u, u), Vector3::ZERO);
    }

    #[test]
    fn cross_of_e2_f2_is_minus_stage_two_g2() {
        // e2 = (1,0,0), f2 = (0, y1/q2, z1/q2) at the 1/√2 anchor.
        let (y1, z1) = (1.0 / 3.0_f64.sqrt() / 2.0_f64.sqrt(), (1.0 / 6.0_f64).sqrt());
        let q2 = (y1 * y1 + z1 * z1).sqrt();
        let f2 = v(0.0, y1 / q2, z1 / q2);
        let g = cross(Vector3::X, f2);
        let g2 = v(0.0, z1 / q2, -y1 / q2);
        assert!(g.max_abs_diff(-g2) < 1e-15);
    }

    #[test]
    fn clamps() {
        assert_eq!(sqrt_clamped(-1e-13, "t").unwrap(), 0.0);
        assert!(sqrt_clamped(-1e-9, "t").is_err());
        assert_eq!(acos_clamped(1.0 + 1e-13, "t").unwrap(), 0.0);
        assert!(acos_clamped(1.0 + 1e-9, "t").is_err());
    }

    #[test]
    fn canonical_basis_of_canonical_pair_is_identity() {
        let p: f64 = 0.6;
        let a = Ray::new(Vector3::X).unwrap();
        let b = Ray::new(v(p, 0.8, 0.0)).unwrap();
        let m = canonical_pair_basis(a, b, &Tolerances::default()).unwrap();
        for i in 0..3 {
            assert!(m.row(i).max_abs_diff(Matrix3::identity().row(i)) < 1e-15);
        }
    }

    #[test]
    fn canonical_basis_maps_a_and_b() {
        let (p, q) = (0.35_f64, (1.0 - 0.35_f64 * 0.35).sqrt());
        let a = Ray::new(Vector3::Y).unwrap();
        let b = Ray::new(v(0.0, p, q)).unwrap();
        let m = canonical_pair_basis(a, b, &Tolerances::default()).unwrap();
        assert!(m.is_orthogonal(1e-12));
        assert!(apply(&m, a.vector()).max_abs_diff(Vector3::X) < 1e-12);
        assert!(apply(&m, b.vector()).max_abs_diff(v(p, q, 0.0)) < 1e-12);
    }

    #[test]
    fn canonical_basis_rejects_degenerate_pairs() {
        let a = Ray::new(Vector3::X).unwrap();
        let t = Tolerances::default();
        assert!(matches!(
            canonical_pair_basis(a, a, &t),
            Err(Error::DegeneratePair { .. })
        ));
        let perp = Ray::new(Vector3::Z).unwrap();
        assert!(matches!(
            canonical_pair_basis(a, perp, &t),
            Err(Error::DegeneratePair { .. })
        ));
    }

    #[test]
    fn identity_apply_and_isometry() {
        let x = v(0.1, -0.4, 2.5);
        assert_eq!(apply(&Matrix3::identity(), x), x);
        let a = Ray::normalize(v(1.0, 2.0, 3.0)).unwrap();
        let b = Ray::normalize(v(-1.0, 0.5, 2.0)).unwrap();
        let m = canonical_pair_basis(a, b, &Tolerances::default()).unwrap();
        assert!((apply(&m, x).norm() - x.norm()).abs() < 1e-12);
        assert!((m.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_rotation_carries_pairs() {
        let p: f64 = 0.42;
        let q = (1.0 - p * p).sqrt();
        let fa = Vector3::X;
        let fb = v(p, q, 0.0);
        let ta = v(0.0, 0.0, 1.0);
        let tb = v(q, 0.0, p);
        let r = pair_rotation(fa, fb, ta, tb).unwrap();
        assert!(apply(&r, fa).max_abs_diff(ta) < 1e-14);
        assert!(apply(&r, fb).max_abs_diff(tb) < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }
}
