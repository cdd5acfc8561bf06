//! Quaternion and 3×3 matrix helpers.
//!
//! Quaternions are stored scalar-first, `(w, v)`. The product follows the
//! Hamilton convention and `R(q) u` equals the vector part of
//! `q ⊗ (0, u) ⊗ q*`. No sign convention is imposed on stored quaternions:
//! `q` and `-q` are both accepted and describe the same rotation.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Norm deviation above which a quaternion is refused where a unit
/// quaternion is required.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// A quaternion `(w, v)`.
///
/// Orientation values are kept on the unit sphere by [`Quat::normalize`];
/// the arithmetic itself does not assume unit norm because rates and pure
/// quaternions flow through the same operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub v: Vec3,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        v: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self {
            w,
            v: Vec3::new(x, y, z),
        }
    }

    pub fn from_parts(w: f64, v: Vec3) -> Self {
        Self { w, v }
    }

    /// Pure quaternion `(0, v)`.
    pub fn pure(v: Vec3) -> Self {
        Self { w: 0.0, v }
    }

    pub fn zero() -> Self {
        Self::from_parts(0.0, Vec3::zeros())
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let half = 0.5 * angle;
        Self::from_parts(half.cos(), axis * (half.sin() / n))
    }

    /// Uniformly distributed unit quaternion.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            if q.norm() > 1e-6 {
                return q.normalize();
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.v.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalize(&self) -> Self {
        let n = self.norm();
        Self::from_parts(self.w / n, self.v / n)
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(self.w, -self.v)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.w * s, self.v * s)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.v.iter().all(|x| x.is_finite())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Fails when the norm deviates from one by more than `tolerance`.
    pub fn check_unit(&self, tolerance: f64) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(Error::NonUnitQuaternion { norm, tolerance });
        }
        Ok(())
    }

    /// Rotation matrix with `R(q) u = vec(q ⊗ (0, u) ⊗ q*)`.
    pub fn to_rotation(&self) -> Result<RotationMatrix> {
        self.check_unit(UNIT_TOLERANCE)?;
        let q = self.normalize();
        Ok(RotationMatrix(rotation_from_unit(&q)))
    }
}

fn rotation_from_unit(q: &Quat) -> Mat3 {
    let w = q.w;
    let v = q.v;
    Mat3::identity() * (w * w - v.norm_squared()) + v * v.transpose() * 2.0 + skew(&v) * (2.0 * w)
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, q: Quat) -> Quat {
        let p = self;
        Quat::from_parts(p.w * q.w - p.v.dot(&q.v), q.v * p.w + p.v * q.w + p.v.cross(&q.v))
    }
}

impl Mul<f64> for Quat {
    type Output = Quat;

    fn mul(self, s: f64) -> Quat {
        self.scale(s)
    }
}

impl Add for Quat {
    type Output = Quat;

    fn add(self, o: Quat) -> Quat {
        Quat::from_parts(self.w + o.w, self.v + o.v)
    }
}

impl Sub for Quat {
    type Output = Quat;

    fn sub(self, o: Quat) -> Quat {
        Quat::from_parts(self.w - o.w, self.v - o.v)
    }
}

impl Neg for Quat {
    type Output = Quat;

    fn neg(self) -> Quat {
        Quat::from_parts(-self.w, -self.v)
    }
}

/// Error quaternion `q̂* ⊗ q`, renormalized.
pub fn error_quat(estimate: &Quat, truth: &Quat) -> Quat {
    (estimate.conj() * *truth).normalize()
}

/// Cross-product matrix: `skew(a) * b == a × b`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`], reading the lower triangle.
pub fn unskew(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Largest entry of `|M + Mᵀ|`; zero for an exactly skew-symmetric matrix.
pub fn skew_residual(m: &Mat3) -> f64 {
    (m + m.transpose()).abs().max()
}

/// Validated element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    /// Orthogonality and determinant tolerance used by [`RotationMatrix::from_matrix`].
    pub const TOLERANCE: f64 = 1e-9;

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let orthogonality = (m.transpose() * m - Mat3::identity()).abs().max();
        let det = m.determinant();
        if !(orthogonality <= Self::TOLERANCE) || !((det - 1.0).abs() <= Self::TOLERANCE) {
            return Err(Error::NotARotation { orthogonality, det });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn rotate(&self, u: &Vec3) -> Vec3 {
        self.0 * u
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * o.0)
    }
}
