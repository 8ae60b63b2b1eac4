//! Rigid-motion groups SO(3)/SE(3) and their Lie algebras.
//!
//! Group elements are stored as a row-major rotation plus a translation
//! rather than a 4×4 homogeneous matrix; [`RigidTransform::to_homogeneous`]
//! gives the 4×4 view when one is needed.
//!
//! Twist coordinates are ordered `(ω₁, ω₂, ω₃, ν₁, ν₂, ν₃)`: rotation first,
//! translation second. Translations are in millimetres, rotations in radians.

use core::fmt;
use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math;

/// Below this rotation angle the Rodrigues coefficients are evaluated by
/// their Taylor series.
const SMALL_ANGLE: f64 = 1e-3;

/// `log` refuses rotations whose trace is within this margin of −1.
const NEAR_PI_TRACE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LieError {
    /// The rotation angle is too close to π for the principal logarithm.
    AngleNearPi { trace: f64 },
    /// A matrix that should have been a rotation is not orthonormal.
    NotARotation,
    /// Brownian covariance is not symmetric positive semi-definite.
    InvalidCovariance,
    /// Brownian step size must be strictly positive.
    InvalidStep,
}

impl fmt::Display for LieError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieError::AngleNearPi { trace } => {
                write!(f, "rotation angle too close to pi (trace {trace})")
            }
            LieError::NotARotation => f.write_str("matrix is not a proper rotation"),
            LieError::InvalidCovariance => {
                f.write_str("covariance must be symmetric positive semi-definite")
            }
            LieError::InvalidStep => f.write_str("step size must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LieError {}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn from_array(a: [f64; 3]) -> Self {
        Vec3 { x: a[0], y: a[1], z: a[2] }
    }

    #[inline]
    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Dense row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= o.0[i][j];
            }
        }
        out
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    #[inline]
    fn mul(self, o: Mat3) -> Mat3 {
        let a = &self.0;
        let b = &o.0;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(out)
    }
}

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix(Mat3::IDENTITY);

    /// Accepts `m` if `mᵀm = I` and `det m = 1` within 1e-9.
    pub fn try_from_matrix(m: Mat3) -> Result<Self, LieError> {
        let gram = m.transpose() * m;
        if gram.max_abs_diff(&Mat3::IDENTITY) > 1e-9 || (m.determinant() - 1.0).abs() > 1e-9 {
            return Err(LieError::NotARotation);
        }
        Ok(RotationMatrix(m))
    }

    /// Wraps `m` without checking orthonormality.
    pub const fn from_matrix_unchecked(m: Mat3) -> Self {
        RotationMatrix(m)
    }

    /// Rotation by `angle` about the camera/optical z axis.
    pub fn about_z(angle: f64) -> Self {
        exp_so3(Vec3::new(0.0, 0.0, angle))
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    #[inline]
    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    #[inline]
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        self.0.mul_vec(v)
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let w = vee_so3(&(self.0 - self.0.transpose()));
        math::atan2(w.norm() * 0.5, (self.0.trace() - 1.0) * 0.5)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    #[inline]
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * o.0)
    }
}

/// An element of SE(3): `x ↦ R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RigidTransform {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: RotationMatrix::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub const fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        RigidTransform { rotation, translation }
    }

    pub const fn from_translation(t: Vec3) -> Self {
        RigidTransform { rotation: RotationMatrix::IDENTITY, translation: t }
    }

    pub const fn from_rotation(r: RotationMatrix) -> Self {
        RigidTransform { rotation: r, translation: Vec3::ZERO }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -rt.rotate(self.translation) }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    /// The 4×4 homogeneous matrix `[[R, t], [0ᵀ, 1]]`.
    pub fn to_homogeneous(&self) -> [[f64; 4]; 4] {
        let r = self.rotation.matrix().0;
        let t = self.translation;
        [
            [r[0][0], r[0][1], r[0][2], t.x],
            [r[1][0], r[1][1], r[1][2], t.y],
            [r[2][0], r[2][1], r[2][2], t.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn from_homogeneous(m: &[[f64; 4]; 4]) -> Result<Self, LieError> {
        let r = Mat3([
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]);
        Ok(RigidTransform {
            rotation: RotationMatrix::try_from_matrix(r)?,
            translation: Vec3::new(m[0][3], m[1][3], m[2][3]),
        })
    }

    /// Largest absolute entry difference between the homogeneous matrices.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        let a = self.rotation.matrix().max_abs_diff(other.rotation.matrix());
        let d = self.translation - other.translation;
        a.max(d.x.abs()).max(d.y.abs()).max(d.z.abs())
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;
    #[inline]
    fn mul(self, o: RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * o.rotation,
            translation: self.rotation.rotate(o.translation) + self.translation,
        }
    }
}

/// se(3) coordinates `ξ = (ωᵀ, νᵀ)ᵀ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwistVector {
    pub omega: Vec3,
    pub nu: Vec3,
}

impl TwistVector {
    pub const ZERO: TwistVector = TwistVector { omega: Vec3::ZERO, nu: Vec3::ZERO };

    pub const fn new(omega: Vec3, nu: Vec3) -> Self {
        TwistVector { omega, nu }
    }

    pub const fn from_array(a: [f64; 6]) -> Self {
        TwistVector {
            omega: Vec3::new(a[0], a[1], a[2]),
            nu: Vec3::new(a[3], a[4], a[5]),
        }
    }

    pub const fn to_array(self) -> [f64; 6] {
        [self.omega.x, self.omega.y, self.omega.z, self.nu.x, self.nu.y, self.nu.z]
    }

    pub fn scale(self, s: f64) -> TwistVector {
        TwistVector { omega: self.omega * s, nu: self.nu * s }
    }

    pub fn is_finite(self) -> bool {
        self.omega.is_finite() && self.nu.is_finite()
    }

    pub fn max_abs_diff(self, o: TwistVector) -> f64 {
        let a = self.to_array();
        let b = o.to_array();
        a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

impl Add for TwistVector {
    type Output = TwistVector;
    fn add(self, o: TwistVector) -> TwistVector {
        TwistVector { omega: self.omega + o.omega, nu: self.nu + o.nu }
    }
}

/// `ω̂`, the skew matrix with `ω̂ v = ω × v`.
pub fn hat_so3(w: Vec3) -> Mat3 {
    Mat3([[0.0, -w.z, w.y], [w.z, 0.0, -w.x], [-w.y, w.x, 0.0]])
}

/// Inverse of [`hat_so3`] on skew matrices (reads the lower triangle).
pub fn vee_so3(m: &Mat3) -> Vec3 {
    Vec3::new(m.0[2][1], m.0[0][2], m.0[1][0])
}

/// `ξ̂ = [[ω̂, ν], [0ᵀ, 0]]`.
pub fn hat_se3(xi: TwistVector) -> [[f64; 4]; 4] {
    let w = hat_so3(xi.omega).0;
    [
        [w[0][0], w[0][1], w[0][2], xi.nu.x],
        [w[1][0], w[1][1], w[1][2], xi.nu.y],
        [w[2][0], w[2][1], w[2][2], xi.nu.z],
        [0.0, 0.0, 0.0, 0.0],
    ]
}

pub fn vee_se3(m: &[[f64; 4]; 4]) -> TwistVector {
    TwistVector {
        omega: Vec3::new(m[2][1], m[0][2], m[1][0]),
        nu: Vec3::new(m[0][3], m[1][3], m[2][3]),
    }
}

/// `sin θ/θ`, `(1 − cos θ)/θ²` and `(θ − sin θ)/θ³` for `θ = √theta_sq`.
fn rodrigues_coefficients(theta_sq: f64) -> (f64, f64, f64) {
    let theta = math::sqrt(theta_sq);
    if theta < SMALL_ANGLE {
        let t2 = theta_sq;
        let t4 = t2 * t2;
        let t6 = t4 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0,
            0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0,
        )
    } else {
        let s = math::sin(theta);
        let h = math::sin(0.5 * theta);
        (s / theta, 2.0 * h * h / theta_sq, (theta - s) / (theta_sq * theta))
    }
}

/// Rodrigues' formula `e^{ω̂} = I + (sin θ/θ) ω̂ + ((1 − cos θ)/θ²) ω̂²`.
pub fn exp_so3(w: Vec3) -> RotationMatrix {
    let (a, b, _) = rodrigues_coefficients(w.norm_squared());
    let k = hat_so3(w);
    let k2 = k * k;
    RotationMatrix(Mat3::IDENTITY + k.scale(a) + k2.scale(b))
}

/// The matrix `A` that maps ν to the translation of `e^{ξ̂}`:
/// `A = I + ((1 − cos θ)/θ²) ω̂ + ((θ − sin θ)/θ³) ω̂²`.
pub fn translation_jacobian(w: Vec3) -> Mat3 {
    let (_, b, c) = rodrigues_coefficients(w.norm_squared());
    let k = hat_so3(w);
    Mat3::IDENTITY + k.scale(b) + (k * k).scale(c)
}

/// `A⁻¹ = I − ½ ω̂ + (1/θ²)(1 − θ sin θ / (2(1 − cos θ))) ω̂²`.
pub fn translation_jacobian_inverse(w: Vec3) -> Mat3 {
    let theta_sq = w.norm_squared();
    let theta = math::sqrt(theta_sq);
    let coeff = if theta < SMALL_ANGLE {
        1.0 / 12.0 + theta_sq / 720.0 + theta_sq * theta_sq / 30240.0
    } else {
        // 1 − (θ/2) cot(θ/2), free of the 1 − cos θ cancellation
        let half = 0.5 * theta;
        (1.0 - half * math::cos(half) / math::sin(half)) / theta_sq
    };
    let k = hat_so3(w);
    Mat3::IDENTITY + k.scale(-0.5) + (k * k).scale(coeff)
}

/// `e^{ξ̂} = [[e^{ω̂}, A ν], [0ᵀ, 1]]`.
pub fn exp_se3(xi: TwistVector) -> RigidTransform {
    let (a, b, c) = rodrigues_coefficients(xi.omega.norm_squared());
    let k = hat_so3(xi.omega);
    let k2 = k * k;
    let rotation = RotationMatrix(Mat3::IDENTITY + k.scale(a) + k2.scale(b));
    let jac = Mat3::IDENTITY + k.scale(b) + k2.scale(c);
    RigidTransform { rotation, translation: jac.mul_vec(xi.nu) }
}

/// Principal logarithm of a rotation. Fails when the angle is within about
/// 1.4e-3 rad of π, where the rotation axis is numerically ill-defined.
pub fn log_so3(r: &RotationMatrix) -> Result<Vec3, LieError> {
    let m = r.matrix();
    let trace = m.trace();
    if trace <= -1.0 + NEAR_PI_TRACE {
        return Err(LieError::AngleNearPi { trace });
    }
    Ok(log_so3_regular(m))
}

fn log_so3_regular(m: &Mat3) -> Vec3 {
    let v = vee_so3(&(*m - m.transpose()));
    let sin_theta = v.norm() * 0.5;
    let cos_theta = (m.trace() - 1.0) * 0.5;
    let theta = math::atan2(sin_theta, cos_theta);
    let factor = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0)
    } else {
        theta / (2.0 * sin_theta)
    };
    v * factor
}

/// Logarithm that never fails: near π the axis is read from the symmetric
/// part `(sym(R) + I)/2 ≈ n nᵀ`, with its sign taken from the skew part when that
/// is still informative. Use only where an arbitrary but consistent branch
/// is acceptable (display, state conversion), never for training labels.
pub fn log_so3_any(r: &RotationMatrix) -> Vec3 {
    let m = r.matrix();
    if m.trace() > -1.0 + NEAR_PI_TRACE {
        return log_so3_regular(m);
    }
    let v = vee_so3(&(*m - m.transpose()));
    let theta = math::atan2(v.norm() * 0.5, (m.trace() - 1.0) * 0.5);
    let b = ((*m + m.transpose()).scale(0.5) + Mat3::IDENTITY).scale(0.5);
    let k = (0..3)
        .max_by(|&i, &j| b.0[i][i].partial_cmp(&b.0[j][j]).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let d = math::sqrt(b.0[k][k].max(1e-300));
    let mut n = Vec3::new(b.0[0][k] / d, b.0[1][k] / d, b.0[2][k] / d);
    n = n * (1.0 / n.norm());
    if n.dot(v) < 0.0 {
        n = -n;
    }
    n * theta
}

/// `log(g)` with `ν = A⁻¹ t`.
pub fn log_se3(g: &RigidTransform) -> Result<TwistVector, LieError> {
    let omega = log_so3(&g.rotation)?;
    Ok(TwistVector { omega, nu: translation_jacobian_inverse(omega).mul_vec(g.translation) })
}

/// Total version of [`log_se3`] built on [`log_so3_any`].
pub fn log_se3_any(g: &RigidTransform) -> TwistVector {
    let omega = log_so3_any(&g.rotation);
    TwistVector { omega, nu: translation_jacobian_inverse(omega).mul_vec(g.translation) }
}

/// `Ad_g ξ`, the twist with `hat(Ad_g ξ) = g ξ̂ g⁻¹`:
/// `ω' = R ω`, `ν' = R ν + t × (R ω)`.
pub fn adjoint(g: &RigidTransform, xi: TwistVector) -> TwistVector {
    let rw = g.rotation.rotate(xi.omega);
    TwistVector { omega: rw, nu: g.rotation.rotate(xi.nu) + g.translation.cross(rw) }
}

/// The 6×6 matrix of `Ad_g` in `(ω, ν)` ordering: `[[R, 0], [t̂ R, R]]`.
pub fn adjoint_matrix(g: &RigidTransform) -> [[f64; 6]; 6] {
    let r = g.rotation.matrix();
    let tr = hat_so3(g.translation) * *r;
    let mut out = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = r.0[i][j];
            out[i + 3][j + 3] = r.0[i][j];
            out[i + 3][j] = tr.0[i][j];
        }
    }
    out
}

/// Point on the curve between `g1` (s = 0) and `g2` (s = 1): the rotation
/// follows `R₁ e^{s Ω₀}` with `Ω₀ = log(R₁ᵀ R₂)`, the translation is
/// interpolated linearly.
pub fn geodesic(g1: &RigidTransform, g2: &RigidTransform, s: f64) -> Result<RigidTransform, LieError> {
    let omega0 = log_so3(&(g1.rotation.transpose() * g2.rotation))?;
    Ok(RigidTransform {
        rotation: g1.rotation * exp_so3(omega0 * s),
        translation: (g2.translation - g1.translation) * s + g1.translation,
    })
}

/// Step size and covariance of a left-invariant Brownian motion on SE(3).
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianParams {
    delta: f64,
    covariance: [[f64; 6]; 6],
    /// `C = L Lᵀ` with `L = V diag(√λ)`, cached for sampling.
    factor: [[f64; 6]; 6],
}

impl BrownianParams {
    pub fn new(delta: f64, covariance: [[f64; 6]; 6]) -> Result<Self, LieError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(LieError::InvalidStep);
        }
        for i in 0..6 {
            for j in 0..6 {
                if !covariance[i][j].is_finite() || (covariance[i][j] - covariance[j][i]).abs() > 1e-12 {
                    return Err(LieError::InvalidCovariance);
                }
            }
        }
        let (values, vectors) = symmetric_eigen6(&covariance);
        if values.iter().any(|&l| l < -1e-12) {
            return Err(LieError::InvalidCovariance);
        }
        let mut factor = [[0.0; 6]; 6];
        for i in 0..6 {
            for k in 0..6 {
                factor[i][k] = vectors[i][k] * math::sqrt(values[k].max(0.0));
            }
        }
        Ok(BrownianParams { delta, covariance, factor })
    }

    /// `C = diag(variances)`.
    pub fn diagonal(delta: f64, variances: [f64; 6]) -> Result<Self, LieError> {
        let mut c = [[0.0; 6]; 6];
        for (i, v) in variances.iter().enumerate() {
            c[i][i] = *v;
        }
        Self::new(delta, c)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn covariance(&self) -> &[[f64; 6]; 6] {
        &self.covariance
    }

    /// Draws ξ ~ N(0, C).
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> TwistVector {
        let mut z = [0.0; 6];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = (0..6).map(|k| self.factor[i][k] * z[k]).sum();
        }
        TwistVector::from_array(out)
    }
}

/// One Euler step `g((k+1)δ) = g(kδ) e^{√δ ξ̂}` with caller-supplied noise.
pub fn brownian_step(g: &RigidTransform, params: &BrownianParams, noise: TwistVector) -> RigidTransform {
    *g * exp_se3(noise.scale(math::sqrt(params.delta)))
}

/// The sample path between grid points: `g(kδ) e^{((t − kδ)/√δ) ξ̂}`, with
/// `offset = t − kδ ∈ [0, δ]`.
pub fn brownian_interp(
    g_k: &RigidTransform,
    noise: TwistVector,
    params: &BrownianParams,
    offset: f64,
) -> RigidTransform {
    if offset == params.delta {
        return brownian_step(g_k, params, noise);
    }
    *g_k * exp_se3(noise.scale(offset / math::sqrt(params.delta)))
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 6×6 matrix. Returns the
/// eigenvalues and a matrix whose columns are the eigenvectors.
fn symmetric_eigen6(m: &[[f64; 6]; 6]) -> ([f64; 6], [[f64; 6]; 6]) {
    let mut a = *m;
    let mut v = [[0.0; 6]; 6];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let off: f64 = (0..6)
            .flat_map(|i| (0..6).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..5 {
            for q in p + 1..6 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..6 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..6 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut values = [0.0; 6];
    for (i, val) in values.iter_mut().enumerate() {
        *val = a[i][i];
    }
    (values, v)
}
