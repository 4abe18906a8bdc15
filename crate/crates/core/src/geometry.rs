//! Primitives on SO(3) and S²: hat/vee, the exponential map, polar
//! renormalization and tangent projections.

use nalgebra::{Matrix3, Vector3};

use crate::{tol, Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Inertial gravity direction.
pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Skew-symmetric matrix with `hat(a) * b == a.cross(&b)`.
pub fn hat(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Inverse of [`hat`] on skew-symmetric matrices.
///
/// Returns the vector of the skew part of `s`; inputs whose symmetric part
/// exceeds [`tol::SKEW`] are rejected.
pub fn vee(s: &Mat3) -> Result<Vec3> {
    let residual = (s + s.transpose()).abs().max();
    if residual > tol::SKEW {
        return Err(Error::NonSkewInput { residual });
    }
    Ok(Vec3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    ))
}

/// Largest absolute entry of `RᵀR − I`.
pub fn orthogonality_residual(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).abs().max()
}

/// A 3×3 matrix in SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Accepts `m` if it is a rotation within [`tol::ORTHOGONALITY`] and
    /// [`tol::DETERMINANT`]; larger defects are an error, not repaired.
    pub fn new(m: Mat3) -> Result<Self> {
        let residual = orthogonality_residual(&m);
        let det = m.determinant();
        if residual > tol::ORTHOGONALITY || (det - 1.0).abs() > tol::DETERMINANT {
            return Err(Error::TooFarFromSo3 { residual, det });
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without checking. Callers guarantee `m ∈ SO(3)`.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_inner(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// The reduced attitude `Rᵀe₃`, i.e. gravity seen from the body.
    pub fn reduced_attitude(&self) -> Vec3 {
        self.0.row(2).transpose()
    }

    /// `exp(θ ê₃)`, the symmetry action about the vertical.
    pub fn about_vertical(theta: f64) -> Rotation {
        let (s, c) = theta.sin_cos();
        Rotation(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// A rotation whose reduced attitude is `gamma`.
    ///
    /// Built as the transpose of the minimal rotation carrying `e₃` onto
    /// `gamma`, which is smooth everywhere except at `gamma = −e₃`.
    pub fn with_reduced_attitude(gamma: &Vec3) -> Result<Rotation> {
        check_unit(gamma)?;
        Ok(minimal_rotation(&e3(), gamma).transpose())
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }
}

/// Rotation about `a × b` taking unit `a` onto unit `b`. Antipodal inputs use
/// a half turn about an axis perpendicular to `a`.
pub fn minimal_rotation(a: &Vec3, b: &Vec3) -> Rotation {
    let axis = a.cross(b);
    let s = axis.norm();
    let c = a.dot(b);
    if s < 1e-12 {
        if c > 0.0 {
            return Rotation::identity();
        }
        let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let n = a.cross(&helper).normalize();
        return exp_so3(&(std::f64::consts::PI * n));
    }
    exp_so3(&(axis / s * s.atan2(c)))
}

/// Rodrigues formula for `exp(â)`.
pub fn exp_so3(a: &Vec3) -> Rotation {
    let theta = a.norm();
    let k = hat(a);
    let k2 = k * k;
    let m = if theta < tol::SMALL_ANGLE {
        Mat3::identity() + k + 0.5 * k2
    } else {
        let (s, c) = theta.sin_cos();
        Mat3::identity() + (s / theta) * k + ((1.0 - c) / (theta * theta)) * k2
    };
    Rotation(m)
}

/// Inverse of the right-trivialized differential of `exp` on so(3):
/// if `R(t) = R₀ exp(θ(t)^)` and `Ṙ = R ω̂`, then `θ̇ = dexp_inv(θ, ω)`.
pub fn dexp_inv(theta: &Vec3, v: &Vec3) -> Vec3 {
    let t = theta.norm();
    let beta = if t < 1e-4 {
        1.0 / 12.0 + t * t / 720.0
    } else {
        let half = 0.5 * t;
        (1.0 - half / half.tan()) / (t * t)
    };
    let tv = theta.cross(v);
    v + 0.5 * tv + beta * theta.cross(&tv)
}

/// Nearest rotation to `m` (polar factor), for matrices that have drifted
/// off SO(3) by at most [`tol::RENORMALIZE_REACH`].
pub fn renormalize(m: &Mat3) -> Result<Rotation> {
    let residual = orthogonality_residual(m);
    let det = m.determinant();
    if residual > tol::RENORMALIZE_REACH || det <= 0.0 {
        return Err(Error::TooFarFromSo3 { residual, det });
    }
    // Newton iteration X ← (X + X⁻ᵀ)/2 converges quadratically to the
    // orthogonal polar factor.
    let mut x = *m;
    for _ in 0..30 {
        let inv_t = match x.try_inverse() {
            Some(inv) => inv.transpose(),
            None => return Err(Error::TooFarFromSo3 { residual, det }),
        };
        let next = 0.5 * (x + inv_t);
        let change = (next - x).abs().max();
        x = next;
        if change < 1e-16 {
            break;
        }
    }
    Ok(Rotation(x))
}

pub(crate) fn check_unit(v: &Vec3) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > tol::UNIT {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// Removes the component of `v` along the unit vector `gamma`.
pub fn project_tangent_s2(gamma: &Vec3, v: &Vec3) -> Result<Vec3> {
    check_unit(gamma)?;
    Ok(v - gamma * gamma.dot(v))
}

/// Orthonormal basis `(t₁, t₂)` of `T_Γ S²` with `t₁ × t₂ = Γ`.
pub fn tangent_basis(gamma: &Vec3) -> (Vec3, Vec3) {
    let helper = if gamma.x.abs() < 0.6 {
        Vec3::x()
    } else if gamma.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let t1 = (helper - gamma * gamma.dot(&helper)).normalize();
    let t2 = gamma.cross(&t1);
    (t1, t2)
}
