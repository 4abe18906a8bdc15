//! Projection to the reduced attitude, reconstruction of full motions from
//! Routh trajectories, and the geometric phase of closed reduced loops.

use std::f64::consts::PI;

use crate::dynamics::{BodyParams, FullState, LpState};
use crate::geometry::{check_unit, e3, minimal_rotation, Rotation, Vec3};
use crate::integrate::lift_step;
use crate::{tol, Error, Result};

/// The quotient map `(R, ω) ↦ (Rᵀe₃, ω)`.
pub fn project(s: &FullState) -> LpState {
    s.project()
}

/// Horizontal angular velocity `Γ̇×Γ − bΓ`, the velocity over `Γ̇` with zero
/// vertical momentum.
pub fn omega_hor(p: &BodyParams, gamma: &Vec3, gamma_dot: &Vec3) -> Vec3 {
    let j_gamma = p.j() * gamma;
    let w = gamma_dot.cross(gamma);
    let b = j_gamma.dot(&w) / gamma.dot(&j_gamma);
    w - b * gamma
}

/// A sample of a reduced curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSample {
    pub t: f64,
    pub gamma: Vec3,
    pub gamma_dot: Vec3,
}

/// Quadrature rule for the dynamic phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Per-interval Simpson rule with the midpoint taken from the cubic
    /// Hermite interpolant of `Γ`.
    Simpson,
}

/// Running state of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionState {
    pub r_hor: Rotation,
    pub theta_dyn: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedSample {
    pub lift: ReconstructionState,
    pub omega_hor: Vec3,
    pub state: FullState,
}

/// Cubic Hermite midpoint of `Γ` and its derivative over one interval.
fn hermite_mid(a: &ReducedSample, b: &ReducedSample) -> (Vec3, Vec3) {
    let h = b.t - a.t;
    let gamma = 0.5 * (a.gamma + b.gamma) + h / 8.0 * (a.gamma_dot - b.gamma_dot);
    let gamma_dot = 1.5 / h * (b.gamma - a.gamma) - 0.25 * (a.gamma_dot + b.gamma_dot);
    let gamma = gamma.normalize();
    (gamma, gamma_dot - gamma * gamma.dot(&gamma_dot))
}

fn validate(samples: &[ReducedSample]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::BadTrajectory("need at least two samples".into()));
    }
    let h = samples[1].t - samples[0].t;
    if !(h > 0.0) {
        return Err(Error::BadTrajectory("time must increase".into()));
    }
    for (k, w) in samples.windows(2).enumerate() {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(w[1].t.abs()) {
            return Err(Error::BadTrajectory(format!("non-uniform spacing at sample {}", k + 1)));
        }
    }
    for s in samples {
        check_unit(&s.gamma)?;
    }
    Ok(h)
}

/// Rebuilds the full motion over a reduced trajectory on momentum level `μ`
/// starting from `r0`, which must satisfy `r0ᵀe₃ = Γ(0)`.
///
/// The horizontal lift is stepped with RKMK4 using Hermite midpoints; the
/// dynamic phase `∫ μ/(ΓᵀJΓ)` uses `quad`. Then `R = exp(θ_dyn ê₃) R_hor` and
/// `ω = ω_hor + νΓ`.
pub fn reconstruct(
    p: &BodyParams,
    samples: &[ReducedSample],
    mu: f64,
    r0: &Rotation,
    quad: Quadrature,
) -> Result<Vec<ReconstructedSample>> {
    let h = validate(samples)?;
    let gap = (r0.reduced_attitude() - samples[0].gamma).norm();
    if gap > tol::RECONSTRUCTION_START {
        return Err(Error::InitialMismatch { gap });
    }
    let nu = |g: &Vec3| mu / g.dot(&(p.j() * g));
    let assemble = |lift: ReconstructionState, s: &ReducedSample| {
        let w_hor = omega_hor(p, &s.gamma, &s.gamma_dot);
        let r = Rotation::about_vertical(lift.theta_dyn).compose(&lift.r_hor);
        ReconstructedSample { lift, omega_hor: w_hor, state: FullState::new(r, w_hor + nu(&s.gamma) * s.gamma) }
    };

    let mut lift = ReconstructionState { r_hor: *r0, theta_dyn: 0.0, t: samples[0].t };
    let mut out = Vec::with_capacity(samples.len());
    out.push(assemble(lift, &samples[0]));
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (gm, gdm) = hermite_mid(a, b);
        let w0 = omega_hor(p, &a.gamma, &a.gamma_dot);
        let wm = omega_hor(p, &gm, &gdm);
        let w1 = omega_hor(p, &b.gamma, &b.gamma_dot);
        lift.r_hor = lift_step(&lift.r_hor, &w0, &wm, &w1, h);
        lift.theta_dyn += match quad {
            Quadrature::Trapezoid => 0.5 * h * (nu(&a.gamma) + nu(&b.gamma)),
            Quadrature::Simpson => h / 6.0 * (nu(&a.gamma) + 4.0 * nu(&gm) + nu(&b.gamma)),
        };
        lift.t = b.t;
        out.push(assemble(lift, b));
    }
    Ok(out)
}

fn check_closed(first: &Vec3, last: &Vec3) -> Result<()> {
    let gap = (first - last).norm();
    if gap > tol::LOOP_CLOSURE {
        return Err(Error::NotClosed { gap });
    }
    Ok(())
}

/// Centroid direction of a closed loop (last point repeats the first).
fn loop_center(points: &[Vec3]) -> Result<Vec3> {
    let body = &points[..points.len() - 1];
    let sum: Vec3 = body.iter().sum();
    let n = sum.norm();
    if n < 1e-9 * body.len() as f64 {
        return Err(Error::BadTrajectory("loop centroid is undefined; split the loop".into()));
    }
    Ok(sum / n)
}

/// Subdivisions per edge of each fan triangle.
const SURFACE_REFINEMENT: usize = 16;

/// Signed area of the spherical triangle `(a, b, c)`, positive when the
/// vertices run counterclockwise seen from outside.
fn signed_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    2.0 * a.dot(&b.cross(c)).atan2(1.0 + a.dot(b) + b.dot(c) + c.dot(a))
}

fn phase_density(p: &BodyParams, gamma: &Vec3) -> f64 {
    let j_gamma = p.j() * gamma;
    let locked = gamma.dot(&j_gamma);
    (2.0 * j_gamma.norm_squared() - p.j().trace() * locked) / (locked * locked)
}

/// Geometric phase as the surface integral of the phase density over the
/// region bounded by the loop on the side of its centroid. The region is
/// fan-triangulated from the centroid and each triangle is refined; a
/// counterclockwise loop seen from outside encloses positive area.
pub fn geometric_phase_surface(p: &BodyParams, points: &[Vec3]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::BadTrajectory("loop needs at least two points".into()));
    }
    for g in points {
        check_unit(g)?;
    }
    check_closed(&points[0], &points[points.len() - 1])?;
    if points.len() < 4 {
        return Ok(0.0);
    }
    let center = loop_center(points)?;
    let k = SURFACE_REFINEMENT;
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let node = |i: usize, j: usize| {
            let v = ((k - i - j) as f64 * center + i as f64 * a + j as f64 * b) / k as f64;
            v.normalize()
        };
        let mut tri = |x: Vec3, y: Vec3, z: Vec3| {
            let area = signed_triangle_area(&x, &y, &z);
            if area != 0.0 {
                total += area * phase_density(p, &(x + y + z).normalize());
            }
        };
        for i in 0..k {
            for j in 0..k - i {
                tri(node(i, j), node(i + 1, j), node(i, j + 1));
                if i + j + 1 < k {
                    tri(node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
                }
            }
        }
    }
    Ok(total)
}

/// Geometric phase from the horizontal lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    /// Angle of `R(T)R(0)ᵀ` about `e₃`, in `(−π, π]`.
    pub principal: f64,
    /// Whole turns accumulated along the lift.
    pub winding: i64,
    /// `principal + 2π·winding`.
    pub total: f64,
}

/// Geometric phase by lifting the loop horizontally (`μ = 0`) and reading
/// the vertical rotation `R(T)R(0)ᵀ = exp(θ ê₃)`.
///
/// The winding count is accumulated by tracking the lift's angle relative to
/// a smooth section over the loop, so it is not lost to `2π` periodicity.
pub fn geometric_phase_reconstruct(p: &BodyParams, samples: &[ReducedSample]) -> Result<Phase> {
    validate(samples)?;
    let first = samples[0].gamma;
    check_closed(&first, &samples[samples.len() - 1].gamma)?;
    let points: Vec<Vec3> = samples.iter().map(|s| s.gamma).collect();
    let center = if samples.len() >= 4 { loop_center(&points)? } else { first };

    // σ(Γ) has reduced attitude Γ and is smooth away from −center.
    let base = Rotation::with_reduced_attitude(&center)?;
    let section = |g: &Vec3| base.compose(&minimal_rotation(&center, g).transpose());
    let fiber_angle = |r: &Rotation, g: &Vec3| {
        let d = r.compose(&section(g).transpose());
        let m = d.matrix();
        m[(1, 0)].atan2(m[(0, 0)])
    };

    let r0 = section(&first);
    let lifted = reconstruct(p, samples, 0.0, &r0, Quadrature::Trapezoid)?;
    let mut unwrapped = 0.0;
    let mut prev = fiber_angle(&lifted[0].lift.r_hor, &first);
    for (s, l) in samples.iter().zip(&lifted).skip(1) {
        let a = fiber_angle(&l.lift.r_hor, &s.gamma);
        let mut d = a - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        unwrapped += d;
        prev = a;
    }

    let end = lifted[lifted.len() - 1].lift.r_hor;
    let d = end.compose(&r0.transpose());
    let residual = (d.apply(&e3()) - e3()).norm();
    if residual > tol::VERTICAL_ROTATION {
        return Err(Error::NotVerticalRotation { residual });
    }
    let m = d.matrix();
    let mut principal = m[(1, 0)].atan2(m[(0, 0)]);
    if principal <= -PI {
        principal += 2.0 * PI;
    }
    let winding = ((unwrapped - principal) / (2.0 * PI)).round() as i64;
    Ok(Phase { principal, winding, total: principal + 2.0 * PI * winding as f64 })
}
