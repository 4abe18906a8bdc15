//! Vector fields of the full, Lagrange–Poincaré and Lagrange–Routh models,
//! plus the axisymmetric special cases.

use crate::geometry::{check_unit, hat, project_tangent_s2, Mat3, Rotation, Vec3};
use crate::{tol, Error, Result};

/// Which of the three models a state or result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Full model on `TSO(3)`.
    Full,
    /// Lagrange–Poincaré model on `S² × ℝ³`.
    Lp,
    /// Lagrange–Routh model on `TS²`.
    Lr,
}

/// Inertia, mass, gravity and center-of-mass offset of the body.
///
/// `J⁻¹` is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyParams {
    j: Mat3,
    j_inv: Mat3,
    m: f64,
    g: f64,
    rho: Vec3,
    balanced: bool,
}

impl BodyParams {
    /// An unbalanced body: `ρ` must be nonzero.
    pub fn new(j: Mat3, m: f64, g: f64, rho: Vec3) -> Result<Self> {
        Self::build(j, m, g, rho, false)
    }

    /// A body supported at its center of mass (`ρ = 0`).
    pub fn balanced(j: Mat3, m: f64, g: f64) -> Result<Self> {
        Self::build(j, m, g, Vec3::zeros(), true)
    }

    /// Diagonal inertia shorthand.
    pub fn diagonal(j: [f64; 3], m: f64, g: f64, rho: Vec3) -> Result<Self> {
        Self::new(Mat3::from_diagonal(&Vec3::from(j)), m, g, rho)
    }

    fn build(j: Mat3, m: f64, g: f64, rho: Vec3, balanced: bool) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_owned()));
        if j.iter().any(|x| !x.is_finite()) || rho.iter().any(|x| !x.is_finite()) {
            return bad("non-finite entry");
        }
        let scale = j.abs().max();
        if (j - j.transpose()).abs().max() > 1e-12 * scale.max(1.0) {
            return bad("J must be symmetric");
        }
        if j.cholesky().is_none() {
            return bad("J must be positive definite");
        }
        if !(m.is_finite() && m > 0.0) {
            return bad("m must be positive");
        }
        if !(g.is_finite() && g >= 0.0) {
            return bad("g must be non-negative");
        }
        let rho_norm = rho.norm();
        if balanced && rho_norm > tol::BALANCED {
            return bad("balanced body must have rho = 0");
        }
        if !balanced && rho_norm <= tol::BALANCED {
            return bad("rho = 0 requires the balanced flag");
        }
        let j_inv = j.try_inverse().expect("positive definite J is invertible");
        Ok(BodyParams { j, j_inv, m, g, rho, balanced })
    }

    pub fn j(&self) -> &Mat3 {
        &self.j
    }

    pub fn j_inv(&self) -> &Mat3 {
        &self.j_inv
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn rho(&self) -> &Vec3 {
        &self.rho
    }

    pub fn mg(&self) -> f64 {
        self.m * self.g
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    /// Whether `J` has no off-diagonal entries.
    pub fn is_diagonal(&self) -> bool {
        let off = self.j - Mat3::from_diagonal(&self.j.diagonal());
        off.abs().max() == 0.0
    }

    /// Minimum energy `−mg‖ρ‖`, attained at the hanging equilibrium.
    pub fn minimum_energy(&self) -> f64 {
        -self.mg() * self.rho.norm()
    }
}

/// A point `(R, ω)` of `TSO(3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub r: Rotation,
    pub omega: Vec3,
}

impl FullState {
    pub fn new(r: Rotation, omega: Vec3) -> Self {
        FullState { r, omega }
    }

    /// Projection to the Lagrange–Poincaré state `(Rᵀe₃, ω)`.
    pub fn project(&self) -> LpState {
        LpState { gamma: self.r.reduced_attitude(), omega: self.omega }
    }
}

/// A point `(Γ, ω)` of `S² × ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpState {
    pub gamma: Vec3,
    pub omega: Vec3,
}

impl LpState {
    pub fn new(gamma: Vec3, omega: Vec3) -> Result<Self> {
        check_unit(&gamma)?;
        Ok(LpState { gamma, omega })
    }
}

/// A point `(Γ, Γ̇)` of `TS²` on the momentum level `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrState {
    pub gamma: Vec3,
    pub gamma_dot: Vec3,
    pub mu: f64,
}

impl LrState {
    /// Builds a state, projecting any normal component out of `Γ̇`.
    pub fn new(gamma: Vec3, gamma_dot: Vec3, mu: f64) -> Result<Self> {
        let gamma_dot = project_tangent_s2(&gamma, &gamma_dot)?;
        Ok(LrState { gamma, gamma_dot, mu })
    }

    /// The Routh state of a Lagrange–Poincaré state: `Γ̇ = Γ×ω`, `μ = Γ·Jω`.
    pub fn from_lp(p: &BodyParams, s: &LpState) -> Self {
        LrState {
            gamma: s.gamma,
            gamma_dot: s.gamma.cross(&s.omega),
            mu: s.gamma.dot(&(p.j * s.omega)),
        }
    }

    /// Body angular velocity `ω = Γ̇×Γ − bΓ + νΓ`.
    pub fn omega(&self, p: &BodyParams) -> Vec3 {
        let (b, nu) = b_nu(p, self);
        self.gamma_dot.cross(&self.gamma) + (nu - b) * self.gamma
    }

    pub fn to_lp(&self, p: &BodyParams) -> LpState {
        LpState { gamma: self.gamma, omega: self.omega(p) }
    }
}

/// Auxiliary scalars and vector of the Routh equation at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrAux {
    pub b: f64,
    pub nu: f64,
    pub c: f64,
    pub sigma: Vec3,
}

/// Full-model vector field: `(ω̇, Ṙ)`.
pub fn rhs_full(p: &BodyParams, s: &FullState) -> (Vec3, Mat3) {
    let gamma = s.r.reduced_attitude();
    let omega_dot = euler_rhs(p, &gamma, &s.omega);
    (omega_dot, s.r.matrix() * hat(&s.omega))
}

/// Lagrange–Poincaré vector field: `(ω̇, Γ̇)`.
pub fn rhs_lp(p: &BodyParams, s: &LpState) -> (Vec3, Vec3) {
    (euler_rhs(p, &s.gamma, &s.omega), s.gamma.cross(&s.omega))
}

fn euler_rhs(p: &BodyParams, gamma: &Vec3, omega: &Vec3) -> Vec3 {
    let torque = (p.j * omega).cross(omega) + p.mg() * p.rho.cross(gamma);
    p.j_inv * torque
}

fn b_nu(p: &BodyParams, s: &LrState) -> (f64, f64) {
    let j_gamma = p.j * s.gamma;
    let locked = s.gamma.dot(&j_gamma);
    let w = s.gamma_dot.cross(&s.gamma);
    (j_gamma.dot(&w) / locked, s.mu / locked)
}

/// Auxiliary quantities `b`, `ν`, `c`, `Σ` of the Routh equation.
pub fn lr_aux(p: &BodyParams, s: &LrState) -> LrAux {
    let j = &p.j;
    let gamma = &s.gamma;
    let gamma_dot = &s.gamma_dot;
    let j_gamma = j * gamma;
    let locked = gamma.dot(&j_gamma);
    let w = gamma_dot.cross(gamma);
    let b = j_gamma.dot(&w) / locked;
    let nu = s.mu / locked;
    let c = nu * (j.trace() - 2.0 * j_gamma.norm_squared() / locked);

    let v = w - b * gamma;
    let bracket = (j * w - b * j_gamma).cross(&v) + nu * nu * j_gamma.cross(gamma)
        - p.mg() * gamma.cross(&p.rho)
        - c * gamma_dot;
    let sigma = b * gamma_dot + p.j_inv * bracket;
    LrAux { b, nu, c, sigma }
}

/// Lagrange–Routh vector field: `(Γ̇, Γ̈)` with `Γ̈ = −‖Γ̇‖²Γ + Γ×Σ`.
pub fn rhs_lr(p: &BodyParams, s: &LrState) -> (Vec3, Vec3) {
    let aux = lr_aux(p, s);
    let gamma_ddot = -s.gamma_dot.norm_squared() * s.gamma + s.gamma.cross(&aux.sigma);
    (s.gamma_dot, gamma_ddot)
}

/// Invariant submodels of an axisymmetric body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialMode {
    /// Spinning top with fixed spin `ω_z = spin`.
    Top { spin: f64 },
    /// Spherical pendulum, `ω_z = 0`.
    Spherical,
    /// Planar pendulum in the `x–z` body plane, `Γ = (−sin θ, 0, cos θ)`.
    Planar,
}

/// State of a special-case model, also used for its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialState {
    Sphere { gamma: Vec3, omega_x: f64, omega_y: f64 },
    Planar { theta: f64, omega_y: f64 },
}

/// Returns `(J_t, J_a, ρ_s)` if the body has `J = diag(J_t, J_t, J_a)` and
/// `ρ = ρ_s e₃` with `ρ_s > 0`.
pub fn axisymmetric_params(p: &BodyParams) -> Result<(f64, f64, f64)> {
    let j = &p.j;
    let scale = j.abs().max();
    let off = (j - Mat3::from_diagonal(&j.diagonal())).abs().max();
    let t = tol::AXISYMMETRY * scale;
    let rho_t = tol::AXISYMMETRY * p.rho.norm().max(1.0);
    if off > t
        || (j[(0, 0)] - j[(1, 1)]).abs() > t
        || p.rho.x.abs() > rho_t
        || p.rho.y.abs() > rho_t
        || p.rho.z <= 0.0
    {
        return Err(Error::NotAxisymmetric);
    }
    Ok((j[(0, 0)], j[(2, 2)], p.rho.z))
}

/// Vector field of the spinning-top, spherical or planar submodel.
pub fn rhs_special(p: &BodyParams, mode: SpecialMode, state: &SpecialState) -> Result<SpecialState> {
    let (jt, ja, rho_s) = axisymmetric_params(p)?;
    let mgr = p.mg() * rho_s;
    match (mode, *state) {
        (SpecialMode::Top { .. } | SpecialMode::Spherical, SpecialState::Sphere { gamma, omega_x, omega_y }) => {
            check_unit(&gamma)?;
            let c = match mode {
                SpecialMode::Top { spin } => spin,
                _ => 0.0,
            };
            let wx_dot = (c * (jt - ja) * omega_y - mgr * gamma.y) / jt;
            let wy_dot = (c * (ja - jt) * omega_x + mgr * gamma.x) / jt;
            Ok(SpecialState::Sphere {
                gamma: gamma.cross(&Vec3::new(omega_x, omega_y, c)),
                omega_x: wx_dot,
                omega_y: wy_dot,
            })
        }
        (SpecialMode::Planar, SpecialState::Planar { theta, omega_y }) => Ok(SpecialState::Planar {
            theta: omega_y,
            omega_y: -mgr * theta.sin() / jt,
        }),
        _ => Err(Error::ModeStateMismatch),
    }
}

/// Angular-momentum vector in the inertial frame, `RJω`.
pub fn spatial_momentum(p: &BodyParams, s: &FullState) -> Vec3 {
    s.r.matrix() * (p.j * s.omega)
}

/// Hanging rest state `Γ = ρ/‖ρ‖`, `ω = 0`.
pub fn hanging_lp(p: &BodyParams) -> Result<LpState> {
    if p.balanced {
        return Err(Error::BalancedBody);
    }
    Ok(LpState { gamma: p.rho.normalize(), omega: Vec3::zeros() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{e3, exp_so3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn body() -> BodyParams {
        BodyParams::diagonal([0.13, 0.28, 0.17], 1.0, 9.81, Vec3::new(0.0, 0.0, 0.3)).unwrap()
    }

    fn skewed_body() -> BodyParams {
        let j = Mat3::new(0.3, 0.02, -0.01, 0.02, 0.25, 0.03, -0.01, 0.03, 0.12);
        BodyParams::new(j, 1.3, 9.81, Vec3::new(0.05, -0.1, 0.2)).unwrap()
    }

    fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = rand_vec(rng, 1.0);
            if v.norm() > 0.1 {
                return v.normalize();
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let j = Mat3::from_diagonal(&Vec3::new(0.13, 0.28, 0.17));
        assert!(BodyParams::new(j, 1.0, 9.81, Vec3::zeros()).is_err());
        assert!(BodyParams::new(-j, 1.0, 9.81, Vec3::z()).is_err());
        assert!(BodyParams::new(j, 0.0, 9.81, Vec3::z()).is_err());
        assert!(BodyParams::balanced(j, 1.0, 9.81).unwrap().is_balanced());
        let mut asym = j;
        asym[(0, 1)] = 0.01;
        assert!(BodyParams::new(asym, 1.0, 9.81, Vec3::z()).is_err());
    }

    #[test]
    fn full_rhs_examples() {
        let p = body();
        let hanging = FullState::new(Rotation::identity(), Vec3::zeros());
        let (wd, rd) = rhs_full(&p, &hanging);
        assert_eq!(wd, Vec3::zeros());
        assert_eq!(rd, Mat3::zeros());

        let s = FullState::new(Rotation::identity(), Vec3::new(1.0, 1.0, 1.0));
        let (wd, _) = rhs_full(&p, &s);
        // Jω×ω = (0.13, 0.28, 0.17)×(1, 1, 1) = (0.11, 0.04, −0.15)
        let expected = Vec3::new(0.11 / 0.13, 0.04 / 0.28, -0.15 / 0.17);
        assert!((wd - expected).norm() < 1e-14);
        assert!((wd - Vec3::new(0.84615, 0.14286, -0.88235)).norm() < 1e-5);

        let free = BodyParams::balanced(*p.j(), 1.0, 9.81).unwrap();
        let s = FullState::new(exp_so3(&Vec3::new(0.3, 0.2, -1.0)), Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(rhs_full(&free, &s).0, Vec3::zeros());
    }

    #[test]
    fn lp_rhs_examples() {
        let p = body();
        let (wd, gd) = rhs_lp(&p, &hanging_lp(&p).unwrap());
        assert_eq!((wd, gd), (Vec3::zeros(), Vec3::zeros()));

        let n = p.j_inv() * p.rho();
        let gamma = -n / n.norm();
        let omega = (p.mg() / n.norm()).sqrt() * n;
        let (wd, gd) = rhs_lp(&p, &LpState::new(gamma, omega).unwrap());
        assert!(wd.norm() < 1e-12 && gd.norm() < 1e-12);
    }

    #[test]
    fn lp_commutes_with_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [body(), skewed_body()] {
            for _ in 0..20 {
                let s = FullState::new(exp_so3(&rand_vec(&mut rng, 3.0)), rand_vec(&mut rng, 2.0));
                let (wd_full, r_dot) = rhs_full(&p, &s);
                let (wd_lp, g_dot) = rhs_lp(&p, &s.project());
                assert!((wd_full - wd_lp).norm() < 1e-12);
                assert!((r_dot.transpose() * e3() - g_dot).norm() < 1e-12);

                // Central difference of Rᵀe₃ along the flow of Ṙ = Rω̂.
                let eps = 1e-6;
                let plus = s.r.compose(&exp_so3(&(eps * s.omega))).reduced_attitude();
                let minus = s.r.compose(&exp_so3(&(-eps * s.omega))).reduced_attitude();
                assert!(((plus - minus) / (2.0 * eps) - g_dot).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn lr_aux_examples() {
        let p = body();
        let s = LrState::new(e3(), Vec3::zeros(), 0.0).unwrap();
        let aux = lr_aux(&p, &s);
        assert_eq!((aux.b, aux.nu, aux.c), (0.0, 0.0, 0.0));

        let gamma = Vec3::new(0.6, 0.0, 0.8);
        let aux = lr_aux(&p, &LrState::new(gamma, Vec3::zeros(), 0.0).unwrap());
        let expected = -(p.j_inv() * (p.mg() * gamma.cross(p.rho())));
        assert!((aux.sigma - expected).norm() < 1e-14);

        let aux = lr_aux(&p, &LrState::new(e3(), Vec3::new(0.4, -0.3, 0.0), 1.0).unwrap());
        assert!((aux.nu - 1.0 / 0.17).abs() < 1e-13);
        assert!((aux.c - 0.24 / 0.17).abs() < 1e-13);
        assert!((aux.nu - 5.88235).abs() < 1e-5 && (aux.c - 1.41176).abs() < 1e-5);
    }

    #[test]
    fn lr_rhs_matches_lp_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [body(), skewed_body()] {
            let (_, gdd) = rhs_lr(&p, &LrState::new(p.rho().normalize(), Vec3::zeros(), 0.0).unwrap());
            assert!(gdd.norm() < 1e-14);
            for _ in 0..20 {
                let gamma = rand_unit(&mut rng);
                let gamma_dot = rand_vec(&mut rng, 2.0);
                let mu = rng.random_range(-1.0..1.0);
                let s = LrState::new(gamma, gamma_dot, mu).unwrap();
                let (gd, gdd) = rhs_lr(&p, &s);
                assert!(gamma.dot(&gd).abs() < 1e-15);
                assert!((gamma.dot(&gdd) + gd.norm_squared()).abs() < 1e-12);

                let omega = s.omega(&p);
                assert!((gamma.dot(&(p.j() * omega)) - mu).abs() < 1e-13);
                let lp = LpState::new(gamma, omega).unwrap();
                let (wd, g_dot) = rhs_lp(&p, &lp);
                assert!((g_dot - s.gamma_dot).norm() < 1e-13);
                let oracle = g_dot.cross(&omega) + gamma.cross(&wd);
                assert!((gdd - oracle).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn lr_round_trip_through_lp() {
        let p = skewed_body();
        let lp = LpState::new(Vec3::new(0.2, -0.4, 0.7).normalize(), Vec3::new(0.5, 1.0, -2.0)).unwrap();
        let back = LrState::from_lp(&p, &lp).to_lp(&p);
        assert!((back.omega - lp.omega).norm() < 1e-13);
    }

    #[test]
    fn special_cases() {
        let p = BodyParams::diagonal([0.2, 0.2, 0.1], 1.0, 9.81, Vec3::new(0.0, 0.0, 0.3)).unwrap();
        let rest = SpecialState::Planar { theta: 0.0, omega_y: 0.0 };
        assert_eq!(rhs_special(&p, SpecialMode::Planar, &rest).unwrap(), rest);
        let side = SpecialState::Planar { theta: FRAC_PI_2, omega_y: 0.0 };
        match rhs_special(&p, SpecialMode::Planar, &side).unwrap() {
            SpecialState::Planar { omega_y, .. } => assert!((omega_y + 14.715).abs() < 1e-12),
            _ => unreachable!(),
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let gamma = rand_unit(&mut rng);
            let (wx, wy, spin) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            for (mode, wz) in [(SpecialMode::Spherical, 0.0), (SpecialMode::Top { spin }, spin)] {
                let state = SpecialState::Sphere { gamma, omega_x: wx, omega_y: wy };
                let (wd, gd) = rhs_lp(&p, &LpState::new(gamma, Vec3::new(wx, wy, wz)).unwrap());
                assert!(wd.z.abs() < 1e-14);
                match rhs_special(&p, mode, &state).unwrap() {
                    SpecialState::Sphere { gamma: g, omega_x, omega_y } => {
                        assert!((g - gd).norm() < 1e-12);
                        assert!((omega_x - wd.x).abs() < 1e-12 && (omega_y - wd.y).abs() < 1e-12);
                    }
                    _ => unreachable!(),
                }
            }
        }

        assert_eq!(rhs_special(&body(), SpecialMode::Planar, &rest), Err(Error::NotAxisymmetric));
        let sphere = SpecialState::Sphere { gamma: e3(), omega_x: 0.0, omega_y: 0.0 };
        assert_eq!(rhs_special(&p, SpecialMode::Planar, &sphere), Err(Error::ModeStateMismatch));
    }

    #[test]
    fn free_body_conserves_spatial_momentum() {
        let p = BodyParams::new(*skewed_body().j(), 1.0, 0.0, Vec3::new(0.1, 0.0, 0.2)).unwrap();
        let s = FullState::new(exp_so3(&Vec3::new(0.5, -1.0, 0.3)), Vec3::new(1.0, -0.5, 2.0));
        let (wd, rd) = rhs_full(&p, &s);
        let d = rd * (p.j() * s.omega) + s.r.matrix() * (p.j() * wd);
        assert!(d.norm() < 1e-12);
    }
}
