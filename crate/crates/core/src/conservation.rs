//! Conserved and structural quantities of the three models.

use crate::dynamics::{BodyParams, FullState, LpState, LrState, Model};
use crate::geometry::{Rotation, Vec3};

/// Energy and vertical momentum of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub energy: f64,
    pub h: f64,
    pub model: Model,
}

impl InvariantReport {
    pub fn full(p: &BodyParams, s: &FullState) -> Self {
        InvariantReport { energy: energy_full(p, s), h: momentum_h(p, s), model: Model::Full }
    }

    pub fn lp(p: &BodyParams, s: &LpState) -> Self {
        InvariantReport { energy: energy_lp(p, s), h: momentum_lp(p, s), model: Model::Lp }
    }

    pub fn lr(p: &BodyParams, s: &LrState) -> Self {
        InvariantReport { energy: energy_lr(p, s), h: s.mu, model: Model::Lr }
    }
}

/// `E = ½ωᵀJω − mgρᵀRᵀe₃`.
pub fn energy_full(p: &BodyParams, s: &FullState) -> f64 {
    energy_lp(p, &s.project())
}

/// `h = ωᵀJRᵀe₃`.
pub fn momentum_h(p: &BodyParams, s: &FullState) -> f64 {
    s.omega.dot(&(p.j() * s.r.reduced_attitude()))
}

/// `E = ½ωᵀJω − mgρᵀΓ`.
pub fn energy_lp(p: &BodyParams, s: &LpState) -> f64 {
    0.5 * s.omega.dot(&(p.j() * s.omega)) - p.mg() * p.rho().dot(&s.gamma)
}

/// Vertical momentum in reduced variables, `Γ·Jω`.
pub fn momentum_lp(p: &BodyParams, s: &LpState) -> f64 {
    s.gamma.dot(&(p.j() * s.omega))
}

/// Momentum map of the vertical `S¹` action, `e₃ᵀRJω`. Identical to
/// [`momentum_h`].
pub fn momentum_map(p: &BodyParams, s: &FullState) -> f64 {
    momentum_h(p, s)
}

/// Locked inertia `e₃ᵀRJRᵀe₃`.
pub fn locked_inertia(p: &BodyParams, r: &Rotation) -> f64 {
    let gamma = r.reduced_attitude();
    gamma.dot(&(p.j() * gamma))
}

/// Mechanical connection: momentum map over locked inertia.
pub fn mechanical_connection(p: &BodyParams, s: &FullState) -> f64 {
    momentum_map(p, s) / locked_inertia(p, &s.r)
}

/// Routhian `R^μ = ½wᵀJw − ½(b² + ν²)ΓᵀJΓ + mgΓ·ρ` with `w = Γ̇×Γ`.
pub fn routhian(p: &BodyParams, s: &LrState) -> f64 {
    routhian_at(p, &s.gamma, &s.gamma_dot, s.mu)
}

/// [`routhian`] evaluated on arbitrary vectors, without the sphere constraint.
/// Useful for differentiating the Routhian in the ambient space.
pub fn routhian_at(p: &BodyParams, gamma: &Vec3, gamma_dot: &Vec3, mu: f64) -> f64 {
    let j_gamma = p.j() * gamma;
    let locked = gamma.dot(&j_gamma);
    let w = gamma_dot.cross(gamma);
    let b = j_gamma.dot(&w) / locked;
    let nu = mu / locked;
    0.5 * w.dot(&(p.j() * w)) - 0.5 * (b * b + nu * nu) * locked + p.mg() * gamma.dot(p.rho())
}

/// Magnetic two-form `β_μ(Γ×η, Γ×ζ)`.
pub fn magnetic_form(p: &BodyParams, gamma: &Vec3, eta: &Vec3, zeta: &Vec3, mu: f64) -> f64 {
    let j_gamma = p.j() * gamma;
    let locked = gamma.dot(&j_gamma);
    let bracket = -locked * p.j().trace() + 2.0 * j_gamma.norm_squared();
    -mu / (locked * locked) * bracket * gamma.dot(&eta.cross(zeta))
}

/// Energy of a Routh state, `½vᵀJv − mgρᵀΓ` with `v = Γ̇×Γ + (ν − b)Γ`.
pub fn energy_lr(p: &BodyParams, s: &LrState) -> f64 {
    energy_lp(p, &s.to_lp(p))
}
