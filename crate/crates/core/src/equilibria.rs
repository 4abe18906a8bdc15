//! Equilibria of the reduced models: the static hanging and inverted rest
//! points, steady rotations about the vertical, the α-parameterized families
//! and the extra families that appear for degenerate inertia.
//!
//! Every enumerated attitude `Γe` comes with `ωe = kΓe` (LP form) and the
//! momentum `μ = k ΓeᵀJΓe` (LR form).

use std::fmt;

use crate::dynamics::{rhs_lr, BodyParams, LrState};
use crate::geometry::Vec3;
use crate::{tol, Error, Execution, Result};

/// The four α-intervals on which `n_α` is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Interval {
    /// `(−∞, 0) ∪ (1/J₃, ∞)`
    L1,
    /// `(0, 1/J₁)`
    L2,
    /// `(1/J₁, 1/J₂)`
    L3,
    /// `(1/J₂, 1/J₃)`
    L4,
}

/// Sign of the angular velocity on a family branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    /// `ωe = 0`
    Static,
    /// `ωe = +√(mg/‖n‖) n`
    Plus,
    /// `ωe = −√(mg/‖n‖) n`
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Static => 0.0,
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Which degenerate family a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Hanging,
    Inverted,
    /// Steady rotation along `J⁻¹ρ`.
    InvInertiaAxis,
    AlphaFamily { alpha: f64, interval: Interval },
    /// Distinct moments and `ρ_axis = 0` (axis is 1-based).
    DegenerateDistinct { axis: usize, gamma: f64 },
    /// A repeated moment: `two_dim` is the family over the repeated pair
    /// (free `γ, δ`), otherwise the 1D family at the remaining axis.
    DegenerateAxisym { two_dim: bool, gamma: f64, delta: f64 },
}

impl Family {
    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            Family::Hanging => "hanging".into(),
            Family::Inverted => "inverted".into(),
            Family::InvInertiaAxis => "inv_inertia_axis".into(),
            Family::AlphaFamily { interval, .. } => format!("alpha_{interval:?}"),
            Family::DegenerateDistinct { axis, .. } => format!("degenerate_distinct_{axis}"),
            Family::DegenerateAxisym { two_dim: true, .. } => "degenerate_axisym_a".into(),
            Family::DegenerateAxisym { two_dim: false, .. } => "degenerate_axisym_b".into(),
        }
    }

    /// The α value, if the family carries one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Family::AlphaFamily { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Family::DegenerateDistinct { .. } | Family::DegenerateAxisym { .. })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A relative equilibrium of the reduced models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub gamma: Vec3,
    pub omega: Vec3,
    pub mu: f64,
    pub family: Family,
    pub branch: Branch,
    pub residual: f64,
}

/// Sampling of the one- and two-parameter families.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationOptions {
    /// α samples for the α-families; each must avoid the poles.
    pub alphas: Vec<f64>,
    /// Samples of the free coordinates of the degenerate families.
    pub free_grid: Vec<f64>,
    pub execution: Execution,
}

impl EnumerationOptions {
    /// Default grids: `per_interval` α samples in each of `L₁..L₄` and 21
    /// free-coordinate samples on `[−5, 5]`.
    pub fn with_default_grid(p: &BodyParams, per_interval: usize) -> Result<Self> {
        Ok(EnumerationOptions {
            alphas: default_alpha_grid(p, per_interval)?,
            free_grid: uniform(-5.0, 5.0, 21),
            execution: Execution::default(),
        })
    }
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn diagonal(p: &BodyParams) -> Result<[f64; 3]> {
    if !p.is_diagonal() {
        return Err(Error::NonDiagonalInertia);
    }
    let j = p.j();
    let d = [j[(0, 0)], j[(1, 1)], j[(2, 2)]];
    if d[0] < d[1] || d[1] < d[2] {
        return Err(Error::UnsortedInertia);
    }
    Ok(d)
}

fn same_moment(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= tol::DEGENERACY * scale
}

/// Samples in `(a, b)` that crowd both ends logarithmically, staying a
/// relative `ALPHA_GRID_CLAMP` of the width away from them.
fn two_sided(a: f64, b: f64, n: usize) -> Vec<f64> {
    let eps = tol::ALPHA_GRID_CLAMP;
    let lo = (eps / (1.0 - eps)).ln();
    uniform(lo, -lo, n)
        .into_iter()
        .map(|x| a + (b - a) / (1.0 + (-x).exp()))
        .collect()
}

/// `n` log-spaced magnitudes in `[lo, hi]`.
fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    uniform(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Default α grid: `per_interval` samples in each nonempty interval, in
/// interval order and ascending within each interval. `L₁` is split evenly
/// between its negative and positive halves, which extend to `|α| = 10⁶`.
pub fn default_alpha_grid(p: &BodyParams, per_interval: usize) -> Result<Vec<f64>> {
    let [j1, j2, j3] = diagonal(p)?;
    let scale = j1;
    let far = 1.0 / tol::ALPHA_GRID_CLAMP;
    let clamp = tol::ALPHA_GRID_CLAMP;
    let mut grid = Vec::with_capacity(4 * per_interval);

    let neg = per_interval / 2;
    let mut left: Vec<f64> = log_spaced(clamp, far, neg).into_iter().map(|x| -x).collect();
    left.reverse();
    grid.extend(left);
    let pole = 1.0 / j3;
    grid.extend(log_spaced(clamp * pole, far, per_interval - neg).into_iter().map(|d| pole + d));

    for (a, b) in [(0.0, 1.0 / j1), (1.0 / j1, 1.0 / j2), (1.0 / j2, 1.0 / j3)] {
        let empty = a > 0.0 && same_moment(1.0 / a, 1.0 / b, scale);
        if !empty {
            grid.extend(two_sided(a, b, per_interval));
        }
    }
    Ok(grid)
}

/// The α-interval containing `alpha`, or `None` at a pole.
pub fn interval_of(p: &BodyParams, alpha: f64) -> Result<Option<Interval>> {
    let [j1, j2, j3] = diagonal(p)?;
    let poles = [0.0, 1.0 / j1, 1.0 / j2, 1.0 / j3];
    if poles.iter().any(|&q| is_near_pole(alpha, q)) {
        return Ok(None);
    }
    Ok(Some(if alpha < 0.0 || alpha > 1.0 / j3 {
        Interval::L1
    } else if alpha < 1.0 / j1 {
        Interval::L2
    } else if alpha < 1.0 / j2 {
        Interval::L3
    } else {
        Interval::L4
    }))
}

fn is_near_pole(alpha: f64, pole: f64) -> bool {
    if pole == 0.0 {
        alpha == 0.0
    } else {
        (alpha - pole).abs() <= tol::ALPHA_POLE_GUARD * pole.abs()
    }
}

/// `n_α = (J − I/α)⁻¹ρ`.
pub fn n_alpha(p: &BodyParams, alpha: f64) -> Result<Vec3> {
    let j = p.j();
    let eig = j.symmetric_eigen();
    let singular = alpha == 0.0
        || !alpha.is_finite()
        || eig.eigenvalues.iter().any(|&ji| is_near_pole(alpha, 1.0 / ji));
    if singular {
        return Err(Error::SingularAlpha { alpha });
    }
    // (J − I/α)⁻¹ρ = α(αJ − I)⁻¹ρ, which stays well scaled as α → 0.
    let shifted = alpha * j - crate::Mat3::identity();
    let solve = shifted.lu().solve(p.rho()).ok_or(Error::SingularAlpha { alpha })?;
    Ok(alpha * solve)
}

/// `‖Jω×ω + mgρ×Γ‖ + ‖Γ×ω‖`.
pub fn residual(p: &BodyParams, gamma: &Vec3, omega: &Vec3) -> f64 {
    let torque = (p.j() * omega).cross(omega) + p.mg() * p.rho().cross(gamma);
    torque.norm() + gamma.cross(omega).norm()
}

/// Recomputes the residual of `e`.
pub fn check_equilibrium(p: &BodyParams, e: &Equilibrium) -> f64 {
    residual(p, &e.gamma, &e.omega)
}

/// The equilibrium with attitude `−sgn·v/‖v‖` and `ω = ±√(mg/‖v‖) v`.
fn from_direction(p: &BodyParams, v: &Vec3, attitude_sign: f64, branch: Branch, family: Family) -> Equilibrium {
    let norm = v.norm();
    let gamma = attitude_sign * v / norm;
    let omega = branch.sign() * (p.mg() / norm).sqrt() * v;
    finish(p, gamma, omega, family, branch)
}

fn finish(p: &BodyParams, gamma: Vec3, omega: Vec3, family: Family, branch: Branch) -> Equilibrium {
    let k = omega.dot(&gamma);
    let mu = k * gamma.dot(&(p.j() * gamma));
    Equilibrium { gamma, omega, mu, family, branch, residual: residual(p, &gamma, &omega) }
}

/// Hanging, inverted and the two `J⁻¹ρ` steady rotations.
fn isolated(p: &BodyParams) -> Vec<Equilibrium> {
    let rho_hat = p.rho().normalize();
    let axis = p.j_inv() * p.rho();
    vec![
        finish(p, rho_hat, Vec3::zeros(), Family::Hanging, Branch::Static),
        finish(p, -rho_hat, Vec3::zeros(), Family::Inverted, Branch::Static),
        from_direction(p, &axis, -1.0, Branch::Plus, Family::InvInertiaAxis),
        from_direction(p, &axis, -1.0, Branch::Minus, Family::InvInertiaAxis),
    ]
}

/// One α-family member on the given branch.
pub fn alpha_family_member(p: &BodyParams, alpha: f64, branch: Branch) -> Result<Equilibrium> {
    let n = n_alpha(p, alpha)?;
    let interval = interval_of(p, alpha)?.ok_or(Error::SingularAlpha { alpha })?;
    Ok(from_direction(p, &n, -1.0, branch, Family::AlphaFamily { alpha, interval }))
}

/// Free coordinate values for one degenerate family: one or two free axes.
struct DegenerateFamily {
    free: Vec<usize>,
    base: Vec3,
    label: fn(usize, f64, f64) -> Family,
}

/// Families living at the poles `α = 1/J_k`. At a pole the linear system is
/// solvable iff `ρ` vanishes on every axis sharing the moment `J_k`; those
/// axes become free coordinates.
fn degenerate_families(p: &BodyParams, d: [f64; 3]) -> Vec<DegenerateFamily> {
    let rho = p.rho();
    let scale = d[0];
    let rho_scale = rho.norm();
    let all_distinct = !same_moment(d[0], d[1], scale) && !same_moment(d[1], d[2], scale);
    let mut out = Vec::new();
    let mut seen = [false; 3];
    for k in 0..3 {
        if seen[k] {
            continue;
        }
        let group: Vec<usize> = (0..3).filter(|&i| same_moment(d[i], d[k], scale)).collect();
        for &i in &group {
            seen[i] = true;
        }
        if group.len() == 3 || group.iter().any(|&i| rho[i].abs() > tol::DEGENERACY * rho_scale) {
            continue;
        }
        let mut base = Vec3::zeros();
        for i in 0..3 {
            if !group.contains(&i) {
                base[i] = rho[i] / (d[i] - d[k]);
            }
        }
        let label: fn(usize, f64, f64) -> Family = if all_distinct {
            |axis, gamma, _| Family::DegenerateDistinct { axis: axis + 1, gamma }
        } else if group.len() == 2 {
            |_, gamma, delta| Family::DegenerateAxisym { two_dim: true, gamma, delta }
        } else {
            |_, gamma, _| Family::DegenerateAxisym { two_dim: false, gamma, delta: 0.0 }
        };
        out.push(DegenerateFamily { free: group, base, label });
    }
    out
}

fn degenerate_members(p: &BodyParams, fam: &DegenerateFamily, grid: &[f64]) -> Vec<Equilibrium> {
    let mut points = Vec::new();
    match fam.free.as_slice() {
        [i] => {
            for &g in grid {
                let mut v = fam.base;
                v[*i] = g;
                points.push((v, (fam.label)(*i, g, 0.0)));
            }
        }
        [i, j] => {
            for &g in grid {
                for &dl in grid {
                    let mut v = fam.base;
                    v[*i] = g;
                    v[*j] = dl;
                    points.push((v, (fam.label)(*i, g, dl)));
                }
            }
        }
        _ => unreachable!("groups of three moments are excluded"),
    }
    let mut out = Vec::new();
    for (v, family) in points {
        if v.norm() <= tol::DEGENERACY {
            continue;
        }
        for branch in [Branch::Plus, Branch::Minus] {
            out.push(from_direction(p, &v, -1.0, branch, family));
        }
    }
    out
}

/// All equilibria of the Lagrange–Poincaré model for a body with diagonal,
/// sorted inertia. Output order: hanging, inverted, the `J⁻¹ρ` pair, α-family
/// samples in grid order (each `+` then `−`), then degenerate families.
pub fn enumerate_lp(p: &BodyParams, opts: &EnumerationOptions) -> Result<Vec<Equilibrium>> {
    let d = diagonal(p)?;
    if p.is_balanced() {
        return Err(Error::BalancedBody);
    }
    let mut out = isolated(p);

    let members = opts.execution.map(&opts.alphas, |&alpha| -> Result<[Equilibrium; 2]> {
        Ok([
            alpha_family_member(p, alpha, Branch::Plus)?,
            alpha_family_member(p, alpha, Branch::Minus)?,
        ])
    });
    for pair in members {
        out.extend(pair?);
    }

    for fam in degenerate_families(p, d) {
        out.extend(degenerate_members(p, &fam, &opts.free_grid));
    }
    Ok(out)
}

/// Equilibria of the Lagrange–Routh model: the attitudes of [`enumerate_lp`]
/// with their momentum values. The Routh residual `‖Γ̈‖` at `(Γe, 0, μ)` is
/// added to each residual.
pub fn enumerate_lr(p: &BodyParams, opts: &EnumerationOptions) -> Result<Vec<Equilibrium>> {
    let mut eqs = enumerate_lp(p, opts)?;
    for e in &mut eqs {
        let state = LrState { gamma: e.gamma, gamma_dot: Vec3::zeros(), mu: e.mu };
        e.residual += rhs_lr(p, &state).1.norm();
    }
    Ok(eqs)
}

/// Closed-form momentum of an α-family member on branch `Plus`:
/// `μ = −√(mg/‖n‖³) nᵀJn`.
pub fn alpha_family_mu(p: &BodyParams, alpha: f64) -> Result<f64> {
    let n = n_alpha(p, alpha)?;
    let norm = n.norm();
    Ok(-(p.mg() / norm.powi(3)).sqrt() * n.dot(&(p.j() * n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rhs_lp, LpState};
    use crate::geometry::exp_so3;

    fn cylinder() -> BodyParams {
        BodyParams::diagonal([0.4486, 0.3943, 0.0772], 1.0, 9.81, Vec3::new(-0.0140, 0.1044, 0.4989)).unwrap()
    }

    fn body() -> BodyParams {
        BodyParams::diagonal([0.13, 0.28, 0.17], 1.0, 9.81, Vec3::new(0.0, 0.0, 0.3)).unwrap()
    }

    fn sorted_body() -> BodyParams {
        BodyParams::diagonal([0.28, 0.17, 0.13], 1.0, 9.81, Vec3::new(0.0, 0.3, 0.0)).unwrap()
    }

    #[test]
    fn n_alpha_examples() {
        let p = body();
        let n = n_alpha(&p, 10.0).unwrap();
        assert!((n - Vec3::new(0.0, 0.0, 0.3 / 0.07)).norm() < 1e-13);
        assert!((n.z - 4.28571).abs() < 1e-5);
        for alpha in [0.0, 1.0 / 0.13, 1.0 / 0.28 * (1.0 + 1e-11)] {
            assert!(matches!(n_alpha(&p, alpha), Err(Error::SingularAlpha { .. })));
        }
        let p = cylinder();
        let far = n_alpha(&p, 1e9).unwrap();
        assert!((far - p.j_inv() * p.rho()).norm() < 1e-7);
    }

    #[test]
    fn alpha_limits() {
        let p = cylinder();
        let rho_hat = p.rho().normalize();
        let axis = -(p.j_inv() * p.rho()).normalize();
        for branch in [Branch::Plus, Branch::Minus] {
            let hang = alpha_family_member(&p, 1e-6, branch).unwrap();
            let inv = alpha_family_member(&p, -1e-6, branch).unwrap();
            assert!((hang.gamma - rho_hat).norm() < 1e-3);
            assert!((inv.gamma + rho_hat).norm() < 1e-3);
            assert!(hang.omega.norm() < 1e-2 && inv.omega.norm() < 1e-2);
            for alpha in [1e6, -1e6] {
                let e = alpha_family_member(&p, alpha, branch).unwrap();
                assert!((e.gamma - axis).norm() < 1e-3);
            }
        }
    }

    #[test]
    fn cylinder_enumeration() {
        let p = cylinder();
        let opts = EnumerationOptions::with_default_grid(&p, 100).unwrap();
        assert_eq!(opts.alphas.len(), 400);
        let eqs = enumerate_lp(&p, &opts).unwrap();
        assert_eq!(eqs.len(), 4 + 800);
        assert!(eqs.iter().all(|e| !e.family.is_degenerate()));
        for e in &eqs {
            assert!(e.residual <= tol::EQUILIBRIUM_RESIDUAL, "{e:?}");
            assert!(e.gamma.cross(&e.omega).norm() < 1e-12);
            let (wd, gd) = rhs_lp(&p, &LpState::new(e.gamma, e.omega).unwrap());
            assert!(wd.norm() < 1e-9 && gd.norm() < 1e-12);
        }
        for interval in [Interval::L1, Interval::L2, Interval::L3, Interval::L4] {
            let n = eqs
                .iter()
                .filter(|e| matches!(e.family, Family::AlphaFamily { interval: i, .. } if i == interval))
                .count();
            assert_eq!(n, 200);
        }
        let seq = enumerate_lp(&p, &EnumerationOptions { execution: Execution::Sequential, ..opts }).unwrap();
        assert_eq!(seq, eqs);
    }

    #[test]
    fn sign_symmetry() {
        let p = cylinder();
        let eqs = enumerate_lp(&p, &EnumerationOptions::with_default_grid(&p, 20).unwrap()).unwrap();
        for e in eqs.iter().filter(|e| e.branch == Branch::Plus) {
            assert!(eqs
                .iter()
                .any(|f| f.branch == Branch::Minus && f.family == e.family && (f.omega + e.omega).norm() < 1e-14));
        }
    }

    #[test]
    fn lr_momentum_consistency() {
        let p = cylinder();
        let opts = EnumerationOptions::with_default_grid(&p, 50).unwrap();
        let eqs = enumerate_lr(&p, &opts).unwrap();
        for e in &eqs {
            assert!(e.residual <= tol::EQUILIBRIUM_RESIDUAL, "{e:?}");
            match (e.family, e.branch) {
                (Family::Hanging | Family::Inverted, _) => assert_eq!(e.mu, 0.0),
                (Family::AlphaFamily { alpha, .. }, b) => {
                    let closed = b.sign() * alpha_family_mu(&p, alpha).unwrap();
                    assert!((closed - e.mu).abs() <= 1e-12 * closed.abs().max(1.0));
                }
                (Family::InvInertiaAxis, b) => {
                    let m = p.j_inv() * p.rho();
                    let closed = -b.sign() * (p.mg() / m.norm().powi(3)).sqrt() * p.rho().dot(&m);
                    assert!((closed - e.mu).abs() <= 1e-12 * closed.abs().max(1.0));
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn principal_axis_offset_collapses_family() {
        let p = sorted_body();
        let eqs = enumerate_lp(&p, &EnumerationOptions::with_default_grid(&p, 40).unwrap()).unwrap();
        for e in eqs.iter().filter(|e| !e.family.is_degenerate()) {
            assert!(e.gamma.x.abs() < 1e-15 && e.gamma.z.abs() < 1e-15);
            assert!((e.gamma.y.abs() - 1.0).abs() < 1e-15);
            assert!(e.omega.cross(&Vec3::y()).norm() < 1e-15);
        }
        // ρ₁ = ρ₃ = 0 with distinct moments: families at α = 1/J₁ and 1/J₃.
        let axes: Vec<usize> = eqs
            .iter()
            .filter_map(|e| match e.family {
                Family::DegenerateDistinct { axis, .. } => Some(axis),
                _ => None,
            })
            .collect();
        assert_eq!(axes.len(), 2 * 2 * 21);
        assert!(axes.contains(&1) && axes.contains(&3) && !axes.contains(&2));
        assert!(eqs.iter().all(|e| e.residual <= tol::EQUILIBRIUM_RESIDUAL));
    }

    #[test]
    fn axisymmetric_families() {
        let p = BodyParams::diagonal([0.3, 0.3, 0.1], 1.0, 9.81, Vec3::new(0.0, 0.0, 0.2)).unwrap();
        let eqs = enumerate_lp(&p, &EnumerationOptions::with_default_grid(&p, 20).unwrap()).unwrap();
        let two_dim = eqs
            .iter()
            .filter(|e| matches!(e.family, Family::DegenerateAxisym { two_dim: true, .. }))
            .count();
        assert_eq!(two_dim, 2 * 21 * 21);
        assert!(eqs.iter().all(|e| e.residual <= tol::EQUILIBRIUM_RESIDUAL));

        let p = BodyParams::diagonal([0.3, 0.3, 0.1], 1.0, 9.81, Vec3::new(0.1, -0.2, 0.0)).unwrap();
        let eqs = enumerate_lp(&p, &EnumerationOptions::with_default_grid(&p, 20).unwrap()).unwrap();
        let one_dim = eqs
            .iter()
            .filter(|e| matches!(e.family, Family::DegenerateAxisym { two_dim: false, .. }))
            .count();
        assert_eq!(one_dim, 2 * 21);
        assert!(eqs.iter().all(|e| e.residual <= tol::EQUILIBRIUM_RESIDUAL));
    }

    #[test]
    fn rejects_non_diagonal_and_unsorted() {
        let j = crate::Mat3::new(0.3, 0.01, 0.0, 0.01, 0.2, 0.0, 0.0, 0.0, 0.1);
        let p = BodyParams::new(j, 1.0, 9.81, Vec3::z()).unwrap();
        let opts = EnumerationOptions { alphas: vec![], free_grid: vec![], execution: Execution::Sequential };
        assert_eq!(enumerate_lp(&p, &opts), Err(Error::NonDiagonalInertia));
        assert_eq!(enumerate_lp(&body(), &opts), Err(Error::UnsortedInertia));
    }

    #[test]
    fn perturbed_hanging_residual() {
        let p = body();
        let hang = finish(&p, Vec3::z(), Vec3::zeros(), Family::Hanging, Branch::Static);
        assert_eq!(check_equilibrium(&p, &hang), 0.0);
        let tilted = exp_so3(&Vec3::new(1e-3, 0.0, 0.0)).apply(&Vec3::z());
        let r = residual(&p, &tilted, &Vec3::zeros());
        assert!((r - 2.943 * 1e-3).abs() < 1e-8);
    }

    #[test]
    fn family_is_continuous() {
        let p = cylinder();
        let grid = two_sided(1.0 / 0.4486, 1.0 / 0.3943, 2000);
        let samples: Vec<Vec3> = grid
            .iter()
            .map(|&a| alpha_family_member(&p, a, Branch::Plus).unwrap().gamma)
            .collect();
        for i in 1..samples.len() - 1 {
            let step = (samples[i + 1] - samples[i]).norm();
            let prev = (samples[i] - samples[i - 1]).norm();
            let d_alpha = grid[i + 1] - grid[i];
            let d_prev = grid[i] - grid[i - 1];
            // Derivative estimates from adjacent differences agree to a
            // bounded factor, so there are no jumps.
            assert!(step <= 10.0 * d_alpha * (prev / d_prev) + 1e-9, "jump at {i}");
        }
    }
}
