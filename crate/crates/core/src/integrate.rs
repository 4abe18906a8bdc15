//! Fixed-step integrators, trajectory sampling and Poincaré sections.
//!
//! Three methods are available. The Lie-group methods are Runge–Kutta–
//! Munthe-Kaas schemes: stages live in the Lie algebra and the attitude is
//! advanced by one exponential per step, so `R` stays on SO(3) to roundoff.
//! `Rk4Projected` applies classical RK4 to the matrix entries and restores
//! orthogonality every `renormalize_every` steps.
//!
//! The Routh model has no group structure in its state and is advanced by
//! RK4 (RK2 for [`Method::LieGroupRk2`]) in `ℝ⁶`, with `Γ` normalized and
//! `Γ̇` made tangent after every step.

use crate::conservation::{energy_lr, InvariantReport};
use crate::dynamics::{rhs_lp, rhs_lr, BodyParams, FullState, LpState, LrState, Model};
use crate::geometry::{dexp_inv, e3, exp_so3, hat, renormalize, Mat3, Rotation, Vec3};
use crate::{tol, Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    Rk4Projected,
    LieGroupRk2,
    #[default]
    LieGroupRk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Projected => "rk4-projected",
            Method::LieGroupRk2 => "liegroup-rk2",
            Method::LieGroupRk4 => "liegroup-rk4",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        [Method::Rk4Projected, Method::LieGroupRk2, Method::LieGroupRk4]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size (s).
    pub h: f64,
    /// Horizon (s).
    pub t_end: f64,
    /// Renormalization period in steps for `Rk4Projected`.
    pub renormalize_every: usize,
    /// Record every this many steps.
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::LieGroupRk4,
            h: 1e-3,
            t_end: 100.0,
            renormalize_every: 1,
            sample_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, t_end: f64) -> Self {
        IntegratorConfig { method, h, t_end, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad("h must be positive");
        }
        if !(self.t_end.is_finite() && self.t_end >= self.h) {
            return bad("T must be at least h");
        }
        if self.renormalize_every == 0 {
            return bad("renormalize_every must be at least 1");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1");
        }
        Ok(())
    }

    /// Number of steps covering `[0, T]`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.h).round() as usize
    }
}

/// A state of any of the three models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    Full(FullState),
    Lp(LpState),
    Lr(LrState),
}

impl State {
    pub fn model(&self) -> Model {
        match self {
            State::Full(_) => Model::Full,
            State::Lp(_) => Model::Lp,
            State::Lr(_) => Model::Lr,
        }
    }

    /// Reduced attitude `Γ`.
    pub fn gamma(&self) -> Vec3 {
        match self {
            State::Full(s) => s.r.reduced_attitude(),
            State::Lp(s) => s.gamma,
            State::Lr(s) => s.gamma,
        }
    }

    pub fn invariants(&self, p: &BodyParams) -> InvariantReport {
        match self {
            State::Full(s) => InvariantReport::full(p, s),
            State::Lp(s) => InvariantReport::lp(p, s),
            State::Lr(s) => InvariantReport::lr(p, s),
        }
    }

    fn max_abs(&self) -> f64 {
        let v = match self {
            State::Full(s) => s.omega.amax().max(s.r.matrix().amax()),
            State::Lp(s) => s.omega.amax().max(s.gamma.amax()),
            State::Lr(s) => s.gamma_dot.amax().max(s.gamma.amax()).max(s.mu.abs()),
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Time derivative of the body angular velocity given the reduced attitude.
fn omega_dot(p: &BodyParams, gamma: &Vec3, omega: &Vec3) -> Vec3 {
    rhs_lp(p, &LpState { gamma: *gamma, omega: *omega }).0
}

/// One RKMK step on `(R, ω)` expressed through `Γ₀ = R₀ᵀe₃`. Returns the
/// algebra increment `θ` (so `R₁ = R₀ exp θ̂`) and `ω₁`.
fn rkmk(p: &BodyParams, gamma0: &Vec3, omega0: &Vec3, h: f64, order4: bool) -> (Vec3, Vec3) {
    let attitude = |theta: &Vec3| exp_so3(theta).transpose().apply(gamma0);
    let k1 = *omega0;
    let a1 = omega_dot(p, gamma0, omega0);
    if !order4 {
        let th = h * k1;
        let w = omega0 + h * a1;
        let a2 = omega_dot(p, &attitude(&th), &w);
        let k2 = dexp_inv(&th, &w);
        return (0.5 * h * (k1 + k2), omega0 + 0.5 * h * (a1 + a2));
    }
    let th2 = 0.5 * h * k1;
    let w2 = omega0 + 0.5 * h * a1;
    let a2 = omega_dot(p, &attitude(&th2), &w2);
    let k2 = dexp_inv(&th2, &w2);

    let th3 = 0.5 * h * k2;
    let w3 = omega0 + 0.5 * h * a2;
    let a3 = omega_dot(p, &attitude(&th3), &w3);
    let k3 = dexp_inv(&th3, &w3);

    let th4 = h * k3;
    let w4 = omega0 + h * a3;
    let a4 = omega_dot(p, &attitude(&th4), &w4);
    let k4 = dexp_inv(&th4, &w4);

    (
        h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
        omega0 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    )
}

/// RKMK4 step of `Ṙ = R ω̂(t)` for a prescribed angular velocity sampled at
/// the start, midpoint and end of the step.
pub(crate) fn lift_step(r: &Rotation, w0: &Vec3, wm: &Vec3, w1: &Vec3, h: f64) -> Rotation {
    let k1 = *w0;
    let k2 = dexp_inv(&(0.5 * h * k1), wm);
    let k3 = dexp_inv(&(0.5 * h * k2), wm);
    let k4 = dexp_inv(&(h * k3), w1);
    r.compose(&exp_so3(&(h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))))
}

fn rk4_full(p: &BodyParams, s: &FullState, h: f64) -> (Mat3, Vec3) {
    let f = |r: &Mat3, w: &Vec3| -> (Mat3, Vec3) {
        let gamma = r.row(2).transpose();
        (r * hat(w), omega_dot(p, &gamma, w))
    };
    let r0 = *s.r.matrix();
    let w0 = s.omega;
    let (r1, a1) = f(&r0, &w0);
    let (r2, a2) = f(&(r0 + 0.5 * h * r1), &(w0 + 0.5 * h * a1));
    let (r3, a3) = f(&(r0 + 0.5 * h * r2), &(w0 + 0.5 * h * a2));
    let (r4, a4) = f(&(r0 + h * r3), &(w0 + h * a3));
    (
        r0 + h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4),
        w0 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    )
}

fn rk4_lp(p: &BodyParams, s: &LpState, h: f64) -> LpState {
    let f = |g: &Vec3, w: &Vec3| rhs_lp(p, &LpState { gamma: *g, omega: *w });
    let (a1, g1) = f(&s.gamma, &s.omega);
    let (a2, g2) = f(&(s.gamma + 0.5 * h * g1), &(s.omega + 0.5 * h * a1));
    let (a3, g3) = f(&(s.gamma + 0.5 * h * g2), &(s.omega + 0.5 * h * a2));
    let (a4, g4) = f(&(s.gamma + h * g3), &(s.omega + h * a3));
    LpState {
        gamma: s.gamma + h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4),
        omega: s.omega + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    }
}

fn rk_lr(p: &BodyParams, s: &LrState, h: f64, order4: bool) -> LrState {
    let f = |g: &Vec3, gd: &Vec3| rhs_lr(p, &LrState { gamma: *g, gamma_dot: *gd, mu: s.mu });
    let (g1, d1) = f(&s.gamma, &s.gamma_dot);
    let (gamma, gamma_dot) = if order4 {
        let (g2, d2) = f(&(s.gamma + 0.5 * h * g1), &(s.gamma_dot + 0.5 * h * d1));
        let (g3, d3) = f(&(s.gamma + 0.5 * h * g2), &(s.gamma_dot + 0.5 * h * d2));
        let (g4, d4) = f(&(s.gamma + h * g3), &(s.gamma_dot + h * d3));
        (
            s.gamma + h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4),
            s.gamma_dot + h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4),
        )
    } else {
        let (g2, d2) = f(&(s.gamma + h * g1), &(s.gamma_dot + h * d1));
        (s.gamma + 0.5 * h * (g1 + g2), s.gamma_dot + 0.5 * h * (d1 + d2))
    };
    let gamma = gamma.normalize();
    LrState { gamma, gamma_dot: gamma_dot - gamma * gamma.dot(&gamma_dot), mu: s.mu }
}

/// Advances `state` by one step of size `h`. `renormalize` requests the
/// projection back onto the constraint set for `Rk4Projected`.
fn advance(p: &BodyParams, state: &State, method: Method, h: f64, renormalize_now: bool) -> Result<State> {
    let order4 = method != Method::LieGroupRk2;
    Ok(match (state, method) {
        (State::Full(s), Method::Rk4Projected) => {
            let (r, omega) = rk4_full(p, s, h);
            let r = if renormalize_now {
                renormalize(&r)?
            } else {
                Rotation::from_matrix_unchecked(r)
            };
            State::Full(FullState { r, omega })
        }
        (State::Full(s), _) => {
            let (theta, omega) = rkmk(p, &s.r.reduced_attitude(), &s.omega, h, order4);
            State::Full(FullState { r: s.r.compose(&exp_so3(&theta)), omega })
        }
        (State::Lp(s), Method::Rk4Projected) => {
            let mut next = rk4_lp(p, s, h);
            if renormalize_now {
                next.gamma = next.gamma.normalize();
            }
            State::Lp(next)
        }
        (State::Lp(s), _) => {
            let (theta, omega) = rkmk(p, &s.gamma, &s.omega, h, order4);
            State::Lp(LpState { gamma: exp_so3(&theta).transpose().apply(&s.gamma), omega })
        }
        (State::Lr(s), _) => State::Lr(rk_lr(p, s, h, order4)),
    })
}

/// A single step, treated as the first step of a run: `Rk4Projected`
/// renormalizes only when `renormalize_every == 1`.
pub fn step(p: &BodyParams, state: &State, cfg: &IntegratorConfig) -> Result<State> {
    cfg.validate()?;
    let next = advance(p, state, cfg.method, cfg.h, cfg.renormalize_every == 1)?;
    check_blowup(&next, cfg.h)?;
    Ok(next)
}

fn check_blowup(s: &State, t: f64) -> Result<()> {
    if s.max_abs() > tol::BLOWUP {
        return Err(Error::StepBlowup { t });
    }
    Ok(())
}

/// Stateful stepper that tracks the step count for periodic renormalization.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    params: &'a BodyParams,
    cfg: IntegratorConfig,
    steps_taken: u64,
}

impl<'a> Integrator<'a> {
    pub fn new(params: &'a BodyParams, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Integrator { params, cfg, steps_taken: 0 })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// Current time `steps · h`.
    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.cfg.h
    }

    pub fn step(&mut self, state: &State) -> Result<State> {
        self.steps_taken += 1;
        let renorm = self.steps_taken.is_multiple_of(self.cfg.renormalize_every as u64);
        let next = advance(self.params, state, self.cfg.method, self.cfg.h, renorm)?;
        check_blowup(&next, self.time())?;
        Ok(next)
    }

    /// A step of arbitrary size from `state`, not counted.
    fn substep(&self, state: &State, h: f64) -> Result<State> {
        advance(self.params, state, self.cfg.method, h, true)
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub invariants: InvariantReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Largest `|E(t) − E(0)|` and `|h(t) − h(0)|` over the samples.
    pub fn invariant_drift(&self) -> (f64, f64) {
        let first = match self.samples.first() {
            Some(s) => s.invariants,
            None => return (0.0, 0.0),
        };
        self.samples.iter().fold((0.0, 0.0), |(de, dh), s| {
            (
                f64::max(de, (s.invariants.energy - first.energy).abs()),
                f64::max(dh, (s.invariants.h - first.h).abs()),
            )
        })
    }
}

/// Integrates from `state0` over `[0, T]`, recording every
/// `sample_every`-th step plus the endpoints.
pub fn integrate_trajectory(p: &BodyParams, state0: &State, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_with_observer(p, state0, cfg, |_, _| {})
}

/// As [`integrate_trajectory`], also calling `observer(t, state)` after
/// every step.
pub fn integrate_with_observer<F>(p: &BodyParams, state0: &State, cfg: &IntegratorConfig, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(f64, &State),
{
    let mut integ = Integrator::new(p, *cfg)?;
    let n = cfg.steps();
    let mut samples = Vec::with_capacity(n / cfg.sample_every + 2);
    let record = |t: f64, s: &State| Sample { t, state: *s, invariants: s.invariants(p) };
    samples.push(record(0.0, state0));
    let mut state = *state0;
    for k in 1..=n {
        state = integ.step(&state)?;
        let t = integ.time();
        observer(t, &state);
        if k % cfg.sample_every == 0 || k == n {
            samples.push(record(t, &state));
        }
    }
    Ok(Trajectory { samples })
}

/// Consistent full, LP and LR states for `(R₀, ω₀)`.
pub fn build_initial(p: &BodyParams, r0: &Rotation, omega0: &Vec3) -> (FullState, LpState, LrState) {
    let full = FullState { r: *r0, omega: *omega0 };
    let lp = full.project();
    let lr = LrState::from_lp(p, &lp);
    (full, lp, lr)
}

/// Full state `(R₀, c·direction)` with `c ≥ 0` chosen so the energy equals
/// `energy`.
pub fn initial_for_energy(p: &BodyParams, r0: &Rotation, direction: &Vec3, energy: f64) -> Result<FullState> {
    let potential = -p.mg() * p.rho().dot(&r0.reduced_attitude());
    let kinetic_unit = 0.5 * direction.dot(&(p.j() * direction));
    let c2 = (energy - potential) / kinetic_unit;
    if !(c2 >= 0.0) || !c2.is_finite() {
        return Err(Error::EmptySection { energy, minimum: potential });
    }
    Ok(FullState { r: *r0, omega: c2.sqrt() * direction })
}

/// Section `e₃ᵀΓ̇ = 0`, `e₃ᵀ(Γ×Γ̇) > 0` on the energy level `energy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareSection {
    pub energy: f64,
    pub crossing_tol: f64,
    pub max_crossings: usize,
}

impl PoincareSection {
    pub fn new(energy: f64) -> Self {
        PoincareSection { energy, crossing_tol: tol::CROSSING, max_crossings: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincarePoint {
    pub t: f64,
    pub gamma: Vec3,
    pub gamma_dot: Vec3,
    /// Chart coordinates `(Γ₁, Γ₂)`.
    pub u: f64,
    pub v: f64,
    /// Hemisphere, `sign(Γ₃)`.
    pub sign_gamma3: f64,
    pub energy_error: f64,
    /// `e₃ᵀΓ̇` at the refined crossing.
    pub g_residual: f64,
}

fn section_value(s: &State) -> f64 {
    match s {
        State::Lr(s) => s.gamma_dot.z,
        _ => unreachable!("sections are taken on Routh states"),
    }
}

/// Crossings of the section along the Routh flow from `state0`.
pub fn poincare_map(
    p: &BodyParams,
    state0: &LrState,
    section: &PoincareSection,
    cfg: &IntegratorConfig,
) -> Result<Vec<PoincarePoint>> {
    let minimum = p.minimum_energy();
    if section.energy < minimum {
        return Err(Error::EmptySection { energy: section.energy, minimum });
    }
    let actual = energy_lr(p, state0);
    if (actual - section.energy).abs() > tol::SECTION_ENERGY {
        return Err(Error::EnergyMismatch { actual, target: section.energy });
    }
    if !(section.crossing_tol > 0.0) {
        return Err(Error::InvalidConfig("crossing tolerance must be positive".into()));
    }

    let mut integ = Integrator::new(p, *cfg)?;
    let n = cfg.steps();
    let mut points = Vec::new();
    let mut state = State::Lr(*state0);
    let mut g0 = section_value(&state);
    for _ in 0..n {
        if points.len() >= section.max_crossings {
            break;
        }
        let t0 = integ.time();
        let next = integ.step(&state)?;
        let g1 = section_value(&next);
        if g0 * g1 < 0.0 || (g1 == 0.0 && g0 != 0.0) {
            if let Some(pt) = refine_crossing(&integ, p, &state, t0, g0, section)? {
                points.push(pt);
            }
        }
        state = next;
        g0 = g1;
    }
    if points.is_empty() {
        return Err(Error::NoCrossings { horizon: cfg.t_end });
    }
    Ok(points)
}

fn refine_crossing(
    integ: &Integrator,
    p: &BodyParams,
    start: &State,
    t0: f64,
    g_start: f64,
    section: &PoincareSection,
) -> Result<Option<PoincarePoint>> {
    let h = integ.config().h;
    let (mut lo, mut hi) = (0.0, h);
    let mut best = integ.substep(start, hi)?;
    for _ in 0..tol::BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let s = integ.substep(start, mid)?;
        let g = section_value(&s);
        if g == 0.0 {
            best = s;
            hi = mid;
            break;
        }
        if g * g_start > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best = s;
        }
    }
    let s = match best {
        State::Lr(s) => s,
        _ => unreachable!(),
    };
    let g = s.gamma_dot.z;
    let direction = e3().dot(&s.gamma.cross(&s.gamma_dot));
    let near_pole = (s.gamma - e3()).norm() < tol::POLE_EXCLUSION || (s.gamma + e3()).norm() < tol::POLE_EXCLUSION;
    if g.abs() > section.crossing_tol || direction <= 0.0 || near_pole {
        return Ok(None);
    }
    let energy_error = energy_lr(p, &s) - section.energy;
    Ok(Some(PoincarePoint {
        t: t0 + hi,
        gamma: s.gamma,
        gamma_dot: s.gamma_dot,
        u: s.gamma.x,
        v: s.gamma.y,
        sign_gamma3: if s.gamma.z < 0.0 { -1.0 } else { 1.0 },
        energy_error,
        g_residual: g,
    }))
}

/// One Poincaré run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepJob {
    pub initial: LrState,
    pub section: PoincareSection,
}

/// Runs independent Poincaré maps, concurrently under
/// [`Execution::Parallel`]. Results are in job order.
pub fn poincare_sweep(
    p: &BodyParams,
    jobs: &[SweepJob],
    cfg: &IntegratorConfig,
    execution: Execution,
) -> Vec<Result<Vec<PoincarePoint>>> {
    execution.map(jobs, |job| poincare_map(p, &job.initial, &job.section, cfg))
}

/// Number of occupied cells when `(u, v) ∈ [−1, 1]²` is split into
/// `bins × bins` cells.
pub fn occupancy(points: &[PoincarePoint], bins: usize) -> usize {
    let cell = |x: f64| (((x + 1.0) * 0.5 * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
    let mut seen = vec![false; bins * bins];
    for pt in points {
        seen[cell(pt.u) * bins + cell(pt.v)] = true;
    }
    seen.iter().filter(|&&b| b).count()
}

/// Median over points of `√(λ₂/λ₁)`, the ratio of the two largest principal
/// variances of each point's `k` nearest neighbours (in `Γ`). Curves give
/// values near zero, area-filling sets values of order one.
pub fn local_linearity(points: &[PoincarePoint], k: usize) -> f64 {
    let n = points.len();
    if n <= k || k < 3 {
        return f64::NAN;
    }
    let mut ratios: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .map(|j| ((points[j].gamma - points[i].gamma).norm_squared(), j))
                .collect();
            d.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
            let nbrs = &d[..=k];
            let mean = nbrs.iter().map(|&(_, j)| points[j].gamma).sum::<Vec3>() / nbrs.len() as f64;
            let cov = nbrs.iter().fold(Mat3::zeros(), |acc, &(_, j)| {
                let x = points[j].gamma - mean;
                acc + x * x.transpose()
            });
            let mut ev: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            if ev[0] <= 0.0 {
                0.0
            } else {
                (ev[1].max(0.0) / ev[0]).sqrt()
            }
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    ratios[n / 2]
}
