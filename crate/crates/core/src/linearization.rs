//! Linear stability of the hanging and inverted equilibria.

use nalgebra::{Complex, DMatrix};

use crate::dynamics::{rhs_full, rhs_lp, rhs_lr, BodyParams, FullState, LpState, LrState, Model};
use crate::geometry::{dexp_inv, exp_so3, hat, tangent_basis, Mat3, Rotation, Vec3};
use crate::integrate::State;
use crate::{tol, Error, Result};

/// `J = MMᵀ` and `K = MΛMᵀ` with stiffness `K = −(mg/‖ρ‖)ρ̂²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub m: Mat3,
    /// Descending: `(mgl₁, mgl₂, 0)`.
    pub lambda: Vec3,
}

/// Gravity stiffness of the attitude about the hanging rest point.
pub fn stiffness(p: &BodyParams) -> Result<Mat3> {
    let rho_norm = p.rho().norm();
    if rho_norm < tol::BALANCED {
        return Err(Error::BalancedBody);
    }
    let r = hat(p.rho());
    Ok(-(p.mg() / rho_norm) * r * r)
}

pub fn simultaneous_diagonalize(p: &BodyParams) -> Result<Diagonalization> {
    let k = stiffness(p)?;
    let l = p.j().cholesky().expect("inertia is positive definite").l();
    let l_inv = l.try_inverse().expect("Cholesky factor is invertible");
    let c = l_inv * k * l_inv.transpose();
    let c = 0.5 * (c + c.transpose());
    let eig = c.symmetric_eigen();

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut q = Mat3::zeros();
    let mut lambda = Vec3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // Deterministic sign: largest-magnitude entry positive.
        let lead = col.iamax();
        if col[lead] < 0.0 {
            col = -col;
        }
        q.set_column(dst, &col);
        lambda[dst] = eig.eigenvalues[src];
    }
    if lambda[2].abs() <= tol::DEGENERACY * lambda[0].abs() {
        lambda[2] = 0.0;
    }
    Ok(Diagonalization { m: l * q, lambda })
}

/// Which static equilibrium to linearize about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rest {
    Hanging,
    Inverted,
}

impl Rest {
    pub fn attitude(self, p: &BodyParams) -> Vec3 {
        let rho_hat = p.rho().normalize();
        match self {
            Rest::Hanging => rho_hat,
            Rest::Inverted => -rho_hat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Spectrum on the imaginary axis and an energy certificate.
    LyapunovStableCandidate,
    /// An eigenvalue with positive real part.
    Unstable,
    /// Spectrum on the imaginary axis, nothing more known.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub model: Model,
    pub rest: Rest,
    pub matrix: DMatrix<f64>,
    /// Sorted by imaginary part, then real part, both descending.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Verdict from the spectrum alone.
    pub spectral_verdict: Verdict,
    pub verdict: Verdict,
}

/// Sorted complex eigenvalues of a square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.im.total_cmp(&x.im).then(y.re.total_cmp(&x.re)));
    ev
}

fn block(rows: usize, cols: usize, parts: &[(usize, usize, DMatrix<f64>)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(rows, cols);
    for (r, c, m) in parts {
        a.view_mut((*r, *c), m.shape()).copy_from(m);
    }
    a
}

fn to_dyn<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

fn tangent_frame(gamma: &Vec3) -> nalgebra::Matrix3x2<f64> {
    let (t1, t2) = tangent_basis(gamma);
    nalgebra::Matrix3x2::from_columns(&[t1, t2])
}

/// Linearization about the hanging or inverted rest point in local charts:
/// exponential coordinates for `R` (full, 6D), orthographic coordinates on
/// the sphere around `Γe` (LP 5D, LR 4D).
pub fn linearize(p: &BodyParams, rest: Rest, model: Model) -> Result<LinearModel> {
    if p.rho().norm() < tol::BALANCED {
        return Err(Error::BalancedBody);
    }
    let gamma_e = rest.attitude(p);
    // ΔΓ = Γ̂e ΔΘ for the full chart, ΔΓ = T[a b]ᵀ on the sphere.
    let torque = p.j_inv() * (p.mg() * hat(p.rho()));
    let t = tangent_frame(&gamma_e);
    let g_hat = hat(&gamma_e);
    let matrix = match model {
        Model::Full => block(6, 6, &[(0, 3, DMatrix::identity(3, 3)), (3, 0, to_dyn(&(torque * g_hat)))]),
        Model::Lp => block(5, 5, &[(0, 2, to_dyn(&(t.transpose() * g_hat))), (2, 0, to_dyn(&(torque * t)))]),
        Model::Lr => block(4, 4, &[
            (0, 2, DMatrix::identity(2, 2)),
            (2, 0, to_dyn(&(t.transpose() * g_hat * torque * t))),
        ]),
    };
    let eigenvalues = eigenvalues(&matrix);
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let spectral_verdict = if eigenvalues.iter().any(|z| z.re > 1e-9 * scale) {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    // Energy certificate: the potential −mgρᵀΓ has a strict minimum on S² at
    // Γ = ρ/‖ρ‖, so the energy is a Lyapunov function there.
    let certified = p.rho().dot(&gamma_e) > 0.0 && p.mg() > 0.0;
    let verdict = match spectral_verdict {
        Verdict::Inconclusive if certified => Verdict::LyapunovStableCandidate,
        v => v,
    };
    Ok(LinearModel { model, rest, matrix, eigenvalues, spectral_verdict, verdict })
}

fn rhs_norm(p: &BodyParams, state: &State) -> f64 {
    match state {
        State::Full(s) => {
            let (wd, rd) = rhs_full(p, s);
            wd.norm() + (s.r.matrix().transpose() * rd).abs().max()
        }
        State::Lp(s) => {
            let (wd, gd) = rhs_lp(p, s);
            wd.norm() + gd.norm()
        }
        State::Lr(s) => {
            let (gd, gdd) = rhs_lr(p, s);
            gd.norm() + gdd.norm()
        }
    }
}

/// Central-difference Jacobian of the vector field at an equilibrium, in the
/// same charts as [`linearize`].
pub fn fd_jacobian(p: &BodyParams, state: &State, h: f64) -> Result<DMatrix<f64>> {
    if !(1e-7..=1e-4).contains(&h) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} outside [1e-7, 1e-4]")));
    }
    let residual = rhs_norm(p, state);
    if residual > tol::EQUILIBRIUM_RESIDUAL {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let (n, field): (usize, Box<dyn Fn(&[f64]) -> Vec<f64> + '_>) = match *state {
        State::Full(s) => (6, Box::new(move |x: &[f64]| full_chart_field(p, &s, x))),
        State::Lp(s) => (5, Box::new(move |x: &[f64]| lp_chart_field(p, &s, x))),
        State::Lr(s) => (4, Box::new(move |x: &[f64]| lr_chart_field(p, &s, x))),
    };
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        plus[j] = h;
        minus[j] = -h;
        let fp = field(&plus);
        let fm = field(&minus);
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn full_chart_field(p: &BodyParams, base: &FullState, x: &[f64]) -> Vec<f64> {
    let theta = Vec3::new(x[0], x[1], x[2]);
    let omega = base.omega + Vec3::new(x[3], x[4], x[5]);
    let r: Rotation = base.r.compose(&exp_so3(&theta));
    let (wd, _) = rhs_full(p, &FullState::new(r, omega));
    let td = dexp_inv(&theta, &omega);
    vec![td.x, td.y, td.z, wd.x, wd.y, wd.z]
}

fn sphere_point(center: &Vec3, a: f64, b: f64) -> (Vec3, Vec3, Vec3, f64) {
    let (t1, t2) = tangent_basis(center);
    let c = (1.0 - a * a - b * b).sqrt();
    (a * t1 + b * t2 + c * center, t1, t2, c)
}

fn lp_chart_field(p: &BodyParams, base: &LpState, x: &[f64]) -> Vec<f64> {
    let (gamma, t1, t2, _) = sphere_point(&base.gamma, x[0], x[1]);
    let omega = base.omega + Vec3::new(x[2], x[3], x[4]);
    let (wd, gd) = rhs_lp(p, &LpState { gamma, omega });
    vec![t1.dot(&gd), t2.dot(&gd), wd.x, wd.y, wd.z]
}

fn lr_chart_field(p: &BodyParams, base: &LrState, x: &[f64]) -> Vec<f64> {
    let (a, b, ad, bd) = (x[0], x[1], x[2], x[3]);
    let (gamma, t1, t2, c) = sphere_point(&base.gamma, a, b);
    let (bt1, bt2) = tangent_basis(&base.gamma);
    let base_rates = (bt1.dot(&base.gamma_dot), bt2.dot(&base.gamma_dot));
    let (ad, bd) = (ad + base_rates.0, bd + base_rates.1);
    let cd = -(a * ad + b * bd) / c;
    let gamma_dot = ad * t1 + bd * t2 + cd * base.gamma;
    let (_, gdd) = rhs_lr(p, &LrState { gamma, gamma_dot, mu: base.mu });
    vec![ad, bd, t1.dot(&gdd), t2.dot(&gdd)]
}

/// The rest state in the representation of `model`.
pub fn rest_state(p: &BodyParams, rest: Rest, model: Model) -> Result<State> {
    let gamma = rest.attitude(p);
    Ok(match model {
        Model::Full => State::Full(FullState::new(Rotation::with_reduced_attitude(&gamma)?, Vec3::zeros())),
        Model::Lp => State::Lp(LpState::new(gamma, Vec3::zeros())?),
        Model::Lr => State::Lr(LrState::new(gamma, Vec3::zeros(), 0.0)?),
    })
}
