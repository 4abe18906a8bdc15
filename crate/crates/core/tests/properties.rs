use pend3d::conservation::{energy_full, energy_lr, magnetic_form, momentum_h, momentum_map};
use pend3d::dynamics::{rhs_full, rhs_lp, rhs_lr, spatial_momentum, FullState, LpState, LrState, Model};
use pend3d::equilibria::{alpha_family_member, enumerate_lp, enumerate_lr, interval_of, Branch, EnumerationOptions};
use pend3d::geometry::{e3, exp_so3, hat};
use pend3d::integrate::{integrate_trajectory, integrate_with_observer, IntegratorConfig, Method, State};
use pend3d::linearization::{eigenvalues, fd_jacobian, linearize, rest_state, simultaneous_diagonalize, stiffness, Rest};
use pend3d::reduction::{reconstruct, Quadrature, ReducedSample};
use pend3d::{BodyParams, Mat3, Rotation, Vec3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("nonzero", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

fn rotation() -> impl Strategy<Value = Rotation> {
    vec3(3.0).prop_map(|v| exp_so3(&v))
}

/// Diagonal inertia, sorted with well-separated moments, and a generic offset.
fn sorted_body() -> impl Strategy<Value = BodyParams> {
    (0.05..0.5f64, 1.1..2.0f64, 1.1..2.0f64, unit(), 0.1..0.6f64).prop_map(|(j3, r2, r1, dir, len)| {
        let j2 = j3 * r2;
        BodyParams::diagonal([j2 * r1, j2, j3], 1.0, 9.81, dir * len).unwrap()
    })
}

/// Full symmetric positive-definite inertia in a rotated frame.
fn general_body() -> impl Strategy<Value = BodyParams> {
    (sorted_body(), rotation()).prop_map(|(p, q)| {
        let q = q.matrix();
        BodyParams::new(q * p.j() * q.transpose(), p.m(), p.g(), q * p.rho()).unwrap()
    })
}

fn full_state() -> impl Strategy<Value = FullState> {
    (rotation(), vec3(3.0)).prop_map(|(r, w)| FullState::new(r, w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn axisymmetric_spin_rate_is_stationary(
        jt in 0.1..0.5f64, ja in 0.05..0.5f64, rho in 0.05..0.5f64, g in unit(), w in vec3(1.0)
    ) {
        let p = BodyParams::diagonal([jt, jt, ja], 1.0, 9.81, Vec3::new(0.0, 0.0, rho)).unwrap();
        let (wd, _) = rhs_lp(&p, &LpState::new(g, w).unwrap());
        prop_assert!(wd.z.abs() <= 1e-15, "{}", wd.z);
    }

    #[test]
    fn lp_field_is_the_projected_full_field(p in general_body(), s in full_state()) {
        let (wd_full, rd) = rhs_full(&p, &s);
        let (wd_lp, gd) = rhs_lp(&p, &s.project());
        prop_assert!((wd_full - wd_lp).norm() <= 1e-10);
        prop_assert!((rd.transpose() * e3() - gd).norm() <= 1e-10);
    }

    #[test]
    fn lr_field_respects_sphere_constraints(p in general_body(), g in unit(), v in vec3(3.0), mu in -2.0..2.0f64) {
        let s = LrState::new(g, v, mu).unwrap();
        let (gd, gdd) = rhs_lr(&p, &s);
        let scale = 1.0 + gd.norm_squared() + gdd.norm();
        prop_assert!(s.gamma.dot(&gd).abs() <= 1e-14 * scale);
        prop_assert!((s.gamma.dot(&gdd) + gd.norm_squared()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn free_body_conserves_spatial_momentum(p in general_body(), s in full_state()) {
        let free = BodyParams::new(*p.j(), p.m(), 0.0, *p.rho()).unwrap();
        let (wd, rd) = rhs_full(&free, &s);
        // d/dt (R J ω) = Ṙ J ω + R J ω̇
        let derivative = rd * (free.j() * s.omega) + s.r.matrix() * (free.j() * wd);
        prop_assert!(derivative.norm() <= 1e-12 * (1.0 + spatial_momentum(&free, &s).norm() * s.omega.norm()));
    }

    #[test]
    fn energy_and_momentum_are_stationary(p in general_body(), s in full_state()) {
        let (wd, rd) = rhs_full(&p, &s);
        let gamma = s.r.reduced_attitude();
        let gamma_dot = rd.transpose() * e3();
        let de = s.omega.dot(&(p.j() * wd)) - p.mg() * p.rho().dot(&gamma_dot);
        let dh = (p.j() * wd).dot(&gamma) + (p.j() * s.omega).dot(&gamma_dot);
        let scale = 1.0 + s.omega.norm_squared();
        prop_assert!(de.abs() <= 1e-12 * scale, "dE/dt = {de:e}");
        prop_assert!(dh.abs() <= 1e-12 * scale, "dh/dt = {dh:e}");
        prop_assert_eq!(momentum_h(&p, &s), momentum_map(&p, &s));
    }

    #[test]
    fn routh_energy_matches_full_energy(p in general_body(), g in unit(), v in vec3(3.0), mu in -2.0..2.0f64) {
        let s = LrState::new(g, v, mu).unwrap();
        let r = Rotation::with_reduced_attitude(&s.gamma).unwrap();
        let full = FullState::new(r, s.omega(&p));
        prop_assert!((energy_full(&p, &full) - energy_lr(&p, &s)).abs() <= 1e-12 * (1.0 + energy_lr(&p, &s).abs()));
        prop_assert!((momentum_map(&p, &full) - mu).abs() <= 1e-12 * (1.0 + mu.abs()));
    }

    #[test]
    fn magnetic_form_is_antisymmetric_and_linear(
        p in general_body(), g in unit(), a in vec3(2.0), b in vec3(2.0), mu in -2.0..2.0f64, k in -3.0..3.0f64
    ) {
        let eta = a - a.dot(&g) * g;
        let zeta = b - b.dot(&g) * g;
        let f = magnetic_form(&p, &g, &eta, &zeta, mu);
        let scale = 1e-14 * (1.0 + f.abs());
        prop_assert!((f + magnetic_form(&p, &g, &zeta, &eta, mu)).abs() <= scale);
        prop_assert!((magnetic_form(&p, &g, &eta, &zeta, k * mu) - k * f).abs() <= 1e-14 * (1.0 + (k * f).abs()));
        prop_assert_eq!(magnetic_form(&p, &g, &eta, &eta, mu), 0.0);
    }

    #[test]
    fn family_members_are_equilibria_with_sign_partners(p in sorted_body(), x in -8.0..8.0f64) {
        let alpha = x.signum() * 10f64.powf(x.abs() - 4.0);
        prop_assume!(interval_of(&p, alpha).map(|i| i.is_some()).unwrap_or(false));
        let plus = alpha_family_member(&p, alpha, Branch::Plus);
        prop_assume!(plus.is_ok());
        let plus = plus.unwrap();
        let minus = alpha_family_member(&p, alpha, Branch::Minus).unwrap();
        let scale = 1.0 + p.mg() * p.rho().norm() + plus.omega.norm_squared();
        prop_assert!(plus.residual <= 1e-12 * scale && minus.residual <= 1e-12 * scale);
        prop_assert_eq!(plus.gamma, minus.gamma);
        prop_assert_eq!(plus.omega, -minus.omega);
        let k = plus.omega.dot(&plus.gamma);
        prop_assert!((plus.mu - k * plus.gamma.dot(&(p.j() * plus.gamma))).abs() <= 1e-12 * (1.0 + plus.mu.abs()));
    }

    #[test]
    fn frequencies_do_not_depend_on_the_body_frame(p in sorted_body(), q in rotation()) {
        let base = simultaneous_diagonalize(&p).unwrap().lambda;
        let q = q.matrix();
        let turned = BodyParams::new(q * p.j() * q.transpose(), p.m(), p.g(), q * p.rho()).unwrap();
        let other = simultaneous_diagonalize(&turned).unwrap().lambda;
        prop_assert!((base - other).norm() <= 1e-9 * (1.0 + base.norm()), "{base} vs {other}");
        prop_assert!((stiffness(&turned).unwrap() * turned.rho()).norm() <= 1e-14 * p.mg());
    }

    #[test]
    fn hanging_and_inverted_share_magnitudes(p in general_body()) {
        let mut a: Vec<f64> = linearize(&p, Rest::Hanging, Model::Lr).unwrap().eigenvalues.iter().map(|z| z.norm()).collect();
        let mut b: Vec<f64> = linearize(&p, Rest::Inverted, Model::Lr).unwrap().eigenvalues.iter().map(|z| z.norm()).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reduced_enumerations_agree(p in sorted_body()) {
        let opts = EnumerationOptions::with_default_grid(&p, 6).unwrap();
        let lp = enumerate_lp(&p, &opts).unwrap();
        let lr = enumerate_lr(&p, &opts).unwrap();
        prop_assert_eq!(lp.len(), lr.len());
        for (a, b) in lp.iter().zip(&lr) {
            prop_assert_eq!(a.gamma, b.gamma);
            prop_assert_eq!(a.mu, b.mu);
            prop_assert_eq!(a.family, b.family);
        }
    }

    #[test]
    fn linearization_matches_finite_differences(p in general_body()) {
        for rest in [Rest::Hanging, Rest::Inverted] {
            for model in [Model::Full, Model::Lp, Model::Lr] {
                let analytic = linearize(&p, rest, model).unwrap().eigenvalues;
                let numeric = eigenvalues(&fd_jacobian(&p, &rest_state(&p, rest, model).unwrap(), 1e-6).unwrap());
                let radius = analytic.iter().map(|z| z.norm()).fold(0.0, f64::max);
                // Pair each analytic eigenvalue with the nearest unused numeric one.
                let mut unused = numeric.clone();
                for a in &analytic {
                    let (k, d) = unused
                        .iter()
                        .enumerate()
                        .map(|(k, b)| (k, (a - b).norm()))
                        .min_by(|x, y| x.1.total_cmp(&y.1))
                        .unwrap();
                    prop_assert!(d <= 1e-5 * radius, "{rest:?} {model:?}: {a} vs {}", unused[k]);
                    unused.swap_remove(k);
                }
            }
        }
    }

    #[test]
    fn liegroup_attitudes_stay_orthogonal(p in general_body(), s in full_state()) {
        for method in [Method::LieGroupRk2, Method::LieGroupRk4] {
            let cfg = IntegratorConfig::new(method, 1e-3, 1.0);
            let mut worst = 0.0f64;
            integrate_with_observer(&p, &State::Full(s), &cfg, |_, x| {
                if let State::Full(f) = x {
                    worst = worst.max(f.r.orthogonality_residual());
                }
            })
            .unwrap();
            prop_assert!(worst <= 1e-10, "{worst:e}");
        }
    }

    #[test]
    fn flow_is_reversible(p in general_body(), s in full_state()) {
        let cfg = IntegratorConfig::new(Method::LieGroupRk4, 1e-3, 1.0);
        let end = |x: &State| -> FullState {
            match integrate_trajectory(&p, x, &cfg).unwrap().samples.last().unwrap().state {
                State::Full(f) => f,
                _ => unreachable!(),
            }
        };
        let fwd = end(&State::Full(s));
        let back = end(&State::Full(FullState::new(fwd.r, -fwd.omega)));
        prop_assert!((back.r.matrix() - s.r.matrix()).norm() <= 1e-6);
        prop_assert!((back.omega + s.omega).norm() <= 1e-6);
    }

    #[test]
    fn reconstruction_is_equivariant(p in general_body(), s in full_state(), theta in -3.0..3.0f64) {
        let cfg = IntegratorConfig::new(Method::LieGroupRk4, 1e-3, 0.5);
        let traj = integrate_trajectory(&p, &State::Full(s), &cfg).unwrap();
        let samples: Vec<ReducedSample> = traj
            .samples
            .iter()
            .map(|x| match x.state {
                State::Full(f) => {
                    let gamma = f.r.reduced_attitude();
                    ReducedSample { t: x.t, gamma, gamma_dot: gamma.cross(&f.omega) }
                }
                _ => unreachable!(),
            })
            .collect();
        let mu = momentum_map(&p, &s);
        let turn = Rotation::about_vertical(theta);
        let a = reconstruct(&p, &samples, mu, &s.r, Quadrature::Trapezoid).unwrap();
        let b = reconstruct(&p, &samples, mu, &turn.compose(&s.r), Quadrature::Trapezoid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let expected: Mat3 = turn.matrix() * x.state.r.matrix();
            prop_assert!((y.state.r.matrix() - expected).norm() <= 1e-8);
            prop_assert!((y.state.omega - x.state.omega).norm() <= 1e-8);
        }
    }
}

#[test]
fn hat_of_zero_gravity_moment_vanishes() {
    let p = BodyParams::new(Mat3::from_diagonal(&Vec3::new(0.3, 0.2, 0.1)), 1.0, 0.0, Vec3::z()).unwrap();
    assert_eq!(p.mg() * hat(p.rho()), Mat3::zeros());
}
