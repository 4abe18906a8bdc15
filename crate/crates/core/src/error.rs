use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (antisymmetry residual {residual:e})")]
    NonSkewInput { residual: f64 },

    #[error("matrix is too far from SO(3) (orthogonality residual {residual:e}, det {det})")]
    TooFarFromSo3 { residual: f64, det: f64 },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid body parameters: {0}")]
    InvalidParams(String),

    #[error("body is not axisymmetric about e3 (J = diag(Jt, Jt, Ja), rho = rho_s e3 required)")]
    NotAxisymmetric,

    #[error("special-case mode and state do not match")]
    ModeStateMismatch,

    #[error("alpha = {alpha} is a pole of the relative-equilibrium family")]
    SingularAlpha { alpha: f64 },

    #[error("inertia matrix must be diagonal")]
    NonDiagonalInertia,

    #[error("inertia diagonal must be sorted J1 >= J2 >= J3")]
    UnsortedInertia,

    #[error("body is balanced (rho = 0); operation needs an offset center of mass")]
    BalancedBody,

    #[error("state is not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("initial rotation does not project onto the first reduced attitude (gap {gap:e})")]
    InitialMismatch { gap: f64 },

    #[error("trajectory is not usable for reconstruction: {0}")]
    BadTrajectory(String),

    #[error("loop is not closed (endpoint gap {gap:e})")]
    NotClosed { gap: f64 },

    #[error("end-to-end rotation is not about the vertical axis (residual {residual:e})")]
    NotVerticalRotation { residual: f64 },

    #[error("integration blew up at t = {t}")]
    StepBlowup { t: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("energy level {energy} is below the minimum {minimum}; section is empty")]
    EmptySection { energy: f64, minimum: f64 },

    #[error("initial state energy {actual} does not match the section energy {target}")]
    EnergyMismatch { actual: f64, target: f64 },

    #[error("no section crossings found before t = {horizon}")]
    NoCrossings { horizon: f64 },
}
