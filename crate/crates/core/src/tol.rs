//! Numerical tolerances shared by the library and its tests.

/// Maximum `‖RᵀR − I‖_∞` for a matrix to count as a rotation.
pub const ORTHOGONALITY: f64 = 1e-10;
/// Maximum `|det R − 1|` for a rotation.
pub const DETERMINANT: f64 = 1e-10;
/// Largest orthogonality residual `renormalize` will repair.
pub const RENORMALIZE_REACH: f64 = 0.1;
/// Antisymmetry residual accepted by `vee`.
pub const SKEW: f64 = 1e-9;
/// Accepted deviation of `‖Γ‖` from one.
pub const UNIT: f64 = 1e-9;
/// Below this angle `exp_so3` switches to its Taylor series.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Relative guard around the poles `{0, 1/J₁, 1/J₂, 1/J₃}` of `n_α`.
pub const ALPHA_POLE_GUARD: f64 = 1e-9;
/// Relative distance of the default α grid from the poles.
pub const ALPHA_GRID_CLAMP: f64 = 1e-6;
/// Relative tolerance for the exact degeneracy tests `ρᵢ = 0`, `Jᵢ = Jⱼ`.
pub const DEGENERACY: f64 = 1e-12;
/// Largest accepted equilibrium residual.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-10;
/// Relative agreement of `μ` with `k ΓᵀJΓ`.
pub const MOMENTUM_CONSISTENCY: f64 = 1e-12;
/// Tolerance for the axisymmetry precondition of the special cases.
pub const AXISYMMETRY: f64 = 1e-12;
/// Smallest `‖ρ‖` treated as unbalanced.
pub const BALANCED: f64 = 1e-12;

/// Default crossing tolerance on `e₃ᵀΓ̇` for Poincaré sections.
pub const CROSSING: f64 = 1e-10;
/// Allowed energy mismatch between an initial state and its section.
pub const SECTION_ENERGY: f64 = 1e-8;
/// Crossings this close to `±e₃` are discarded.
pub const POLE_EXCLUSION: f64 = 1e-6;
/// Bisection iterations when refining a crossing.
pub const BISECTION_ITERATIONS: usize = 40;
/// Any state norm above this aborts integration.
pub const BLOWUP: f64 = 1e6;

/// Closure tolerance for geometric-phase loops.
pub const LOOP_CLOSURE: f64 = 1e-8;
/// Accepted gap between `Π(R₀)` and `Γ(0)` when reconstructing.
pub const RECONSTRUCTION_START: f64 = 1e-8;
/// Accepted tilt of `R(T)R(0)ᵀ` away from a rotation about `e₃`.
pub const VERTICAL_ROTATION: f64 = 1e-6;
