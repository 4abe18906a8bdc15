//! Simulation and analysis toolkit for the rigid 3D pendulum.
//!
//! A 3D pendulum is a rigid body pivoting about a fixed frictionless point
//! under uniform gravity. Three models of its motion are provided:
//!
//! * the full model on `TSO(3)`, state `(R, ω)`;
//! * the Lagrange–Poincaré reduced model on `TSO(3)/S¹ ≅ S² × ℝ³`, state `(Γ, ω)`
//!   with `Γ = Rᵀe₃`;
//! * the Lagrange–Routh reduced model on `TS²`, state `(Γ, Γ̇)` on a fixed
//!   value `μ` of the vertical angular momentum.
//!
//! The inertial third axis `e₃` points *along* gravity, so the hanging rest
//! attitude satisfies `Rᵀe₃ = ρ/‖ρ‖`.
//!
//! Around these models the crate offers conserved quantities
//! ([`conservation`]), relative-equilibria enumeration ([`equilibria`]),
//! linear stability analysis ([`linearization`]), reconstruction and
//! geometric phase ([`reduction`]), and fixed-step Lie-group integration with
//! Poincaré sections ([`integrate`]).
//!
//! Batch evaluations (equilibrium grids, Poincaré sweeps) run on rayon when
//! the default `parallel` feature is enabled and sequentially otherwise; see
//! [`Execution`].

pub mod conservation;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod geometry;
pub mod integrate;
pub mod linearization;
mod par;
pub mod reduction;
pub mod tol;

pub use dynamics::{BodyParams, FullState, LpState, LrState};
pub use error::{Error, Result};
pub use geometry::{Mat3, Rotation, Vec3};
pub use par::Execution;
