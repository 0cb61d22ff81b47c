//! Stroke simulation and kickback bore-scale identification for a
//! single-combustion free-piston linear engine.
//!
//! The engine model is a slider of mass `m` between two gas cylinders. The
//! left cylinder fires; the right cylinder ("kickback") absorbs the stroke
//! and rebounds the piston. Both behave polytropically, so every force on
//! the piston depends on position alone. A left-to-right stroke starts from
//! rest at `x = 0` and ends at the first instant the velocity returns to
//! zero; the displacement there is `x_max`.
//!
//! The design question is the kickback bore: with `b_r = λ·b_l`, which bore
//! scale `λ` makes `x_max` hit the design half-stroke `x_s`? Three routes
//! answer it:
//!
//! - [`dynamics::simulate_stroke`] integrates the force balance with an
//!   adaptive Runge-Kutta pair and locates the `v = 0` event.
//! - [`optimizer::x_max_energy`] exploits that the force field is
//!   position-only: `x_max` is the first positive root of the work integral,
//!   found by bracketing and bisection. It serves as a fast independent
//!   oracle for the ODE route.
//! - [`optimizer::optimize_bore_scale`] identifies `λ` by a search-direction
//!   / contracted-step iteration on `J(λ) = |x_max(λ) − x_s|`, with
//!   [`optimizer::sweep`] as the brute-force cross-check and
//!   [`optimizer::calibrate_xm`] to recover a geometry that yields a target
//!   `λ*`.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod optimizer;

pub use dynamics::{simulate_stroke, IntegratorConfig, StrokeResult, Termination, Trajectory};
pub use error::EngineError;
pub use model::{net_force, EngineParams, ForceBreakdown};
pub use optimizer::{
    optimize_bore_scale, sweep, x_max_energy, OptimizationResult, SearchConfig, Strategy,
};
