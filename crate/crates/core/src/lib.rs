//! Maximal solutions of the one-dimensional supercooled Stefan problem,
//! computed as the maximal target of a free-target optimal stopping problem.
//!
//! Given an initial density `μ ≤ 1` on a bounded open set `O ⊂ ℝ`, the
//! maximal target is, on each component `(c, d)` of `O`, the indicator of two
//! blocks `(c, e) ∪ (f, d)` carrying the same mass and first moment as `μ`
//! there. This crate computes it ([`maximal`]), certifies it through exact
//! Newtonian potentials ([`potential1d`]), checks its stability properties
//! ([`stability`]), and cross-validates it with a particle system
//! ([`particles`]).

pub mod error;
pub mod maximal;
pub mod measure1d;
pub mod particles;
pub mod potential1d;
pub mod repro;
pub mod stability;

pub use error::{Error, Result};
pub use maximal::{solve, solve_component, BlockPair, MaximalSolution};
pub use measure1d::{OpenSet1D, StepMeasure, DEFAULT_TOL};
pub use potential1d::OrderCertificate;
