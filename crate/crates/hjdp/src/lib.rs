//! Grid-based dynamic programming for optimal control.
//!
//! Three solvers share a common Cartesian-grid core (up to six dimensions):
//!
//! - [`hj_solver`] integrates the time-dependent Hamilton-Jacobi PDE to
//!   compute backward reachable sets and tubes;
//! - [`ttr_solver`] computes time-to-reach value functions by Lax-Friedrichs
//!   sweeping of the stationary HJ PDE;
//! - [`mdp`] runs value iteration for Markov decision processes with
//!   continuous state and action spaces.
//!
//! System dynamics plug in through [`dynamics::DynamicsModel`]; initial
//! conditions come from the signed-distance constructors in [`shapes`];
//! [`io`] provides the problem-configuration format, a binary field
//! container, and VTK/CSV export.

// Validation guards are written `!(x > 0.0)` so NaN parameters fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod hj_solver;
pub mod io;
pub mod mdp;
pub mod numerics;
pub mod shapes;
pub mod sweep;
pub mod ttr_solver;

pub use error::{Error, Result};
pub use field::ValueField;
pub use grid::{build_grid, GridAxes, GridSpec};
