//! Steady-state heat fields on cell sets.
//!
//! The temperature `T` on a cell set solves `β·T − α·ΔT = h` with the
//! 5-point Laplacian and reflected ghost cells on every face leaving the
//! set, i.e. a discrete adiabatic (homogeneous Neumann) wall.

mod maxima;
mod scalar;
mod solver;

pub use maxima::{discrete_hessian, local_maxima};
pub use scalar::{sample_gradient, ScalarField};
pub use solver::{solve_heat_field, solve_heat_field_pcg, FieldParams, HeatOperator, HeatSolver};
