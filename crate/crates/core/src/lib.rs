//! Distributed multi-agent coverage control on a masked planar grid.
//!
//! Every agent owns a Voronoi subregion of the workspace, turns the
//! remaining workload on it into a heat source, solves the steady-state
//! heat (screened Poisson) equation with adiabatic walls and climbs the
//! resulting temperature gradient at constant speed. Between iterations the
//! first agent to finish its subregion is handed off to the neighbouring
//! subregion with the most remaining work and the workspace is
//! re-partitioned.
//!
//! Module map:
//! - [`geometry`]: region grid, discrete Voronoi partition, communication
//!   graph, Delaunay meshes, point location, covering circles.
//! - [`field`]: heat field assembly and solution, gradients, local maxima.
//! - [`coverage`]: workload model, coverage kernel, totals, `v` and `T*`.
//! - [`control`]: gradient control law, real-time and maximal update.
//! - [`mission`]: the three mission algorithms, handoff, metrics.
//! - [`scenario`] and [`output`]: scenario files and run artifacts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod coverage;
pub mod error;
pub mod field;
pub mod geometry;
pub mod mission;
pub mod output;
pub mod point;
pub mod scenario;

pub use error::{Error, Result};
pub use point::Vec2;
