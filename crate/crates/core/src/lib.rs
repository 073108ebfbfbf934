//! Steady buoyancy-driven flow with viscous heating in an open box channel.
//!
//! The momentum equation is solved by a contraction iteration around a Stokes
//! operator with do-nothing open ends, the energy equation by a linearized heat
//! solve, and the two are coupled by an outer Picard loop. Alongside the solver
//! the crate estimates the constants entering the smallness and uniqueness
//! conditions, and computes the corner spectrum at the wall/open-end junction.

pub mod certificates;
pub mod config;
pub mod element;
pub mod error;
pub mod fields;
pub mod fixed_point;
pub mod forms;
pub mod linsolve;
pub mod material;
pub mod mesh;
pub mod norms;
pub mod run;
pub mod space;
pub mod spectrum;
pub mod verification;
pub mod vtk;

pub use error::{Error, Result};
