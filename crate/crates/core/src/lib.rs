//! Numerical laboratory for timelike extremal surfaces (membranes) in
//! three-dimensional Minkowski space, written as graphs `x3 = v(t, x1, x2)`.

pub mod energy;
pub mod error;
pub mod evolver;
pub mod extremal;
pub mod goursat;
pub mod grid;
pub mod inequalities;
pub mod jet;
pub mod profile;
pub mod traveling_waves;
pub mod vector_fields;

pub use error::{Error, Result};
