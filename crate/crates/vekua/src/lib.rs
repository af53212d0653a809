//! Spectral solver and solvability diagnostics for Vekua-type evolution
//! equations on `T x G`, where `G` is a finite product of circle and SU(2)
//! factors.

pub mod conditions;
pub mod error;
pub mod field;
pub mod group;
pub mod mode;
pub mod profile;
pub mod su2;

mod quad;

pub use error::{Error, Result};
