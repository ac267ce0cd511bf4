//! Spectral multipliers on two-step nilpotent Lie groups.

pub mod error;
pub mod estimates;
pub mod group;
pub mod kernel;
pub mod linalg;
pub mod multiplier;
pub mod par;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
