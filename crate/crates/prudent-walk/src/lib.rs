//! Excursion-renewal machinery for the two-dimensional uniform prudent
//! walk: exact enumeration oracles, the tilted effective random walk,
//! truncated strip measures, exact and importance samplers, and the
//! scaling diagnostics (speed, covariance, quadrants, crossings).
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `prudent` binary for the command-line surface.

pub mod constants;
pub mod effective;
pub mod enumerate;
pub mod error;
pub mod io;
pub mod lattice;
pub mod sample;
pub mod scaling;
pub mod strip;
pub mod verify;

pub use error::{Error, Result};
