pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod potential;
pub mod solver;
pub mod variational;

mod sine_transform;

pub use error::{Error, Result};
