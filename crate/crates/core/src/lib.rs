//! Exponential moments of quadratic forms in quantum variables with
//! Gaussian states, under general canonical commutation relations.

pub mod ccr;
pub mod error;
pub mod lie;
pub mod matrix;
pub mod moments;
pub mod oracles;
pub mod qef;
pub mod recursion;
pub mod state;
pub mod williamson;

pub use error::{Error, Result};
