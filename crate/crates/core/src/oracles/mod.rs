//! Independent reference computations: truncated Fock-basis oscillators,
//! Monte Carlo sampling over auxiliary parameters, and a Gaussian heat-flow check.

pub mod fock;
pub mod heat;
pub mod mc;

pub use fock::{fock_expectation, verify_weyl_factorization, FockEstimate, FockOscillator, FockState, SparseOp};
pub use heat::{heat_sandwich_check, HeatReport};
pub use mc::{mc_product_moment, mc_qef, mc_single_variable, McEstimate};
