//! Exterior derivative, partial derivatives and the q-Lie sector.

mod ops;
mod qlie;
mod verify;

pub use ops::{d_raw, Calculus, DIdx};
pub use verify::{coordinates, eta_circ, monomials, verify_d2, verify_eta_reduction, verify_extraction, verify_left_block, verify_partial_relations};
pub use qlie::{build_qlie, lambda_braid_at, lambda_braid_residual, verify_qlie, Comb, QLieData, QWord};
