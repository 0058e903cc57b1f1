//! Exact symbolic engine for multiparametric orthogonal quantum planes.

pub mod scalar;
pub mod tensor;
pub mod report;
pub mod rmatrix;
pub mod planealg;
pub mod calculus;
pub mod expr;
pub mod emit;
pub mod minkowski;
