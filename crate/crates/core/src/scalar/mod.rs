//! Exact coefficient field: Laurent rational functions in `r`, the twist
//! parameters and `hbar`, with coefficients in Q(i, sqrt 2).

mod coeff;
mod context;
mod poly;
mod value;

pub use coeff::{Coeff, Gauss, Rat};
pub use context::{ParameterContext, Point, Twist};
pub use poly::{LPoly, Mono, Sym};
pub use value::Scalar;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at the evaluation point")]
    Pole,
    #[error("indeterminate form 0/0 at the evaluation point")]
    Indeterminate,
    #[error("unresolved symbol `{0}`")]
    UnresolvedSymbol(String),
    #[error("domain error: {0}")]
    Domain(String),
}
