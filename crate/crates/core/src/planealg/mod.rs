//! Free algebra on the plane generators, the table relation sets and
//! their compiled rewrite systems.

mod element;
mod relations;
mod rewrite;
mod star;

pub use element::{Element, Letter, Word};
pub use relations::{build_relations, default_c, kappa_prime, z_expression, Relation, RelationSet, Role, Source, Table};
pub use rewrite::{default_budget, Key, Order, RewriteSystem, Rule, Variant};
pub use star::{apply_star, check_star_closure, Involution};

use thiserror::Error;

use crate::report::VerificationReport;
use crate::rmatrix::{RMatrixBundle, RMatrixError};
use crate::scalar::{ParameterContext, ScalarError};
use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("rewrite step budget of {0} exceeded")]
    Budget(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("inconsistent relations: {0}")]
    Inconsistent(String),
}

impl From<TensorError> for PlaneError {
    fn from(e: TensorError) -> Self {
        PlaneError::RMatrix(e.into())
    }
}

/// Build and compile one table in the forms-left order.
pub fn compile_table(b: &RMatrixBundle, table: Table, c: Option<crate::scalar::Scalar>) -> Result<(RelationSet, RewriteSystem), PlaneError> {
    let rels = build_relations(b, table, c)?;
    let sys = RewriteSystem::compile(&rels, Order::FormsLeft)?;
    Ok((rels, sys))
}

/// Substitute the z constraint into every z-carrying non-derivative row of
/// Table 1 and reduce in the z-free subsystem.
pub fn verify_z_constraint(b: &RMatrixBundle) -> Result<VerificationReport, PlaneError> {
    let ctx: &ParameterContext = &b.ctx;
    let n = ctx.n;
    let rels = build_relations(b, Table::T1, None)?;
    let sys = RewriteSystem::compile_variant(&rels, Order::FormsLeft, Variant::ZFree)?;
    let z = z_expression(b);
    let dz = crate::calculus::d_raw(&z)?;
    let mut rep = VerificationReport::new(format!("z constraint N={}", n));
    for row in &rels.rows {
        let letters = row.elem.alphabet();
        if !letters.iter().any(|l| matches!(l, Letter::Z | Letter::DZ)) || letters.iter().any(|l| l.is_derivative()) {
            continue;
        }
        let sub = row.elem.substitute(&|l| match l {
            Letter::Z => z.clone(),
            Letter::DZ => dz.clone(),
            other => Element::letter(other),
        });
        let res = sys.normal_form(&sub);
        let outcome = match res {
            Ok(e) if e.is_zero() => Ok(()),
            Ok(e) => Err(e.render(n)),
            Err(e) => Err(e.to_string()),
        };
        rep.check(row.name.clone(), outcome);
    }
    Ok(rep)
}
