//! The *-conjugation of Tables 2 and 3.

use super::element::{Element, Letter};
use super::relations::RelationSet;
use super::rewrite::RewriteSystem;
use super::PlaneError;
use crate::report::VerificationReport;
use crate::rmatrix::RMatrixBundle;
use crate::scalar::{ParameterContext, Scalar, ScalarError};

/// Antilinear, antimultiplicative involution on the plane generators.
#[derive(Clone, Debug)]
pub struct Involution {
    pub ctx: ParameterContext,
    /// d_a^{-1} per index (1-based at position a - 1).
    pub dinv: Vec<Scalar>,
}

impl Involution {
    pub fn new(b: &RMatrixBundle) -> Result<Self, PlaneError> {
        let dinv = b.dvec.iter().map(|d| d.inv()).collect::<Result<Vec<_>, _>>()?;
        Ok(Involution { ctx: b.ctx.clone(), dinv })
    }

    /// Image of one generator.
    pub fn image(&self, l: Letter) -> Result<Element, ScalarError> {
        use Letter::*;
        let n = self.ctx.n;
        let sw = |a: u8| self.ctx.dswap(a as usize) as u8;
        Ok(match l {
            X(a) => Element::letter(X(sw(a))),
            DX(a) => Element::letter(DX(sw(a))),
            V(k) => Element::letter(V(k)),
            DV => Element::letter(DV),
            PD(a) => {
                let c = Scalar::r(n as i32).mul(&self.dinv[a as usize - 1]).neg();
                Element::letters(&[PD(sw(a))], c)
            }
            PDdot => Element::letter(V(-1)).sub(&Element::letter(PDdot)),
            other => {
                return Err(ScalarError::Domain(format!(
                    "no conjugation rule for {}",
                    other.render(n)
                )))
            }
        })
    }

    pub fn apply(&self, e: &Element) -> Result<Element, ScalarError> {
        e.anti_substitute(&|l| self.image(l), &|c| self.ctx.conj(c))
    }
}

/// apply_star(e, inv).
pub fn apply_star(e: &Element, inv: &Involution) -> Result<Element, PlaneError> {
    Ok(inv.apply(e)?)
}

/// The star image of every table row must reduce to zero, and the star
/// must be an involution on the generators.
pub fn check_star_closure(rels: &RelationSet, sys: &RewriteSystem, inv: &Involution) -> VerificationReport {
    let n = rels.n();
    let mut rep = VerificationReport::new(format!("star closure {} N={}", rels.table, n));
    let mut bad = None;
    for row in &rels.rows {
        let res = inv.apply(&row.elem).map_err(PlaneError::from).and_then(|e| sys.normal_form(&e));
        match res {
            Ok(e) if e.is_zero() => {}
            Ok(e) => {
                bad.get_or_insert_with(|| format!("{}: {}", row.name, e.render(n)));
            }
            Err(e) => {
                bad.get_or_insert_with(|| format!("{}: {}", row.name, e));
            }
        }
    }
    rep.check("relations map to zero", bad.map_or(Ok(()), Err));
    let mut bad = None;
    for l in sys.alphabet() {
        let twice = inv
            .apply(&Element::letter(l))
            .and_then(|e| inv.apply(&e))
            .map_err(PlaneError::from)
            .and_then(|e| sys.normal_form(&e));
        match twice {
            Ok(e) if e == Element::letter(l) => {}
            Ok(e) => {
                bad.get_or_insert_with(|| format!("{} -> {}", l.render(n), e.render(n)));
            }
            Err(e) => {
                bad.get_or_insert_with(|| format!("{}: {}", l.render(n), e));
            }
        }
    }
    rep.check("involutive on generators", bad.map_or(Ok(()), Err));
    // The two printed readings of the ∂ prefactor, d_a^{-1} and d_b^{-1},
    // agree wherever the index swap is nontrivial.
    let mut agree = Ok(());
    for a in 1..=n {
        let b = inv.ctx.dswap(a);
        if !inv.dinv[a - 1].equals(&inv.dinv[b - 1]) {
            agree = Err(format!("d_{} != d_{}", a, b));
        }
    }
    rep.check("derivative prefactor readings agree", agree);
    rep
}
