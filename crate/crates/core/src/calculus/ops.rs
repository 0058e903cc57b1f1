use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::planealg::{build_relations, Element, Letter, Order, PlaneError, RelationSet, RewriteSystem, Table, Variant, Word};
use crate::rmatrix::RMatrixBundle;
use crate::scalar::{Scalar, ScalarError};

/// Index of a derivative or differential: x^a, v (dot) or z (circ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DIdx {
    Coord(u8),
    Dot,
    Circ,
}

impl DIdx {
    pub fn form(&self) -> Letter {
        match self {
            DIdx::Coord(a) => Letter::DX(*a),
            DIdx::Dot => Letter::DV,
            DIdx::Circ => Letter::DZ,
        }
    }
    pub fn coordinate(&self) -> Letter {
        match self {
            DIdx::Coord(a) => Letter::X(*a),
            DIdx::Dot => Letter::V(1),
            DIdx::Circ => Letter::Z,
        }
    }
    pub fn derivative(&self) -> Letter {
        match self {
            DIdx::Coord(a) => Letter::PD(*a),
            DIdx::Dot => Letter::PDdot,
            DIdx::Circ => Letter::PDcirc,
        }
    }
}

impl fmt::Display for DIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DIdx::Coord(a) => write!(f, "{}", a),
            DIdx::Dot => write!(f, "dot"),
            DIdx::Circ => write!(f, "circ"),
        }
    }
}

fn d_letter(l: Letter) -> Result<Element, ScalarError> {
    use Letter::*;
    Ok(match l {
        X(a) => Element::letter(DX(a)),
        Z => Element::letter(DZ),
        V(k) if k > 0 => {
            let mut acc = Element::zero();
            for j in 0..k {
                acc = acc.add(&Element::letters(&[V(j), DV, V(k - 1 - j)], Scalar::one()));
            }
            acc
        }
        V(k) => {
            // d(u) = -u dv u, then Leibniz over the power.
            let m = -k;
            let mut acc = Element::zero();
            for j in 0..m {
                acc = acc.add(&Element::letters(&[V(-j - 1), DV, V(-(m - j))], Scalar::one().neg()));
            }
            acc
        }
        DX(_) | DV | DZ => Element::zero(),
        DU => Element::zero(),
        other => return Err(ScalarError::Domain(format!("d is not defined on {}", other.render(0)))),
    })
}

/// Graded Leibniz extension of d, without normal ordering.
pub fn d_raw(e: &Element) -> Result<Element, PlaneError> {
    let mut out = Element::zero();
    for (w, c) in e.terms() {
        let ls = w.letters();
        let mut sign = Scalar::one();
        for i in 0..ls.len() {
            let dl = d_letter(ls[i])?;
            if !dl.is_zero() {
                let pre = Element::word(Word::from_letters(&ls[..i]));
                let post = Element::word(Word::from_letters(&ls[i + 1..]));
                out = out.add(&pre.mul(&dl).mul(&post).scale(&c.mul(&sign)));
            }
            if ls[i].is_form() {
                sign = sign.neg();
            }
        }
    }
    Ok(out)
}

/// One table with its forms-left and forms-right rewrite systems.
#[derive(Debug)]
pub struct Calculus {
    pub bundle: RMatrixBundle,
    pub rels: RelationSet,
    pub left: RewriteSystem,
    pub right: RewriteSystem,
    /// d of single words, keyed by (word, forms-right).
    dmemo: RwLock<HashMap<(Word, bool), Element>>,
}

impl Calculus {
    pub fn new(b: &RMatrixBundle, table: Table, c: Option<Scalar>) -> Result<Self, PlaneError> {
        let rels = build_relations(b, table, c)?;
        let left = RewriteSystem::compile(&rels, Order::FormsLeft)?;
        let right = RewriteSystem::compile_variant(&rels, Order::FormsRight, Variant::NoDerivatives)?;
        Ok(Calculus { bundle: b.clone(), rels, left, right, dmemo: RwLock::new(HashMap::new()) })
    }
    pub fn n(&self) -> usize {
        self.bundle.ctx.n
    }
    pub fn table(&self) -> Table {
        self.rels.table
    }

    /// Differential indices available in the table.
    pub fn indices(&self) -> Vec<DIdx> {
        let mut v: Vec<DIdx> = (1..=self.n() as u8).map(DIdx::Coord).collect();
        match self.table() {
            Table::T1 => v.extend([DIdx::Dot, DIdx::Circ]),
            Table::T2 => v.push(DIdx::Dot),
            Table::T3 => {}
        }
        v
    }

    fn check_letters(&self, e: &Element) -> Result<(), PlaneError> {
        let alpha = self.left.alphabet();
        for l in e.alphabet() {
            let ok = match l {
                Letter::V(_) => alpha.contains(&Letter::V(1)),
                Letter::DU => self.table() == Table::T1,
                other => alpha.contains(&other),
            };
            if !ok || l.is_derivative() {
                return Err(PlaneError::Unsupported(format!("{} under d in {}", l.render(self.n()), self.table())));
            }
        }
        Ok(())
    }

    fn d_linear(&self, e: &Element, right: bool) -> Result<Element, PlaneError> {
        self.check_letters(e)?;
        let sys = if right { &self.right } else { &self.left };
        let mut out = Element::zero();
        for (w, c) in e.terms() {
            let key = (w.clone(), right);
            let hit = self.dmemo.read().expect("memo lock").get(&key).cloned();
            let dw = match hit {
                Some(d) => d,
                None => {
                    let d = sys.normal_form(&d_raw(&Element::word(w.clone()))?)?;
                    self.dmemo.write().expect("memo lock").insert(key, d.clone());
                    d
                }
            };
            out.add_scaled(&dw, c);
        }
        Ok(out)
    }

    /// d(e) in forms-left normal form.
    pub fn exterior_d(&self, e: &Element) -> Result<Element, PlaneError> {
        self.d_linear(e, false)
    }
    /// d(e) in forms-right normal form.
    pub fn exterior_d_right(&self, e: &Element) -> Result<Element, PlaneError> {
        self.d_linear(e, true)
    }

    fn grade0(&self, e: &Element) -> Result<(), PlaneError> {
        if e.grade() != Some(0) {
            return Err(ScalarError::Domain("partial derivatives act on grade 0 elements".into()).into());
        }
        Ok(())
    }

    /// ∂_C(e): right coefficient of dx^C in d(e).
    pub fn partial(&self, e: &Element, c: DIdx) -> Result<Element, PlaneError> {
        self.grade0(e)?;
        let de = self.exterior_d(e)?;
        let f = c.form();
        let mut out = Element::zero();
        for (w, s) in de.terms() {
            let ls = w.letters();
            if ls.first() == Some(&f) {
                out.add_term(Word::from_letters(&ls[1..]), s.clone());
            }
        }
        Ok(out)
    }

    /// ←∂_C(e): left coefficient of dx^C in d(e).
    pub fn partial_left(&self, e: &Element, c: DIdx) -> Result<Element, PlaneError> {
        self.grade0(e)?;
        let de = self.exterior_d_right(e)?;
        let f = c.form();
        let mut out = Element::zero();
        for (w, s) in de.terms() {
            let ls = w.letters();
            if ls.last() == Some(&f) {
                out.add_term(Word::from_letters(&ls[..ls.len() - 1]), s.clone());
            }
        }
        Ok(out)
    }
}
