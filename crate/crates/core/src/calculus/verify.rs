use rayon::prelude::*;

use super::ops::{Calculus, DIdx};
use crate::planealg::{build_relations, Element, Letter, Order, PlaneError, RewriteSystem, Table, Variant, Word};
use crate::report::VerificationReport;
use crate::rmatrix::RMatrixBundle;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use Letter::*;

/// Coordinate letters of the table: x^a, then v, then z.
pub fn coordinates(n: usize, table: Table) -> Vec<Letter> {
    let mut v: Vec<Letter> = (1..=n as u8).map(X).collect();
    match table {
        Table::T1 => v.extend([V(1), Z]),
        Table::T2 => v.push(V(1)),
        Table::T3 => {}
    }
    v
}

/// All words of length ≤ maxdeg over the letters, shortest first.
pub fn monomials(letters: &[Letter], maxdeg: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..maxdeg {
        layer = layer.iter().flat_map(|w| letters.iter().map(move |l| w.concat(&Word::from_letters(&[*l])))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn first_failure(results: Vec<(String, Result<Element, PlaneError>)>, n: usize) -> Result<(), String> {
    for (name, r) in results {
        match r {
            Ok(e) if e.is_zero() => {}
            Ok(e) => return Err(format!("{}: {}", name, e.render(n))),
            Err(e) => return Err(format!("{}: {}", name, e)),
        }
    }
    Ok(())
}

/// d(d(e)) = 0 on every sample; the default sample set is every monomial of
/// degree ≤ 3 in the coordinates.
pub fn verify_d2(calc: &Calculus, samples: Option<&[Element]>) -> VerificationReport {
    let n = calc.n();
    let owned: Vec<Element>;
    let samples = match samples {
        Some(s) => s,
        None => {
            owned = monomials(&coordinates(n, calc.table()), 3).into_iter().map(Element::word).collect();
            &owned
        }
    };
    let results: Vec<_> = samples
        .par_iter()
        .map(|e| {
            let r = calc.exterior_d(e).and_then(|de| calc.left.normal_form(&crate::calculus::d_raw(&de)?));
            (e.render(n), r)
        })
        .collect();
    let mut rep = VerificationReport::new(format!("d^2 {} N={}", calc.table(), n));
    rep.check(format!("d(d(e)) = 0 on {} samples", samples.len()), first_failure(results, n));
    rep
}

impl Calculus {
    fn derivative_index(&self, l: Letter) -> Option<DIdx> {
        match l {
            PD(a) => Some(DIdx::Coord(a)),
            PDdot => Some(DIdx::Dot),
            PDcirc => Some(DIdx::Circ),
            _ => None,
        }
    }

    /// A word read as an operator: coordinates multiply from the left,
    /// derivatives act, innermost letter rightmost.
    pub fn apply_word(&self, w: &Word, m: &Element) -> Result<Element, PlaneError> {
        let mut f = m.clone();
        for l in w.letters().iter().rev() {
            f = match self.derivative_index(*l) {
                Some(c) => self.partial(&f, c)?,
                None => self.left.normal_form(&Element::letter(*l).mul(&f))?,
            };
        }
        Ok(f)
    }

    /// An element read as an operator and applied to m.
    pub fn apply_operator(&self, op: &Element, m: &Element) -> Result<Element, PlaneError> {
        let mut out = Element::zero();
        for (w, c) in op.terms() {
            out.add_scaled(&self.apply_word(w, m)?, c);
        }
        self.left.normal_form(&out)
    }
}

/// Left-derivative operator expression: Σ coeff · ←∂_{i1}…(a)·tail, where
/// the derivatives apply innermost-last and `tail` multiplies on the right.
struct LeftTerm {
    coeff: Scalar,
    derivs: Vec<DIdx>,
    tail: Vec<Letter>,
}

fn lt(coeff: Scalar, derivs: &[DIdx], tail: &[Letter]) -> LeftTerm {
    LeftTerm { coeff, derivs: derivs.to_vec(), tail: tail.to_vec() }
}

struct LeftRow {
    name: String,
    /// Letter appended to the argument on the left-hand side.
    arg_tail: Option<Letter>,
    /// Left-hand derivatives applied to a·arg_tail (first element applied first).
    lhs: Vec<DIdx>,
    rhs: Vec<LeftTerm>,
}

impl Calculus {
    fn left_chain(&self, a: &Element, ds: &[DIdx]) -> Result<Element, PlaneError> {
        let mut f = a.clone();
        for d in ds {
            f = self.partial_left(&f, *d)?;
        }
        Ok(f)
    }

    fn left_residual(&self, row: &LeftRow, a: &Element) -> Result<Element, PlaneError> {
        let arg = match row.arg_tail {
            Some(l) => self.right.normal_form(&a.mul(&Element::letter(l)))?,
            None => a.clone(),
        };
        let mut res = if row.lhs.is_empty() { Element::zero() } else { self.left_chain(&arg, &row.lhs)? };
        for t in &row.rhs {
            let inner = self.left_chain(a, &t.derivs)?;
            let tail = Element::letters(&t.tail, Scalar::one());
            res = res.sub(&inner.mul(&tail).scale(&t.coeff));
        }
        self.right.normal_form(&res)
    }
}

fn k3(n: usize) -> Result<Scalar, PlaneError> {
    let ni = n as i32;
    Ok(Scalar::r_half(ni - 4).mul(&Scalar::one().sub(&Scalar::r(2))).div(&Scalar::one().sub(&Scalar::r(ni)))?)
}

/// The left-derivative block: deformed Leibniz rules and their commutations.
/// Products of derivatives compose as operators: ←∂_X ←∂_Y applies ←∂_Y
/// first. With `printed` the two rows that disagree with the calculus are
/// taken as printed: the δ term of the Leibniz rule with (r^2 - 1) instead of
/// (r^-2 - 1), and ←∂_b ←∂_• = q_b r^-2 ←∂_• ←∂_b instead of the swapped order.
fn left_rows(calc: &Calculus, printed: bool) -> Result<Vec<LeftRow>, PlaneError> {
    let b = &calc.bundle;
    let n = calc.n();
    let t = calc.table();
    let r = |k: i32| Scalar::r(k);
    let one = Scalar::one();
    let mut rows = Vec::new();
    // (r^-2 P_S - P_A - P_0) for Table 1, r^-1 R̂^-1 otherwise.
    let m: Tensor = if t == Table::T1 {
        Tensor::combine(&[(r(-2), &b.ps), (Scalar::from_int(-1), &b.pa), (Scalar::from_int(-1), &b.p0)])?
    } else {
        b.rhat_inv.scale(&r(-1))
    };
    let dot = DIdx::Dot;
    let circ = DIdx::Circ;
    for c in 0..n {
        for bb in 0..n {
            let mut rhs = Vec::new();
            if c == bb {
                rhs.push(lt(one.clone(), &[], &[]));
                if t != Table::T3 {
                    let k = if printed { r(2) } else { r(-2) };
                    rhs.push(lt(k.sub(&one), &[dot], &[V(1)]));
                }
            }
            for d in 0..n {
                for e in 0..n {
                    let v = m.get(&[d, bb, e, c]);
                    if !v.is_zero() {
                        rhs.push(lt(v.clone(), &[DIdx::Coord(d as u8 + 1)], &[X(e as u8 + 1)]));
                    }
                }
            }
            rows.push(LeftRow {
                name: "pd(a x) = a delta + pd(a) M x".into(),
                arg_tail: Some(X(bb as u8 + 1)),
                lhs: vec![DIdx::Coord(c as u8 + 1)],
                rhs,
            });
        }
    }
    if t != Table::T3 {
        let kk = k3(n)?;
        for i in 0..n {
            let q = b.ctx.qdot(i + 1)?;
            let xb = X(i as u8 + 1);
            let mut rhs = vec![lt(q.inv()?, &[dot], &[xb])];
            if t == Table::T1 {
                for c in 0..n {
                    let cu = b.c_up.get(&[c, i]);
                    if !cu.is_zero() {
                        rhs.push(lt(cu.mul(&kk).neg(), &[DIdx::Coord(c as u8 + 1)], &[Z]));
                    }
                }
            }
            rows.push(LeftRow { name: "pdot(a x) = q^-1 pdot(a) x".into(), arg_tail: Some(xb), lhs: vec![dot], rhs });
            rows.push(LeftRow {
                name: "pd(a v) = r^-2 q pd(a) v".into(),
                arg_tail: Some(V(1)),
                lhs: vec![DIdx::Coord(i as u8 + 1)],
                rhs: vec![lt(r(-2).mul(&q), &[DIdx::Coord(i as u8 + 1)], &[V(1)])],
            });
            if t == Table::T1 {
                let mut rhs = vec![lt(q.clone(), &[circ], &[xb])];
                for c in 0..n {
                    let cu = b.c_up.get(&[c, i]);
                    if !cu.is_zero() {
                        rhs.push(lt(cu.mul(&kk).neg(), &[DIdx::Coord(c as u8 + 1)], &[V(1)]));
                    }
                }
                rows.push(LeftRow { name: "pcirc(a x) = q pcirc(a) x".into(), arg_tail: Some(xb), lhs: vec![circ], rhs });
                rows.push(LeftRow {
                    name: "pd(a z) = q^-1 pd(a) z".into(),
                    arg_tail: Some(Z),
                    lhs: vec![DIdx::Coord(i as u8 + 1)],
                    rhs: vec![lt(q.inv()?, &[DIdx::Coord(i as u8 + 1)], &[Z])],
                });
            }
            let cb = DIdx::Coord(i as u8 + 1);
            let (first, second) = if printed { (dot, cb) } else { (cb, dot) };
            rows.push(LeftRow {
                name: "pd pdot commutation".into(),
                arg_tail: None,
                lhs: vec![first, second],
                rhs: vec![lt(q.mul(&r(-2)), &[second, first], &[])],
            });
            if t == Table::T1 {
                rows.push(LeftRow {
                    name: "pd pcirc = q pcirc pd".into(),
                    arg_tail: None,
                    lhs: vec![circ, cb],
                    rhs: vec![lt(q.clone(), &[cb, circ], &[])],
                });
            }
        }
        rows.push(LeftRow {
            name: "pdot(a v) = r^-2 pdot(a) v + a".into(),
            arg_tail: Some(V(1)),
            lhs: vec![dot],
            rhs: vec![lt(r(-2), &[dot], &[V(1)]), lt(one.clone(), &[], &[])],
        });
    }
    if t == Table::T1 {
        rows.push(LeftRow {
            name: "pcirc(a v) = pcirc(a) v".into(),
            arg_tail: Some(V(1)),
            lhs: vec![circ],
            rhs: vec![lt(one.clone(), &[circ], &[V(1)])],
        });
        rows.push(LeftRow {
            name: "pdot(a z) = r^-2 pdot(a) z".into(),
            arg_tail: Some(Z),
            lhs: vec![dot],
            rhs: vec![lt(r(-2), &[dot], &[Z])],
        });
        rows.push(LeftRow {
            name: "pcirc(a z) = r^2 pcirc(a) z + a + (r^-2 - 1) pdot(a) v".into(),
            arg_tail: Some(Z),
            lhs: vec![circ],
            rhs: vec![lt(r(2), &[circ], &[Z]), lt(one.clone(), &[], &[]), lt(r(-2).sub(&one), &[dot], &[V(1)])],
        });
        rows.push(LeftRow { name: "pdot pcirc = pcirc pdot".into(), arg_tail: None, lhs: vec![dot, circ], rhs: vec![lt(one.clone(), &[circ, dot], &[])] });
    }
    // P_A^{ab}_{cd} ←∂_a ←∂_b = 0.
    for c in 0..n {
        for d in 0..n {
            let mut terms = Vec::new();
            for a in 0..n {
                for bb in 0..n {
                    let v = b.pa.get(&[a, bb, c, d]);
                    if !v.is_zero() {
                        terms.push(lt(v.neg(), &[DIdx::Coord(bb as u8 + 1), DIdx::Coord(a as u8 + 1)], &[]));
                    }
                }
            }
            if !terms.is_empty() {
                rows.push(LeftRow { name: "P_A pd pd = 0".into(), arg_tail: None, lhs: vec![], rhs: terms });
            }
        }
    }
    Ok(rows)
}

/// The ∂-rows of the table as operator identities on every monomial of
/// degree ≤ maxdeg, followed by the left-derivative block.
pub fn verify_partial_relations(calc: &Calculus, maxdeg: usize) -> Result<VerificationReport, PlaneError> {
    let n = calc.n();
    let mons: Vec<Element> = monomials(&coordinates(n, calc.table()), maxdeg).into_iter().map(Element::word).collect();
    let mut rep = VerificationReport::new(format!("partial derivatives {} N={} degree {}", calc.table(), n, maxdeg));

    let mut names: Vec<String> = Vec::new();
    for row in &calc.rels.rows {
        if row.elem.alphabet().iter().any(|l| l.is_derivative()) && !names.contains(&row.name) {
            names.push(row.name.clone());
        }
    }
    for name in &names {
        let rows: Vec<&Element> = calc.rels.find(name).map(|r| &r.elem).collect();
        let results: Vec<_> = rows
            .par_iter()
            .flat_map(|op| mons.par_iter().map(move |m| (op, m)))
            .map(|(op, m)| (format!("{} on {}", op.render(n), m.render(n)), calc.apply_operator(op, m)))
            .collect();
        rep.check(name.clone(), first_failure(results, n));
    }

    // ∂_C(x^A) = δ^A_C, both sides.
    let mut bad = Ok(());
    let idx = calc.indices();
    for a in &idx {
        for c in &idx {
            let x = Element::letter(a.coordinate());
            let want = if a == c { Element::one() } else { Element::zero() };
            for (side, got) in [("right", calc.partial(&x, *c)), ("left", calc.partial_left(&x, *c))] {
                match got {
                    Ok(g) if g == want => {}
                    Ok(g) => {
                        bad = Err(format!("{} d_{}({}) = {}", side, c, a.coordinate().render(n), g.render(n)));
                    }
                    Err(e) => bad = Err(e.to_string()),
                }
            }
        }
    }
    rep.check("partial of coordinates is delta", bad);

    rep.merge(verify_left_block(calc, maxdeg, false)?);
    Ok(rep)
}

/// The left-derivative block alone; `printed` selects the printed forms of
/// the Leibniz δ term and the ←∂_b ←∂_• commutation.
pub fn verify_left_block(calc: &Calculus, maxdeg: usize, printed: bool) -> Result<VerificationReport, PlaneError> {
    let n = calc.n();
    let mons: Vec<Element> = monomials(&coordinates(n, calc.table()), maxdeg).into_iter().map(Element::word).collect();
    let mut rep = VerificationReport::new(if printed { "left printed" } else { "left" });
    let lrows = left_rows(calc, printed)?;
    let mut names: Vec<String> = Vec::new();
    for r in &lrows {
        if !names.contains(&r.name) {
            names.push(r.name.clone());
        }
    }
    for name in names {
        let group: Vec<&LeftRow> = lrows.iter().filter(|r| r.name == name).collect();
        let results: Vec<_> = group
            .par_iter()
            .flat_map(|row| mons.par_iter().map(move |m| (row, m)))
            .map(|(row, m)| (m.render(n), calc.left_residual(row, m)))
            .collect();
        rep.check(name, first_failure(results, n));
    }
    Ok(rep)
}

/// d(m) = Σ dx^C ∂_C(m) = Σ ←∂_C(m) dx^C on every monomial of degree ≤ maxdeg.
pub fn verify_extraction(calc: &Calculus, maxdeg: usize) -> Result<VerificationReport, PlaneError> {
    let n = calc.n();
    let mons = monomials(&coordinates(n, calc.table()), maxdeg);
    let idx = calc.indices();
    let side = |left: bool| -> Vec<(String, Result<Element, PlaneError>)> {
        mons.par_iter()
            .map(|w| {
                let m = Element::word(w.clone());
                let r = (|| {
                    let mut acc = Element::zero();
                    for c in &idx {
                        let f = Element::letter(c.form());
                        acc = acc.add(&if left { calc.partial_left(&m, *c)?.mul(&f) } else { f.mul(&calc.partial(&m, *c)?) });
                    }
                    Ok(calc.left.normal_form(&acc)?.sub(&calc.exterior_d(&m)?))
                })();
                (w.render(n), r)
            })
            .collect()
    };
    let mut rep = VerificationReport::new(format!("extraction {} N={}", calc.table(), n));
    rep.check("d = dx^C pd_C", first_failure(side(false), n));
    rep.check("d = pd_C dx^C (left)", first_failure(side(true), n));
    Ok(rep)
}

/// η° = k [dx C x - r^{N-2} x C dx] u².
pub fn eta_circ(b: &RMatrixBundle) -> Result<Element, PlaneError> {
    let n = b.ctx.n;
    let ni = n as i32;
    let k = Scalar::r_half(ni - 2).div(&Scalar::one().sub(&Scalar::r(ni)).mul(&Scalar::one().add(&Scalar::r(ni - 2))))?;
    let mut e = Element::zero();
    for a in 0..n {
        for c in 0..n {
            let cl = b.c_low.get(&[a, c]);
            if cl.is_zero() {
                continue;
            }
            let (xa, xc) = (a as u8 + 1, c as u8 + 1);
            e.add_term(Word::from_letters(&[DX(xa), X(xc), V(-2)]), cl.mul(&k));
            e.add_term(Word::from_letters(&[X(xa), DX(xc), V(-2)]), cl.mul(&k).mul(&Scalar::r(ni - 2)).neg());
        }
    }
    Ok(e)
}

/// η° survives under Table 1 and vanishes under Table 2.
pub fn verify_eta_reduction(b: &RMatrixBundle) -> Result<VerificationReport, PlaneError> {
    let n = b.ctx.n;
    let mut rep = VerificationReport::new(format!("eta reduction N={}", n));
    let eta = eta_circ(b)?;
    let sys1 = RewriteSystem::compile(&build_relations(b, Table::T1, None)?, Order::FormsLeft)?;
    let sys2 = RewriteSystem::compile_variant(&build_relations(b, Table::T2, None)?, Order::FormsLeft, Variant::Full)?;
    let e1 = sys1.normal_form(&eta)?;
    rep.check("eta circ nonzero under T1", if e1.is_zero() { Err("0".into()) } else { Ok(()) });
    rep.note(e1.render(n));
    let e2 = sys2.normal_form(&eta)?;
    rep.check("eta circ vanishes under T2", if e2.is_zero() { Ok(()) } else { Err(e2.render(n)) });
    let mut bad = Ok(());
    for a in 1..=n as u8 {
        let ea = Element::letters(&[DX(a), V(-1)], Scalar::r(-1).neg());
        if sys1.normal_form(&ea)? != ea {
            bad = Err(format!("eta^{} rewritten", a));
        }
    }
    rep.check("eta^a already normal", bad);
    Ok(rep)
}
