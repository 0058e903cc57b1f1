//! The relation sets of the three plane calculi.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::element::{Element, Letter};
use super::PlaneError;
use crate::rmatrix::RMatrixBundle;
use crate::scalar::{ParameterContext, Scalar};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Table {
    /// Inhomogeneous calculus with x, v, u, z and their differentials.
    T1,
    /// x, v, dx, dv and the derivatives ∂_a, ∂_•.
    T2,
    /// Reduced calculus on x, dx, ∂_a.
    T3,
}

impl FromStr for Table {
    type Err = PlaneError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T1" | "t1" | "1" => Ok(Table::T1),
            "T2" | "t2" | "2" => Ok(Table::T2),
            "T3" | "t3" | "3" => Ok(Table::T3),
            _ => Err(PlaneError::UnknownTable(s.to_string())),
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// How a row takes part in compilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Role {
    /// Oriented into rewrite rules (when all its words are quadratic).
    Rule,
    /// Only verified against the compiled system.
    Check,
    /// Replaces the dz-carrying x·dx row in the z-free subsystem.
    ZFree,
}

/// Where a row comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Source {
    Table,
    /// A row of the larger table needed to close the alphabet.
    Completion,
}

#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    /// Asserted to vanish.
    pub elem: Element,
    pub role: Role,
    pub source: Source,
}

#[derive(Clone, Debug)]
pub struct RelationSet {
    pub table: Table,
    pub ctx: ParameterContext,
    /// The P_0 constant of the x·dx row.
    pub c: Scalar,
    pub rows: Vec<Relation>,
}

impl RelationSet {
    pub fn n(&self) -> usize {
        self.ctx.n
    }
    pub fn find(&self, name: &str) -> impl Iterator<Item = &Relation> {
        let name = name.to_string();
        self.rows.iter().filter(move |r| r.name == name)
    }
}

/// Default P_0 constant r^{N-2}.
pub fn default_c(n: usize) -> Scalar {
    Scalar::r(n as i32 - 2)
}

struct Builder<'a> {
    b: &'a RMatrixBundle,
    n: usize,
    rows: Vec<Relation>,
}

use Letter::*;

fn el(ls: &[Letter], s: Scalar) -> Element {
    Element::letters(ls, s)
}

impl<'a> Builder<'a> {
    fn push(&mut self, name: impl Into<String>, elem: Element, role: Role, source: Source) {
        if !elem.is_zero() {
            self.rows.push(Relation { name: name.into(), elem, role, source });
        }
    }
    fn row(&mut self, name: &str, elem: Element) {
        self.push(name, elem, Role::Rule, Source::Table);
    }
    fn check(&mut self, name: &str, elem: Element) {
        self.push(name, elem, Role::Check, Source::Table);
    }
    fn qd(&self, a: usize) -> Result<Scalar, PlaneError> {
        Ok(self.b.ctx.qdot(a)?)
    }
    /// Σ_{cd} T^{ab}_{cd} f(c) g(d), 1-based letters.
    fn contract2(&self, t: &Tensor, a: usize, b: usize, f: impl Fn(u8) -> Letter, g: impl Fn(u8) -> Letter) -> Element {
        let mut e = Element::zero();
        for c in 0..self.n {
            for d in 0..self.n {
                let v = t.get(&[a, b, c, d]);
                if !v.is_zero() {
                    e.add_term(super::Word::from_letters(&[f(c as u8 + 1), g(d as u8 + 1)]), v.clone());
                }
            }
        }
        e
    }

    fn pa_xx(&mut self) {
        for a in 0..self.n {
            for b in 0..self.n {
                let e = self.contract2(&self.b.pa, a, b, X, X);
                self.row("P_A xx", e);
            }
        }
    }
    /// x^a dx^b = A^{ab}_{cd} dx^c x^d.
    fn xdx(&mut self, a_t: &Tensor, name: &str, role: Role) {
        for a in 0..self.n {
            for b in 0..self.n {
                let lhs = el(&[X(a as u8 + 1), DX(b as u8 + 1)], Scalar::one());
                let e = lhs.sub(&self.contract2(a_t, a, b, DX, X));
                self.push(name, e, role, Source::Table);
            }
        }
    }
    /// dx^a dx^b = -r R̂^{ab}_{cd} dx^c dx^d.
    fn dxdx_rhat(&mut self) {
        let r = Scalar::r(1);
        for a in 0..self.n {
            for b in 0..self.n {
                let lhs = el(&[DX(a as u8 + 1), DX(b as u8 + 1)], Scalar::one());
                let e = lhs.add(&self.contract2(&self.b.rhat, a, b, DX, DX).scale(&r));
                self.row("dx dx = -r Rhat dx dx", e);
            }
        }
    }
    /// ∂_c x^b = A^{be}_{cd} x^d ∂_e + δ^b_c extra.
    fn pdx(&mut self, a_t: &Tensor, extra: &Element, name: &str) {
        for c in 0..self.n {
            for b in 0..self.n {
                let mut e = el(&[PD(c as u8 + 1), X(b as u8 + 1)], Scalar::one());
                for d in 0..self.n {
                    for ee in 0..self.n {
                        let v = a_t.get(&[b, ee, c, d]);
                        if !v.is_zero() {
                            e.add_term(super::Word::from_letters(&[X(d as u8 + 1), PD(ee as u8 + 1)]), v.neg());
                        }
                    }
                }
                if b == c {
                    e = e.sub(extra);
                }
                self.row(name, e);
            }
        }
    }
    /// P_A^{ab}_{cd} ∂_b ∂_a = 0.
    fn pa_dd(&mut self) {
        for c in 0..self.n {
            for d in 0..self.n {
                let mut e = Element::zero();
                for a in 0..self.n {
                    for b in 0..self.n {
                        let v = self.b.pa.get(&[a, b, c, d]);
                        if !v.is_zero() {
                            e.add_term(super::Word::from_letters(&[PD(b as u8 + 1), PD(a as u8 + 1)]), v.clone());
                        }
                    }
                }
                self.row("P_A dd", e);
            }
        }
    }
}

/// x·dx operator for the constant c: (r^{-2}P_S - P_A + c P_0)^{-1}.
fn xdx_operator(b: &RMatrixBundle, c: &Scalar) -> Result<Tensor, PlaneError> {
    let r2 = Scalar::r(2);
    let ci = c.inv()?;
    Ok(Tensor::combine(&[(r2, &b.ps), (Scalar::from_int(-1), &b.pa), (ci, &b.p0)])?)
}

/// Emit the rows of one table.
pub fn build_relations(b: &RMatrixBundle, table: Table, c_override: Option<Scalar>) -> Result<RelationSet, PlaneError> {
    let n = b.ctx.n;
    let c = c_override.clone().unwrap_or_else(|| default_c(n));
    let mut bd = Builder { b, n, rows: Vec::new() };
    let r = |k: i32| Scalar::r(k);
    let lam = Scalar::lambda();
    let one = Scalar::one();
    let a_op = if c_override.is_some() {
        xdx_operator(b, &c)?
    } else {
        b.rhat.scale(&r(1))
    };

    bd.pa_xx();
    if table != Table::T1 {
        bd.xdx(&a_op, "x dx = r Rhat dx x", Role::Rule);
        bd.dxdx_rhat();
    }
    match table {
        Table::T3 => {
            bd.pdx(&a_op, &Element::one(), "pd x = r Rhat x pd + delta");
            bd.pa_dd();
        }
        Table::T2 => {
            for i in 1..=n {
                let a = i as u8;
                let q = bd.qd(i)?;
                bd.row("x v = q v x", el(&[X(a), V(1)], one.clone()).sub(&el(&[V(1), X(a)], q.clone())));
                bd.row(
                    "x dv = q dv x + lam r dx v",
                    el(&[X(a), DV], one.clone())
                        .sub(&el(&[DV, X(a)], q.clone()))
                        .sub(&el(&[DX(a), V(1)], lam.mul(&r(1)))),
                );
                bd.row("v dx = r^2/q dx v", el(&[V(1), DX(a)], one.clone()).sub(&el(&[DX(a), V(1)], r(2).div(&q)?)));
                bd.row("dx dv = -q/r^2 dv dx", el(&[DX(a), DV], one.clone()).add(&el(&[DV, DX(a)], q.div(&r(2))?)));
                bd.row("pdot x = q x pdot", el(&[PDdot, X(a)], one.clone()).sub(&el(&[X(a), PDdot], q.clone())));
                bd.row(
                    "pd pdot = q/r^2 pdot pd",
                    el(&[PD(a), PDdot], one.clone()).sub(&el(&[PDdot, PD(a)], q.div(&r(2))?)),
                );
                bd.push(
                    "pd v = r^2/q v pd",
                    el(&[PD(a), V(1)], one.clone()).sub(&el(&[V(1), PD(a)], r(2).div(&q)?)),
                    Role::Rule,
                    Source::Completion,
                );
            }
            bd.row("dv dv = 0", el(&[DV, DV], one.clone()));
            bd.row("pdot v = r^2 v pdot + 1", el(&[PDdot, V(1)], one.clone()).sub(&el(&[V(1), PDdot], r(2))).sub(&Element::one()));
            bd.push("v dv = r^2 dv v", el(&[V(1), DV], one.clone()).sub(&el(&[DV, V(1)], r(2))), Role::Rule, Source::Completion);
            let extra = Element::one().add(&el(&[V(1), PDdot], r(2).sub(&one)));
            bd.pdx(&a_op, &extra, "pd x = r Rhat x pd + delta (1 + (r^2-1) v pdot)");
            bd.pa_dd();
        }
        Table::T1 => build_t1(&mut bd)?,
    }
    Ok(RelationSet { table, ctx: b.ctx.clone(), c, rows: bd.rows })
}

/// κ' = r^{N/2}(1 - r^2)/(1 - r^N).
pub fn kappa_prime(n: usize) -> Scalar {
    let one = Scalar::one();
    Scalar::r_half(n as i32)
        .mul(&one.sub(&Scalar::r(2)))
        .div(&one.sub(&Scalar::r(n as i32)))
        .expect("nonzero")
}

/// The element z is constrained to: -(r^{-N/2} + r^{N/2-2})^{-1} x^b C_{ba} x^a u.
pub fn z_expression(b: &RMatrixBundle) -> Element {
    let n = b.ctx.n as i32;
    let k = Scalar::r_half(-n).add(&Scalar::r_half(n - 4)).inv().expect("nonzero").neg();
    let mut e = Element::zero();
    for bb in 0..b.ctx.n {
        for a in 0..b.ctx.n {
            let c = b.c_low.get(&[bb, a]);
            if !c.is_zero() {
                e.add_term(super::Word::from_letters(&[X(bb as u8 + 1), X(a as u8 + 1), V(-1)]), c.mul(&k));
            }
        }
    }
    e
}

fn build_t1(bd: &mut Builder) -> Result<(), PlaneError> {
    let b = bd.b;
    let n = bd.n;
    let ni = n as i32;
    let r = |k: i32| Scalar::r(k);
    let one = Scalar::one();
    let lam = Scalar::lambda();
    let u = V(-1);
    for i in 1..=n {
        let a = i as u8;
        let q = bd.qd(i)?;
        let qi = q.inv()?;
        bd.row("x v = q v x", el(&[X(a), V(1)], one.clone()).sub(&el(&[V(1), X(a)], q.clone())));
        bd.check("x u = q^-1 u x", el(&[X(a), u], one.clone()).sub(&el(&[u, X(a)], qi.clone())));
        bd.row("q x z = z x", el(&[X(a), Z], q.clone()).sub(&el(&[Z, X(a)], one.clone())));
        bd.check(
            "x du = q^-1 du x - lam/r dx u",
            el(&[X(a), DU], one.clone()).sub(&el(&[DU, X(a)], qi.clone())).add(&el(&[DX(a), u], lam.mul(&r(-1)))),
        );
        bd.row(
            "x dv = q dv x + lam r dx v",
            el(&[X(a), DV], one.clone()).sub(&el(&[DV, X(a)], q.clone())).sub(&el(&[DX(a), V(1)], lam.mul(&r(1)))),
        );
        bd.row("x dz = q^-1 dz x", el(&[X(a), DZ], one.clone()).sub(&el(&[DZ, X(a)], qi.clone())));
        bd.check("u dx = q/r^2 dx u", el(&[u, DX(a)], one.clone()).sub(&el(&[DX(a), u], q.mul(&r(-2)))));
        bd.row("v dx = r^2/q dx v", el(&[V(1), DX(a)], one.clone()).sub(&el(&[DX(a), V(1)], qi.mul(&r(2)))));
        bd.row("z dx = q dx z", el(&[Z, DX(a)], one.clone()).sub(&el(&[DX(a), Z], q.clone())));
        bd.check("dx du = -r^2/q du dx", el(&[DX(a), DU], one.clone()).add(&el(&[DU, DX(a)], qi.mul(&r(2)))));
        bd.row("dx dv = -q/r^2 dv dx", el(&[DX(a), DV], one.clone()).add(&el(&[DV, DX(a)], q.mul(&r(-2)))));
        bd.row("dx dz = -q^-1 dz dx", el(&[DX(a), DZ], one.clone()).add(&el(&[DZ, DX(a)], qi.clone())));
    }
    bd.row("z v = r^2 v z", el(&[Z, V(1)], one.clone()).sub(&el(&[V(1), Z], r(2))));
    bd.check("z u = r^-2 u z", el(&[Z, u], one.clone()).sub(&el(&[u, Z], r(-2))));

    // x·dx sector: the table row with P_0 d(x x) and its dz/dv form.
    let bt = Tensor::combine(&[(r(2), &b.ps), (Scalar::from_int(-1), &b.pa), (Scalar::from_int(-1), &b.p0)])?;
    let bt_inv = Tensor::combine(&[(r(-2), &b.ps), (Scalar::from_int(-1), &b.pa), (Scalar::from_int(-1), &b.p0)])?;
    let k3 = Scalar::r_half(ni - 4).mul(&one.sub(&r(2))).div(&one.sub(&r(ni)))?;
    for a in 0..n {
        for bb in 0..n {
            let mut e = el(&[X(a as u8 + 1), DX(bb as u8 + 1)], one.clone());
            e = e.sub(&bd.contract2(&bt, a, bb, DX, X));
            e = e.sub(&bd.contract2(&b.p0, a, bb, DX, X));
            e = e.sub(&bd.contract2(&b.p0, a, bb, X, DX));
            bd.push("x dx = (r^2 P_S - P_A - P_0) dx x + P_0 d(x x)", e, Role::ZFree, Source::Table);
        }
    }
    for a in 0..n {
        for bb in 0..n {
            let mut e = el(&[DX(a as u8 + 1), X(bb as u8 + 1)], one.clone());
            e = e.sub(&bd.contract2(&bt_inv, a, bb, X, DX));
            let cu = b.c_up.get(&[a, bb]);
            if !cu.is_zero() {
                let s = cu.mul(&k3);
                e = e.add(&el(&[V(1), DZ], s.clone())).add(&el(&[Z, DV], s));
            }
            bd.row("dx x = (r^-2 P_S - P_A - P_0) x dx - C k (v dz + z dv)", e);
        }
    }

    bd.check("u du = r^-2 du u", el(&[u, DU], one.clone()).sub(&el(&[DU, u], r(-2))));
    bd.check("u dv = r^-2 dv u", el(&[u, DV], one.clone()).sub(&el(&[DV, u], r(-2))));
    bd.check("u dz = dz u", el(&[u, DZ], one.clone()).sub(&el(&[DZ, u], one.clone())));
    bd.check("v du = r^2 du v", el(&[V(1), DU], one.clone()).sub(&el(&[DU, V(1)], r(2))));
    bd.row("v dv = r^2 dv v", el(&[V(1), DV], one.clone()).sub(&el(&[DV, V(1)], r(2))));
    bd.row("v dz = dz v", el(&[V(1), DZ], one.clone()).sub(&el(&[DZ, V(1)], one.clone())));
    bd.check(
        "z du = r^-2 du z + (r^-2 - 1) dz u",
        el(&[Z, DU], one.clone()).sub(&el(&[DU, Z], r(-2))).sub(&el(&[DZ, u], r(-2).sub(&one))),
    );
    bd.row(
        "z dv = r^2 dv z + (r^2 - 1) dz v",
        el(&[Z, DV], one.clone()).sub(&el(&[DV, Z], r(2))).sub(&el(&[DZ, V(1)], r(2).sub(&one))),
    );
    bd.row("z dz = r^-2 dz z", el(&[Z, DZ], one.clone()).sub(&el(&[DZ, Z], r(-2))));

    for a in 0..n {
        for bb in 0..n {
            let e = bd.contract2(&b.ps, a, bb, DX, DX);
            bd.row("P_S dx dx", e);
        }
    }
    bd.check("du du = 0", el(&[DU, DU], one.clone()));
    bd.row("dv dv = 0", el(&[DV, DV], one.clone()));
    bd.check("du dv = 0", el(&[DU, DV], one.clone()));
    bd.check("dv du = 0", el(&[DV, DU], one.clone()));
    bd.check("dz du = -du dz", el(&[DZ, DU], one.clone()).add(&el(&[DU, DZ], one.clone())));
    bd.row("dz dv = -dv dz", el(&[DZ, DV], one.clone()).add(&el(&[DV, DZ], one.clone())));
    bd.row("dz dz = 0", el(&[DZ, DZ], one.clone()));

    // Derivative rows.
    let extra = Element::one().sub(&el(&[V(1), PDdot], one.sub(&r(2))));
    bd.pdx(&bt, &extra, "pd x = delta + (r^2 P_S - P_A - P_0) x pd - (1 - r^2) delta v pdot");
    let kp = kappa_prime(n);
    for i in 0..n {
        let a = i as u8 + 1;
        let q = bd.qd(i + 1)?;
        let mut e_dot = el(&[PDdot, X(a)], one.clone()).sub(&el(&[X(a), PDdot], q.clone()));
        let mut e_circ = el(&[PDcirc, X(a)], one.clone()).sub(&el(&[X(a), PDcirc], q.inv()?));
        for c in 0..n {
            let cu = b.c_up.get(&[i, c]);
            if !cu.is_zero() {
                let s = cu.mul(&kp);
                e_dot = e_dot.add(&el(&[Z, PD(c as u8 + 1)], s.clone()));
                e_circ = e_circ.add(&el(&[V(1), PD(c as u8 + 1)], s));
            }
        }
        bd.row("pdot x = q x pdot - C k' z pd", e_dot);
        bd.row("pcirc x = q^-1 x pcirc - C k' v pd", e_circ);
        bd.row("pd v = r^2 q^-1 v pd", el(&[PD(a), V(1)], one.clone()).sub(&el(&[V(1), PD(a)], r(2).div(&q)?)));
        bd.row("pd z = q z pd", el(&[PD(a), Z], one.clone()).sub(&el(&[Z, PD(a)], q.clone())));
    }
    bd.row("pdot v = r^2 v pdot + 1", el(&[PDdot, V(1)], one.clone()).sub(&el(&[V(1), PDdot], r(2))).sub(&Element::one()));
    bd.row("pcirc v = v pcirc", el(&[PDcirc, V(1)], one.clone()).sub(&el(&[V(1), PDcirc], one.clone())));
    bd.row("pdot z = r^2 z pdot", el(&[PDdot, Z], one.clone()).sub(&el(&[Z, PDdot], r(2))));
    bd.row(
        "pcirc z = r^-2 z pcirc + 1 + (r^2 - 1) v pdot",
        el(&[PDcirc, Z], one.clone())
            .sub(&el(&[Z, PDcirc], r(-2)))
            .sub(&Element::one())
            .sub(&el(&[V(1), PDdot], r(2).sub(&one))),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t2_contains_xv_row() {
        let b = RMatrixBundle::build(&ParameterContext::multi(4)).unwrap();
        let rs = build_relations(&b, Table::T2, None).unwrap();
        let q = b.ctx.qdot(2).unwrap();
        let want = el(&[X(2), V(1)], Scalar::one()).sub(&el(&[V(1), X(2)], q));
        assert!(rs.find("x v = q v x").any(|r| r.elem == want));
    }

    #[test]
    fn t1_contains_zdz_row() {
        let b = RMatrixBundle::build(&ParameterContext::multi(4)).unwrap();
        let rs = build_relations(&b, Table::T1, None).unwrap();
        let want = el(&[Z, DZ], Scalar::one()).sub(&el(&[DZ, Z], Scalar::r(-2)));
        assert!(rs.find("z dz = r^-2 dz z").any(|r| r.elem == want));
    }

    #[test]
    fn unknown_table_tag() {
        assert!("T4".parse::<Table>().is_err());
    }
}
