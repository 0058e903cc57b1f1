//! The q-Lie algebra of translations and dilatations, its Λ tensor and the
//! left-invariant one-forms ω^a, ω^•, ω^◦.
//!
//! χ and ω words live in their own alphabet (indices a, •, ◦); they never
//! meet the coordinate letters of the plane tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::ops::DIdx;
use super::verify::eta_circ;
use crate::planealg::{Element, Letter, PlaneError};
use crate::report::VerificationReport;
use crate::rmatrix::RMatrixBundle;
use crate::scalar::{Point, Scalar, ScalarError};
use crate::tensor::{rank_exact, Tensor};

pub type QWord = Vec<DIdx>;

/// Linear combination of χ (or ω) words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Comb {
    terms: BTreeMap<QWord, Scalar>,
}

impl Comb {
    pub fn zero() -> Self {
        Comb::default()
    }
    pub fn word(w: &[DIdx], s: Scalar) -> Self {
        let mut c = Comb::zero();
        c.add_term(w.to_vec(), s);
        c
    }
    pub fn add_term(&mut self, w: QWord, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(t) => {
                *t = t.add(&s);
                if t.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, s);
            }
        }
    }
    pub fn add_scaled(&mut self, o: &Comb, s: &Scalar) {
        for (w, c) in &o.terms {
            self.add_term(w.clone(), c.mul(s));
        }
    }
    pub fn add(&self, o: &Comb) -> Comb {
        let mut out = self.clone();
        out.add_scaled(o, &Scalar::one());
        out
    }
    pub fn sub(&self, o: &Comb) -> Comb {
        let mut out = self.clone();
        out.add_scaled(o, &Scalar::from_int(-1));
        out
    }
    pub fn scale(&self, s: &Scalar) -> Comb {
        let mut out = Comb::zero();
        out.add_scaled(self, s);
        out
    }
    /// Concatenation product.
    pub fn mul(&self, o: &Comb) -> Comb {
        let mut out = Comb::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend(w2.iter().copied());
                out.add_term(w, c1.mul(c2));
            }
        }
        out
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&QWord, &Scalar)> {
        self.terms.iter()
    }
    pub fn coeff(&self, w: &[DIdx]) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Result<Scalar, ScalarError>) -> Result<Comb, ScalarError> {
        let mut out = Comb::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Text form, e.g. `chi1*chidot - r^-2 chidot*chi1`.
    pub fn render(&self, stem: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let word: Vec<String> = w.iter().map(|l| letter_name(stem, *l)).collect();
            let cs = c.to_string();
            if i > 0 {
                s.push_str(" + ");
            }
            if w.is_empty() {
                write!(s, "{}", cs).unwrap();
            } else if c.is_one() {
                s.push_str(&word.join("*"));
            } else {
                write!(s, "({})*{}", cs, word.join("*")).unwrap();
            }
        }
        s
    }
}

fn letter_name(stem: &str, l: DIdx) -> String {
    match l {
        DIdx::Coord(a) => format!("{}{}", stem, a),
        DIdx::Dot => format!("{}dot", stem),
        DIdx::Circ => format!("{}circ", stem),
    }
}

/// Index position in the restricted set {1..N, •, ◦}.
fn pos(i: DIdx, n: usize) -> usize {
    match i {
        DIdx::Coord(a) => a as usize - 1,
        DIdx::Dot => n,
        DIdx::Circ => n + 1,
    }
}

fn idx(p: usize, n: usize) -> DIdx {
    if p < n {
        DIdx::Coord(p as u8 + 1)
    } else if p == n {
        DIdx::Dot
    } else {
        DIdx::Circ
    }
}

/// Homogeneity degree of a word: the torus charge of the coordinate
/// indices (a and a' carry opposite charge) and the x-degree, with ◦
/// counting twice. Λ, the structure constants and every relation
/// respect it.
fn grade(w: &[DIdx], n: usize) -> (Vec<i32>, i32) {
    let mut ch = vec![0; n / 2];
    let mut deg = 0;
    for l in w {
        match l {
            DIdx::Coord(a) => {
                deg += 1;
                let a = *a as usize;
                let ap = n + 1 - a;
                if a < ap {
                    ch[a - 1] += 1;
                } else if a > ap {
                    ch[ap - 1] -= 1;
                }
            }
            DIdx::Dot => {}
            DIdx::Circ => deg += 2,
        }
    }
    (ch, deg)
}

/// Whether `target` lies in the span of `gens`. Only generators in the
/// target's grade can contribute.
fn in_span(gens: &[&Comb], target: &Comb, n: usize) -> bool {
    if target.is_zero() {
        return true;
    }
    let g = grade(target.terms.keys().next().unwrap(), n);
    let homog = target.terms.keys().all(|w| grade(w, n) == g);
    let chosen: Vec<&Comb> = gens
        .iter()
        .copied()
        .filter(|c| !homog || c.terms.keys().any(|w| grade(w, n) == g))
        .collect();
    let cols: BTreeSet<&QWord> = chosen.iter().flat_map(|c| c.terms.keys()).chain(target.terms.keys()).collect();
    let row = |c: &Comb| cols.iter().map(|w| c.coeff(w)).collect::<Vec<Scalar>>();
    let mut m: Vec<Vec<Scalar>> = chosen.iter().map(|c| row(c)).collect();
    let base = rank_exact(&m);
    m.push(row(target));
    rank_exact(&m) == base
}

/// Tables of the q-Lie sector, populated verbatim.
#[derive(Clone, Debug)]
pub struct QLieData {
    pub bundle: RMatrixBundle,
    /// `[i,j,k,l]` = Λ^{ij}_{kl} over positions (1..N, •, ◦).
    pub lambda: Tensor,
    /// `[j,k,i]` = C_{jk}^i.
    pub cstruct: Tensor,
    /// χ relations as printed (each element equals zero).
    pub qlie: Vec<(String, Comb)>,
    /// The adjoined constraint χ_◦ + λχ_•χ_◦ = λ k χ_a C^{ba} χ_b.
    pub chibuci: Comb,
    /// ω∧ω relations, wedge products written as words.
    pub omega: Vec<(String, Comb)>,
    /// Right sides of the Cartan–Maurer equations.
    pub cartan_maurer: Vec<(DIdx, Comb)>,
    /// χ* per generator; empty without a real form.
    pub chi_star: Vec<(DIdx, Comb)>,
    /// ω* per generator; empty without a real form.
    pub omega_star: Vec<(DIdx, Comb)>,
    /// Right-invariant forms in the plane alphabet.
    pub eta: Vec<(DIdx, Element)>,
}

impl QLieData {
    pub fn n(&self) -> usize {
        self.bundle.ctx.n
    }

    pub fn indices(&self) -> Vec<DIdx> {
        (0..self.n() + 2).map(|p| idx(p, self.n())).collect()
    }

    fn check(&self, i: DIdx) -> Result<usize, ScalarError> {
        match i {
            DIdx::Coord(a) if a == 0 || a as usize > self.n() => {
                Err(ScalarError::Domain(format!("index {} outside the restricted set 1..{}, dot, circ", a, self.n())))
            }
            _ => Ok(pos(i, self.n())),
        }
    }

    /// Λ^{ij}_{kl}.
    pub fn lambda_at(&self, i: DIdx, j: DIdx, k: DIdx, l: DIdx) -> Result<Scalar, PlaneError> {
        Ok(self.lambda.get(&[self.check(i)?, self.check(j)?, self.check(k)?, self.check(l)?]).clone())
    }

    /// C_{jk}^i.
    pub fn structure_at(&self, j: DIdx, k: DIdx, i: DIdx) -> Result<Scalar, PlaneError> {
        Ok(self.cstruct.get(&[self.check(j)?, self.check(k)?, self.check(i)?]).clone())
    }

    /// χ_iχ_j − Λ^{kl}_{ij}χ_kχ_l − C_{ij}^kχ_k.
    pub fn bico(&self, i: DIdx, j: DIdx) -> Result<Comb, PlaneError> {
        let n = self.n();
        let (pi, pj) = (self.check(i)?, self.check(j)?);
        let mut c = Comb::word(&[i, j], Scalar::one());
        for k in 0..n + 2 {
            for l in 0..n + 2 {
                let s = self.lambda.get(&[k, l, pi, pj]);
                c.add_term(vec![idx(k, n), idx(l, n)], s.neg());
            }
            c.add_term(vec![idx(k, n)], self.cstruct.get(&[pi, pj, k]).neg());
        }
        Ok(c)
    }

    /// Image of e_{ij} under 1 − Λ; ω^i∧ω^j is zero exactly when this is.
    pub fn wedge(&self, c: &Comb) -> Comb {
        let n = self.n();
        let mut out = Comb::zero();
        for (w, s) in c.terms() {
            out.add_term(w.clone(), s.clone());
            let (pi, pj) = (pos(w[0], n), pos(w[1], n));
            for a in 0..n + 2 {
                for b in 0..n + 2 {
                    let l = self.lambda.get(&[pi, pj, a, b]);
                    out.add_term(vec![idx(a, n), idx(b, n)], l.mul(s).neg());
                }
            }
        }
        out
    }
}

/// build_qlie.
pub fn build_qlie(b: &RMatrixBundle) -> Result<QLieData, PlaneError> {
    let ctx = &b.ctx;
    let n = ctx.n;
    let ni = n as i32;
    let (dt, ci) = (n, n + 1);
    let np = n + 2;
    let lam = Scalar::lambda();
    let q: Vec<Scalar> = (1..=n).map(|a| ctx.qdot(a)).collect::<Result<_, _>>()?;
    let qinv: Vec<Scalar> = q.iter().map(|s| s.inv()).collect::<Result<_, _>>()?;
    // q_{•a} = r²/q_{a•}; the ω∧ω and χχ rows weight with this one.
    let qbu: Vec<Scalar> = qinv.iter().map(|s| s.mul(&Scalar::r(2))).collect();
    // r^{-N/2-1}
    let rn = Scalar::r_half(-ni - 2);

    let mut lm = Tensor::zeros(vec![np; 4], vec![true, true, false, false]);
    for a in 0..n {
        for c in 0..n {
            let qc = q[a].mul(&qinv[c]).mul(&Scalar::r(-1));
            for d in 0..n {
                for bb in 0..n {
                    // R^{ad}_{bc} = R̂^{da}_{bc}
                    let rr = b.rhat.get(&[d, a, bb, c]);
                    if !rr.is_zero() {
                        lm.set(&[a, d, c, bb], qc.mul(rr));
                    }
                }
            }
        }
    }
    for c in 0..n {
        for bb in 0..n {
            let cl = b.c_low.get(&[bb, c]);
            if !cl.is_zero() {
                lm.set(&[dt, ci, c, bb], rn.mul(&qinv[c]).mul(&lam).mul(cl).neg());
            }
            let cu = b.c_up.get(&[bb, c]);
            if !cu.is_zero() {
                // Λ^{ad}_{•◦} with d = bb, a = c
                lm.set(&[c, bb, dt, ci], q[c].mul(&rn).mul(&lam).mul(cu).neg());
            }
        }
    }
    for a in 0..n {
        lm.set(&[dt, a, a, dt], Scalar::r(-2));
        lm.set(&[a, ci, a, ci], Scalar::r(-1).mul(&lam));
        lm.set(&[ci, a, a, ci], Scalar::r(2).mul(&qinv[a]).mul(&qinv[a]));
        lm.set(&[a, dt, dt, a], Scalar::one());
        lm.set(&[dt, a, dt, a], Scalar::r(-1).mul(&lam));
        lm.set(&[a, ci, ci, a], Scalar::r(-4).mul(&q[a]).mul(&q[a]));
    }
    lm.set(&[dt, dt, dt, dt], Scalar::one());
    lm.set(&[dt, ci, dt, ci], lam.mul(&Scalar::r(-1)).mul(&Scalar::one().sub(&Scalar::r(-ni))));
    lm.set(&[ci, dt, dt, ci], Scalar::one());
    lm.set(&[dt, ci, ci, dt], Scalar::r(-4));
    lm.set(&[ci, ci, ci, ci], Scalar::one());

    let mut cs = Tensor::zeros(vec![np; 3], vec![false, false, true]);
    for a in 0..n {
        for bb in 0..n {
            let cl = b.c_low.get(&[bb, a]);
            if !cl.is_zero() {
                cs.set(&[a, bb, ci], qinv[a].mul(&rn).mul(cl).neg());
            }
        }
        cs.set(&[a, dt, a], Scalar::r(-1).neg());
        cs.set(&[dt, a, a], Scalar::r(-1));
    }
    cs.set(&[ci, dt, ci], Scalar::r(-3).mul(&Scalar::one().add(&Scalar::r(2))).neg());
    cs.set(&[dt, ci, ci], Scalar::r(-1).mul(&Scalar::one().sub(&Scalar::r(-ni))));

    use DIdx::{Circ, Coord, Dot};
    let x = |a: usize| Coord(a as u8 + 1);
    let one = Scalar::one;

    let mut qlie = Vec::new();
    for bb in 0..n {
        let mut c = Comb::word(&[Circ, x(bb)], one());
        c.add_term(vec![x(bb), Circ], q[bb].mul(&q[bb]).mul(&Scalar::r(-4)).neg());
        qlie.push((format!("chicirc chi{} = q^2 r^-4 chi{} chicirc", bb + 1, bb + 1), c));
    }
    for c in 0..n {
        let mut e = Comb::word(&[x(c), Dot], one());
        e.add_term(vec![Dot, x(c)], Scalar::r(-2).neg());
        e.add_term(vec![x(c)], Scalar::r(-1));
        qlie.push((format!("chi{} chidot - r^-2 chidot chi{} = -r^-1 chi{}", c + 1, c + 1, c + 1), e));
    }
    {
        let mut e = Comb::word(&[Circ, Dot], one());
        e.add_term(vec![Dot, Circ], Scalar::r(-4).neg());
        e.add_term(vec![Circ], Scalar::r(-3).mul(&Scalar::one().add(&Scalar::r(2))));
        qlie.push(("chicirc chidot - r^-4 chidot chicirc = -(1 + r^2) r^-3 chicirc".into(), e));
    }
    for c in 0..n {
        for d in 0..n {
            let mut e = Comb::zero();
            for a in 0..n {
                for bb in 0..n {
                    let p = b.pa.get(&[a, bb, c, d]);
                    if !p.is_zero() {
                        e.add_term(vec![x(bb), x(a)], qbu[a].mul(p));
                    }
                }
            }
            if !e.is_zero() {
                qlie.push((format!("q P_A chi chi = 0 ({},{})", c + 1, d + 1), e));
            }
        }
    }

    // χ_◦ + λχ_•χ_◦ = λ (−q_a r^{-N/2})/(r^{-2} + r^{-N}) χ_a C^{ba} χ_b
    let kc = Scalar::r_half(-ni).neg().mul(&lam).div(&Scalar::r(-2).add(&Scalar::r(-ni)))?;
    let mut chibuci = Comb::word(&[Circ], one());
    chibuci.add_term(vec![Dot, Circ], lam.clone());
    for a in 0..n {
        for bb in 0..n {
            let cu = b.c_up.get(&[bb, a]);
            if !cu.is_zero() {
                chibuci.add_term(vec![x(a), x(bb)], kc.mul(&q[a]).mul(cu).neg());
            }
        }
    }

    let mut omega = Vec::new();
    for a in 0..n {
        for bb in 0..n {
            let mut e = Comb::zero();
            for c in 0..n {
                for d in 0..n {
                    let p = b.ps.get(&[a, bb, c, d]);
                    if !p.is_zero() {
                        e.add_term(vec![x(d), x(c)], qbu[c].inv()?.mul(p));
                    }
                }
            }
            if !e.is_zero() {
                omega.push((format!("P_S om om = 0 ({},{})", a + 1, bb + 1), e));
            }
        }
    }
    for a in 0..n {
        let mut e = Comb::word(&[x(a), Dot], one());
        e.add_term(vec![Dot, x(a)], Scalar::r(2));
        omega.push((format!("om{} omdot = -r^2 omdot om{}", a + 1, a + 1), e));
        let mut e = Comb::word(&[x(a), Circ], one());
        e.add_term(vec![Circ, x(a)], Scalar::r(-4).mul(&q[a]).mul(&q[a]));
        omega.push((format!("om{} omcirc = -r^-4 q^2 omcirc om{}", a + 1, a + 1), e));
    }
    omega.push(("omdot omdot = 0".into(), Comb::word(&[Dot, Dot], one())));
    omega.push(("omcirc omcirc = 0".into(), Comb::word(&[Circ, Circ], one())));
    {
        let k = lam.mul(&rn).div(&Scalar::one().sub(&Scalar::r(-ni)))?;
        let mut e = Comb::word(&[Dot, Circ], one());
        e.add_term(vec![Circ, Dot], Scalar::r(-4));
        for a in 0..n {
            for bb in 0..n {
                let cl = b.c_low.get(&[bb, a]);
                if !cl.is_zero() {
                    e.add_term(vec![x(a), x(bb)], k.mul(cl).mul(&qinv[a]).neg());
                }
            }
        }
        omega.push(("omdot omcirc = -r^-4 omcirc omdot + k C om om".into(), e));
    }

    let mut cartan_maurer = Vec::new();
    for a in 0..n {
        cartan_maurer.push((x(a), Comb::word(&[x(a), Dot], Scalar::r(-1))));
    }
    cartan_maurer.push((Dot, Comb::zero()));
    {
        let k = Scalar::r(3).div(&Scalar::r_half(ni).sub(&Scalar::r_half(-ni)))?;
        let mut e = Comb::word(&[Dot, Circ], Scalar::r(1).mul(&Scalar::one().add(&Scalar::r(2))).neg());
        for a in 0..n {
            for bb in 0..n {
                let cl = b.c_low.get(&[bb, a]);
                if !cl.is_zero() {
                    e.add_term(vec![x(a), x(bb)], k.mul(cl).mul(&qinv[a]));
                }
            }
        }
        cartan_maurer.push((Circ, e));
    }

    let (mut chi_star, mut omega_star) = (Vec::new(), Vec::new());
    if ctx.real_form {
        for a in 0..n {
            let sw = ctx.dswap(a + 1) - 1;
            let qb = ctx.conj(&q[a])?;
            let c = Scalar::r(-ni).mul(&qb).mul(&b.dvec[a]).neg();
            chi_star.push((x(a), Comb::word(&[x(sw)], c)));
            let c = qb.inv()?.mul(&Scalar::r(ni)).mul(&b.dvec[a].inv()?);
            omega_star.push((x(a), Comb::word(&[x(sw)], c)));
        }
        chi_star.push((Dot, Comb::word(&[Dot], Scalar::from_int(-1))));
        chi_star.push((Circ, Comb::word(&[Circ], Scalar::r(-2 * ni - 2).neg())));
        omega_star.push((Dot, Comb::word(&[Dot], one())));
        omega_star.push((Circ, Comb::word(&[Circ], Scalar::r(2 * ni + 2))));
    }

    let mut eta = Vec::new();
    for a in 1..=n as u8 {
        eta.push((Coord(a), Element::letters(&[Letter::DX(a), Letter::V(-1)], Scalar::r(-1).neg())));
    }
    eta.push((Dot, Element::letters(&[Letter::DV, Letter::V(-1)], Scalar::r(-1).neg())));
    eta.push((Circ, eta_circ(b)?));

    Ok(QLieData {
        bundle: b.clone(),
        lambda: lm,
        cstruct: cs,
        qlie,
        chibuci,
        omega,
        cartan_maurer,
        chi_star,
        omega_star,
        eta,
    })
}

/// Antilinear, antimultiplicative extension of a generator map.
fn star(c: &Comb, images: &[(DIdx, Comb)], data: &QLieData) -> Result<Comb, ScalarError> {
    let map: HashMap<DIdx, &Comb> = images.iter().map(|(i, e)| (*i, e)).collect();
    let mut out = Comb::zero();
    for (w, s) in c.terms() {
        let mut t = Comb::word(&[], data.bundle.ctx.conj(s)?);
        for l in w.iter().rev() {
            t = t.mul(map[l]);
        }
        out = out.add(&t);
    }
    Ok(out)
}

/// Λ₁₂Λ₂₃Λ₁₂ − Λ₂₃Λ₁₂Λ₂₃ on every basis vector of V⊗V⊗V; returns the
/// first nonzero residual.
pub fn lambda_braid_residual(lambda: &Tensor, n: usize) -> Option<String> {
    let np = n + 2;
    let mut cols: Vec<Vec<(usize, usize, Scalar)>> = vec![Vec::new(); np * np];
    for i in 0..np {
        for j in 0..np {
            for k in 0..np {
                for l in 0..np {
                    let s = lambda.get(&[i, j, k, l]);
                    if !s.is_zero() {
                        cols[k * np + l].push((i, j, s.clone()));
                    }
                }
            }
        }
    }
    let apply = |v: &BTreeMap<[usize; 3], Scalar>, first: bool| {
        let mut out: BTreeMap<[usize; 3], Scalar> = BTreeMap::new();
        for (w, s) in v {
            let (k, l) = if first { (w[0], w[1]) } else { (w[1], w[2]) };
            for (i, j, t) in &cols[k * np + l] {
                let key = if first { [*i, *j, w[2]] } else { [w[0], *i, *j] };
                let e = out.entry(key).or_insert_with(Scalar::zero);
                *e = e.add(&s.mul(t));
            }
        }
        out.retain(|_, s| !s.is_zero());
        out
    };
    let basis: Vec<[usize; 3]> = (0..np * np * np).map(|x| [x / (np * np), (x / np) % np, x % np]).collect();
    basis.par_iter().find_map_first(|w| {
        let v: BTreeMap<[usize; 3], Scalar> = [(*w, Scalar::one())].into_iter().collect();
        let lhs = apply(&apply(&apply(&v, true), false), true);
        let rhs = apply(&apply(&apply(&v, false), true), false);
        let mut diff = lhs;
        for (k, s) in rhs {
            let e = diff.entry(k).or_insert_with(Scalar::zero);
            *e = e.sub(&s);
        }
        diff.retain(|_, s| !s.is_zero());
        diff.into_iter().next().map(|(k, s)| {
            let name = |p: &[usize]| p.iter().map(|&x| letter_name("", idx(x, n))).collect::<Vec<_>>().join(",");
            format!("on e({}) component ({}) = {}", name(w), name(&k), s)
        })
    })
}

/// Exterior derivative on ω words via the Cartan–Maurer right sides.
fn d_omega(c: &Comb, cm: &HashMap<DIdx, Comb>) -> Comb {
    let mut out = Comb::zero();
    for (w, s) in c.terms() {
        for (p, l) in w.iter().enumerate() {
            let sign = if p % 2 == 0 { Scalar::one() } else { Scalar::from_int(-1) };
            let left = Comb::word(&w[..p], s.mul(&sign));
            let right = Comb::word(&w[p + 1..], Scalar::one());
            out = out.add(&left.mul(&cm[l]).mul(&right));
        }
    }
    out
}

/// Rewrite rules oriented by deglex with 1 < … < N < • < ◦.
struct ChiRules {
    rules: HashMap<(DIdx, DIdx), Comb>,
}

impl ChiRules {
    fn new(rels: &[&Comb]) -> Result<Self, PlaneError> {
        let key = |w: &QWord| (std::cmp::Reverse(w.len()), std::cmp::Reverse(w.clone()));
        let mut rows: Vec<Comb> = rels.iter().map(|c| (*c).clone()).filter(|c| !c.is_zero()).collect();
        let mut pivots: Vec<(QWord, Comb)> = Vec::new();
        while let Some(mut row) = rows.pop() {
            for (pw, pr) in &pivots {
                let c = row.coeff(pw);
                if !c.is_zero() {
                    row.add_scaled(pr, &c.neg());
                }
            }
            let Some(lead) = row.terms.keys().min_by_key(|w| key(w)).cloned() else { continue };
            let lc = row.coeff(&lead).inv()?;
            let row = row.scale(&lc);
            for (_, pr) in pivots.iter_mut() {
                let c = pr.coeff(&lead);
                if !c.is_zero() {
                    pr.add_scaled(&row, &c.neg());
                }
            }
            pivots.push((lead, row));
        }
        let mut rules = HashMap::new();
        for (w, row) in pivots {
            if w.len() != 2 {
                return Err(PlaneError::Inconsistent(format!("relation with leading word of length {}", w.len())));
            }
            let mut rhs = row.clone();
            rhs.add_term(w.clone(), Scalar::from_int(-1));
            rules.insert((w[0], w[1]), rhs.scale(&Scalar::from_int(-1)));
        }
        Ok(ChiRules { rules })
    }

    fn rewrite_at(&self, w: &[DIdx], p: usize) -> Option<Comb> {
        let r = self.rules.get(&(w[p], w[p + 1]))?;
        Some(Comb::word(&w[..p], Scalar::one()).mul(r).mul(&Comb::word(&w[p + 2..], Scalar::one())))
    }

    fn normal_form(&self, c: &Comb) -> Comb {
        let mut todo = c.clone();
        let mut out = Comb::zero();
        while let Some((w, s)) = todo.terms.pop_first() {
            match (0..w.len().saturating_sub(1)).find_map(|p| self.rewrite_at(&w, p)) {
                Some(e) => todo.add_scaled(&e, &s),
                None => out.add_term(w, s),
            }
        }
        out
    }

    /// Words of length 3 whose one-step reductions disagree after normal
    /// ordering.
    fn divergent(&self, words: &[QWord]) -> Vec<(QWord, Comb)> {
        words
            .par_iter()
            .filter_map(|w| {
                let nfs: Vec<Comb> = (0..w.len() - 1)
                    .filter_map(|p| self.rewrite_at(w, p))
                    .map(|e| self.normal_form(&e))
                    .collect();
                nfs.iter().skip(1).map(|e| e.sub(&nfs[0])).find(|d| !d.is_zero()).map(|d| (w.clone(), d))
            })
            .collect()
    }
}

fn span_failures(gens: &[&Comb], targets: &[(String, Comb)], n: usize) -> Result<(), String> {
    let bad: Vec<&String> = targets.par_iter().filter(|(_, t)| !in_span(gens, t, n)).map(|(s, _)| s).collect::<Vec<_>>();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(format!("{} outside: {}", bad.len(), bad.iter().take(4).map(|s| s.as_str()).collect::<Vec<_>>().join("; ")))
    }
}

/// verify_qlie.
pub fn verify_qlie(data: &QLieData) -> Result<VerificationReport, PlaneError> {
    let n = data.n();
    let ix = data.indices();
    let mut rep = VerificationReport::new(format!("q-Lie sector N={}", n));

    // (i) the bicovariant bracket against the printed relations
    let mut bico = Vec::new();
    for &i in &ix {
        for &j in &ix {
            let e = data.bico(i, j)?;
            bico.push((format!("({},{})", letter_name("", i), letter_name("", j)), e));
        }
    }
    let bico_refs: Vec<&Comb> = bico.iter().map(|(_, c)| c).collect();
    let listed: Vec<&Comb> = data.qlie.iter().map(|(_, c)| c).collect();
    let mut with_constraint = listed.clone();
    with_constraint.push(&data.chibuci);
    rep.check("printed q-Lie relations follow from the bracket", span_failures(&bico_refs, &data.qlie, n));
    rep.check("bracket rows lie in the span of the printed relations and the length constraint", span_failures(&with_constraint, &bico, n));
    let outside: Vec<&String> = bico.iter().filter(|(_, c)| !in_span(&listed, c, n)).map(|(s, _)| s).collect();
    rep.note(format!("bracket rows needing the length constraint: {}", outside.len()));
    rep.check(
        "length constraint follows from the bracket",
        if in_span(&bico_refs, &data.chibuci, n) { Ok(()) } else { Err(data.chibuci.render("chi")) },
    );

    // (ii) braid equation
    rep.check("Lambda braid equation", lambda_braid_residual(&data.lambda, n).map_or(Ok(()), Err));

    // (iii) ω relations from the exterior product
    let bad: Vec<String> = data
        .omega
        .iter()
        .filter_map(|(s, c)| {
            let w = data.wedge(c);
            (!w.is_zero()).then(|| format!("{}: {}", s, w.render("om")))
        })
        .collect();
    rep.check("omega relations lie in the kernel of 1 - Lambda", if bad.is_empty() { Ok(()) } else { Err(bad.join("; ")) });
    let np = n + 2;
    let all_pairs: Vec<QWord> = (0..np * np).map(|x| vec![idx(x / np, n), idx(x % np, n)]).collect();
    let images: Vec<Comb> = all_pairs.iter().map(|w| data.wedge(&Comb::word(w, Scalar::one()))).collect();
    let rank_of = |cs: &[&Comb]| {
        let cols: BTreeSet<&QWord> = cs.iter().flat_map(|c| c.terms.keys()).collect();
        let m: Vec<Vec<Scalar>> = cs.iter().map(|c| cols.iter().map(|w| c.coeff(w)).collect()).collect();
        rank_exact(&m)
    };
    let kernel_dim = np * np - rank_of(&images.iter().collect::<Vec<_>>());
    let omega_refs: Vec<&Comb> = data.omega.iter().map(|(_, c)| c).collect();
    let listed_rank = rank_of(&omega_refs);
    rep.check(
        "omega relations span the kernel",
        if listed_rank == kernel_dim { Ok(()) } else { Err(format!("rank {} vs kernel {}", listed_rank, kernel_dim)) },
    );

    // (iv) Cartan–Maurer
    let cm: HashMap<DIdx, Comb> = data.cartan_maurer.iter().cloned().collect();
    let tau = Comb::word(&[DIdx::Dot], Scalar::one());
    let lam_inv = Scalar::lambda().inv()?;
    let bad: Vec<String> = data
        .cartan_maurer
        .iter()
        .filter_map(|(i, rhs)| {
            let oi = Comb::word(&[*i], Scalar::one());
            let gen = tau.mul(&oi).add(&oi.mul(&tau)).scale(&lam_inv);
            let diff = rhs.sub(&gen);
            (!in_span(&omega_refs, &diff, n)).then(|| letter_name("dom", *i))
        })
        .collect();
    rep.check("Cartan-Maurer right sides equal (tau om + om tau)/lambda", if bad.is_empty() { Ok(()) } else { Err(bad.join(", ")) });
    let mut cubic: Vec<Comb> = Vec::new();
    for rel in &omega_refs {
        for &l in &ix {
            let o = Comb::word(&[l], Scalar::one());
            cubic.push(rel.mul(&o));
            cubic.push(o.mul(rel));
        }
    }
    let cubic_refs: Vec<&Comb> = cubic.iter().collect();
    let bad: Vec<String> = data
        .cartan_maurer
        .iter()
        .filter_map(|(i, rhs)| {
            let dd = d_omega(rhs, &cm);
            (!in_span(&cubic_refs, &dd, n)).then(|| format!("d d om{}: {}", letter_name("", *i), dd.render("om")))
        })
        .collect();
    rep.check("Cartan-Maurer nilpotency", if bad.is_empty() { Ok(()) } else { Err(bad.join("; ")) });

    // (v) conjugations
    if data.chi_star.is_empty() {
        rep.note("no real form: conjugation checks skipped");
    } else {
        let invol = |images: &[(DIdx, Comb)]| -> Result<Result<(), String>, ScalarError> {
            for (i, _) in images {
                let g = Comb::word(&[*i], Scalar::one());
                let twice = star(&star(&g, images, data)?, images, data)?;
                if twice != g {
                    return Ok(Err(format!("{} -> {}", letter_name("", *i), twice.render(""))));
                }
            }
            Ok(Ok(()))
        };
        rep.check("chi star is involutive", invol(&data.chi_star)?);
        rep.check("omega star is involutive", invol(&data.omega_star)?);
        let chi_rels: Vec<(String, Comb)> = data
            .qlie
            .iter()
            .chain(std::iter::once(&("length constraint".to_string(), data.chibuci.clone())))
            .map(|(s, c)| Ok((s.clone(), star(c, &data.chi_star, data)?)))
            .collect::<Result<_, ScalarError>>()?;
        rep.check("chi star maps the q-Lie relations into their span", span_failures(&with_constraint, &chi_rels, n));
        let mut bad = Vec::new();
        for (s, c) in &data.omega {
            let img = star(c, &data.omega_star, data)?;
            if !data.wedge(&img).is_zero() {
                bad.push(s.clone());
            }
        }
        rep.check("omega star maps the omega relations into the kernel", if bad.is_empty() { Ok(()) } else { Err(bad.join("; ")) });
    }

    // (vi) the length constraint as an adjoined rule
    let rules = ChiRules::new(&with_constraint)?;
    let words: Vec<QWord> = (0..np * np * np)
        .map(|x| vec![idx(x / (np * np), n), idx((x / np) % np, n), idx(x % np, n)])
        .filter(|w| w.contains(&DIdx::Circ))
        .collect();
    let div = rules.divergent(&words);
    rep.check(
        "length constraint consistency on chi words with chicirc",
        match div.first() {
            None => Ok(()),
            Some((w, d)) => Err(format!(
                "{} of {} words diverge, first {}: {}",
                div.len(),
                words.len(),
                w.iter().map(|l| letter_name("chi", *l)).collect::<Vec<_>>().join("*"),
                d.render("chi")
            )),
        },
    );
    Ok(rep)
}

/// Braid residual of Λ evaluated at a numeric point.
pub fn lambda_braid_at(data: &QLieData, pt: &Point) -> Result<Option<String>, PlaneError> {
    Ok(lambda_braid_residual(&data.lambda.eval(pt)?, data.n()))
}
