//! Compilation of relation sets into quadratic rewrite systems, normal
//! ordering and the diamond check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::RwLock;

use rayon::prelude::*;

use super::element::{Element, Letter, Word};
use super::relations::{Relation, RelationSet, Role, Table};
use super::PlaneError;
use crate::report::VerificationReport;
use crate::scalar::{ParameterContext, Scalar};

/// Which generators stand leftmost in a normal word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    /// [dz][du][dv][dx][z][v][x][∂][∂•][∂◦].
    FormsLeft,
    /// Coordinates left, forms rightmost.
    FormsRight,
}

impl Order {
    pub fn rank(&self, l: Letter) -> (u8, i32) {
        use Letter::*;
        let (class, sub) = match l {
            DZ => (0, 0),
            DU => (1, 0),
            DV => (2, 0),
            DX(a) | RDX(a) => (3, a as i32),
            Z => (4, 0),
            V(k) => (5, k),
            X(a) | RX(a) => (6, a as i32),
            PD(a) | RP(a) => (7, a as i32),
            PDdot => (8, 0),
            PDcirc => (9, 0),
        };
        match self {
            Order::FormsLeft => (class, sub),
            Order::FormsRight if class <= 6 => (6 - class, sub),
            Order::FormsRight => (class, sub),
        }
    }
    /// Degree-lexicographic sort key.
    pub fn key(&self, w: &Word) -> Key {
        Key { len: w.len(), ranks: w.letters().iter().map(|l| self.rank(*l)).collect(), word: w.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Key {
    len: usize,
    ranks: Vec<(u8, i32)>,
    word: Word,
}

impl Key {
    pub fn word(&self) -> &Word {
        &self.word
    }
}

/// Options for compiling a relation set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Every oriented row of the table.
    Full,
    /// The rows free of z and dz, with the P_0 d(x x) form of the x·dx row.
    ZFree,
    /// Rows free of derivatives.
    NoDerivatives,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Element,
}

/// Immutable compiled rule set; the memo table only caches results.
#[derive(Debug)]
pub struct RewriteSystem {
    pub ctx: ParameterContext,
    pub table: Table,
    pub order: Order,
    pub c: Scalar,
    rules: HashMap<(Letter, Letter), Element>,
    /// (α, β) with A v = α v A + β, keyed by (A, v on the right).
    vrules: HashMap<(Letter, bool), (Scalar, Scalar)>,
    /// Rows that were not oriented and must reduce to zero.
    pub checks: Vec<Relation>,
    /// Out-of-order pairs left without a rule.
    pub free_pairs: Vec<Word>,
    pub budget: usize,
    memo: RwLock<HashMap<Word, Element>>,
}

/// Step budget from `QPLANE_STEP_BUDGET`, default two million.
pub fn default_budget() -> usize {
    std::env::var("QPLANE_STEP_BUDGET").ok().and_then(|s| s.parse().ok()).unwrap_or(2_000_000)
}

fn expand_du(e: &Element) -> Element {
    let du = Element::letters(&[Letter::DV, Letter::V(-2)], Scalar::r(-2).neg());
    e.substitute(&|l| if l == Letter::DU { du.clone() } else { Element::letter(l) })
}

fn is_quadratic(e: &Element) -> bool {
    e.terms().all(|(w, _)| w.len() <= 2 && w.letters().iter().all(|l| !matches!(l, Letter::V(k) if *k != 1)))
}

fn has_z(e: &Element) -> bool {
    e.alphabet().iter().any(|l| matches!(l, Letter::Z | Letter::DZ))
}

fn has_derivative(e: &Element) -> bool {
    e.alphabet().iter().any(|l| l.is_derivative())
}

/// Reduced row echelon form over words, largest word first.
fn eliminate(rows: Vec<Element>, order: Order) -> Result<BTreeMap<Key, BTreeMap<Key, Scalar>>, PlaneError> {
    let mut piv: BTreeMap<Key, BTreeMap<Key, Scalar>> = BTreeMap::new();
    for e in rows {
        let mut row: BTreeMap<Key, Scalar> = e.terms().map(|(w, c)| (order.key(w), c.clone())).collect();
        let hits: Vec<Key> = row.keys().filter(|k| piv.contains_key(*k)).cloned().collect();
        for k in hits {
            let Some(c) = row.get(&k).cloned() else { continue };
            for (k2, c2) in &piv[&k] {
                let v = row.get(k2).map_or_else(|| c.mul(c2).neg(), |x| x.sub(&c.mul(c2)));
                if v.is_zero() {
                    row.remove(k2);
                } else {
                    row.insert(k2.clone(), v);
                }
            }
        }
        let Some((lead, lc)) = row.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) else {
            continue;
        };
        let inv = lc.inv()?;
        for c in row.values_mut() {
            *c = c.mul(&inv);
        }
        for prow in piv.values_mut() {
            let Some(c) = prow.get(&lead).cloned() else { continue };
            for (k2, c2) in &row {
                let v = prow.get(k2).map_or_else(|| c.mul(c2).neg(), |x| x.sub(&c.mul(c2)));
                if v.is_zero() {
                    prow.remove(k2);
                } else {
                    prow.insert(k2.clone(), v);
                }
            }
        }
        piv.insert(lead, row);
    }
    Ok(piv)
}

impl RewriteSystem {
    pub fn compile(rels: &RelationSet, order: Order) -> Result<Self, PlaneError> {
        Self::compile_variant(rels, order, Variant::Full)
    }

    pub fn compile_variant(rels: &RelationSet, order: Order, variant: Variant) -> Result<Self, PlaneError> {
        let mut oriented = Vec::new();
        let mut checks = Vec::new();
        for row in &rels.rows {
            let e = expand_du(&row.elem);
            let skip = match variant {
                Variant::Full => row.role == Role::ZFree,
                Variant::ZFree => has_z(&e) || has_derivative(&e),
                Variant::NoDerivatives => row.role == Role::ZFree || has_derivative(&e),
            };
            if skip {
                continue;
            }
            let use_zfree = variant == Variant::ZFree && row.role == Role::ZFree;
            if (row.role == Role::Rule || use_zfree) && is_quadratic(&e) {
                oriented.push(e);
            } else {
                checks.push(Relation { elem: e, ..row.clone() });
            }
        }
        let piv = eliminate(oriented, order)?;
        let mut rules = HashMap::new();
        let mut vrules = HashMap::new();
        for (lead, row) in piv {
            let w = lead.word().clone();
            if w.len() != 2 {
                return Err(PlaneError::Inconsistent(format!(
                    "relations force a lower-degree identity with leading word {}",
                    w.render(rels.n())
                )));
            }
            let mut rhs = Element::zero();
            for (k, c) in row.iter().filter(|(k, _)| **k != lead) {
                rhs.add_term(k.word().clone(), c.neg());
            }
            let (a, b) = (w.letters()[0], w.letters()[1]);
            match (a, b) {
                (Letter::V(1), other) | (other, Letter::V(1)) if !matches!(other, Letter::V(_)) => {
                    let right = b == Letter::V(1);
                    let swapped = Word::from_letters(&[b, a]);
                    let alpha = rhs.coeff(&swapped);
                    let beta = rhs.coeff(&Word::empty());
                    let rest = rhs.sub(&Element::term(swapped, alpha.clone())).sub(&Element::scalar(beta.clone()));
                    if !rest.is_zero() || alpha.is_zero() {
                        return Err(PlaneError::Inconsistent(format!("v-rule for {} is not a twisted swap", w.render(rels.n()))));
                    }
                    vrules.insert((other, right), (alpha, beta));
                }
                _ => {
                    rules.insert((a, b), rhs);
                }
            }
        }
        let mut sys = RewriteSystem {
            ctx: rels.ctx.clone(),
            table: rels.table,
            order,
            c: rels.c.clone(),
            rules,
            vrules,
            checks,
            free_pairs: Vec::new(),
            budget: default_budget(),
            memo: RwLock::new(HashMap::new()),
        };
        sys.free_pairs = sys.uncovered_pairs(variant);
        let allowed = match (rels.table, variant) {
            (Table::T1, Variant::ZFree) => 2,
            (Table::T1, _) => 1,
            _ => 0,
        };
        if sys.free_pairs.len() > allowed {
            let w = &sys.free_pairs[0];
            return Err(PlaneError::Degenerate(format!(
                "the solve for {} is singular (its pivot minor vanishes)",
                w.render(rels.n())
            )));
        }
        Ok(sys)
    }

    /// Generators of the compiled table (u is the power v^{-1}).
    pub fn alphabet(&self) -> Vec<Letter> {
        use Letter::*;
        let n = self.ctx.n as u8;
        let mut v: Vec<Letter> = Vec::new();
        let forms: Vec<Letter> = match self.table {
            Table::T1 => vec![DZ, DV],
            Table::T2 => vec![DV],
            Table::T3 => vec![],
        };
        v.extend(forms);
        v.extend((1..=n).map(DX));
        if self.table == Table::T1 {
            v.push(Z);
        }
        if self.table != Table::T3 {
            v.push(V(1));
            v.push(V(-1));
        }
        v.extend((1..=n).map(X));
        v.extend((1..=n).map(PD));
        match self.table {
            Table::T1 => v.extend([PDdot, PDcirc]),
            Table::T2 => v.push(PDdot),
            Table::T3 => {}
        }
        v
    }

    fn uncovered_pairs(&self, variant: Variant) -> Vec<Word> {
        let mut letters: Vec<Letter> = self.alphabet().into_iter().filter(|l| *l != Letter::V(-1)).collect();
        if variant == Variant::ZFree {
            letters.retain(|l| !matches!(l, Letter::Z | Letter::DZ) && !l.is_derivative());
        }
        if variant == Variant::NoDerivatives || self.order == Order::FormsRight {
            letters.retain(|l| !l.is_derivative());
        }
        let mut out = Vec::new();
        for &a in &letters {
            for &b in &letters {
                let (ra, rb) = (self.order.rank(a), self.order.rank(b));
                let out_of_order = ra > rb || (ra == rb && a.is_form());
                if !out_of_order || self.rule(a, b).is_some() {
                    continue;
                }
                // Derivatives commute past nothing but coordinates, and
                // Table 1 leaves the derivatives mutually unordered.
                if a.is_derivative() && (b.is_form() || (self.table == Table::T1 && b.is_derivative())) {
                    continue;
                }
                out.push(Word::from_letters(&[a, b]));
            }
        }
        out
    }

    /// Rewrite of the adjacent pair (a, b), if any.
    pub fn rule(&self, a: Letter, b: Letter) -> Option<Element> {
        match (a, b) {
            (Letter::V(_), Letter::V(_)) => None,
            (other, Letter::V(k)) | (Letter::V(k), other) => {
                let right = matches!(b, Letter::V(_));
                let (alpha, beta) = self.vrules.get(&(other, right))?;
                let ak = alpha.pow(k).ok()?;
                let (first, second) = if right { (Letter::V(k), other) } else { (other, Letter::V(k)) };
                let mut e = Element::letters(&[first, second], ak.clone());
                if !beta.is_zero() {
                    let s = if alpha.equals(&Scalar::one()) {
                        beta.mul(&Scalar::from_int(k as i64))
                    } else {
                        beta.mul(&ak.sub(&Scalar::one())).div(&alpha.sub(&Scalar::one())).ok()?
                    };
                    e.add_term(Word::from_letters(&[Letter::V(k - 1)]), s);
                }
                Some(e)
            }
            _ => self.rules.get(&(a, b)).cloned(),
        }
    }

    /// All rules with single-letter-pair left sides (v-powers at exponent ±1).
    pub fn rules(&self) -> Vec<Rule> {
        let mut out: Vec<Rule> = self.rules.iter().map(|((a, b), e)| Rule { lhs: Word::from_letters(&[*a, *b]), rhs: e.clone() }).collect();
        for (other, right) in self.vrules.keys() {
            for k in [1, -1] {
                let (a, b) = if *right { (*other, Letter::V(k)) } else { (Letter::V(k), *other) };
                if let Some(e) = self.rule(a, b) {
                    out.push(Rule { lhs: Word::from_letters(&[a, b]), rhs: e });
                }
            }
        }
        out.sort_by_key(|r| self.order.key(&r.lhs));
        out
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len() + self.vrules.len()
    }

    fn first_redex(&self, w: &Word) -> Result<Option<(usize, Element)>, PlaneError> {
        let ls = w.letters();
        for i in 0..ls.len().saturating_sub(1) {
            if let Some(e) = self.rule(ls[i], ls[i + 1]) {
                return Ok(Some((i, e)));
            }
            if ls[i].is_derivative() && ls[i + 1].is_form() {
                return Err(PlaneError::Unsupported(format!(
                    "reordering {} past {}",
                    ls[i].render(self.ctx.n),
                    ls[i + 1].render(self.ctx.n)
                )));
            }
        }
        Ok(None)
    }

    fn splice(w: &Word, i: usize, rhs: &Element) -> Vec<(Word, Scalar)> {
        let ls = w.letters();
        rhs.terms()
            .map(|(m, c)| {
                let mut nw = Word::from_letters(&ls[..i]);
                nw.extend(m.letters());
                nw.extend(&ls[i + 2..]);
                (nw, c.clone())
            })
            .collect()
    }

    fn nf_word(&self, w: &Word, steps: &mut usize) -> Result<Element, PlaneError> {
        if let Some(e) = self.memo.read().unwrap().get(w) {
            return Ok(e.clone());
        }
        let out = match self.first_redex(w)? {
            None => Element::word(w.clone()),
            Some((i, rhs)) => {
                *steps += 1;
                if *steps > self.budget {
                    return Err(PlaneError::Budget(self.budget));
                }
                let mut acc = Element::zero();
                for (nw, c) in Self::splice(w, i, &rhs) {
                    acc.add_scaled(&self.nf_word(&nw, steps)?, &c);
                }
                acc
            }
        };
        self.memo.write().unwrap().insert(w.clone(), out.clone());
        Ok(out)
    }

    /// Leftmost-innermost normal form. du is replaced by -r^{-2} dv u^2.
    pub fn normal_form(&self, e: &Element) -> Result<Element, PlaneError> {
        let e = expand_du(e);
        let mut steps = 0;
        let mut acc = Element::zero();
        for (w, c) in e.terms() {
            acc.add_scaled(&self.nf_word(w, &mut steps)?, c);
        }
        Ok(acc)
    }

    /// True when no rule applies anywhere in the word.
    pub fn is_normal(&self, w: &Word) -> bool {
        let ls = w.letters();
        (0..ls.len().saturating_sub(1)).all(|i| self.rule(ls[i], ls[i + 1]).is_none())
    }

    /// Normal forms obtained by applying each possible first rule.
    pub fn branch_results(&self, w: &Word) -> Result<Vec<(usize, Element)>, PlaneError> {
        let ls = w.letters();
        let mut out = Vec::new();
        for i in 0..ls.len().saturating_sub(1) {
            if let Some(rhs) = self.rule(ls[i], ls[i + 1]) {
                let mut acc = Element::zero();
                let mut steps = 0;
                for (nw, c) in Self::splice(w, i, &rhs) {
                    acc.add_scaled(&self.nf_word(&nw, &mut steps)?, &c);
                }
                out.push((i, acc));
            }
        }
        Ok(out)
    }

    /// Diamond check on all words of length ≤ `maxdeg` over `alphabet`.
    pub fn check_confluence(&self, maxdeg: usize, alphabet: &[Letter]) -> VerificationReport {
        let n = self.ctx.n;
        let mut rep = VerificationReport::new(format!("confluence {} N={} degree {}", self.table, n, maxdeg));
        let mut words: Vec<Word> = vec![Word::empty()];
        let mut all = Vec::new();
        for _ in 0..maxdeg {
            let mut next = Vec::new();
            for w in &words {
                for l in alphabet {
                    if matches!((w.letters().last(), l), (Some(Letter::V(_)), Letter::V(_))) {
                        continue;
                    }
                    let mut nw = w.clone();
                    nw.0.push(*l);
                    next.push(nw);
                }
            }
            all.extend(next.iter().cloned());
            words = next;
        }
        let supported = |w: &Word| {
            let ls = w.letters();
            !ls.iter().enumerate().any(|(i, a)| a.is_derivative() && ls[i + 1..].iter().any(|b| b.is_form()))
        };
        all.retain(|w| w.len() >= 2 && supported(w));
        let failures: Vec<(Word, String)> = all
            .par_iter()
            .filter_map(|w| match self.branch_results(w) {
                Err(e) => Some((w.clone(), e.to_string())),
                Ok(res) => {
                    let (i0, first) = res.first()?;
                    for (i, other) in &res[1..] {
                        let diff = first.sub(other);
                        if !diff.is_zero() {
                            return Some((
                                w.clone(),
                                format!("positions {} and {} differ by {}", i0, i, diff.render(n)),
                            ));
                        }
                    }
                    None
                }
            })
            .collect();
        let mut failures = failures;
        failures.sort_by_key(|(w, _)| self.order.key(w));
        match failures.first() {
            None => {
                rep.pass("diamond");
                rep.note(format!("{} words checked", all.len()));
            }
            Some((w, msg)) => {
                rep.fail("diamond", format!("{}: {}", w.render(n), msg));
                let list: Vec<String> = failures.iter().take(40).map(|(w, _)| w.render(n)).collect();
                rep.note(format!("{} of {} words divergent: {}", failures.len(), all.len(), list.join(", ")));
            }
        }
        rep
    }

    /// Structural checks: termination order, grading, and the unoriented rows.
    pub fn check_rules(&self) -> VerificationReport {
        let n = self.ctx.n;
        let mut rep = VerificationReport::new(format!("rules {} N={}", self.table, n));
        let mut bad_order = None;
        let mut bad_grade = None;
        for r in self.rules() {
            let lk = self.order.key(&r.lhs);
            let g = r.lhs.grade();
            let nd = r.lhs.letters().iter().filter(|l| l.is_derivative()).count();
            for (w, _) in r.rhs.terms() {
                if self.order.key(w) >= lk && bad_order.is_none() {
                    bad_order = Some(format!("{} -> {}", r.lhs.render(n), w.render(n)));
                }
                let wd = w.letters().iter().filter(|l| l.is_derivative()).count();
                if (w.grade() != g || wd > nd) && bad_grade.is_none() {
                    bad_grade = Some(format!("{} -> {}", r.lhs.render(n), w.render(n)));
                }
            }
        }
        rep.check("termination order", bad_order.map_or(Ok(()), Err));
        rep.check("grade conservation", bad_grade.map_or(Ok(()), Err));
        let mut bad = None;
        for row in &self.checks {
            match self.normal_form(&row.elem) {
                Ok(e) if e.is_zero() => {}
                Ok(e) => {
                    bad.get_or_insert_with(|| format!("{}: {}", row.name, e.render(n)));
                }
                Err(e) => {
                    bad.get_or_insert_with(|| format!("{}: {}", row.name, e));
                }
            }
        }
        rep.check("unoriented rows reduce to zero", bad.map_or(Ok(()), Err));
        rep
    }

    /// Number of normal x-monomials of degree d.
    pub fn pbw_count(&self, d: usize) -> usize {
        let n = self.ctx.n as u8;
        let mut count = 0;
        let mut idx = vec![1u8; d];
        loop {
            let w = Word::from_letters(&idx.iter().map(|a| Letter::X(*a)).collect::<Vec<_>>());
            if self.is_normal(&w) {
                count += 1;
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return count;
                }
                k -= 1;
                if idx[k] < n {
                    idx[k] += 1;
                    break;
                }
                idx[k] = 1;
            }
        }
    }

    /// Words occurring in the normal forms of all degree-d x-words.
    pub fn pbw_span(&self, d: usize) -> Result<BTreeSet<Word>, PlaneError> {
        let n = self.ctx.n as u8;
        let mut words = vec![Word::empty()];
        for _ in 0..d {
            words = words
                .iter()
                .flat_map(|w| (1..=n).map(move |a| w.concat(&Word::from_letters(&[Letter::X(a)]))))
                .collect();
        }
        let mut out = BTreeSet::new();
        for w in words {
            for (m, _) in self.normal_form(&Element::word(w))?.terms() {
                out.insert(m.clone());
            }
        }
        Ok(out)
    }
}
