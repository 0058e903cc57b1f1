//! Multivariate Laurent polynomials over `Coeff`.
//!
//! The exponent of `r` is stored in half units so that `r^(1/2)` is a
//! monomial; all other exponents are plain integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use super::coeff::Coeff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    R,
    Hbar,
    /// Independent twist parameter q_{ab}, a < b (1-based).
    Q(u8, u8),
    /// Independent q_{a.} of the dilatation sector (1-based).
    QDot(u8),
}

impl Sym {
    pub fn name(&self) -> String {
        match self {
            Sym::R => "r".into(),
            Sym::Hbar => "hbar".into(),
            Sym::Q(a, b) => format!("q{}{}", a, b),
            Sym::QDot(a) => format!("qa{}", a),
        }
    }
}

/// Sorted list of (symbol, nonzero exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(pub SmallVec<[(Sym, i32); 3]>);

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }
    pub fn var(s: Sym, e: i32) -> Self {
        let mut m = Mono::default();
        if e != 0 {
            m.0.push((s, e));
        }
        m
    }
    /// `r^k` with `k` in whole units.
    pub fn r(k: i32) -> Self {
        Mono::var(Sym::R, 2 * k)
    }
    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
    pub fn exp(&self, s: Sym) -> i32 {
        self.0.iter().find(|(t, _)| *t == s).map(|p| p.1).unwrap_or(0)
    }
    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out: SmallVec<[(Sym, i32); 3]> = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &o.0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Mono(out)
    }
    pub fn inv(&self) -> Mono {
        Mono(self.0.iter().map(|&(s, e)| (s, -e)).collect())
    }
    pub fn pow(&self, k: i32) -> Mono {
        if k == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|&(s, e)| (s, e * k)).collect())
    }
    /// Lexicographic monomial order with `R` most significant.
    pub fn lex_cmp(&self, o: &Mono) -> Ordering {
        let (a, b) = (&self.0, &o.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(s, e)), Some(&(t, f))) => {
                    if s == t {
                        if e != f {
                            return e.cmp(&f);
                        }
                        i += 1;
                        j += 1;
                    } else if s < t {
                        return e.cmp(&0);
                    } else {
                        return 0.cmp(&f);
                    }
                }
            }
        }
    }
    /// True when every exponent of `self` is at least the one in `o`.
    pub fn divisible_by(&self, o: &Mono) -> bool {
        o.0.iter().all(|&(s, e)| self.exp(s) >= e) && self.0.iter().all(|&(s, e)| e >= o.exp(s))
    }
    /// Componentwise minimum (missing symbols count as exponent 0).
    pub fn min_with(&self, o: &Mono) -> Mono {
        let mut out: SmallVec<[(Sym, i32); 3]> = SmallVec::new();
        let mut syms: Vec<Sym> = self.0.iter().chain(o.0.iter()).map(|p| p.0).collect();
        syms.sort();
        syms.dedup();
        for s in syms {
            let e = self.exp(s).min(o.exp(s));
            if e != 0 {
                out.push((s, e));
            }
        }
        Mono(out)
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        for &(s, e) in &self.0 {
            let (name, e) = match s {
                Sym::R if e % 2 != 0 => ("rh".to_string(), e),
                Sym::R => ("r".to_string(), e / 2),
                _ => (s.name(), e),
            };
            if e == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{}^{}", name, e));
            }
        }
        parts.join("*")
    }
}

/// Laurent polynomial: monomial -> nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LPoly {
    pub terms: BTreeMap<Mono, Coeff>,
}

impl LPoly {
    pub fn zero() -> Self {
        LPoly::default()
    }
    pub fn one() -> Self {
        LPoly::constant(Coeff::one())
    }
    pub fn constant(c: Coeff) -> Self {
        LPoly::term(Mono::one(), c)
    }
    pub fn term(m: Mono, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LPoly { terms }
    }
    pub fn mono(m: Mono) -> Self {
        LPoly::term(m, Coeff::one())
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// The coefficient if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }
    pub fn as_monomial(&self) -> Option<(&Mono, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }
    pub fn add_term(&mut self, m: Mono, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
    pub fn add(&self, o: &LPoly) -> LPoly {
        let (big, small) = if self.len() >= o.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    pub fn neg(&self) -> LPoly {
        LPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
    pub fn sub(&self, o: &LPoly) -> LPoly {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &LPoly) -> LPoly {
        if self.is_zero() || o.is_zero() {
            return LPoly::zero();
        }
        let mut out = LPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
    pub fn mul_term(&self, m: &Mono, c: &Coeff) -> LPoly {
        if c.is_zero() {
            return LPoly::zero();
        }
        LPoly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }
    pub fn scale(&self, c: &Coeff) -> LPoly {
        self.mul_term(&Mono::one(), c)
    }
    pub fn pow(&self, k: u32) -> LPoly {
        let mut acc = LPoly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
    /// Leading term under `Mono::lex_cmp`.
    pub fn leading(&self) -> Option<(&Mono, &Coeff)> {
        self.terms.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }
    /// Componentwise minimum exponent over all terms.
    pub fn min_mono(&self) -> Mono {
        let mut it = self.terms.keys();
        let mut acc = match it.next() {
            Some(m) => m.clone(),
            None => return Mono::one(),
        };
        for m in it {
            acc = acc.min_with(m);
        }
        acc
    }
    pub fn symbols(&self) -> Vec<Sym> {
        let mut v: Vec<Sym> = self.terms.keys().flat_map(|m| m.0.iter().map(|p| p.0)).collect();
        v.sort();
        v.dedup();
        v
    }
    /// Exponent span per symbol, used to rule out divisibility cheaply.
    fn span(&self, s: Sym) -> i32 {
        let mut lo = i32::MAX;
        let mut hi = i32::MIN;
        for m in self.terms.keys() {
            let e = m.exp(s);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        if lo > hi {
            0
        } else {
            hi - lo
        }
    }

    /// Exact quotient `self / d` in the Laurent ring, if it exists.
    pub fn div_exact(&self, d: &LPoly) -> Option<LPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LPoly::zero());
        }
        if let Some((m, c)) = d.as_monomial() {
            let ci = c.inv()?;
            return Some(self.mul_term(&m.inv(), &ci));
        }
        if self.len() < 2 {
            return None;
        }
        for s in d.symbols() {
            if self.span(s) < d.span(s) {
                return None;
            }
        }
        let ma = self.min_mono();
        let mb = d.min_mono();
        let a = self.mul_term(&ma.inv(), &Coeff::one());
        let b = d.mul_term(&mb.inv(), &Coeff::one());
        let (lm, lc) = b.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let lci = lc.inv()?;
        let mut rem = a;
        let mut quot = LPoly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !rm.divisible_by(&lm) {
                return None;
            }
            let tm = rm.mul(&lm.inv());
            let tc = &rc * &lci;
            rem = rem.sub(&b.mul_term(&tm, &tc));
            quot.add_term(tm, tc);
        }
        Some(quot.mul_term(&ma.mul(&mb.inv()), &Coeff::one()))
    }

    /// Splits off monomial content and leading coefficient:
    /// `self = c * m * p` with `p` normalized.
    pub fn normalize(&self) -> (Coeff, Mono, LPoly) {
        if self.is_zero() {
            return (Coeff::zero(), Mono::one(), LPoly::zero());
        }
        let m = self.min_mono();
        let (_, lc) = self.leading().unwrap();
        let c = lc.clone();
        let ci = c.inv().expect("nonzero leading coefficient");
        let p = self.mul_term(&m.inv(), &ci);
        (c, m, p)
    }

    /// Apply a ring map given by monomial images and coefficient map.
    pub fn map(&self, fm: &dyn Fn(&Mono) -> LPoly, fc: &dyn Fn(&Coeff) -> Coeff) -> LPoly {
        let mut out = LPoly::zero();
        for (m, c) in &self.terms {
            out = out.add(&fm(m).scale(&fc(c)));
        }
        out
    }

    /// Terms in display order: descending total degree, then lex.
    pub(crate) fn ordered_terms(&self) -> Vec<(&Mono, &Coeff)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let da: i32 = a.0 .0.iter().map(|p| p.1).sum();
            let db: i32 = b.0 .0.iter().map(|p| p.1).sum();
            db.cmp(&da).then_with(|| b.0.lex_cmp(a.0))
        });
        v
    }

    pub fn is_compound(&self) -> bool {
        match self.terms.len() {
            0 => false,
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                c.is_compound() && !m.is_one() || c.is_negative_lead()
            }
            _ => true,
        }
    }
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.ordered_terms() {
            let neg = !c.is_compound() && c.is_negative_lead();
            let cabs = if neg { -c } else { c.clone() };
            let body = if m.is_one() {
                cabs.to_string()
            } else if cabs.is_one() {
                m.render()
            } else {
                format!("{}*{}", cabs, m.render())
            };
            match (first, neg) {
                (true, true) => write!(f, "-{}", body)?,
                (true, false) => write!(f, "{}", body)?,
                (false, true) => write!(f, " - {}", body)?,
                (false, false) => write!(f, " + {}", body)?,
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(k: i32) -> LPoly {
        LPoly::mono(Mono::r(k))
    }

    #[test]
    fn exact_division_of_laurent_polynomials() {
        // (r^2 - r^-2) / (r - r^-1) = r + r^-1
        let a = r(2).sub(&r(-2));
        let b = r(1).sub(&r(-1));
        assert_eq!(a.div_exact(&b).unwrap(), r(1).add(&r(-1)));
        assert!(b.div_exact(&a).is_none());
    }

    #[test]
    fn multivariate_division() {
        let q = LPoly::mono(Mono::var(Sym::Q(1, 2), 1));
        let f = r(1).add(&q);
        let g = r(1).sub(&q.scale(&Coeff::from_int(3)));
        let p = f.mul(&g);
        assert_eq!(p.div_exact(&f).unwrap(), g);
    }

    #[test]
    fn half_exponent_rendering() {
        let p = LPoly::mono(Mono::var(Sym::R, 3)).add(&r(-2));
        assert_eq!(p.to_string(), "rh^3 + r^-2");
    }
}
