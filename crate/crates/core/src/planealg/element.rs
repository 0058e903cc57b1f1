//! Generators, words and finite linear combinations of words.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::scalar::{ParameterContext, Scalar, ScalarError};

/// One generator. Indices are 1-based.
///
/// `V(k)` is the k-th power of the dilatation v, so `u = V(-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    DZ,
    DU,
    DV,
    DX(u8),
    Z,
    V(i32),
    X(u8),
    PD(u8),
    PDdot,
    PDcirc,
    /// Real Minkowski coordinate X^a.
    RX(u8),
    RDX(u8),
    /// Hermitian momentum P_a.
    RP(u8),
}

impl Letter {
    pub fn u() -> Letter {
        Letter::V(-1)
    }
    pub fn is_form(&self) -> bool {
        matches!(self, Letter::DZ | Letter::DU | Letter::DV | Letter::DX(_) | Letter::RDX(_))
    }
    pub fn is_derivative(&self) -> bool {
        matches!(self, Letter::PD(_) | Letter::PDdot | Letter::PDcirc | Letter::RP(_))
    }
    /// Largest plane index carried by the letter, for range checks.
    pub fn index(&self) -> Option<u8> {
        match self {
            Letter::DX(a) | Letter::X(a) | Letter::PD(a) | Letter::RX(a) | Letter::RDX(a) | Letter::RP(a) => Some(*a),
            _ => None,
        }
    }

    /// Render in the expression grammar.
    pub fn render(&self, _n: usize) -> String {
        match self {
            Letter::DZ => "dz".into(),
            Letter::DU => "du".into(),
            Letter::DV => "dv".into(),
            Letter::DX(a) => format!("dx{}", a),
            Letter::Z => "z".into(),
            Letter::V(1) => "v".into(),
            Letter::V(-1) => "u".into(),
            Letter::V(k) if *k > 0 => format!("v^{}", k),
            Letter::V(k) => format!("u^{}", -k),
            Letter::X(a) => format!("x{}", a),
            Letter::PD(a) => format!("pd{}", a),
            Letter::PDdot => "pdot".into(),
            Letter::PDcirc => "pcirc".into(),
            Letter::RX(a) => format!("X{}", a),
            Letter::RDX(a) => format!("dX{}", a),
            Letter::RP(a) => format!("P{}", a),
        }
    }
}

/// A word in the generators. Adjacent powers of v are always merged.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub SmallVec<[Letter; 6]>);

impl Word {
    pub fn empty() -> Word {
        Word(SmallVec::new())
    }
    pub fn from_letters(ls: &[Letter]) -> Word {
        let mut w = Word::empty();
        for l in ls {
            w.push(*l);
        }
        w
    }
    pub fn push(&mut self, l: Letter) {
        if let Letter::V(k) = l {
            if k == 0 {
                return;
            }
            if let Some(Letter::V(j)) = self.0.last().copied() {
                self.0.pop();
                if j + k != 0 {
                    self.0.push(Letter::V(j + k));
                }
                return;
            }
        }
        self.0.push(l);
    }
    pub fn extend(&mut self, ls: &[Letter]) {
        for l in ls {
            self.push(*l);
        }
    }
    pub fn concat(&self, o: &Word) -> Word {
        let mut w = self.clone();
        w.extend(&o.0);
        w
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }
    /// Number of one-form letters.
    pub fn grade(&self) -> usize {
        self.0.iter().filter(|l| l.is_form()).count()
    }
    pub fn render(&self, n: usize) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0.iter().map(|l| l.render(n)).collect::<Vec<_>>().join("*")
    }
}

/// Finite linear combination of words with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Element {
    terms: BTreeMap<Word, Scalar>,
}

impl Element {
    pub fn zero() -> Element {
        Element::default()
    }
    pub fn one() -> Element {
        Element::scalar(Scalar::one())
    }
    pub fn scalar(s: Scalar) -> Element {
        Element::term(Word::empty(), s)
    }
    pub fn letter(l: Letter) -> Element {
        Element::term(Word::from_letters(&[l]), Scalar::one())
    }
    pub fn word(w: Word) -> Element {
        Element::term(w, Scalar::one())
    }
    pub fn term(w: Word, s: Scalar) -> Element {
        let mut e = Element::zero();
        e.add_term(w, s);
        e
    }
    pub fn letters(ls: &[Letter], s: Scalar) -> Element {
        Element::term(Word::from_letters(ls), s)
    }

    pub fn add_term(&mut self, w: Word, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(c) => {
                let v = c.add(&s);
                if v.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *c = v;
                }
            }
            None => {
                self.terms.insert(w, s);
            }
        }
    }
    pub fn add_scaled(&mut self, o: &Element, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (w, c) in &o.terms {
            self.add_term(w.clone(), c.mul(s));
        }
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
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }
    pub fn into_terms(self) -> impl Iterator<Item = (Word, Scalar)> {
        self.terms.into_iter()
    }
    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }
    /// The constant term when the element is a pure scalar.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Word::empty()).cloned(),
            _ => None,
        }
    }
    /// Form degree, when homogeneous.
    pub fn grade(&self) -> Option<usize> {
        let mut g = None;
        for w in self.terms.keys() {
            let k = w.grade();
            match g {
                None => g = Some(k),
                Some(h) if h != k => return None,
                _ => {}
            }
        }
        Some(g.unwrap_or(0))
    }

    pub fn add(&self, o: &Element) -> Element {
        let mut e = self.clone();
        for (w, c) in &o.terms {
            e.add_term(w.clone(), c.clone());
        }
        e
    }
    pub fn sub(&self, o: &Element) -> Element {
        let mut e = self.clone();
        for (w, c) in &o.terms {
            e.add_term(w.clone(), c.neg());
        }
        e
    }
    pub fn neg(&self) -> Element {
        Element { terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect() }
    }
    pub fn scale(&self, s: &Scalar) -> Element {
        let mut e = Element::zero();
        e.add_scaled(self, s);
        e
    }
    pub fn mul(&self, o: &Element) -> Element {
        let mut e = Element::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                e.add_term(w1.concat(w2), c1.mul(c2));
            }
        }
        e
    }
    /// Integer power; negative powers only for scalars and v-powers.
    pub fn pow(&self, k: i32) -> Result<Element, ScalarError> {
        if k < 0 {
            if let Some(s) = self.as_scalar() {
                return Ok(Element::scalar(s.pow(k)?));
            }
            if self.terms.len() == 1 {
                let (w, c) = self.terms.iter().next().unwrap();
                if let [Letter::V(j)] = w.letters() {
                    return Ok(Element::term(Word::from_letters(&[Letter::V(j * k)]), c.pow(k)?));
                }
            }
            return Err(ScalarError::Domain("negative power of a non-invertible element".into()));
        }
        let mut acc = Element::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Apply a map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Result<Scalar, ScalarError>) -> Result<Element, ScalarError> {
        let mut e = Element::zero();
        for (w, c) in &self.terms {
            e.add_term(w.clone(), f(c)?);
        }
        Ok(e)
    }

    /// Substitute every letter by an element (an algebra homomorphism).
    pub fn substitute(&self, f: &dyn Fn(Letter) -> Element) -> Element {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            let mut acc = Element::scalar(c.clone());
            for l in w.letters() {
                acc = acc.mul(&f(*l));
            }
            out = out.add(&acc);
        }
        out
    }

    /// Anti-homomorphic image under a generator map and a coefficient map.
    pub fn anti_substitute(
        &self,
        f: &dyn Fn(Letter) -> Result<Element, ScalarError>,
        fc: &dyn Fn(&Scalar) -> Result<Scalar, ScalarError>,
    ) -> Result<Element, ScalarError> {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            let mut acc = Element::scalar(fc(c)?);
            for l in w.letters().iter().rev() {
                acc = acc.mul(&f(*l)?);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Every letter occurring in the element.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut v: Vec<Letter> = self.terms.keys().flat_map(|w| w.letters().iter().copied()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Text in the expression grammar.
    pub fn render(&self, n: usize) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let (neg, body) = render_term(w, c, n);
            match (k == 0, neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        out
    }

    /// Check that every index is in range for dimension `n`.
    pub fn check_indices(&self, ctx: &ParameterContext) -> Result<(), ScalarError> {
        for l in self.alphabet() {
            if let Some(a) = l.index() {
                if a == 0 || a as usize > ctx.n {
                    return Err(ScalarError::Domain(format!("index {} out of range 1..{}", a, ctx.n)));
                }
            }
        }
        Ok(())
    }
}

fn render_term(w: &Word, c: &Scalar, n: usize) -> (bool, String) {
    let text = c.to_string();
    let (neg, mag) = match text.strip_prefix('-') {
        Some(rest) if is_atomic(rest) => (true, rest.to_string()),
        _ => (false, text),
    };
    if w.is_empty() {
        return (neg, mag);
    }
    let ws = w.render(n);
    if mag == "1" {
        return (neg, ws);
    }
    if is_atomic(&mag) {
        (neg, format!("{}*{}", mag, ws))
    } else {
        (neg, format!("({})*{}", mag, ws))
    }
}

/// A printed scalar that binds tighter than `*` and contains no sum.
fn is_atomic(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | ' ' if depth == 0 => return false,
            '-' if depth == 0 && i > 0 && !s[..i].ends_with('^') => return false,
            '/' if depth == 0 => return false,
            _ => {}
        }
    }
    !s.starts_with('-')
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_powers_merge_and_cancel() {
        let w = Word::from_letters(&[Letter::X(1), Letter::V(1), Letter::V(-1), Letter::X(2)]);
        assert_eq!(w.letters(), &[Letter::X(1), Letter::X(2)]);
        let w = Word::from_letters(&[Letter::V(2), Letter::V(1)]);
        assert_eq!(w.letters(), &[Letter::V(3)]);
    }

    #[test]
    fn grading_adds() {
        let a = Element::letter(Letter::DX(1));
        let b = Element::letters(&[Letter::X(2), Letter::DV], Scalar::r(1));
        assert_eq!(a.mul(&b).grade(), Some(2));
    }

    #[test]
    fn rendering() {
        let e = Element::letters(&[Letter::X(1), Letter::DX(2)], Scalar::r(1))
            .sub(&Element::letters(&[Letter::DX(2), Letter::X(1)], Scalar::i()));
        assert_eq!(e.render(4), "-i*dx2*x1 + r*x1*dx2");
        let e = Element::letters(&[Letter::V(-2)], Scalar::lambda());
        assert_eq!(e.render(4), "(r - r^-1)*u^2");
    }
}
