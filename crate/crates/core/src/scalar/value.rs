//! Rational functions: a Laurent numerator over a product of normalized
//! polynomial factors.

use std::fmt;

use super::coeff::{Coeff, Gauss};
use super::poly::{LPoly, Mono, Sym};
use super::ScalarError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    num: LPoly,
    /// Normalized non-monomial factors with positive multiplicity, sorted.
    den: Vec<(LPoly, u32)>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }
    pub fn one() -> Self {
        Scalar::from_poly(LPoly::one())
    }
    pub fn from_poly(p: LPoly) -> Self {
        Scalar { num: p, den: Vec::new() }
    }
    pub fn from_int(n: i64) -> Self {
        Scalar::from_coeff(Coeff::from_int(n))
    }
    pub fn from_frac(n: i64, d: i64) -> Self {
        Scalar::from_coeff(Coeff::from_frac(n, d))
    }
    pub fn from_coeff(c: Coeff) -> Self {
        Scalar::from_poly(LPoly::constant(c))
    }
    pub fn i() -> Self {
        Scalar::from_coeff(Coeff::i())
    }
    pub fn sqrt2() -> Self {
        Scalar::from_coeff(Coeff::sqrt2())
    }
    pub fn mono(m: Mono) -> Self {
        Scalar::from_poly(LPoly::mono(m))
    }
    pub fn sym(s: Sym) -> Self {
        Scalar::mono(Mono::var(s, 1))
    }
    /// `r^k`, whole units.
    pub fn r(k: i32) -> Self {
        Scalar::mono(Mono::r(k))
    }
    /// `r^(k/2)`.
    pub fn r_half(k: i32) -> Self {
        Scalar::mono(Mono::var(Sym::R, k))
    }
    pub fn hbar() -> Self {
        Scalar::sym(Sym::Hbar)
    }
    /// `r - r^{-1}`
    pub fn lambda() -> Self {
        Scalar::r(1).sub(&Scalar::r(-1))
    }
    /// `r + r^{-1}`
    pub fn mu() -> Self {
        Scalar::r(1).add(&Scalar::r(-1))
    }

    pub fn numer(&self) -> &LPoly {
        &self.num
    }
    pub fn denom_factors(&self) -> &[(LPoly, u32)] {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.as_constant().map_or(false, |c| c.is_one())
    }
    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }
    pub fn as_constant(&self) -> Option<Coeff> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }
    pub fn has_sqrt2(&self) -> bool {
        self.num.terms.values().any(|c| c.has_sqrt2())
            || self.den.iter().any(|(f, _)| f.terms.values().any(|c| c.has_sqrt2()))
    }
    pub fn symbols(&self) -> Vec<Sym> {
        let mut v = self.num.symbols();
        for (f, _) in &self.den {
            v.extend(f.symbols());
        }
        v.sort();
        v.dedup();
        v
    }

    fn den_product(factors: &[(LPoly, u32)]) -> LPoly {
        let mut acc = LPoly::one();
        for (f, e) in factors {
            acc = acc.mul(&f.pow(*e));
        }
        acc
    }

    /// Cancel whole denominator factors dividing the numerator.
    fn reduce(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let mut i = 0;
        while i < self.den.len() {
            while self.den[i].1 > 0 {
                match self.num.div_exact(&self.den[i].0) {
                    Some(q) => {
                        self.num = q;
                        self.den[i].1 -= 1;
                    }
                    None => break,
                }
            }
            if self.den[i].1 == 0 {
                self.den.remove(i);
            } else {
                i += 1;
            }
        }
        self
    }

    fn merge_den(a: &[(LPoly, u32)], b: &[(LPoly, u32)], f: impl Fn(u32, u32) -> u32) -> Vec<(LPoly, u32)> {
        let mut out: Vec<(LPoly, u32)> = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push((a[i].0.clone(), f(a[i].1, 0)));
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0.clone(), f(0, b[j].1)));
                j += 1;
            } else {
                out.push((a[i].0.clone(), f(a[i].1, b[j].1)));
                i += 1;
                j += 1;
            }
        }
        out
    }

    fn cofactor(den: &[(LPoly, u32)], lcm: &[(LPoly, u32)]) -> LPoly {
        let mut acc = LPoly::one();
        for (f, e) in lcm {
            let have = den.iter().find(|(g, _)| g == f).map_or(0, |p| p.1);
            if *e > have {
                acc = acc.mul(&f.pow(e - have));
            }
        }
        acc
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Scalar { num: self.num.add(&o.num), den: self.den.clone() }.reduce();
        }
        let lcm = Scalar::merge_den(&self.den, &o.den, |x, y| x.max(y));
        let a = self.num.mul(&Scalar::cofactor(&self.den, &lcm));
        let b = o.num.mul(&Scalar::cofactor(&o.den, &lcm));
        Scalar { num: a.add(&b), den: lcm }.reduce()
    }
    pub fn neg(&self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }
    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        let num = self.num.mul(&o.num);
        if self.den.is_empty() && o.den.is_empty() {
            return Scalar::from_poly(num);
        }
        let den = Scalar::merge_den(&self.den, &o.den, |x, y| x + y);
        Scalar { num, den }.reduce()
    }
    pub fn scale(&self, c: &Coeff) -> Scalar {
        Scalar { num: self.num.scale(c), den: self.den.clone() }.reduce()
    }
    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let (c, m, p) = self.num.normalize();
        let ci = c.inv().ok_or(ScalarError::DivisionByZero)?;
        let num = Scalar::den_product(&self.den).mul_term(&m.inv(), &ci);
        let den = if p.as_constant().is_some() { Vec::new() } else { vec![(p, 1)] };
        Ok(Scalar { num, den }.reduce())
    }
    pub fn div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self.mul(&o.inv()?))
    }
    pub fn pow(&self, k: i32) -> Result<Scalar, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
    /// Exact equality of the represented rational functions.
    pub fn equals(&self, o: &Scalar) -> bool {
        self == o || self.sub(o).is_zero()
    }

    /// Apply a ring homomorphism sending each symbol to a Laurent
    /// monomial and each coefficient through `fc`.
    pub fn map_monomial(&self, fs: &dyn Fn(Sym) -> Mono, fc: &dyn Fn(&Coeff) -> Coeff) -> Scalar {
        let fm = |m: &Mono| {
            let mut acc = Mono::one();
            for &(s, e) in &m.0 {
                acc = acc.mul(&fs(s).pow(e));
            }
            LPoly::mono(acc)
        };
        let mut out = Scalar::from_poly(self.num.map(&fm, fc));
        for (f, e) in &self.den {
            let g = Scalar::from_poly(f.map(&fm, fc));
            let gi = g.inv().expect("image of a nonzero factor is nonzero");
            out = out.mul(&gi.pow(*e as i32).unwrap());
        }
        out
    }

    /// Apply a ring homomorphism sending symbols to arbitrary Scalars.
    pub fn substitute(&self, fs: &dyn Fn(Sym) -> Option<Scalar>) -> Result<Scalar, ScalarError> {
        self.substitute_powers(&|s, e| fs(s).map(|v| v.pow(e)))
    }

    /// Like [`Scalar::substitute`], but the callback receives the raw
    /// exponent (half units for `r`) and returns the image of `s^e`.
    pub fn substitute_powers(&self, fp: &dyn Fn(Sym, i32) -> Option<Result<Scalar, ScalarError>>) -> Result<Scalar, ScalarError> {
        let eval_poly = |p: &LPoly| -> Result<Scalar, ScalarError> {
            let mut acc = Scalar::zero();
            for (m, c) in &p.terms {
                let mut t = Scalar::from_coeff(c.clone());
                for &(s, e) in &m.0 {
                    match fp(s, e) {
                        Some(v) => t = t.mul(&v?),
                        None => t = t.mul(&Scalar::mono(Mono::var(s, e))),
                    }
                }
                acc = acc.add(&t);
            }
            Ok(acc)
        };
        let mut out = eval_poly(&self.num)?;
        for (f, e) in &self.den {
            let g = eval_poly(f)?;
            out = out.mul(&g.inv()?.pow(*e as i32)?);
        }
        Ok(out)
    }

    /// Evaluate at a point assigning a value to every symbol.
    pub fn eval(&self, pt: &dyn Fn(Sym, i32) -> Result<Coeff, ScalarError>) -> Result<Coeff, ScalarError> {
        let ev = |p: &LPoly| -> Result<Coeff, ScalarError> {
            let mut acc = Coeff::zero();
            for (m, c) in &p.terms {
                let mut t = c.clone();
                for &(s, e) in &m.0 {
                    t = &t * &pt(s, e)?;
                }
                acc = &acc + &t;
            }
            Ok(acc)
        };
        let n = ev(&self.num)?;
        let mut d = Coeff::one();
        for (f, e) in &self.den {
            d = &d * &ev(f)?.pow(*e as i64).unwrap_or_else(Coeff::zero);
        }
        if d.is_zero() {
            return Err(if n.is_zero() { ScalarError::Indeterminate } else { ScalarError::Pole });
        }
        Ok(&n * &d.inv().unwrap())
    }

    /// Real rational value when the scalar is a plain rational constant.
    pub fn as_gauss(&self) -> Option<Gauss> {
        self.as_constant().and_then(|c| c.as_gauss().cloned())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        for (p, e) in &self.den {
            if *e == 1 {
                write!(f, "/({})", p)?;
            } else {
                write!(f, "/({})^{}", p, e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_inverse() {
        let a = Scalar::lambda();
        let b = Scalar::r(-1).sub(&Scalar::r(1));
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn product_expands() {
        let p = Scalar::lambda().mul(&Scalar::mu());
        assert_eq!(p, Scalar::r(2).sub(&Scalar::r(-2)));
    }

    #[test]
    fn q4_matches_reduced_form() {
        let one = Scalar::one();
        let num = one.sub(&Scalar::r(-2));
        let den = one.sub(&Scalar::r(-4)).mul(&one.add(&Scalar::r(2)));
        let q4 = num.div(&den).unwrap();
        let other = Scalar::from_int(2).add(&Scalar::r(2)).add(&Scalar::r(-2)).inv().unwrap();
        assert!(q4.equals(&other));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert!(Scalar::zero().inv().is_err());
    }

    #[test]
    fn factor_cancellation() {
        let f = Scalar::r(1).add(&Scalar::one());
        let g = Scalar::r(2).sub(&Scalar::one());
        let x = g.div(&f).unwrap();
        assert!(x.is_polynomial());
        assert_eq!(x, Scalar::r(1).sub(&Scalar::one()));
    }
}
