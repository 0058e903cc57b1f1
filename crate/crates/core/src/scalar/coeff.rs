//! Numbers of the form `a + b*s2` with `a`, `b` Gaussian rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Gaussian rational `re + i*im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gauss {
    pub re: Rat,
    pub im: Rat,
}

impl Gauss {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gauss { re, im }
    }
    pub fn from_int(n: i64) -> Self {
        Gauss { re: Rat::from_integer(BigInt::from(n)), im: Rat::zero() }
    }
    pub fn from_rat(q: Rat) -> Self {
        Gauss { re: q, im: Rat::zero() }
    }
    pub fn i() -> Self {
        Gauss { re: Rat::zero(), im: Rat::one() }
    }
    pub fn zero() -> Self {
        Gauss::default()
    }
    pub fn one() -> Self {
        Gauss::from_int(1)
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        Gauss { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn norm(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Gauss { re: &self.re / &n, im: -(&self.im / &n) })
    }
    pub fn scale(&self, q: &Rat) -> Self {
        Gauss { re: &self.re * q, im: &self.im * q }
    }
}

impl Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}
impl Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}
impl Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        if self.im.is_zero() && o.im.is_zero() {
            return Gauss::from_rat(&self.re * &o.re);
        }
        Gauss {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}
impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss { re: -self.re.clone(), im: -self.im.clone() }
    }
}

fn fmt_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Gauss {
    /// Renders `3/2`, `i`, `-2/3*i`, `(1+2*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |q: &Rat| -> String {
            if q.is_one() {
                "i".to_string()
            } else if (-q).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", fmt_rat(q))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}", im_part(&self.im)),
            (false, false) => {
                let im = if self.im.is_negative() {
                    format!("-{}", im_part(&-self.im.clone()))
                } else {
                    format!("+{}", im_part(&self.im))
                };
                write!(f, "({}{})", fmt_rat(&self.re), im)
            }
        }
    }
}

/// Element `a + b*s2` of Q(i, s2), with `s2*s2 = 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coeff {
    pub a: Gauss,
    pub b: Gauss,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }
    pub fn one() -> Self {
        Coeff::from_int(1)
    }
    pub fn from_int(n: i64) -> Self {
        Coeff { a: Gauss::from_int(n), b: Gauss::zero() }
    }
    pub fn from_rat(q: Rat) -> Self {
        Coeff { a: Gauss::from_rat(q), b: Gauss::zero() }
    }
    pub fn from_frac(n: i64, d: i64) -> Self {
        Coeff::from_rat(Rat::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn gauss(g: Gauss) -> Self {
        Coeff { a: g, b: Gauss::zero() }
    }
    pub fn i() -> Self {
        Coeff::gauss(Gauss::i())
    }
    pub fn sqrt2() -> Self {
        Coeff { a: Gauss::zero(), b: Gauss::one() }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }
    pub fn has_sqrt2(&self) -> bool {
        !self.b.is_zero()
    }
    /// The Gaussian value when no s2 part is present.
    pub fn as_gauss(&self) -> Option<&Gauss> {
        if self.b.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }
    /// Complex conjugation: i -> -i, s2 fixed.
    pub fn conj(&self) -> Self {
        Coeff { a: self.a.conj(), b: self.b.conj() }
    }
    pub fn inv(&self) -> Option<Self> {
        if self.b.is_zero() {
            return self.a.inv().map(Coeff::gauss);
        }
        // (a + b s)^{-1} = (a - b s) / (a^2 - 2 b^2)
        let two = Gauss::from_int(2);
        let den = &(&self.a * &self.a) - &(&two * &(&self.b * &self.b));
        let di = den.inv()?;
        Some(Coeff { a: &self.a * &di, b: &(-&self.b) * &di })
    }
    pub fn pow(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Coeff::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }
    /// Sign used when normalizing: true when the first nonzero rational
    /// component is negative.
    pub fn is_negative_lead(&self) -> bool {
        for q in [&self.a.re, &self.a.im, &self.b.re, &self.b.im] {
            if !q.is_zero() {
                return q.is_negative();
            }
        }
        false
    }
    /// True when the rendering needs parentheses as a factor.
    pub fn is_compound(&self) -> bool {
        let parts = [&self.a.re, &self.a.im, &self.b.re, &self.b.im]
            .iter()
            .filter(|q| !q.is_zero())
            .count();
        parts > 1
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        Coeff { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}
impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        Coeff { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}
impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        if self.b.is_zero() && o.b.is_zero() {
            return Coeff::gauss(&self.a * &o.a);
        }
        let two = Gauss::from_int(2);
        Coeff {
            a: &(&self.a * &o.a) + &(&two * &(&self.b * &o.b)),
            b: &(&self.a * &o.b) + &(&self.b * &o.a),
        }
    }
}
impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { a: -&self.a, b: -&self.b }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let bpart = if self.b.is_one() {
            "s2".to_string()
        } else if (-&self.b).is_one() {
            "-s2".to_string()
        } else {
            format!("{}*s2", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{}", bpart)
        } else if bpart.starts_with('-') {
            write!(f, "({}{})", self.a, bpart)
        } else {
            write!(f, "({}+{})", self.a, bpart)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = Coeff::sqrt2();
        assert_eq!(&s * &s, Coeff::from_int(2));
    }

    #[test]
    fn inverse_with_sqrt2() {
        let x = &Coeff::from_int(1) + &Coeff::sqrt2();
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
    }

    #[test]
    fn gauss_rendering() {
        assert_eq!(Coeff::i().to_string(), "i");
        let g = Coeff::gauss(Gauss::new(Rat::from_integer(1.into()), Rat::from_integer((-2).into())));
        assert_eq!(g.to_string(), "(1-2*i)");
        assert_eq!(Coeff::from_frac(-3, 2).to_string(), "-3/2");
    }
}
