use std::collections::BTreeMap;

use super::coeff::Coeff;
use super::poly::{Mono, Sym};
use super::value::Scalar;
use super::ScalarError;

/// How the twist parameters q_{ab} are specialised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Twist {
    /// Independent q_{ab} modulo q_{ba} = r^2/q_{ab}, q_{a'b'} = q_{ba}.
    Multi,
    /// Every q_{ab} and q_{a.} equals r.
    Uni,
    /// N = 4 twist (q = q12, q13 = r^2/q12) with the real-form conjugation.
    Minkowski,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParameterContext {
    pub n: usize,
    pub twist: Twist,
    /// Whether the conjugation swaps the middle indices n and n+1.
    pub real_form: bool,
}

impl ParameterContext {
    pub fn new(n: usize, twist: Twist) -> Result<Self, ScalarError> {
        if n < 3 {
            return Err(ScalarError::Domain(format!("plane dimension {} < 3", n)));
        }
        if twist == Twist::Minkowski && n != 4 {
            return Err(ScalarError::Domain("Minkowski parameters need N = 4".into()));
        }
        Ok(ParameterContext { n, twist, real_form: false })
    }
    pub fn multi(n: usize) -> Self {
        Self::new(n, Twist::Multi).expect("valid dimension")
    }
    pub fn uni(n: usize) -> Self {
        Self::new(n, Twist::Uni).expect("valid dimension")
    }
    /// N = 4 with the ISO(3,1) conjugation.
    pub fn minkowski() -> Self {
        ParameterContext { n: 4, twist: Twist::Minkowski, real_form: true }
    }
    pub fn with_real_form(mut self, on: bool) -> Result<Self, ScalarError> {
        if on && self.n % 2 == 1 {
            return Err(ScalarError::Domain("the middle-index swap needs even N".into()));
        }
        self.real_form = on;
        Ok(self)
    }

    /// a' = N + 1 - a (1-based).
    pub fn prime(&self, a: usize) -> usize {
        self.n + 1 - a
    }
    /// The index swap n <-> n+1 of the real form (identity otherwise).
    pub fn dswap(&self, a: usize) -> usize {
        let h = self.n / 2;
        if !self.real_form {
            a
        } else if a == h {
            h + 1
        } else if a == h + 1 {
            h
        } else {
            a
        }
    }

    fn r2_over(m: Mono) -> Mono {
        Mono::r(2).mul(&m.inv())
    }

    /// q_{ab} as a monomial, 1-based indices with a != b, b != a'.
    ///
    /// The twist closure is q_{ba} = q_{a'b} = q_{ab'} = r^2/q_{ab}; a
    /// pair that closes onto itself with both parities is forced to r.
    pub fn q_mono(&self, a: usize, b: usize) -> Result<Mono, ScalarError> {
        let n = self.n;
        if a == 0 || b == 0 || a > n || b > n || a == b || b == self.prime(a) {
            return Err(ScalarError::UnresolvedSymbol(format!("q{}{}", a, b)));
        }
        if self.twist == Twist::Uni {
            return Ok(Mono::r(1));
        }
        let mut orbit: Vec<((usize, usize), bool)> = vec![((a, b), false)];
        let mut k = 0;
        while k < orbit.len() {
            let ((x, y), par) = orbit[k];
            for next in [(y, x), (self.prime(x), y), (x, self.prime(y))] {
                let item = (next, !par);
                if !orbit.contains(&item) {
                    orbit.push(item);
                }
            }
            k += 1;
        }
        if orbit.iter().any(|(p, par)| orbit.contains(&(*p, !par))) {
            return Ok(Mono::r(1));
        }
        let ((x, y), inverted) = orbit
            .iter()
            .filter(|((x, y), _)| x < y)
            .min_by_key(|((x, y), _)| (*x, *y))
            .copied()
            .expect("orbit contains an ordered pair");
        let m = Mono::var(Sym::Q(x as u8, y as u8), 1);
        Ok(if inverted { Self::r2_over(m) } else { m })
    }
    pub fn q(&self, a: usize, b: usize) -> Result<Scalar, ScalarError> {
        Ok(Scalar::mono(self.q_mono(a, b)?))
    }

    /// q_{a.} of the dilatation sector.
    pub fn qdot_mono(&self, a: usize) -> Result<Mono, ScalarError> {
        let n = self.n;
        if a == 0 || a > n {
            return Err(ScalarError::UnresolvedSymbol(format!("qa{}", a)));
        }
        if self.twist == Twist::Uni {
            return Ok(Mono::r(1));
        }
        let ap = self.prime(a);
        if a == ap {
            return Ok(Mono::r(1));
        }
        if a < ap {
            Ok(Mono::var(Sym::QDot(a as u8), 1))
        } else {
            Ok(Self::r2_over(Mono::var(Sym::QDot(ap as u8), 1)))
        }
    }
    pub fn qdot(&self, a: usize) -> Result<Scalar, ScalarError> {
        Ok(Scalar::mono(self.qdot_mono(a)?))
    }

    /// Check that a symbol is an independent parameter of this context.
    pub fn owns(&self, s: Sym) -> bool {
        match s {
            Sym::R | Sym::Hbar => true,
            Sym::Q(a, b) => {
                self.twist != Twist::Uni
                    && self.q_mono(a as usize, b as usize).ok() == Some(Mono::var(s, 1))
            }
            Sym::QDot(a) => self.qdot_mono(a as usize).ok() == Some(Mono::var(s, 1)),
        }
    }

    /// Image of an independent symbol under the conjugation.
    pub fn conj_sym(&self, s: Sym) -> Result<Mono, ScalarError> {
        if !self.owns(s) {
            return Err(ScalarError::UnresolvedSymbol(s.name()));
        }
        Ok(match s {
            Sym::R => Mono::var(Sym::R, -1),
            Sym::Hbar => Mono::var(Sym::Hbar, 1),
            Sym::Q(a, b) => self.q_mono(self.dswap(a as usize), self.dswap(b as usize))?.inv(),
            Sym::QDot(a) => self.qdot_mono(self.dswap(a as usize))?.inv(),
        })
    }

    pub fn conj(&self, a: &Scalar) -> Result<Scalar, ScalarError> {
        for s in a.symbols() {
            self.conj_sym(s)?;
        }
        Ok(a.map_monomial(&|s| self.conj_sym(s).unwrap(), &|c| c.conj()))
    }
}

/// Numeric assignment of the independent symbols.
#[derive(Clone, Debug, Default)]
pub struct Point {
    values: BTreeMap<Sym, Coeff>,
    rh: Option<Coeff>,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }
    pub fn set(mut self, s: Sym, v: Coeff) -> Self {
        self.values.insert(s, v);
        self
    }
    /// Assign r through its square root, enabling half-integer powers.
    pub fn set_r_sqrt(mut self, v: Coeff) -> Self {
        self.values.insert(Sym::R, &v * &v);
        self.rh = Some(v);
        self
    }
    pub fn get(&self, s: Sym) -> Option<&Coeff> {
        self.values.get(&s)
    }
    fn power(&self, s: Sym, e: i32) -> Result<Coeff, ScalarError> {
        let (base, k) = match s {
            Sym::R if e % 2 == 0 => (self.values.get(&s), e / 2),
            Sym::R => (self.rh.as_ref(), e),
            _ => (self.values.get(&s), e),
        };
        let base = base.ok_or_else(|| ScalarError::UnresolvedSymbol(s.name()))?;
        base.pow(k as i64).ok_or(ScalarError::Pole)
    }
    pub fn eval(&self, a: &Scalar) -> Result<Coeff, ScalarError> {
        a.eval(&|s, e| self.power(s, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Gauss;

    fn unit_r() -> Coeff {
        Coeff::gauss(Gauss::new(Rat::new(3.into(), 5.into()), Rat::new(4.into(), 5.into())))
    }
    use crate::scalar::Rat;

    #[test]
    fn orbit_resolution_n4() {
        let ctx = ParameterContext::multi(4);
        let q12 = ctx.q(1, 2).unwrap();
        let inv = Scalar::r(2).div(&q12).unwrap();
        assert!(ctx.q(3, 4).unwrap().equals(&inv));
        assert!(ctx.q(2, 1).unwrap().equals(&inv));
        assert!(ctx.q(1, 3).unwrap().equals(&inv));
        assert_eq!(ctx.q(2, 4).unwrap(), q12);
        assert!(ctx.q(1, 4).is_err());
        let odd = ParameterContext::multi(5);
        assert_eq!(odd.q(1, 3).unwrap(), Scalar::r(1));
    }

    #[test]
    fn qdot_pairs_to_r_squared() {
        let ctx = ParameterContext::multi(5);
        let p = ctx.qdot(2).unwrap().mul(&ctx.qdot(4).unwrap());
        assert!(p.equals(&Scalar::r(2)));
        assert_eq!(ctx.qdot(3).unwrap(), Scalar::r(1));
    }

    #[test]
    fn conjugations() {
        let ctx = ParameterContext::minkowski();
        assert_eq!(ctx.conj(&Scalar::r(1)).unwrap(), Scalar::r(-1));
        let q = ctx.q(1, 2).unwrap();
        assert!(ctx.conj(&q).unwrap().equals(&q.mul(&Scalar::r(-2))));
        let x = Scalar::i().mul(&Scalar::lambda());
        assert!(ctx.conj(&x).unwrap().equals(&x));
    }

    #[test]
    fn conj_is_involutive_on_symbols() {
        for ctx in [ParameterContext::multi(4).with_real_form(true).unwrap(), ParameterContext::multi(5)] {
            for a in 1..=ctx.n {
                for b in 1..=ctx.n {
                    if let Ok(q) = ctx.q(a, b) {
                        let back = ctx.conj(&ctx.conj(&q).unwrap()).unwrap();
                        assert!(back.equals(&q));
                    }
                }
                let qd = ctx.qdot(a).unwrap();
                assert!(ctx.conj(&ctx.conj(&qd).unwrap()).unwrap().equals(&qd));
            }
        }
    }

    #[test]
    fn evaluation() {
        let pt = Point::new().set(Sym::R, unit_r()).set(Sym::Hbar, Coeff::one());
        let v = pt.eval(&Scalar::lambda()).unwrap();
        assert_eq!(v, Coeff::gauss(Gauss::new(Rat::from_integer(0.into()), Rat::new(8.into(), 5.into()))));
        assert!(pt.eval(&Scalar::hbar()).unwrap().is_one());
        let one = Scalar::one();
        let q4 = one
            .sub(&Scalar::r(-2))
            .div(&one.sub(&Scalar::r(-4)).mul(&one.add(&Scalar::r(2))))
            .unwrap();
        let classical = Point::new().set(Sym::R, Coeff::one());
        assert_eq!(classical.eval(&q4), Err(ScalarError::Indeterminate));
    }
}
