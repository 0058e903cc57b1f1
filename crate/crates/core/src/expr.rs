//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! relation := expr [ "=" expr ]
//! expr     := term { ("+" | "-") term }
//! term     := unary { ("*" | "/") unary }
//! unary    := "-" unary | power
//! power    := atom [ "^" [ "-" ] integer ]
//! atom     := integer | integer "i" | name | "(" expr ")"
//! ```
//!
//! Division is only allowed by a scalar. Names are the plane generators
//! `x1..xN dx1.. pd1.. v u z dv du dz pdot pcirc`, the Minkowski generators
//! `X1.. dX1.. P1..` and the scalars `r rh q qAB qaA hbar i s2 lam mu lamt mut`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::planealg::{Element, Letter};
use crate::scalar::{Coeff, Gauss, ParameterContext, Rat, Scalar, ScalarError, Sym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {col}: {msg}")]
pub struct ParseError {
    /// 1-based character column.
    pub col: usize,
    pub msg: String,
}

fn err<T>(col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { col, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Imag(BigInt),
    Name(String),
    Op(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let v: BigInt = digits.parse().expect("ascii digits");
            if i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric()) {
                i += 1;
                out.push((Tok::Imag(v), col));
            } else if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '.') {
                return err(i + 1, format!("unexpected `{}` after number", chars[i]));
            } else {
                out.push((Tok::Int(v), col));
            }
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Name(chars[start..i].iter().collect()), col));
        } else if "+-*/^()=".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return err(col, format!("unexpected character `{}`", c));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a ParameterContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn col(&self) -> usize {
        self.toks[self.pos].1
    }
    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn is_op(&self, c: char) -> bool {
        *self.peek() == Tok::Op(c)
    }
    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            Tok::Op(')') => err(self.col(), "unbalanced `)`"),
            Tok::Op('=') => err(self.col(), "unexpected `=`"),
            _ => err(self.col(), "expected an operator (juxtaposition is not allowed)"),
        }
    }

    fn expr(&mut self) -> Result<Element, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.is_op('+') {
                self.bump();
                acc = acc.add(&self.term()?);
            } else if self.is_op('-') {
                self.bump();
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Element, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.is_op('*') {
                self.bump();
                acc = acc.mul(&self.unary()?);
            } else if self.is_op('/') {
                let col = self.bump().1;
                let d = self.unary()?;
                let s = match d.as_scalar() {
                    Some(s) => s,
                    None => return err(col, "division by a non-scalar"),
                };
                let inv = s.inv().or_else(|e| err(col, e.to_string()))?;
                acc = acc.scale(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Element, ParseError> {
        if self.is_op('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Element, ParseError> {
        let base = self.atom()?;
        if !self.is_op('^') {
            return Ok(base);
        }
        let col = self.bump().1;
        let neg = if self.is_op('-') {
            self.bump();
            true
        } else {
            false
        };
        let k = match self.bump() {
            (Tok::Int(v), c) => i32::try_from(v).or_else(|_| err(c, "exponent too large"))?,
            (_, c) => return err(c, "expected an integer exponent"),
        };
        let k = if neg { -k } else { k };
        base.pow(k).or_else(|e| err(col, e.to_string()))
    }

    fn atom(&mut self) -> Result<Element, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(v) => Ok(Element::scalar(Scalar::from_coeff(Coeff::from_rat(Rat::from_integer(v))))),
            Tok::Imag(v) => {
                let g = Gauss::new(Rat::from_integer(0.into()), Rat::from_integer(v));
                Ok(Element::scalar(Scalar::from_coeff(Coeff::gauss(g))))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.is_op(')') {
                    return err(self.col(), "expected `)`");
                }
                self.bump();
                Ok(e)
            }
            Tok::Name(s) => self.name(&s, col),
            Tok::End => err(col, "unexpected end of input"),
            Tok::Op(c) => err(col, format!("unexpected `{}`", c)),
        }
    }

    fn index(&self, digits: &str, col: usize) -> Result<u8, ParseError> {
        let a: usize = digits.parse().or_else(|_| err(col, "bad index"))?;
        if a == 0 || a > self.ctx.n {
            return err(col, format!("index {} out of range 1..{}", a, self.ctx.n));
        }
        Ok(a as u8)
    }

    fn name(&self, s: &str, col: usize) -> Result<Element, ParseError> {
        let sc = |v: Result<Scalar, ScalarError>| -> Result<Element, ParseError> {
            v.map(Element::scalar).or_else(|e| err(col, e.to_string()))
        };
        let l = Element::letter;
        let lam_t = || -> Result<Scalar, ScalarError> {
            let q = self.ctx.q(1, 2)?;
            Ok(Scalar::r(1).div(&q)?.sub(&q.div(&Scalar::r(1))?))
        };
        let mu_t = || -> Result<Scalar, ScalarError> {
            let q = self.ctx.q(1, 2)?;
            Ok(Scalar::r(1).div(&q)?.add(&q.div(&Scalar::r(1))?))
        };
        match s {
            "r" => return sc(Ok(Scalar::r(1))),
            "rh" => return sc(Ok(Scalar::r_half(1))),
            "q" => return sc(self.ctx.q(1, 2)),
            "hbar" => return sc(Ok(Scalar::hbar())),
            "i" => return sc(Ok(Scalar::i())),
            "s2" => return sc(Ok(Scalar::sqrt2())),
            "lam" => return sc(Ok(Scalar::lambda())),
            "mu" => return sc(Ok(Scalar::mu())),
            "lamt" => return sc(lam_t()),
            "mut" => return sc(mu_t()),
            "v" => return Ok(l(Letter::V(1))),
            "u" => return Ok(l(Letter::V(-1))),
            "z" => return Ok(l(Letter::Z)),
            "dv" => return Ok(l(Letter::DV)),
            "du" => return Ok(l(Letter::DU)),
            "dz" => return Ok(l(Letter::DZ)),
            "pdot" => return Ok(l(Letter::PDdot)),
            "pcirc" => return Ok(l(Letter::PDcirc)),
            _ => {}
        }
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (stem, digits) = s.split_at(split);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return err(col, format!("unknown name `{}`", s));
        }
        let letter = |f: fn(u8) -> Letter| -> Result<Element, ParseError> { Ok(l(f(self.index(digits, col)?))) };
        match stem {
            "x" => letter(Letter::X),
            "dx" => letter(Letter::DX),
            "pd" => letter(Letter::PD),
            "X" | "dX" | "P" if self.ctx.n != 4 => err(col, format!("`{}` needs N = 4", s)),
            "X" => letter(Letter::RX),
            "dX" => letter(Letter::RDX),
            "P" => letter(Letter::RP),
            "q" if digits.len() == 2 => {
                let a = self.index(&digits[..1], col)? as usize;
                let b = self.index(&digits[1..], col)? as usize;
                sc(self.ctx.q(a, b))
            }
            "qa" => {
                let a = self.index(digits, col)? as usize;
                sc(self.ctx.qdot(a))
            }
            _ => err(col, format!("unknown name `{}`", s)),
        }
    }
}

fn parser<'a>(text: &str, ctx: &'a ParameterContext) -> Result<Parser<'a>, ParseError> {
    Ok(Parser { toks: lex(text)?, pos: 0, ctx })
}

/// Parse one expression.
pub fn parse_expression(text: &str, ctx: &ParameterContext) -> Result<Element, ParseError> {
    let mut p = parser(text, ctx)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parse `lhs = rhs` (a bare expression means `= 0`).
pub fn parse_relation(text: &str, ctx: &ParameterContext) -> Result<(Element, Element), ParseError> {
    let mut p = parser(text, ctx)?;
    let lhs = p.expr()?;
    let rhs = if p.is_op('=') {
        p.bump();
        p.expr()?
    } else {
        Element::zero()
    };
    p.expect_end()?;
    Ok((lhs, rhs))
}

/// Parse a pure scalar such as `(3+4i)/5`.
pub fn parse_scalar(text: &str, ctx: &ParameterContext) -> Result<Scalar, ParseError> {
    let e = parse_expression(text, ctx)?;
    e.as_scalar().map_or_else(|| err(1, "expected a scalar"), Ok)
}

/// One relation read from a relation file.
#[derive(Clone, Debug)]
pub struct ParsedRelation {
    /// 1-based line number.
    pub line: usize,
    pub text: String,
    pub lhs: Element,
    pub rhs: Element,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, {source}")]
pub struct FileParseError {
    pub line: usize,
    pub source: ParseError,
}

/// Parse a relation file: one relation per line, `#` starts a comment.
pub fn parse_relation_file(text: &str, ctx: &ParameterContext) -> Result<Vec<ParsedRelation>, FileParseError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = parse_relation(body, ctx).map_err(|source| FileParseError { line: k + 1, source })?;
        out.push(ParsedRelation { line: k + 1, text: body.trim().to_string(), lhs, rhs });
    }
    Ok(out)
}

/// Exact values for some of the parameters, applied after normal ordering.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignments {
    values: Vec<(Sym, Coeff)>,
    /// Value of `rh`, the square root of `r`, when given.
    rh: Option<Coeff>,
}

impl Assignments {
    pub fn new() -> Self {
        Assignments::default()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty() && self.rh.is_none()
    }

    /// Parse `name=value`, e.g. `r=(3+4i)/5`. The value must be an exact
    /// constant; decimal points are rejected.
    pub fn add(&mut self, text: &str, ctx: &ParameterContext) -> Result<(), ParseError> {
        let eq = text.find('=').map_or_else(|| err(1, "expected name=value"), Ok)?;
        if let Some(k) = text.find('.') {
            return err(k + 1, "floating-point literals are not allowed; use an exact rational such as 1/2");
        }
        let (name, value) = (&text[..eq], &text[eq + 1..]);
        let shift = |e: ParseError, by: usize| ParseError { col: e.col + by, msg: e.msg };
        let target = parse_scalar(name, ctx).map_err(|e| shift(e, 0))?;
        let v = parse_scalar(value, ctx).map_err(|e| shift(e, eq + 1))?;
        let Some(v) = v.as_constant() else {
            return err(eq + 2, "value must be a number");
        };
        let mono = match target.numer().as_monomial() {
            Some((m, c)) if target.denom_factors().is_empty() && c.is_one() && m.0.len() == 1 => m.clone(),
            _ => return err(1, format!("`{}` is not an independent parameter", name.trim())),
        };
        match mono.0[0] {
            (Sym::R, 1) => self.rh = Some(v),
            (Sym::R, 2) => self.values.push((Sym::R, v)),
            (s, 1) => self.values.push((s, v)),
            _ => return err(1, format!("`{}` is not an independent parameter", name.trim())),
        }
        Ok(())
    }

    /// The classical point r = q_ab = 1 for every independent twist.
    pub fn classical(ctx: &ParameterContext) -> Self {
        let mut a = Assignments { values: Vec::new(), rh: Some(Coeff::one()) };
        for x in 1..=ctx.n {
            for y in x + 1..=ctx.n {
                if let Ok(m) = ctx.q_mono(x, y) {
                    if let [(s @ Sym::Q(..), 1)] = m.0.as_slice() {
                        a.values.push((*s, Coeff::one()));
                    }
                }
            }
            if let Ok(m) = ctx.qdot_mono(x) {
                if let [(s @ Sym::QDot(..), 1)] = m.0.as_slice() {
                    a.values.push((*s, Coeff::one()));
                }
            }
        }
        a
    }

    fn power(&self, s: Sym, e: i32) -> Option<Result<Scalar, ScalarError>> {
        let pw = |c: &Coeff, k: i32| c.pow(k as i64).map(Scalar::from_coeff).ok_or(ScalarError::Pole);
        if s == Sym::R {
            if let Some(h) = &self.rh {
                return Some(pw(h, e));
            }
        }
        let (_, v) = self.values.iter().rev().find(|(t, _)| *t == s)?;
        if s == Sym::R {
            if e % 2 != 0 {
                return Some(Err(ScalarError::Domain("half-integer power of r; assign rh instead".into())));
            }
            return Some(pw(v, e / 2));
        }
        Some(pw(v, e))
    }

    pub fn apply_scalar(&self, c: &Scalar) -> Result<Scalar, ScalarError> {
        c.substitute_powers(&|s, e| self.power(s, e))
    }

    pub fn apply(&self, e: &Element) -> Result<Element, ScalarError> {
        e.map_coeffs(|c| self.apply_scalar(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planealg::Word;

    fn ctx() -> ParameterContext {
        ParameterContext::multi(4)
    }

    #[test]
    fn two_term_element() {
        let e = parse_expression("r*x1*dx2 - i*dx2*x1", &ctx()).unwrap();
        assert_eq!(e.len(), 2);
        let w = Word::from_letters(&[Letter::DX(2), Letter::X(1)]);
        assert_eq!(e.coeff(&w), Scalar::i().neg());
    }

    #[test]
    fn unclosed_paren_column() {
        let e = parse_expression("(x1", &ctx()).unwrap_err();
        assert_eq!(e.col, 4);
    }

    #[test]
    fn juxtaposition_is_rejected() {
        let e = parse_expression("r x1", &ctx()).unwrap_err();
        assert_eq!(e.col, 3);
        assert!(parse_expression("2x1", &ctx()).is_err());
    }

    #[test]
    fn index_out_of_range() {
        let e = parse_expression("x1 + 3*x5", &ctx()).unwrap_err();
        assert_eq!(e.col, 8);
        assert!(e.msg.contains("out of range"));
    }

    #[test]
    fn gaussian_literal() {
        let s = parse_scalar("(3+4i)/5", &ctx()).unwrap();
        let g = Gauss::new(Rat::new(3.into(), 5.into()), Rat::new(4.into(), 5.into()));
        assert_eq!(s.as_constant().unwrap(), Coeff::gauss(g));
    }

    #[test]
    fn negative_powers_and_v() {
        let e = parse_expression("r^-2*v^2*u", &ctx()).unwrap();
        assert_eq!(e, Element::letters(&[Letter::V(1)], Scalar::r(-2)));
        assert!(parse_expression("x1^-1", &ctx()).is_err());
    }

    #[test]
    fn division_by_element_rejected() {
        let e = parse_expression("x1/x2", &ctx()).unwrap_err();
        assert_eq!(e.col, 3);
    }

    #[test]
    fn minkowski_names() {
        let m = ParameterContext::minkowski();
        let a = parse_expression("lamt", &m).unwrap().as_scalar().unwrap();
        let q = m.q(1, 2).unwrap();
        let want = Scalar::r(1).div(&q).unwrap().sub(&q.div(&Scalar::r(1)).unwrap());
        assert!(a.equals(&want));
        assert!(parse_expression("X2*P3", &m).is_ok());
        assert!(parse_expression("X2", &ParameterContext::multi(5)).is_err());
    }

    #[test]
    fn relation_file_comments_and_lines() {
        let text = "# header\n\nX3*X2 = X2*X3  # trailing\nX1*X1 = (\n";
        let e = parse_relation_file(text, &ParameterContext::minkowski()).unwrap_err();
        assert_eq!(e.line, 4);
        let ok = parse_relation_file("# c\nX3*X2 = X2*X3\n", &ParameterContext::minkowski()).unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok[0].line, 2);
    }

    #[test]
    fn assignments_are_exact() {
        let c = ParameterContext::minkowski();
        let mut a = Assignments::new();
        a.add("r=(3+4i)/5", &c).unwrap();
        a.add("q12=2", &c).unwrap();
        let e = parse_expression("r^2*q12*X1 + r^-1*X2", &c).unwrap();
        let got = a.apply(&e).unwrap();
        let want = parse_expression("2*((3+4i)/5)^2*X1 + 5/(3+4i)*X2", &c).unwrap();
        assert_eq!(got, want);
        let f = Assignments::new().add("r=0.5", &c).unwrap_err();
        assert_eq!(f.col, 4);
        assert!(Assignments::new().add("q21=2", &c).is_err());
        assert!(Assignments::new().add("r=x1", &c).is_err());
        let mut h = Assignments::new();
        h.add("r=4", &c).unwrap();
        assert!(h.apply_scalar(&Scalar::r_half(1)).is_err());
    }
}
