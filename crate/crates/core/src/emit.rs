//! JSON, LaTeX and text renderings of relation sets and reports.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expression, parse_scalar, ParseError};
use crate::planealg::{Element, Letter, Word};
use crate::report::{Check, VerificationReport};
use crate::scalar::{Coeff, LPoly, Mono, ParameterContext, Rat, Scalar, Sym};

pub const SCHEMA: &str = "qplane/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Latex,
    Text,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "latex" => Ok(Format::Latex),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format `{}` (json, latex, text)", s)),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema `{0}` is not {SCHEMA}")]
    Schema(String),
    #[error("in `{text}`: {source}")]
    Parse { text: String, source: ParseError },
}

/// A relation `lhs = rhs`, optionally named.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedRelation {
    pub name: Option<String>,
    pub lhs: Element,
    pub rhs: Element,
}

impl NamedRelation {
    pub fn new(lhs: Element, rhs: Element) -> Self {
        NamedRelation { name: None, lhs, rhs }
    }
    pub fn named(name: impl Into<String>, lhs: Element, rhs: Element) -> Self {
        NamedRelation { name: Some(name.into()), lhs, rhs }
    }
    pub fn from_word(name: Option<String>, lhs: &Word, rhs: &Element) -> Self {
        NamedRelation { name, lhs: Element::word(lhs.clone()), rhs: rhs.clone() }
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coeff: String,
    word: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct RelationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    lhs: ElementDoc,
    rhs: ElementDoc,
}

#[derive(Serialize, Deserialize)]
struct RelationsDoc {
    schema: String,
    relations: Vec<RelationDoc>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    schema: &'static str,
    title: &'a str,
    passed: bool,
    checks: &'a [Check],
}

fn element_doc(e: &Element, n: usize) -> ElementDoc {
    ElementDoc {
        terms: e
            .terms()
            .map(|(w, c)| TermDoc { coeff: c.to_string(), word: w.letters().iter().map(|l| l.render(n)).collect() })
            .collect(),
    }
}

/// Element JSON: `{"terms":[{"coeff":..., "word":[...]}]}`.
pub fn element_json(e: &Element, n: usize) -> serde_json::Value {
    serde_json::to_value(element_doc(e, n)).expect("plain data serializes")
}

pub fn relations_json(rels: &[NamedRelation], n: usize) -> String {
    let doc = RelationsDoc {
        schema: SCHEMA.to_string(),
        relations: rels
            .iter()
            .map(|r| RelationDoc { name: r.name.clone(), lhs: element_doc(&r.lhs, n), rhs: element_doc(&r.rhs, n) })
            .collect(),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

fn parse_in(text: &str, ctx: &ParameterContext, f: impl Fn(&str, &ParameterContext) -> Result<Element, ParseError>) -> Result<Element, EmitError> {
    f(text, ctx).map_err(|source| EmitError::Parse { text: text.to_string(), source })
}

fn element_from_doc(doc: &ElementDoc, ctx: &ParameterContext) -> Result<Element, EmitError> {
    let mut out = Element::zero();
    for t in &doc.terms {
        let c = parse_in(&t.coeff, ctx, |s, c| parse_scalar(s, c).map(Element::scalar))?;
        let mut w = c;
        for l in &t.word {
            w = w.mul(&parse_in(l, ctx, parse_expression)?);
        }
        out = out.add(&w);
    }
    Ok(out)
}

/// Read back the output of [`relations_json`].
pub fn relations_from_json(text: &str, ctx: &ParameterContext) -> Result<Vec<NamedRelation>, EmitError> {
    let doc: RelationsDoc = serde_json::from_str(text)?;
    if doc.schema != SCHEMA {
        return Err(EmitError::Schema(doc.schema));
    }
    doc.relations
        .iter()
        .map(|r| {
            Ok(NamedRelation { name: r.name.clone(), lhs: element_from_doc(&r.lhs, ctx)?, rhs: element_from_doc(&r.rhs, ctx)? })
        })
        .collect()
}

/// One relation per line in the expression grammar; reparseable with
/// [`crate::expr::parse_relation_file`].
pub fn relations_text(rels: &[NamedRelation], n: usize) -> String {
    let mut out = String::new();
    for r in rels {
        if let Some(name) = &r.name {
            let _ = writeln!(out, "# {}", name);
        }
        let _ = writeln!(out, "{} = {}", r.lhs.render(n), r.rhs.render(n));
    }
    out
}

pub fn relations_latex(rels: &[NamedRelation]) -> String {
    let mut out = String::new();
    for r in rels {
        let _ = writeln!(out, "{} = {}", latex_element(&r.lhs), latex_element(&r.rhs));
    }
    out
}

pub fn emit_relations(rels: &[NamedRelation], n: usize, format: Format) -> String {
    match format {
        Format::Json => relations_json(rels, n) + "\n",
        Format::Latex => relations_latex(rels),
        Format::Text => relations_text(rels, n),
    }
}

pub fn report_json(rep: &VerificationReport) -> String {
    let doc = ReportDoc { schema: SCHEMA, title: &rep.title, passed: rep.all_passed(), checks: &rep.checks };
    serde_json::to_string(&doc).expect("plain data serializes")
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        match ch {
            '_' | '&' | '%' | '$' | '#' | '{' | '}' => {
                out.push('\\');
                out.push(ch);
            }
            '^' => out.push_str("\\^{}"),
            _ => out.push(ch),
        }
    }
    out
}

pub fn report_latex(rep: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\begin{{tabular}}{{ll}}");
    let _ = writeln!(out, "\\multicolumn{{2}}{{l}}{{\\texttt{{{}}}}} \\\\", latex_escape(&rep.title));
    for c in &rep.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{} & \\texttt{{{}}} \\\\", mark, latex_escape(&c.name));
    }
    let _ = writeln!(out, "\\end{{tabular}}");
    out
}

pub fn emit_report(rep: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => report_json(rep) + "\n",
        Format::Latex => report_latex(rep),
        Format::Text => rep.to_string(),
    }
}

pub fn latex_letter(l: &Letter) -> String {
    match l {
        Letter::DZ => "dz".into(),
        Letter::DU => "du".into(),
        Letter::DV => "dv".into(),
        Letter::DX(a) => format!("dx^{{{}}}", a),
        Letter::Z => "z".into(),
        Letter::V(1) => "v".into(),
        Letter::V(-1) => "u".into(),
        Letter::V(k) if *k > 0 => format!("v^{{{}}}", k),
        Letter::V(k) => format!("u^{{{}}}", -k),
        Letter::X(a) => format!("x^{{{}}}", a),
        Letter::PD(a) => format!("\\partial_{{{}}}", a),
        Letter::PDdot => "\\partial_{\\bullet}".into(),
        Letter::PDcirc => "\\partial_{\\circ}".into(),
        Letter::RX(a) => format!("X^{{{}}}", a),
        Letter::RDX(a) => format!("dX^{{{}}}", a),
        Letter::RP(a) => format!("P_{{{}}}", a),
    }
}

fn latex_word(w: &Word) -> String {
    w.letters().iter().map(latex_letter).collect::<Vec<_>>().join(" ")
}

fn latex_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

fn latex_mono(m: &Mono) -> String {
    let mut parts = Vec::new();
    for &(s, e) in &m.0 {
        let (base, exp) = match s {
            Sym::R if e % 2 != 0 => ("r".to_string(), format!("{}/2", e)),
            Sym::R => ("r".to_string(), (e / 2).to_string()),
            Sym::Hbar => ("\\hbar".to_string(), e.to_string()),
            Sym::Q(a, b) => (format!("q_{{{}{}}}", a, b), e.to_string()),
            Sym::QDot(a) => (format!("q_{{{}\\bullet}}", a), e.to_string()),
        };
        if exp == "1" {
            parts.push(base);
        } else {
            parts.push(format!("{}^{{{}}}", base, exp));
        }
    }
    parts.join(" ")
}

/// Split a polynomial into signed atomic terms `(negative, body)`.
fn latex_poly_terms(p: &LPoly) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    for (m, c) in p.ordered_terms() {
        let Coeff { a, b } = c;
        for (q, unit) in [(&a.re, ""), (&a.im, "i"), (&b.re, "\\sqrt{2}"), (&b.im, "i\\sqrt{2}")] {
            if q.is_zero() {
                continue;
            }
            let neg = q.is_negative();
            let mag = q.abs();
            let mono = latex_mono(m);
            let mut factors = Vec::new();
            if !mag.is_one() || (unit.is_empty() && mono.is_empty()) {
                factors.push(latex_rat(&mag));
            }
            if !unit.is_empty() {
                factors.push(unit.to_string());
            }
            if !mono.is_empty() {
                factors.push(mono);
            }
            out.push((neg, factors.join(" ")));
        }
    }
    out
}

fn join_terms(terms: &[(bool, String)]) -> String {
    let mut s = String::new();
    for (k, (neg, body)) in terms.iter().enumerate() {
        match (k == 0, neg) {
            (true, true) => s.push('-'),
            (true, false) => {}
            (false, true) => s.push_str(" - "),
            (false, false) => s.push_str(" + "),
        }
        s.push_str(body);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// LaTeX for a scalar as `(negative, body, atomic)`; an atomic body needs
/// no parentheses as a factor.
fn latex_scalar_parts(c: &Scalar) -> (bool, String, bool) {
    let num = latex_poly_terms(c.numer());
    if c.denom_factors().is_empty() {
        return match num.as_slice() {
            [(neg, body)] => (*neg, body.clone(), true),
            _ => (false, join_terms(&num), false),
        };
    }
    let den: Vec<String> = c
        .denom_factors()
        .iter()
        .map(|(p, e)| {
            let t = latex_poly_terms(p);
            let body = join_terms(&t);
            let single = c.denom_factors().len() == 1 || t.len() == 1;
            match (*e, single) {
                (1, true) => body,
                (1, false) => format!("\\left({}\\right)", body),
                (e, _) => format!("\\left({}\\right)^{{{}}}", body, e),
            }
        })
        .collect();
    let (neg, top) = match num.as_slice() {
        [(neg, body)] => (*neg, body.clone()),
        _ => (false, join_terms(&num)),
    };
    (neg, format!("\\frac{{{}}}{{{}}}", top, den.join(" ")), true)
}

pub fn latex_scalar(c: &Scalar) -> String {
    let (neg, body, _) = latex_scalar_parts(c);
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

pub fn latex_element(e: &Element) -> String {
    let mut terms = Vec::new();
    for (w, c) in e.terms() {
        let (neg, body, atomic) = latex_scalar_parts(c);
        let term = if w.is_empty() {
            if atomic {
                body
            } else {
                format!("\\left({}\\right)", body)
            }
        } else if body == "1" {
            latex_word(w)
        } else if atomic {
            format!("{} {}", body, latex_word(w))
        } else {
            format!("\\left({}\\right) {}", body, latex_word(w))
        };
        terms.push((neg, term));
    }
    join_terms(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ParameterContext {
        ParameterContext::minkowski()
    }

    #[test]
    fn empty_relation_set() {
        assert_eq!(relations_json(&[], 4), r#"{"schema":"qplane/1","relations":[]}"#);
    }

    #[test]
    fn latex_of_a_commutation() {
        let c = ctx();
        let l = parse_expression("X3*X2", &c).unwrap();
        let r = parse_expression("X2*X3", &c).unwrap();
        assert_eq!(relations_latex(&[NamedRelation::new(l, r)]), "X^{3} X^{2} = X^{2} X^{3}\n");
    }

    #[test]
    fn latex_scalars() {
        let c = ctx();
        let s = |t: &str| latex_scalar(&parse_scalar(t, &c).unwrap());
        assert_eq!(s("-1/2"), "-\\frac{1}{2}");
        assert_eq!(s("r^2 - 1"), "r^{2} - 1");
        assert_eq!(s("i*hbar*r"), "i r \\hbar");
        assert_eq!(s("1/(r+1)"), "\\frac{1}{r + 1}");
        assert_eq!(s("s2*rh"), "\\sqrt{2} r^{1/2}");
    }

    #[test]
    fn latex_element_parenthesizes_sums() {
        let c = ctx();
        let e = parse_expression("(r - r^-1)*X1*X4 - 1/2*P1", &c).unwrap();
        let t = latex_element(&e);
        assert!(t.contains("\\left(r - r^{-1}\\right) X^{1} X^{4}"), "{}", t);
        assert!(t.contains("\\frac{1}{2} P_{1}"), "{}", t);
    }

    #[test]
    fn json_reads_back() {
        let c = ctx();
        let l = parse_expression("dX2*dX2", &c).unwrap();
        let r = parse_expression("-(r - r^-1)/2*dX4*dX1", &c).unwrap();
        let rels = vec![NamedRelation::named("w", l, r)];
        let j = relations_json(&rels, 4);
        let back = relations_from_json(&j, &c).unwrap();
        assert_eq!(back, rels);
        assert_eq!(relations_json(&back, 4), j);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let err = relations_from_json(r#"{"schema":"other","relations":[]}"#, &ctx()).unwrap_err();
        assert!(matches!(err, EmitError::Schema(_)));
    }

    #[test]
    fn report_json_leads_with_schema() {
        let mut rep = VerificationReport::new("t");
        rep.pass("a");
        rep.fail("b", "x1");
        let j = report_json(&rep);
        assert!(j.starts_with(r#"{"schema":"qplane/1","title":"t","passed":false"#), "{}", j);
    }
}
