use std::sync::OnceLock;

use proptest::prelude::*;
use qplane::emit::{relations_from_json, relations_json, NamedRelation};
use qplane::expr::{parse_expression, parse_scalar};
use qplane::planealg::{compile_table, Element, Letter, RewriteSystem, Table, Word};
use qplane::rmatrix::{sample_points, RMatrixBundle};
use qplane::scalar::{Coeff, Gauss, Mono, ParameterContext, Rat, Scalar, Sym};

fn ctx() -> &'static ParameterContext {
    static C: OnceLock<ParameterContext> = OnceLock::new();
    C.get_or_init(ParameterContext::minkowski)
}

fn t3() -> &'static RewriteSystem {
    static S: OnceLock<RewriteSystem> = OnceLock::new();
    S.get_or_init(|| {
        let b = RMatrixBundle::build(ctx()).unwrap();
        compile_table(&b, Table::T3, None).unwrap().1
    })
}

fn coeff() -> impl Strategy<Value = Coeff> {
    (-6i64..=6, 1i64..=4, -3i64..=3, any::<bool>()).prop_map(|(a, d, b, s2)| {
        let g = Gauss::new(Rat::new(a.into(), d.into()), Rat::from_integer(b.into()));
        let c = Coeff::gauss(g);
        if s2 {
            &c * &Coeff::sqrt2()
        } else {
            c
        }
    })
}

fn mono() -> impl Strategy<Value = Mono> {
    (-6i32..=6, -2i32..=2, 0i32..=1).prop_map(|(r, q, h)| {
        Mono::var(Sym::R, r).mul(&Mono::var(Sym::Q(1, 2), q)).mul(&Mono::var(Sym::Hbar, h))
    })
}

fn poly() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((coeff(), mono()), 0..4).prop_map(|ts| {
        ts.into_iter().fold(Scalar::zero(), |acc, (c, m)| acc.add(&Scalar::from_coeff(c).mul(&Scalar::mono(m))))
    })
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (poly(), poly()).prop_map(|(a, b)| if b.is_zero() { a.clone() } else { a.div(&b).unwrap() })
}

fn letter() -> impl Strategy<Value = Letter> {
    (0u8..3, 1u8..=4).prop_map(|(k, a)| match k {
        0 => Letter::X(a),
        1 => Letter::DX(a),
        _ => Letter::PD(a),
    })
}

fn element() -> impl Strategy<Value = Element> {
    prop::collection::vec((poly(), prop::collection::vec(letter(), 0..4)), 0..4).prop_map(|ts| {
        let mut e = Element::zero();
        for (c, ls) in ts {
            e.add_term(Word::from_letters(&ls), c);
        }
        e
    })
}

/// Elements whose words never put a derivative before a form.
fn plane_element() -> impl Strategy<Value = Element> {
    element().prop_map(|e| {
        let mut out = Element::zero();
        for (w, c) in e.terms() {
            let mut ls = w.letters().to_vec();
            ls.sort_by_key(|l| !l.is_form());
            out.add_term(Word::from_letters(&ls), c.clone());
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scalar_print_parse(a in scalar()) {
        let back = parse_scalar(&a.to_string(), ctx()).unwrap();
        prop_assert!(back.equals(&a), "{} -> {}", a, back);
    }

    #[test]
    fn laurent_rendering_is_canonical(a in poly()) {
        let back = parse_scalar(&a.to_string(), ctx()).unwrap();
        prop_assert_eq!(back.to_string(), a.to_string());
    }

    #[test]
    fn field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert!(a.add(&b).sub(&b).equals(&a));
        prop_assert!(a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))));
        if !b.is_zero() {
            prop_assert!(a.mul(&b).div(&b).unwrap().equals(&a));
        }
    }

    #[test]
    fn conjugation_is_an_involution(a in scalar(), b in scalar()) {
        let k = ctx();
        let cc = k.conj(&k.conj(&a).unwrap()).unwrap();
        prop_assert!(cc.equals(&a));
        let lhs = k.conj(&a.mul(&b)).unwrap();
        prop_assert!(lhs.equals(&k.conj(&a).unwrap().mul(&k.conj(&b).unwrap())));
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(), b in poly()) {
        let pt = &sample_points(ctx(), 1)[0];
        let lhs = pt.eval(&a.mul(&b)).unwrap();
        prop_assert_eq!(lhs, &pt.eval(&a).unwrap() * &pt.eval(&b).unwrap());
    }

    #[test]
    fn element_print_parse_on_normal_forms(e in plane_element()) {
        let nf = t3().normal_form(&e).unwrap();
        let text = nf.render(4);
        let back = parse_expression(&text, ctx()).unwrap();
        prop_assert!(back.sub(&nf).terms().all(|(_, c)| c.is_zero()), "{}", text);
        prop_assert_eq!(t3().normal_form(&back).unwrap().render(4), text);
    }

    #[test]
    fn normal_form_is_linear_and_idempotent(a in plane_element(), b in plane_element()) {
        let s = t3();
        let na = s.normal_form(&a).unwrap();
        let nb = s.normal_form(&b).unwrap();
        prop_assert_eq!(s.normal_form(&na).unwrap(), na.clone());
        let sum = s.normal_form(&a.add(&b)).unwrap();
        prop_assert!(sum.sub(&na.add(&nb)).terms().all(|(_, c)| c.is_zero()));
    }

    #[test]
    fn json_round_trip(a in element(), b in element()) {
        let rels = vec![NamedRelation::new(a, b)];
        let j = relations_json(&rels, 4);
        let back = relations_from_json(&j, ctx()).unwrap();
        prop_assert_eq!(relations_json(&back, 4), j);
    }
}
