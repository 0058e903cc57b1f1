use std::sync::OnceLock;

use qplane::minkowski::*;
use qplane::planealg::{Element, Letter, Word};
use qplane::scalar::{ParameterContext, Scalar};

use Letter::*;

struct Fixture {
    data: RealFormData,
    blocks: Vec<DerivedBlock>,
}

fn fx() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let data = build_real_form(&ParameterContext::minkowski()).unwrap();
        let blocks = derive_all(&data).unwrap();
        Fixture { data, blocks }
    })
}

fn rule(lhs: &[Letter]) -> &'static BlockRule {
    let w = Word::from_letters(lhs);
    fx().blocks.iter().find_map(|b| b.rule(&w)).unwrap()
}

fn parse(text: &str) -> Element {
    let (l, r) = qplane::expr::parse_relation(text, &ParameterContext::minkowski()).unwrap();
    l.sub(&r)
}

#[test]
fn block_sizes() {
    let sizes: Vec<usize> = fx().blocks.iter().map(|b| b.rules.len()).collect();
    assert_eq!(sizes, vec![6, 16, 10, 16, 6]);
}

#[test]
fn metric_in_the_real_basis() {
    let c = &fx().data.c_prime;
    let half = Scalar::from_frac(1, 2);
    assert!(c[0][0].equals(&Scalar::mu().mul(&half)));
    assert!(c[0][3].equals(&Scalar::lambda().mul(&half).neg()));
    assert!(c[3][0].equals(&Scalar::lambda().mul(&half)));
    assert!(c[3][3].equals(&Scalar::mu().mul(&half).neg()));
    assert!(c[1][1].equals(&Scalar::one()) && c[2][2].equals(&Scalar::one()));
    let rep = real_form_checks(&fx().data);
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn derived_d_vector() {
    // σ = -1 gives d = (r^-2, 1, 1, r^2); d^{1/2} = (r^-1, 1, 1, r).
    let d = &fx().data.d_half;
    assert_eq!(d[0], Scalar::r(-1));
    assert_eq!(d[3], Scalar::r(1));
    assert!(d[1].is_one() && d[2].is_one());
}

#[test]
fn spot_checks() {
    assert_eq!(rule(&[RX(3), RX(2)]).rhs, Element::letters(&[RX(2), RX(3)], Scalar::one()));
    assert!(rule(&[RX(4), RX(1)]).relation().sub(&parse("X4*X1 - X1*X4 = lam/2*(X2*X2 + X3*X3)")).is_zero());
    assert!(rule(&[RDX(1), RDX(1)]).rhs.is_zero());
    assert!(rule(&[RDX(2), RDX(2)]).relation().sub(&parse("dX2*dX2 = -lam/2*dX4*dX1")).is_zero());
    assert_eq!(rule(&[RP(3), RP(2)]).rhs, Element::letters(&[RP(2), RP(3)], Scalar::one()));
    let c = rule(&[RP(2), RX(2)]).rhs.coeff(&Word::empty());
    assert!(c.equals(&Scalar::i().mul(&Scalar::hbar()).mul(&Scalar::r(2)).neg()), "{}", c);
}

#[test]
fn fixtures_match_except_the_wedge_denominators() {
    let data = &fx().data;
    let fixtures = load_fixtures(data.ctx(), MINKOWSKI_FIXTURES).unwrap();
    assert_eq!(fixtures.len(), 54);
    let rep = compare_fixtures(data, &fx().blocks, &fixtures);
    let failed: Vec<&str> = rep.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(failed.len(), 4, "{}", rep);
    for (c, lhs) in rep.failures().zip(["dX1*dX2", "dX1*dX3", "dX2*dX4", "dX3*dX4"]) {
        assert!(c.name.starts_with("dXdX") && c.name.contains(lhs), "{}", c.name);
        assert!(c.detail.as_deref().unwrap().starts_with("oracle sides with the derivation"));
    }
    let fixed = MINKOWSKI_FIXTURES.replace("(mu^2 - lamt^2)", "(mu^2 + lamt^2)");
    let rep = compare_fixtures(data, &fx().blocks, &load_fixtures(data.ctx(), &fixed).unwrap());
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn corrupted_fixture_is_caught() {
    let data = &fx().data;
    let bad = load_fixtures(data.ctx(), "X2*dX3 = r*mu/2*dX3*X2 - r*lam/2*dX2*X3\nP3*P2 = P2*P3\n").unwrap();
    let rep = compare_fixtures(data, &fx().blocks, &bad);
    assert!(!rep.checks[0].passed);
    assert!(rep.checks[0].detail.as_deref().unwrap().starts_with("oracle sides with the derivation"));
    assert!(rep.checks[1].passed);
}

#[test]
fn fixture_parse_errors_carry_location() {
    let e = load_fixtures(&ParameterContext::minkowski(), "# c\nX1*X2 = X2*X1\nX1*(X2 = 0\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{}", e);
}

#[test]
fn numeric_oracle_agrees_at_five_points() {
    let rep = numeric_oracle(&fx().data, &fx().blocks, 5);
    assert_eq!(rep.checks.len(), 25);
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn hermiticity() {
    let rep = hermiticity_check(&fx().data, &fx().blocks);
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn classical_point_commutes() {
    let pt = classical_point();
    let xx = fx().blocks.iter().find(|b| b.block == Block::XX).unwrap();
    for r in &xx.rules {
        let mut swapped = r.lhs.letters().to_vec();
        swapped.reverse();
        let want = Word::from_letters(&swapped);
        for (w, c) in r.rhs.terms() {
            let v = pt.eval(c).unwrap();
            assert_eq!(v.is_one(), w == &want, "{}", r.lhs.render(4));
            assert!(v.is_one() || v.is_zero());
        }
    }
}

#[test]
fn basis_change_round_trip() {
    let data = &fx().data;
    let e = parse("X1*dX3*P4 - i*X2");
    assert!(data.to_real(&data.to_plane(&e)).sub(&e).is_zero());
}

#[test]
fn other_dimensions_are_rejected() {
    assert!(matches!(build_real_form(&ParameterContext::multi(5)), Err(MinkowskiError::Domain(_))));
}
