use qplane::calculus::*;
use qplane::rmatrix::{sample_points, RMatrixBundle};
use qplane::scalar::{ParameterContext, Scalar};

use DIdx::*;

fn data(ctx: &ParameterContext) -> QLieData {
    build_qlie(&RMatrixBundle::build(ctx).unwrap()).unwrap()
}

#[test]
fn qlie_sector_multi4() {
    let rep = verify_qlie(&data(&ParameterContext::multi(4))).unwrap();
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn qlie_sector_minkowski_with_conjugations() {
    let rep = verify_qlie(&data(&ParameterContext::minkowski())).unwrap();
    assert!(rep.find("chi star maps the q-Lie relations into their span").unwrap().passed);
    assert!(rep.all_passed(), "{}", rep);
}

#[test]
fn qlie_sector_odd_and_larger_n() {
    for n in [3, 5] {
        let rep = verify_qlie(&data(&ParameterContext::multi(n))).unwrap();
        assert!(rep.all_passed(), "N={} {}", n, rep);
    }
}

#[test]
fn lambda_dot_coord_component() {
    let d = data(&ParameterContext::multi(4));
    for c in 1..=4u8 {
        for e in 1..=4u8 {
            let want = if c == e { Scalar::r(-2) } else { Scalar::zero() };
            assert!(d.lambda_at(Dot, Coord(e), Coord(c), Dot).unwrap().equals(&want));
        }
    }
}

#[test]
fn bracket_at_coord_dot_is_the_dilatation_row() {
    let d = data(&ParameterContext::multi(4));
    let mut want = Comb::word(&[Coord(2), Dot], Scalar::one());
    want.add_term(vec![Dot, Coord(2)], Scalar::r(-2).neg());
    want.add_term(vec![Coord(2)], Scalar::r(-1));
    assert_eq!(d.bico(Coord(2), Dot).unwrap(), want);
}

#[test]
fn braid_at_numeric_points() {
    let ctx = ParameterContext::multi(4);
    let d = data(&ctx);
    for pt in sample_points(&ctx, 2) {
        assert_eq!(lambda_braid_at(&d, &pt).unwrap(), None);
    }
}

#[test]
fn index_outside_restricted_set_is_a_domain_error() {
    let d = data(&ParameterContext::multi(4));
    assert!(d.lambda_at(Coord(5), Dot, Dot, Dot).is_err());
    assert!(d.structure_at(Coord(0), Dot, Dot).is_err());
    assert!(d.bico(Coord(7), Circ).is_err());
}

#[test]
fn printed_twist_weight_is_not_in_the_kernel() {
    // Weighting the P_S row with 1/q_{c•} instead of 1/q_{•c} leaves a
    // nonzero image under 1 − Λ.
    let ctx = ParameterContext::multi(4);
    let b = RMatrixBundle::build(&ctx).unwrap();
    let d = build_qlie(&b).unwrap();
    let mut e = Comb::zero();
    for c in 0..4 {
        for dd in 0..4 {
            let p = b.ps.get(&[0, 1, c, dd]);
            let w = ctx.qdot(c + 1).unwrap().inv().unwrap();
            e.add_term(vec![Coord(dd as u8 + 1), Coord(c as u8 + 1)], w.mul(p));
        }
    }
    assert!(!e.is_zero());
    assert!(!d.wedge(&e).is_zero());
}

#[test]
fn dot_generators_are_fixed_by_the_conjugations() {
    let d = data(&ParameterContext::minkowski());
    let om = d.omega_star.iter().find(|(i, _)| *i == Dot).unwrap();
    assert_eq!(om.1, Comb::word(&[Dot], Scalar::one()));
    let chi = d.chi_star.iter().find(|(i, _)| *i == Dot).unwrap();
    assert_eq!(chi.1, Comb::word(&[Dot], Scalar::from_int(-1)));
}
