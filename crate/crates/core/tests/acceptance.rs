//! The eleven acceptance criteria, each at exact tolerance.
//!
//! Every criterion prints one PASS/FAIL line to stderr (uncaptured). A FAIL
//! line is accepted by the test only when the failure is exactly the known,
//! documented one; anything else fails the run.

use std::io::Write;
use std::time::Instant;

use qplane::calculus::{build_qlie, coordinates, monomials, verify_d2, verify_eta_reduction, verify_extraction, verify_partial_relations, verify_qlie, Calculus};
use qplane::expr::parse_relation;
use qplane::minkowski::{build_real_form, compare_fixtures, derive_all, hermiticity_check, load_fixtures, numeric_oracle, reduce, Block, MINKOWSKI_FIXTURES};
use qplane::planealg::{check_star_closure, compile_table, Element, Involution, Letter, Table, Word};
use qplane::report::VerificationReport;
use qplane::rmatrix::RMatrixBundle;
use qplane::scalar::{ParameterContext, Scalar};

struct Verdict {
    passed: bool,
    /// The failure matches the documented gap exactly.
    known: bool,
    detail: String,
}

impl Verdict {
    fn pass(detail: impl Into<String>) -> Self {
        Verdict { passed: true, known: false, detail: detail.into() }
    }
    fn fail(detail: impl Into<String>) -> Self {
        Verdict { passed: false, known: false, detail: detail.into() }
    }
    fn known(detail: impl Into<String>) -> Self {
        Verdict { passed: false, known: true, detail: detail.into() }
    }
    fn from_report(rep: &VerificationReport, what: &str) -> Self {
        match rep.failures().next() {
            None => Verdict::pass(format!("{}: {} checks", what, rep.checks.len())),
            Some(c) => Verdict::fail(format!("{}: `{}` failed, witness {}", what, c.name, c.witness.as_deref().unwrap_or("-"))),
        }
    }
}

fn bundle(n: usize) -> RMatrixBundle {
    RMatrixBundle::build(&ParameterContext::multi(n)).unwrap()
}

fn short(s: &str) -> String {
    s.chars().take(60).collect()
}

fn identity_suite() -> Verdict {
    for n in 3..=6 {
        let rep = bundle(n).verify(false);
        if !rep.all_passed() {
            return Verdict::from_report(&rep, &format!("N={}", n));
        }
    }
    Verdict::pass("cubic, inverse, projectors, crc/CR, braid exact for N=3..6")
}

fn projector_ranks() -> Verdict {
    for n in 3..=6 {
        let rep = bundle(n).verify(true);
        for (name, want) in [("rank-PS", n * (n + 1) / 2 - 1), ("rank-PA", n * (n - 1) / 2), ("rank-P0", 1)] {
            let c = rep.find(name).unwrap();
            if !c.passed || c.detail.as_deref() != Some(&format!("rank {}", want)) {
                return Verdict::fail(format!("N={} {}: {:?}", n, name, c.detail));
            }
        }
    }
    Verdict::pass("rank P_S = N(N+1)/2 - 1, rank P_A = N(N-1)/2, rank P_0 = 1 for N=3..6")
}

fn confluence() -> Verdict {
    let b = bundle(4);
    let run = |t: Table, c: Option<Scalar>| {
        let (_, sys) = compile_table(&b, t, c).unwrap();
        sys.check_confluence(3, &sys.alphabet())
    };
    let t2 = run(Table::T2, None);
    let t3 = run(Table::T3, None);
    let control = run(Table::T2, Some(Scalar::one()));
    let t1 = run(Table::T1, None);
    let witness = control.failures().next().and_then(|c| c.witness.clone()).unwrap_or_default();
    let word = witness.split(':').next().unwrap_or("");
    let control_ok = !control.all_passed()
        && word.matches("dx").count() == 2
        && word.split('*').filter(|s| s.starts_with('x')).count() == 1;
    if !(t2.all_passed() && t3.all_passed() && control_ok) {
        return Verdict::fail(format!("T2 {}, T3 {}, control witness `{}`", t2.all_passed(), t3.all_passed(), word));
    }
    if t1.all_passed() {
        return Verdict::pass("T1, T2, T3 confluent at degree 3; c override fails on a dx dx x triple");
    }
    let w = t1.failures().next().and_then(|c| c.witness.clone()).unwrap_or_default();
    Verdict::known(format!(
        "T2, T3 confluent and the c = 1 control fails on {}; Table 1 as printed diverges at degree 3 (first witness {})",
        word,
        w.split(':').next().unwrap_or("")
    ))
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn pbw() -> Verdict {
    for n in 3..=5 {
        let (_, sys) = compile_table(&bundle(n), Table::T3, None).unwrap();
        for d in 0..=4 {
            let got = sys.pbw_count(d);
            if got != binom(n + d - 1, d) {
                return Verdict::fail(format!("N={} d={}: {} normal monomials", n, d, got));
            }
        }
    }
    Verdict::pass("normal x-monomial counts are binomial(N+d-1, d) for d <= 4, N = 3..5")
}

fn d_squared() -> Verdict {
    let b = bundle(4);
    let t2 = verify_d2(&Calculus::new(&b, Table::T2, None).unwrap(), None);
    if !t2.all_passed() {
        return Verdict::from_report(&t2, "T2");
    }
    let c1 = Calculus::new(&b, Table::T1, None).unwrap();
    let full = verify_d2(&c1, None);
    if full.all_passed() {
        return Verdict::pass("d^2 = 0 on every degree <= 3 monomial in x, v, z for T1 and T2");
    }
    let one_x: Vec<Element> = monomials(&coordinates(4, Table::T1), 3)
        .into_iter()
        .filter(|w| w.letters().iter().filter(|l| matches!(l, Letter::X(_))).count() <= 1)
        .map(Element::word)
        .collect();
    let partial = verify_d2(&c1, Some(&one_x));
    let w = full.failures().next().and_then(|c| c.witness.clone()).unwrap_or_default();
    if partial.all_passed() {
        Verdict::known(format!(
            "T2 exact; T1 holds on monomials with at most one x but fails with two (witness {})",
            short(&w)
        ))
    } else {
        Verdict::from_report(&partial, "T1 with at most one x")
    }
}

fn operator_identities() -> Verdict {
    let b = bundle(4);
    for t in [Table::T3, Table::T2] {
        let c = Calculus::new(&b, t, None).unwrap();
        let rep = verify_partial_relations(&c, 3).unwrap();
        if !rep.all_passed() {
            return Verdict::from_report(&rep, &t.to_string());
        }
        let rep = verify_extraction(&c, 3).unwrap();
        if !rep.all_passed() {
            return Verdict::from_report(&rep, &t.to_string());
        }
    }
    let c1 = Calculus::new(&b, Table::T1, None).unwrap();
    let rep = verify_partial_relations(&c1, 3).unwrap();
    let ext = verify_extraction(&c1, 3).unwrap();
    if rep.all_passed() && ext.all_passed() {
        return Verdict::pass("all derivative rows of T1, T2, T3 hold on degree <= 3; pd_C(x^A) = delta");
    }
    let low = verify_partial_relations(&c1, 2).unwrap();
    let delta = rep.find("partial of coordinates is delta").is_some_and(|c| c.passed);
    let rows = ["pd v = r^2 q^-1 v pd", "pd z = q z pd", "pdot v = r^2 v pdot + 1", "pcirc z = r^-2 z pcirc + 1 + (r^2 - 1) v pdot"];
    let low_ok = rows.iter().all(|r| low.find(r).is_some_and(|c| c.passed));
    if delta && low_ok {
        Verdict::known(format!(
            "T2, T3 exact and pd_C(x^A) = delta; {} T1 rows fail on monomials with two x letters (the T1 x x dx overlap)",
            rep.failures().count() + ext.failures().count()
        ))
    } else {
        Verdict::from_report(&low, "T1 at degree 2")
    }
}

fn star_closure() -> Verdict {
    let b = RMatrixBundle::build(&ParameterContext::minkowski()).unwrap();
    let inv = Involution::new(&b).unwrap();
    let mut checks = 0;
    for t in [Table::T2, Table::T3] {
        let (rels, sys) = compile_table(&b, t, None).unwrap();
        let rep = check_star_closure(&rels, &sys, &inv);
        if !rep.all_passed() {
            return Verdict::from_report(&rep, &t.to_string());
        }
        checks += rep.checks.len();
    }
    Verdict::pass(format!("star images of all T2/T3 rows normal-order to zero; involutive ({} checks)", checks))
}

fn eta() -> Verdict {
    let rep = verify_eta_reduction(&bundle(4)).unwrap();
    let nonzero = rep.find("eta circ nonzero under T1").is_some_and(|c| c.passed);
    let zero = rep.find("eta circ vanishes under T2").is_some_and(|c| c.passed);
    if nonzero && zero && rep.all_passed() {
        Verdict::pass("eta circ has nonzero T1 and zero T2 normal form")
    } else {
        Verdict::from_report(&rep, "eta")
    }
}

fn qlie() -> Verdict {
    let mut rep = VerificationReport::new("");
    for ctx in [ParameterContext::multi(4), ParameterContext::minkowski()] {
        rep.merge(verify_qlie(&build_qlie(&RMatrixBundle::build(&ctx).unwrap()).unwrap()).unwrap());
    }
    let named = ["Lambda braid equation", "Cartan-Maurer nilpotency"];
    let present = named.iter().all(|n| rep.checks.iter().any(|c| c.name.ends_with(n)));
    if present && rep.all_passed() {
        Verdict::pass(format!("bracket rows, Lambda braid, Cartan-Maurer nilpotency exact ({} checks)", rep.checks.len()))
    } else {
        Verdict::from_report(&rep, "q-Lie")
    }
}

struct Minkowski {
    data: qplane::minkowski::RealFormData,
    blocks: Vec<qplane::minkowski::DerivedBlock>,
}

fn minkowski() -> Minkowski {
    let data = build_real_form(&ParameterContext::minkowski()).unwrap();
    let blocks = derive_all(&data).unwrap();
    Minkowski { data, blocks }
}

fn reproduction(m: &Minkowski) -> Verdict {
    let ctx = m.data.ctx();
    let sizes: Vec<usize> = m.blocks.iter().map(|b| b.rules.len()).collect();
    if sizes != [6, 16, 10, 16, 6] {
        return Verdict::fail(format!("block sizes {:?}", sizes));
    }
    let oracle = numeric_oracle(&m.data, &m.blocks, 5);
    if !oracle.all_passed() || oracle.checks.len() != 25 {
        return Verdict::from_report(&oracle, "numeric oracle");
    }
    let spots = [
        "X3*X2 = X2*X3",
        "X4*X1 - X1*X4 = lam/2*(X2*X2 + X3*X3)",
        "dX1*dX1 = 0",
        "dX2*dX2 = -lam/2*dX4*dX1",
        "P3*P2 = P2*P3",
    ];
    for s in spots {
        let (l, r) = parse_relation(s, ctx).unwrap();
        if !reduce(&l.sub(&r), &m.blocks).is_zero() {
            return Verdict::fail(format!("spot check `{}`", s));
        }
    }
    let px = m.blocks.iter().find(|b| b.block == Block::PX).unwrap();
    let lhs = Word::from_letters(&[Letter::RP(2), Letter::RX(2)]);
    let c = px.rule(&lhs).unwrap().rhs.coeff(&Word::empty());
    if !c.equals(&Scalar::i().mul(&Scalar::hbar()).mul(&Scalar::r(2)).neg()) {
        return Verdict::fail(format!("P2 X2 constant is {}", c));
    }
    let fixtures = load_fixtures(ctx, MINKOWSKI_FIXTURES).unwrap();
    let rep = compare_fixtures(&m.data, &m.blocks, &fixtures);
    if rep.all_passed() {
        return Verdict::pass("all blocks match the fixtures; oracle agrees at 5 points; spot checks verbatim");
    }
    let failed: Vec<_> = rep.failures().collect();
    let wedge = failed.len() == 4
        && failed.iter().all(|c| {
            c.name.starts_with("dXdX") && c.detail.as_deref().is_some_and(|d| d.starts_with("oracle sides with the derivation"))
        });
    let fixed = MINKOWSKI_FIXTURES.replace("(mu^2 - lamt^2)", "(mu^2 + lamt^2)");
    let corrected = compare_fixtures(&m.data, &m.blocks, &load_fixtures(ctx, &fixed).unwrap()).all_passed();
    if wedge && corrected {
        Verdict::known(
            "XX, PP exact; XdX, PX oracle-exact at 5 points; spot checks verbatim; \
             4 dXdX rows printed with 1/(mu^2 - lamt^2) differ, derivation and oracle give 1/(mu^2 + lamt^2)",
        )
    } else {
        Verdict::from_report(&rep, "fixtures")
    }
}

fn hermiticity(m: &Minkowski) -> Verdict {
    let rep = hermiticity_check(&m.data, &m.blocks);
    let key = "P X - r S X P = -i hbar E with no extra operator";
    if rep.all_passed() && rep.find(key).is_some() {
        Verdict::pass(format!("X, dX real; P hermitian; PX right side is -i hbar E only ({} checks)", rep.checks.len()))
    } else {
        Verdict::from_report(&rep, "hermiticity")
    }
}

#[test]
fn acceptance_criteria() {
    let m = minkowski();
    let jobs: Vec<(usize, &str, Box<dyn Fn() -> Verdict + Sync + '_>)> = vec![
        (1, "identity suite", Box::new(identity_suite)),
        (2, "projector ranks", Box::new(projector_ranks)),
        (3, "confluence", Box::new(confluence)),
        (4, "PBW counts", Box::new(pbw)),
        (5, "d^2 = 0", Box::new(d_squared)),
        (6, "operator identities", Box::new(operator_identities)),
        (7, "star closure", Box::new(star_closure)),
        (8, "eta criterion", Box::new(eta)),
        (9, "q-Lie sector", Box::new(qlie)),
        (10, "Minkowski reproduction", Box::new(|| reproduction(&m))),
        (11, "hermiticity", Box::new(|| hermiticity(&m))),
    ];
    let results: Vec<(usize, &str, Verdict, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(k, name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let v = f();
                    (*k, *name, v, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut err = std::io::stderr().lock();
    let mut unexpected = Vec::new();
    for (k, name, v, secs) in &results {
        let mark = if v.passed { "PASS" } else { "FAIL" };
        let tag = if v.known { " [known gap]" } else { "" };
        let _ = writeln!(err, "criterion {:>2} {} {} ({:.1}s): {}{}", k, mark, name, secs, v.detail, tag);
        if !v.passed && !v.known {
            unexpected.push(*k);
        }
    }
    let known: Vec<usize> = results.iter().filter(|r| r.2.known).map(|r| r.0).collect();
    let _ = writeln!(err, "acceptance: {} of 11 pass, known gaps {:?}", results.iter().filter(|r| r.2.passed).count(), known);
    assert!(unexpected.is_empty(), "unexpected failures in criteria {:?}", unexpected);
}
