//! `qplane` command-line tool.
//!
//! Exit codes: 0 when every check passes, 1 when a verification fails (the
//! report is still printed), 2 for usage, parse and domain errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qplane::calculus::{build_qlie, verify_d2, verify_eta_reduction, verify_extraction, verify_partial_relations, verify_qlie, Calculus};
use qplane::emit::{element_json, emit_relations, emit_report, latex_element, Format, NamedRelation, SCHEMA};
use qplane::expr::{parse_expression, parse_scalar, Assignments, ParseError};
use qplane::minkowski::{
    build_real_form, compare_fixtures, derive_all, derive_block, hermiticity_check, load_fixtures, numeric_oracle, real_form_checks, Block,
    MINKOWSKI_FIXTURES,
};
use qplane::planealg::{check_star_closure, compile_table, default_budget, Element, Involution, RewriteSystem, Table};
use qplane::report::VerificationReport;
use qplane::rmatrix::{sample_points, RMatrixBundle};
use qplane::scalar::{ParameterContext, Scalar};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "qplane", version, about = "Exact R-matrix, quantum-plane calculus and q-Minkowski engine")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Run the R-matrix identity suite.
    CheckRmatrix {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// One deformation parameter r instead of the twisted family.
        #[arg(long)]
        uniparametric: bool,
        /// Also rerun the suite at k exact sample points.
        #[arg(long, default_value_t = 0)]
        numeric_points: usize,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
    },
    /// Normal-order an expression in a table's algebra.
    NormalOrder {
        #[command(flatten)]
        plane: PlaneOpts,
        #[command(flatten)]
        params: ParamOpts,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
        expression: String,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        plane: PlaneOpts,
        /// Replace the constant c of the dx-dx relation.
        #[arg(long, allow_hyphen_values = true)]
        c_override: Option<String>,
        /// Use the Minkowski parameters (N = 4, real form).
        #[arg(long)]
        minkowski: bool,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
    },
    /// Derive the q-Minkowski phase-space relations.
    Minkowski {
        #[arg(long)]
        block: Option<Block>,
        /// Check the derivation: numeric oracle, bundled fixtures, hermiticity.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        params: ParamOpts,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Print the compiled rewrite rules of a table.
    Derive {
        #[command(flatten)]
        plane: PlaneOpts,
        #[arg(long, allow_hyphen_values = true)]
        c_override: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Specialise to r = q = 1 after normal ordering.
    Limit {
        #[arg(long, required = true)]
        classical: bool,
        #[command(flatten)]
        plane: PlaneOpts,
        /// Take the relations of a Minkowski block instead of an expression.
        #[arg(long, conflicts_with = "expression")]
        block: Option<Block>,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
        #[arg(required_unless_present = "block")]
        expression: Option<String>,
    },
}

#[derive(Args, Debug)]
struct PlaneOpts {
    #[arg(long, default_value = "T3", value_parser = parse_table)]
    table: Table,
    #[arg(long, default_value_t = 4)]
    n: usize,
}

#[derive(Args, Debug)]
struct ParamOpts {
    /// Exact parameter value applied after normal ordering, e.g. r=(3+4i)/5.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Json,
    Latex,
    Text,
}

impl From<Emit> for Format {
    fn from(e: Emit) -> Format {
        match e {
            Emit::Json => Format::Json,
            Emit::Latex => Format::Latex,
            Emit::Text => Format::Text,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    #[value(name = "appendixB")]
    AppendixB,
    Confluence,
    D2,
    Partials,
    Qlie,
    Eta,
    Star,
}

fn parse_table(s: &str) -> Result<Table, String> {
    s.parse().map_err(|e: qplane::planealg::PlaneError| e.to_string())
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error in `{text}` at {source}")]
    Parse { text: String, source: ParseError },
    #[error("{0}")]
    Engine(String),
}

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

/// Buffered result of one invocation.
struct Outcome {
    out: String,
    passed: bool,
}

impl Outcome {
    fn ok(out: String) -> Self {
        Outcome { out, passed: true }
    }
    fn report(rep: &VerificationReport, emit: Emit) -> Self {
        Outcome { out: emit_report(rep, emit.into()), passed: rep.all_passed() }
    }
}

fn bundle(ctx: &ParameterContext) -> Result<RMatrixBundle, CliError> {
    RMatrixBundle::build(ctx).map_err(engine)
}

fn plane_ctx(n: usize) -> Result<ParameterContext, CliError> {
    if !(3..=8).contains(&n) {
        return Err(CliError::Usage(format!("--n {} out of range 3..8", n)));
    }
    Ok(ParameterContext::multi(n))
}

fn parse_expr(text: &str, ctx: &ParameterContext) -> Result<Element, CliError> {
    parse_expression(text, ctx).map_err(|source| CliError::Parse { text: text.to_string(), source })
}

fn parse_c(text: &Option<String>, ctx: &ParameterContext) -> Result<Option<Scalar>, CliError> {
    text.as_deref()
        .map(|t| parse_scalar(t, ctx).map_err(|source| CliError::Parse { text: t.to_string(), source }))
        .transpose()
}

fn assignments(p: &ParamOpts, ctx: &ParameterContext) -> Result<Assignments, CliError> {
    let mut a = Assignments::new();
    for s in &p.set {
        a.add(s, ctx).map_err(|source| CliError::Parse { text: s.clone(), source })?;
    }
    Ok(a)
}

fn with_budget(mut sys: RewriteSystem) -> RewriteSystem {
    sys.budget = default_budget();
    sys
}

fn emit_element(e: &Element, n: usize, emit: Emit) -> String {
    match emit {
        Emit::Json => serde_json::json!({ "schema": SCHEMA, "element": element_json(e, n) }).to_string() + "\n",
        Emit::Latex => latex_element(e) + "\n",
        Emit::Text => e.render(n) + "\n",
    }
}

fn check_rmatrix(n: usize, uni: bool, k: usize, emit: Emit) -> Result<Outcome, CliError> {
    plane_ctx(n)?;
    let ctx = if uni { ParameterContext::uni(n) } else { ParameterContext::multi(n) };
    let b = bundle(&ctx)?;
    let mut rep = b.verify(true);
    let symbolic = rep.all_passed();
    for (i, pt) in sample_points(&ctx, k).iter().enumerate() {
        let mut sub = b.eval(pt).map_err(engine)?.verify(true);
        sub.title = format!("point {}", i + 1);
        let agrees = sub.all_passed() == symbolic;
        rep.merge(sub);
        rep.push(format!("point {} agrees with the symbolic verdict", i + 1), agrees, None);
    }
    Ok(Outcome::report(&rep, emit))
}

fn normal_order(plane: &PlaneOpts, params: &ParamOpts, emit: Emit, text: &str) -> Result<Outcome, CliError> {
    let ctx = plane_ctx(plane.n)?;
    let e = parse_expr(text, &ctx)?;
    let a = assignments(params, &ctx)?;
    let (_, sys) = compile_table(&bundle(&ctx)?, plane.table, None).map_err(engine)?;
    let nf = with_budget(sys).normal_form(&e).map_err(engine)?;
    let nf = a.apply(&nf).map_err(engine)?;
    Ok(Outcome::ok(emit_element(&nf, plane.n, emit)))
}

fn verify(suite: Suite, plane: &PlaneOpts, c: &Option<String>, minkowski: bool, degree: usize, emit: Emit) -> Result<Outcome, CliError> {
    let ctx = if minkowski || matches!(suite, Suite::Star) {
        if plane.n != 4 {
            return Err(CliError::Usage("Minkowski parameters need --n 4".into()));
        }
        ParameterContext::minkowski()
    } else {
        plane_ctx(plane.n)?
    };
    let c = parse_c(c, &ctx)?;
    let b = bundle(&ctx)?;
    let calc = || Calculus::new(&b, plane.table, c.clone()).map_err(engine);
    let rep = match suite {
        Suite::AppendixB => b.verify(true),
        Suite::Confluence => {
            let (_, sys) = compile_table(&b, plane.table, c.clone()).map_err(engine)?;
            let sys = with_budget(sys);
            sys.check_confluence(degree, &sys.alphabet())
        }
        Suite::D2 => verify_d2(&calc()?, None),
        Suite::Partials => {
            let k = calc()?;
            let mut rep = verify_partial_relations(&k, degree).map_err(engine)?;
            rep.merge(verify_extraction(&k, degree).map_err(engine)?);
            rep
        }
        Suite::Qlie => verify_qlie(&build_qlie(&b).map_err(engine)?).map_err(engine)?,
        Suite::Eta => verify_eta_reduction(&b).map_err(engine)?,
        Suite::Star => {
            let inv = Involution::new(&b).map_err(engine)?;
            let (rels, sys) = compile_table(&b, plane.table, c.clone()).map_err(engine)?;
            check_star_closure(&rels, &with_budget(sys), &inv)
        }
    };
    Ok(Outcome::report(&rep, emit))
}

fn minkowski(block: Option<Block>, check: bool, params: &ParamOpts, emit: Emit) -> Result<Outcome, CliError> {
    let ctx = ParameterContext::minkowski();
    let a = assignments(params, &ctx)?;
    let data = build_real_form(&ctx).map_err(engine)?;
    if check {
        // hermiticity needs every block, whatever the selection
        let all = derive_all(&data).map_err(engine)?;
        let blocks: Vec<_> = all.iter().filter(|d| block.map_or(true, |b| d.block == b)).cloned().collect();
        let fixtures = load_fixtures(&ctx, MINKOWSKI_FIXTURES).map_err(engine)?;
        let fixtures: Vec<_> = match block {
            Some(b) => fixtures.into_iter().filter(|f| f.lhs.terms().any(|(w, _)| Block::of_word(w) == Some(b))).collect(),
            None => fixtures,
        };
        let mut rep = VerificationReport::new("minkowski");
        rep.merge(real_form_checks(&data));
        rep.merge(numeric_oracle(&data, &blocks, 5));
        rep.merge(compare_fixtures(&data, &blocks, &fixtures));
        rep.merge(hermiticity_check(&data, &all));
        return Ok(Outcome::report(&rep, emit));
    }
    let blocks = match block {
        Some(b) => vec![derive_block(&data, b).map_err(engine)?],
        None => derive_all(&data).map_err(engine)?,
    };
    let mut rels = Vec::new();
    for b in &blocks {
        for r in &b.rules {
            let rhs = a.apply(&r.rhs).map_err(engine)?;
            rels.push(NamedRelation::from_word(None, &r.lhs, &rhs));
        }
    }
    Ok(Outcome::ok(emit_relations(&rels, 4, emit.into())))
}

fn derive(plane: &PlaneOpts, c: &Option<String>, emit: Emit) -> Result<Outcome, CliError> {
    let ctx = plane_ctx(plane.n)?;
    let c = parse_c(c, &ctx)?;
    let (_, sys) = compile_table(&bundle(&ctx)?, plane.table, c).map_err(engine)?;
    let rels: Vec<_> = sys.rules().iter().map(|r| NamedRelation::from_word(None, &r.lhs, &r.rhs)).collect();
    Ok(Outcome::ok(emit_relations(&rels, plane.n, emit.into())))
}

fn limit(plane: &PlaneOpts, block: Option<Block>, emit: Emit, text: Option<&str>) -> Result<Outcome, CliError> {
    if let Some(b) = block {
        let ctx = ParameterContext::minkowski();
        let a = Assignments::classical(&ctx);
        let data = build_real_form(&ctx).map_err(engine)?;
        let d = derive_block(&data, b).map_err(engine)?;
        let mut rels = Vec::new();
        for r in &d.rules {
            rels.push(NamedRelation::from_word(None, &r.lhs, &a.apply(&r.rhs).map_err(engine)?));
        }
        return Ok(Outcome::ok(emit_relations(&rels, 4, emit.into())));
    }
    let ctx = plane_ctx(plane.n)?;
    let e = parse_expr(text.unwrap_or_default(), &ctx)?;
    let (_, sys) = compile_table(&bundle(&ctx)?, plane.table, None).map_err(engine)?;
    let nf = with_budget(sys).normal_form(&e).map_err(engine)?;
    let nf = Assignments::classical(&ctx).apply(&nf).map_err(engine)?;
    Ok(Outcome::ok(emit_element(&nf, plane.n, emit)))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.verb {
        Verb::CheckRmatrix { n, uniparametric, numeric_points, emit } => check_rmatrix(n, uniparametric, numeric_points, emit),
        Verb::NormalOrder { plane, params, emit, expression } => normal_order(&plane, &params, emit, &expression),
        Verb::Verify { suite, plane, c_override, minkowski, degree, emit } => verify(suite, &plane, &c_override, minkowski, degree, emit),
        Verb::Minkowski { block, verify, params, emit } => minkowski(block, verify, &params, emit),
        Verb::Derive { plane, c_override, emit } => derive(&plane, &c_override, emit),
        Verb::Limit { plane, block, emit, expression, .. } => limit(&plane, block, emit, expression.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.out);
            ExitCode::from(if o.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
