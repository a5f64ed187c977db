//! Command-line surface: construct (λ, μ) contexts, emit and validate
//! generator families, check user-supplied elements, print λ-brackets and
//! run the randomized axiom suite.
//!
//! Exit codes: 0 all requested verifications pass, 1 a verification failed,
//! 2 usage or parse error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::process::ExitCode;

use walgebra::axioms::run_axiom_suite;
use walgebra::brst::build_context;
use walgebra::centralizer::{bilinear_form, graded_data, CentElt, GradedData};
use walgebra::finite_w::{
    minimal_generators, principal_generators, validate_generating_set, GenSetReport,
};
use walgebra::pyramid::{parse_parts, Pyramid};
use walgebra::text::{parse_uea, parse_vstate};
use walgebra::uea::{is_invariant, UEAElement};
use walgebra::Error;

#[derive(Parser)]
#[command(
    name = "walgebra",
    about = "Exact construction and verification of generalized finite and affine W-algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ContextArgs {
    /// Partition λ, weakly increasing, e.g. `2,3,5`
    #[arg(long)]
    lambda: String,
    /// Partition μ of the number of rows of λ, e.g. `1,2`
    #[arg(long)]
    mu: Option<String>,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Finite,
    Affine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Shape {
    Principal,
    Minimal,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the context: dimensions, 𝖾, χ, Gram data, ker φ profile
    Describe(ContextArgs),
    /// Emit a generator family and validate it
    Generators {
        #[arg(value_enum)]
        side: Side,
        #[arg(value_enum)]
        shape: Shape,
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Check an element file for invariance (enveloping algebra) or
    /// closedness (vertex states)
    Check {
        file: std::path::PathBuf,
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Print the λ-bracket of two vertex element files
    Bracket {
        file_a: std::path::PathBuf,
        file_b: std::path::PathBuf,
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Run the randomized λ-bracket axiom suite on the reduced complex
    Axioms {
        #[command(flatten)]
        ctx: ContextArgs,
        /// Conformal-weight cap for random states
        #[arg(long, default_value_t = 4)]
        weight_bound: i64,
        /// Number of randomized cases
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Seed for the deterministic generator
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

struct Report {
    text: String,
    json: Value,
    verified: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (ctx_args, report) = match &cli.command {
        Command::Describe(args) => (args, run_describe(args)),
        Command::Generators { side, shape, ctx } => (ctx, run_generators(*side, *shape, ctx)),
        Command::Check { file, ctx } => (ctx, run_check(file, ctx)),
        Command::Bracket {
            file_a,
            file_b,
            ctx,
        } => (ctx, run_bracket(file_a, file_b, ctx)),
        Command::Axioms {
            ctx,
            weight_bound,
            cases,
            seed,
        } => (ctx, run_axioms(ctx, *weight_bound, *cases, *seed)),
    };
    match report {
        Ok(report) => {
            let body = match ctx_args.format {
                Format::Text => report.text,
                Format::Json => serde_json::to_string_pretty(&report.json).unwrap(),
            };
            if let Some(path) = &ctx_args.output {
                if let Err(e) = std::fs::write(path, body + "\n") {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            } else {
                println!("{}", body);
            }
            if report.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

fn build_data(args: &ContextArgs, default_mu: Option<Vec<i64>>) -> Result<GradedData, Error> {
    let lambda = parse_parts(&args.lambda)?;
    let mu = match (&args.mu, default_mu) {
        (Some(m), _) => parse_parts(m)?,
        (None, Some(parts)) => Pyramid::build(&parts)?,
        (None, None) => {
            return Err(Error::ParseError {
                at: 0,
                msg: "--mu is required for this command".into(),
            })
        }
    };
    graded_data(&lambda, &mu)
}

fn context_json(data: &GradedData) -> Value {
    json!({
        "lambda": data.lambda().parts(),
        "mu": data.mu().parts(),
        "N": data.lambda().boxes(),
        "n": data.lambda().rows(),
    })
}

fn run_describe(args: &ContextArgs) -> Result<Report, Error> {
    let data = build_data(args, None)?;
    let mut text = String::new();
    let lambda = data.lambda();
    text += &format!("context: lambda = ({}), mu = ({})\n", lambda, data.mu());
    text += &format!(
        "N = {}, n = {}, dim a = {}, dim n = {}, dim p = {}, dim a(0) = {}\n",
        lambda.boxes(),
        lambda.rows(),
        data.dim(),
        data.dim_n(),
        data.dim_p(),
        data.a0_basis().len()
    );
    let n_syms: Vec<String> = data.n_basis().iter().map(|i| i.to_string()).collect();
    text += &format!("S_(lambda,mu): {{{}}}\n", n_syms.join(", "));
    text += &format!("e = {}\n", data.e_elt());
    text += &format!("chi = {}\n", data.chi());
    text += &format!("h = {}\n", data.h());
    let a0 = data.a0_basis();
    text += "gram matrix on a(0) (nonzero entries):\n";
    let mut gram_entries = Vec::new();
    for &x in &a0 {
        for &y in &a0 {
            let v = bilinear_form(lambda, &CentElt::gen(x), &CentElt::gen(y));
            if v != walgebra::scalar::qi(0) {
                text += &format!("  ({} | {}) = {}\n", x, y, v);
                gram_entries.push(json!({
                    "x": x.to_string(), "y": y.to_string(), "value": v.to_string(),
                }));
            }
        }
    }
    // the form is only guaranteed symmetric and supported on degree zero;
    // full ad-invariance is an observation, re-checked per context here
    let mut invariance: Option<usize> = None;
    if data.dim() <= 30 {
        let basis: Vec<CentElt> = walgebra::centralizer::basis_indices(lambda)
            .into_iter()
            .map(CentElt::gen)
            .collect();
        let mut violations = 0usize;
        for x in &basis {
            for y in &basis {
                let xy = data.bracket(x, y);
                for z in &basis {
                    let lhs = bilinear_form(lambda, &xy, z);
                    let rhs = bilinear_form(lambda, x, &data.bracket(y, z));
                    if lhs != rhs {
                        violations += 1;
                    }
                }
            }
        }
        invariance = Some(violations);
        text += &format!(
            "ad-invariance ([x,y]|z) = (x|[y,z]) on basis triples: {}\n",
            if violations == 0 {
                "holds".to_string()
            } else {
                format!("{} violations", violations)
            }
        );
    } else {
        text += "ad-invariance check skipped (dim a > 30)\n";
    }
    let ker = data.ker_phi_basis();
    let mut hist = std::collections::BTreeMap::new();
    for (_, w) in &ker {
        *hist.entry(*w).or_insert(0usize) += 1;
    }
    let hist_str: Vec<String> = hist.iter().map(|(w, c)| format!("{}:{}", w, c)).collect();
    text += &format!(
        "ker phi: dim {} (weight histogram {})\n",
        ker.len(),
        hist_str.join(", ")
    );
    let mut ker_json = Vec::new();
    for (elt, w) in &ker {
        text += &format!("  weight {}: {}\n", w, elt);
        ker_json.push(json!({
            "name": format!("ker_phi[{}]", ker_json.len()),
            "weight": w,
            "expression": elt.to_string(),
        }));
    }
    text.pop();
    let jsonv = json!({
        "context": context_json(&data),
        "results": [{
            "name": "describe",
            "e": data.e_elt().to_string(),
            "chi": data.chi().to_string(),
            "h": data.h().to_string(),
            "dim_a": data.dim(),
            "dim_n": data.dim_n(),
            "dim_a0": data.a0_basis().len(),
            "gram": gram_entries,
            "ad_invariance_violations": invariance,
            "ker_phi": ker_json,
        }],
    });
    Ok(Report {
        text,
        json: jsonv,
        verified: true,
    })
}

fn report_json(report: &GenSetReport) -> Value {
    json!({
        "pass": report.pass,
        "check": report.check_name,
        "expected_histogram": report
            .expected_histogram
            .iter()
            .map(|(w, c)| json!({"weight": w, "count": c}))
            .collect::<Vec<_>>(),
        "actual_histogram": report
            .actual_histogram
            .iter()
            .map(|(w, c)| json!({"weight": w, "count": c}))
            .collect::<Vec<_>>(),
        "ranks": report
            .ranks
            .iter()
            .map(|(w, (rank, count))| json!({"weight": w, "rank": rank, "count": count}))
            .collect::<Vec<_>>(),
        "linear_parts_in_kernel": report.linear_parts_in_kernel,
    })
}

fn default_mu_for(shape: Shape, lambda_str: &str) -> Result<Vec<i64>, Error> {
    let lambda = parse_parts(lambda_str)?;
    let n = lambda.rows();
    Ok(match shape {
        Shape::Principal => vec![n as i64],
        Shape::Minimal => {
            let mut v = vec![1i64; n.saturating_sub(2)];
            v.push(2);
            v
        }
    })
}

fn run_generators(side: Side, shape: Shape, args: &ContextArgs) -> Result<Report, Error> {
    let data = build_data(args, Some(default_mu_for(shape, &args.lambda)?))?;
    let mut text = String::new();
    let mut results = Vec::new();
    let verified;
    match side {
        Side::Finite => {
            let elements: Vec<(String, UEAElement)> = match shape {
                Shape::Principal => principal_generators(&data)?
                    .into_iter()
                    .map(|g| (format!("Psi_{}^({})", g.m, g.r), g.psi))
                    .collect(),
                Shape::Minimal => {
                    let gens = minimal_generators(&data)?;
                    gens.into_iter()
                        .enumerate()
                        .map(|(i, g)| (format!("v{}", i + 1), g))
                        .collect()
                }
            };
            for (name, g) in &elements {
                let (ok, witness) = is_invariant(&data, g);
                let weight = g.kazhdan_degree(&data).unwrap_or(0);
                text += &format!(
                    "{} (weight {}): {}\n  invariant: {}\n",
                    name,
                    weight,
                    g,
                    if ok { "yes" } else { "NO" }
                );
                if let Some((n, residue)) = witness {
                    text += &format!("  witness: ad({}) residue {}\n", n, residue);
                }
                results.push(json!({
                    "name": name,
                    "weight": weight,
                    "expression": g.to_string(),
                    "checks": {"invariant": ok},
                }));
            }
            let report = validate_generating_set(
                &data,
                &elements.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>(),
            );
            text += &format!("{}", report);
            verified = report.pass;
            results.push(json!({"name": "validation", "report": report_json(&report)}));
        }
        Side::Affine => {
            let ctx = build_context(&data)?;
            // For n = 2 the principal shape (2) coincides with the minimal
            // shape (1,…,1,2); no other explicit affine principal family is
            // constructed.
            if shape == Shape::Principal && data.lambda().rows() != 2 {
                return Err(Error::BadMu(
                    "no explicit affine principal family beyond n = 2; \
                     use `generators affine minimal` for mu = (1,…,1,2)"
                        .into(),
                ));
            }
            let elements: Vec<(String, walgebra::vertex::VState)> = ctx
                .minimal_affine_generators()?
                .into_iter()
                .enumerate()
                .map(|(i, g)| (format!("w{}", i + 1), g))
                .collect();
            let mut all_closed = true;
            for (name, g) in &elements {
                let residue = ctx.apply_q_reduced(g)?;
                let closed = residue.is_zero();
                all_closed &= closed;
                let weight = ctx.reduced_table().conformal_weight(g);
                text += &format!(
                    "{} (weight {}): {}\n  closed: {}\n",
                    name,
                    weight.map_or("mixed".to_string(), |w| w.to_string()),
                    ctx.reduced_table().display(g),
                    if closed { "yes" } else { "NO" }
                );
                if !closed {
                    text += &format!("  residue: {}\n", ctx.reduced_table().display(&residue));
                }
                results.push(json!({
                    "name": name,
                    "weight": weight,
                    "expression": ctx.reduced_table().display(g),
                    "checks": {"closed": closed},
                }));
            }
            let report = ctx.validate_affine_generating_set(
                &elements.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>(),
            )?;
            text += &format!("{}", report);
            verified = all_closed && report.pass;
            results.push(json!({"name": "validation", "report": report_json(&report)}));
        }
    }
    Ok(Report {
        text,
        json: json!({"context": context_json(&data), "results": results}),
        verified,
    })
}

/// Vertex states are recognized by their generator tokens; everything else
/// parses as an enveloping-algebra element.
fn looks_like_vertex(src: &str) -> bool {
    src.contains("J[") || src.contains("Phi") || src.contains("A[") || src.contains(":(")
}

fn looks_like_full_complex(src: &str) -> bool {
    src.contains("A[") || (src.contains("Phi[") && !src.contains("J["))
}

fn run_check(file: &std::path::Path, args: &ContextArgs) -> Result<Report, Error> {
    let src = std::fs::read_to_string(file).map_err(|e| Error::ParseError {
        at: 0,
        msg: format!("cannot read {}: {}", file.display(), e),
    })?;
    let data = build_data(args, None)?;
    let mut results = Vec::new();
    let mut text = String::new();
    let verified;
    if looks_like_vertex(&src) {
        let ctx = build_context(&data)?;
        if looks_like_full_complex(&src) {
            let state = parse_vstate(ctx.full_table(), &src)?;
            let residue = ctx.apply_q_full(&state)?;
            verified = residue.is_zero();
            text += &format!(
                "state: {}\nQ-closed in the full complex: {}\n",
                ctx.full_table().display(&state),
                if verified { "yes" } else { "NO" }
            );
            if !verified {
                text += &format!("residue: {}\n", ctx.full_table().display(&residue));
            }
            results.push(json!({
                "name": "check",
                "weight": ctx.full_table().conformal_weight(&state),
                "expression": ctx.full_table().display(&state),
                "checks": {"closed": verified},
            }));
        } else {
            let state = parse_vstate(ctx.reduced_table(), &src)?;
            let residue = ctx.apply_q_reduced(&state)?;
            verified = residue.is_zero();
            text += &format!(
                "state: {}\nQ~-closed: {}\n",
                ctx.reduced_table().display(&state),
                if verified { "yes" } else { "NO" }
            );
            if !verified {
                text += &format!("residue: {}\n", ctx.reduced_table().display(&residue));
            }
            results.push(json!({
                "name": "check",
                "weight": ctx.reduced_table().conformal_weight(&state),
                "expression": ctx.reduced_table().display(&state),
                "checks": {"closed": verified},
            }));
        }
    } else {
        let x = parse_uea(&data, &src)?;
        let (ok, witness) = is_invariant(&data, &x);
        verified = ok;
        text += &format!(
            "element: {}\ninvariant: {}\n",
            x,
            if ok { "yes" } else { "NO" }
        );
        if let Some((n, residue)) = witness {
            text += &format!("witness: ad({}) residue {}\n", n, residue);
        }
        results.push(json!({
            "name": "check",
            "weight": x.kazhdan_degree(&data),
            "expression": x.to_string(),
            "checks": {"invariant": ok},
        }));
    }
    text.pop();
    Ok(Report {
        text,
        json: json!({"context": context_json(&data), "results": results}),
        verified,
    })
}

fn run_bracket(
    file_a: &std::path::Path,
    file_b: &std::path::Path,
    args: &ContextArgs,
) -> Result<Report, Error> {
    let read = |p: &std::path::Path| -> Result<String, Error> {
        std::fs::read_to_string(p).map_err(|e| Error::ParseError {
            at: 0,
            msg: format!("cannot read {}: {}", p.display(), e),
        })
    };
    let src_a = read(file_a)?;
    let src_b = read(file_b)?;
    let data = build_data(args, None)?;
    let ctx = build_context(&data)?;
    let full = looks_like_full_complex(&src_a) || looks_like_full_complex(&src_b);
    let table = if full {
        ctx.full_table()
    } else {
        ctx.reduced_table()
    };
    let a = parse_vstate(table, &src_a)?;
    let b = parse_vstate(table, &src_b)?;
    let br = table.lambda_bracket(&a, &b)?;
    let text = format!(
        "[A λ B] = {}\nwhere\n  A = {}\n  B = {}",
        table.display_lambda(&br),
        table.display(&a),
        table.display(&b)
    );
    let coeffs: Vec<Value> = br
        .coeffs()
        .map(|(exp, st)| json!({"lambda_power": exp, "state": table.display(st)}))
        .collect();
    Ok(Report {
        text,
        json: json!({
            "context": context_json(&data),
            "results": [{"name": "bracket", "expression": table.display_lambda(&br), "coefficients": coeffs}],
        }),
        verified: true,
    })
}

fn run_axioms(args: &ContextArgs, weight_bound: i64, cases: usize, seed: u64) -> Result<Report, Error> {
    let data = build_data(args, None)?;
    let ctx = build_context(&data)?;
    let report = run_axiom_suite(ctx.reduced_table(), weight_bound, cases, seed)?;
    let verified = report.pass();
    let text = format!("{}", report);
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|(name, count)| json!({"axiom": name, "checks": count}))
        .collect();
    Ok(Report {
        text,
        json: json!({
            "context": context_json(&data),
            "results": [{
                "name": "axioms",
                "cases": report.cases,
                "seed": seed,
                "weight_bound": weight_bound,
                "checks": checks,
                "failures": report.failures,
                "pass": verified,
            }],
        }),
        verified,
    })
}
