use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use newton_spectra::brieskorn::ConnectionPencil;
use newton_spectra::parse::{infer_variables, laurent_from_json, parse_laurent};
use newton_spectra::report::{invariant_suite, run_pipeline, FullReport, Outcome, ReportOptions, Stage, DEFAULT_SEED};
use newton_spectra::scalar::{format_rational, parse_rational};
use newton_spectra::{AnalysisError, Laurent, QMatrix};

#[derive(Parser)]
#[command(
    name = "newton-spectra",
    version,
    about = "Newton polytope, spectrum and Birkhoff data of Laurent polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Polynomial such as `u1+u2+u1^-1*u2^-1`, a JSON term list, or `-` for stdin.
    #[arg(global = true, allow_hyphen_values = true)]
    expr: Option<String>,

    /// Read the polynomial from a file.
    #[arg(long, global = true)]
    file: Option<std::path::PathBuf>,

    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Comma-separated variable names, e.g. `u,v`.
    #[arg(long, global = true, value_delimiter = ',')]
    vars: Option<Vec<String>>,

    /// Skip the nondegeneracy certificate.
    #[arg(long, global = true)]
    assume_nondegenerate: bool,

    /// Seed for the modular nondegeneracy certificates and sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Newton-degree cutoff for the sampled invariants of `check`.
    #[arg(long, global = true, default_value = "3")]
    max_level: String,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq, Debug)]
enum Command {
    /// Vertices, facet forms and scale of the Newton polytope.
    Polytope,
    /// Milnor number.
    Mu,
    /// Monomial basis of the Jacobian quotient adapted to the Newton filtration.
    Basis,
    /// Spectrum at infinity and spectral polynomial.
    Spectrum,
    /// Matrices of t = θ²∂_θ on the Brieskorn lattice.
    Pencil,
    /// Birkhoff normal form and its V/V⁺ checks.
    Birkhoff,
    /// Euler field and homogeneity constant.
    Frobenius,
    /// Everything above.
    Analyze,
    /// Runs the invariant suite on the input.
    Check,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let code = run(&args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}

/// Runs one command; returns the exit status.
fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(args, out, err) {
        Ok(code) => code,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn read_source(expr: Option<String>, file: Option<std::path::PathBuf>) -> Result<String, (u8, String)> {
    match (expr, file) {
        (Some(_), Some(_)) => Err((2, "give either an expression or --file, not both".into())),
        (Some(e), None) if e != "-" => Ok(e),
        (None, Some(p)) => std::fs::read_to_string(&p).map_err(|e| (2, format!("{}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| (2, format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn parse_input(text: &str, vars: Option<&[String]>) -> Result<(Laurent, Vec<String>), (u8, String)> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let f = laurent_from_json(trimmed).map_err(|e| (2, e.to_string()))?;
        let names = match vars {
            Some(v) if v.len() == f.arity() => v.to_vec(),
            Some(v) => return Err((2, format!("{} names given for {} variables", v.len(), f.arity()))),
            None => newton_spectra::laurent::default_names(f.arity()),
        };
        return Ok((f, names));
    }
    let names = match vars {
        Some(v) => v.to_vec(),
        None => infer_variables(trimmed).map_err(|e| (2, e.to_string()))?,
    };
    let f = parse_laurent(trimmed, Some(&names)).map_err(|e| (2, e.to_string()))?;
    Ok((f, names))
}

fn execute(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, (u8, String)> {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return Ok(0);
        }
        Err(e) => return Err((2, e.to_string().trim_end().trim_start_matches("error: ").to_string())),
    };
    let text = read_source(cli.expr.clone(), cli.file.clone())?;
    let (f, vars) = parse_input(&text, cli.vars.as_deref())?;
    let opts = ReportOptions {
        seed: cli.seed,
        assume_nondegenerate: cli.assume_nondegenerate,
    };

    if cli.command == Command::Check {
        let level = parse_rational(&cli.max_level).map_err(|e| (2, format!("--max-level: {e}")))?;
        let results = invariant_suite(&f, &vars, opts, &level);
        let failed = results.iter().any(|r| r.outcome == Outcome::Fail);
        if cli.json {
            let items: Vec<_> = results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "name": r.name,
                        "outcome": match r.outcome { Outcome::Pass => "pass", Outcome::Fail => "fail", Outcome::Info => "info" },
                        "detail": r.detail,
                    })
                })
                .collect();
            emit(
                out,
                &pretty(&serde_json::json!({ "schema": newton_spectra::report::SCHEMA, "checks": items })),
            );
        } else {
            for r in &results {
                let tag = match r.outcome {
                    Outcome::Pass => "PASS",
                    Outcome::Fail => "FAIL",
                    Outcome::Info => "INFO",
                };
                if r.detail.is_empty() {
                    emit(out, &format!("{tag} {}", r.name));
                } else {
                    emit(out, &format!("{tag} {} ({})", r.name, r.detail));
                }
            }
        }
        return Ok(if failed { 1 } else { 0 });
    }

    let stage = match cli.command {
        Command::Polytope => Stage::Polytope,
        Command::Mu | Command::Basis => Stage::Jacobian,
        Command::Spectrum => Stage::Spectrum,
        Command::Pencil => Stage::Pencil,
        Command::Birkhoff => Stage::Birkhoff,
        Command::Frobenius | Command::Analyze | Command::Check => Stage::Frobenius,
    };
    let report = run_pipeline(&f, &vars, opts, stage);

    if cli.json {
        emit(out, &pretty(&report.to_json()));
    } else {
        let text = render_text(cli.command, &report);
        if !text.is_empty() {
            emit(out, &text);
        }
    }

    if let Some(g) = &report.failure {
        let _ = writeln!(err, "error: {}", g.error);
        return Ok(match g.error {
            AnalysisError::Internal(_) => 1,
            _ => 2,
        });
    }
    if let Some(o) = report.obstruction() {
        let _ = writeln!(err, "obstruction: {o}");
        if matches!(cli.command, Command::Birkhoff | Command::Frobenius) {
            return Ok(3);
        }
    }
    Ok(0)
}

/// Writes a line; a closed pipe is not an error.
fn emit(out: &mut dyn Write, s: &str) {
    let _ = writeln!(out, "{s}");
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json")
}

fn render_matrix(m: &QMatrix, indent: &str) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|r| m.row(r).iter().map(format_rational).collect())
        .collect();
    let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
        let _ = writeln!(out, "{indent}[{}]", padded.join(" "));
    }
    out.pop();
    out
}

fn render_pencil(p: &ConnectionPencil) -> String {
    let mut out = String::new();
    for (k, m) in p.matrices.iter().enumerate() {
        let _ = writeln!(out, "B_{k} =\n{}", render_matrix(m, "  "));
    }
    out.pop();
    out
}

fn section_polytope(r: &FullReport, out: &mut String) {
    let Some(p) = &r.polytope else { return };
    let _ = writeln!(out, "dimension: {} (arity {})", p.dimension(), p.arity());
    let _ = writeln!(out, "vertices:");
    for v in p.vertices() {
        let _ = writeln!(out, "  {:?}", v.entries());
    }
    let _ = writeln!(out, "facets (L(k) = Σ a_i k_i, L = 1 on the facet):");
    for fc in p.facets() {
        let coeffs: Vec<String> = fc.coefficients.iter().map(format_rational).collect();
        let _ = writeln!(out, "  [{}] on vertices {:?}", coeffs.join(", "), fc.vertex_indices);
    }
    let _ = writeln!(out, "scale: {}", p.scale());
    let _ = writeln!(out, "convenient: {}", p.is_convenient());
    if let Some(d) = p.diagnostic() {
        let _ = writeln!(out, "diagnostic: {d}");
    }
    if let Some(mu) = r.milnor_volume {
        let _ = writeln!(out, "mu: {mu}");
    }
}

fn section_basis(r: &FullReport, out: &mut String) {
    let Some(alg) = &r.algebra else { return };
    let b = alg.basis();
    for (i, e) in b.entries.iter().enumerate() {
        let m = Laurent::monomial(e.clone(), num_traits_one());
        let _ = writeln!(
            out,
            "{i}: {}  (degree {})",
            m.display(&r.vars),
            format_rational(&b.degree(i))
        );
    }
}

fn num_traits_one() -> newton_spectra::Rational {
    newton_spectra::Rational::from_integer(1.into())
}

fn section_birkhoff(r: &FullReport, out: &mut String) {
    match &r.birkhoff {
        None => {}
        Some(Err(o)) => {
            let _ = writeln!(out, "obstruction: {o}");
            let _ = writeln!(out, "unsatisfiable equations: {:?}", o.unsatisfiable);
        }
        Some(Ok(sol)) => {
            let _ = writeln!(out, "A_0 =\n{}", render_matrix(&sol.a0, "  "));
            let _ = writeln!(out, "A_inf =\n{}", render_matrix(&sol.ainf, "  "));
            for (k, p) in sol.gauge.matrices.iter().enumerate().skip(1) {
                let _ = writeln!(out, "P_{k} =\n{}", render_matrix(p, "  "));
            }
            let cp: Vec<String> = sol.a0.charpoly().coeffs().iter().map(format_rational).collect();
            let _ = writeln!(out, "char(A_0) coefficients (low to high): {}", cp.join(", "));
            match &sol.ainf_eigenvalues {
                Some(e) => {
                    let e: Vec<String> = e.iter().map(format_rational).collect();
                    let _ = writeln!(out, "eigenvalues(A_inf): {}", e.join(", "));
                }
                None => {
                    let _ = writeln!(out, "eigenvalues(A_inf): not all rational");
                }
            }
            let _ = writeln!(
                out,
                "V-solution: {}  V+-solution: {}  A_inf semisimple: {}",
                sol.is_v_solution, sol.is_v_plus, sol.ainf_semisimple
            );
            for o in r.opposite.iter().flatten() {
                let _ = writeln!(
                    out,
                    "gr_{}: dim {}, opposite {}, N nilpotent {}, (B)-opposed {}",
                    o.beta,
                    o.dim,
                    o.opposite(),
                    o.nilpotent,
                    o.b_opposed
                );
            }
        }
    }
}

fn section_frobenius(r: &FullReport, out: &mut String) {
    let Some(fd) = &r.frobenius else { return };
    let ex: Vec<String> = fd.exponents.iter().map(format_rational).collect();
    let c: Vec<String> = fd.c.iter().map(format_rational).collect();
    let _ = writeln!(
        out,
        "primitive: basis entry {} (alpha_min = {})",
        fd.primitive_index,
        format_rational(&fd.alpha_min)
    );
    let _ = writeln!(out, "exponents: {}", ex.join(", "));
    let _ = writeln!(out, "c: {}", c.join(", "));
    let _ = writeln!(out, "D = {}", format_rational(&fd.homogeneity));
    let _ = writeln!(out, "E = {}", fd.euler_field);
    if !fd.pencil_normalized {
        let _ = writeln!(out, "caveat: pencil not normalized");
    }
}

fn render_text(cmd: Command, r: &FullReport) -> String {
    let mut out = String::new();
    match cmd {
        Command::Polytope => section_polytope(r, &mut out),
        Command::Mu => {
            if r.failure.is_none() {
                if let Some(mu) = r.milnor_volume {
                    let _ = writeln!(out, "{mu}");
                }
            }
        }
        Command::Basis => section_basis(r, &mut out),
        Command::Spectrum => {
            if let Some(s) = &r.spectrum {
                let _ = writeln!(out, "{s}");
            }
        }
        Command::Pencil => {
            if let Some(p) = &r.pencil {
                let _ = writeln!(out, "{}", render_pencil(p));
            }
        }
        Command::Birkhoff => {
            if let (Some(p), Some(Err(_))) = (&r.pencil, &r.birkhoff) {
                let _ = writeln!(out, "{}", render_pencil(p));
            }
            section_birkhoff(r, &mut out);
        }
        Command::Frobenius => section_frobenius(r, &mut out),
        Command::Analyze | Command::Check => {
            let _ = writeln!(out, "f = {}", r.polynomial.display(&r.vars));
            let _ = writeln!(out, "\n# polytope");
            section_polytope(r, &mut out);
            if let Some(c) = &r.certificate {
                let _ = writeln!(
                    out,
                    "\n# nondegeneracy\n{} faces certified, failure probability ≤ {:e}",
                    c.faces.len(),
                    c.failure_probability_bound
                );
            }
            if r.algebra.is_some() {
                let _ = writeln!(out, "\n# basis");
                section_basis(r, &mut out);
            }
            if let Some(s) = &r.spectrum {
                let _ = writeln!(out, "\n# spectrum\n{s}");
            }
            if let Some(v) = &r.variance {
                let _ = writeln!(
                    out,
                    "variance: {} {} {}",
                    format_rational(&v.lhs),
                    if v.satisfied { ">=" } else { "<" },
                    format_rational(&v.rhs)
                );
            }
            if let Some(p) = &r.pencil {
                let _ = writeln!(out, "\n# pencil\n{}", render_pencil(p));
            }
            if r.birkhoff.is_some() {
                let _ = writeln!(out, "\n# birkhoff");
                section_birkhoff(r, &mut out);
            }
            if r.frobenius.is_some() {
                let _ = writeln!(out, "\n# frobenius");
                section_frobenius(r, &mut out);
            }
        }
    }
    while out.ends_with('\n') {
        out.pop();
    }
    out
}
