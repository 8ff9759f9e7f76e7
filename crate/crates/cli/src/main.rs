//! `eo`: typecheck, translate, elaborate, run and verify programs.
//!
//! Exit status is 0 when the command succeeded, 1 when the program failed a
//! check (a type error, a stuck evaluation, a failing property) and 2 for
//! usage and parse errors.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use eo_core::concrete::{parse_program, AnyProgram};
use eo_core::context::{EconCtx, ImpCtx};
use eo_core::econ::econ_check;
use eo_core::economize::{econ_expr, econ_type};
use eo_core::elaborate::{elaborate_closed, try_ty_target};
use eo_core::impartial;
use eo_core::source_semantics::{cbv_evaluate, enumerate_steps, SrcOutcome};
use eo_core::target::{evaluate, Outcome};
use eo_core::types::Valueness;
use eo_core::verify::{
    check_enumeration, check_subject, n_free_econ_judgment, n_free_impartial_judgment, n_free_target, with_deep_stack,
    Limits, Subject, Verdict, DEFAULT_DEPTH,
};

const DEFAULT_FUEL: usize = 10_000;

#[derive(Parser)]
#[command(name = "eo", version, about = "Evaluation-order polymorphic programs: check, elaborate, run, verify")]
struct Cli {
    /// Print one JSON record instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a program and print its type and valuenesses.
    Check { file: PathBuf },
    /// Translate an impartial program to the economical system and re-check it.
    Econ { file: PathBuf },
    /// Print the target term of every derivable valueness, with its type.
    Elaborate { file: PathBuf },
    /// Elaborate, then evaluate the target term.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Print every intermediate term.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate the erased program call-by-value in the source semantics.
    SrcRun {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long)]
        trace: bool,
    },
    /// List every source step the erased program can take.
    Steps { file: PathBuf },
    /// Report N-freeness of the judgment, its economical image and its elaborations.
    Freeness { file: PathBuf },
    /// Run the property harness on a program or on the enumeration.
    #[command(group(ArgGroup::new("subject").required(true).args(["file", "enumerate"])))]
    Verify {
        file: Option<PathBuf>,
        /// Check every enumerated judgment up to this size instead of a file.
        #[arg(long, value_name = "BOUND")]
        enumerate: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Source steps searched per target step in the simulation.
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
}

/// What a command produced.
#[derive(Serialize)]
struct Report {
    command: &'static str,
    input: String,
    verdict: String,
    payload: Value,
    #[serde(skip)]
    lines: Vec<String>,
    #[serde(skip)]
    status: u8,
}

impl Report {
    fn new(command: &'static str, input: &str) -> Report {
        Report { command, input: input.to_string(), verdict: "ok".into(), payload: Value::Null, lines: Vec::new(), status: 0 }
    }

    fn fail(mut self, verdict: &str) -> Report {
        self.verdict = verdict.into();
        self.status = 1;
        self
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

fn phis(v: &[Valueness]) -> Vec<String> {
    v.iter().map(|p| p.to_string()).collect()
}

fn read_input(path: &Path) -> Result<String, String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn load(path: &Path) -> Result<AnyProgram, String> {
    let src = read_input(path)?;
    parse_program(&src).map_err(|e| format!("{}:{e}", path.display()))
}

fn subject(path: &Path, p: &AnyProgram) -> Subject {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "stdin".into());
    Subject::from_program(&name, p)
}

fn check(input: &str, p: &AnyProgram) -> Report {
    let mut r = Report::new("check", input);
    let result = match p {
        AnyProgram::Impartial(p) => impartial::check(&ImpCtx::empty(), &p.expr, &p.ty)
            .map(|res| (p.ty.to_string(), res.found.valuenesses()))
            .map_err(|e| e.to_string()),
        AnyProgram::Econ(p) => econ_check(&EconCtx::empty(), &p.expr, &p.ty)
            .map(|res| (p.ty.to_string(), res.found.valuenesses()))
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok((ty, found)) => {
            r.line(format!("type: {ty}"));
            r.line(format!("valueness: {}", phis(&found).join(", ")));
            r.payload = json!({ "type": ty, "valueness": phis(&found) });
            r
        }
        Err(e) => {
            r.line(format!("type error: {e}"));
            r.payload = json!({ "error": e });
            r.fail("type-error")
        }
    }
}

fn econ(input: &str, p: &AnyProgram) -> Report {
    let mut r = Report::new("econ", input);
    let (e, s, before) = match p {
        AnyProgram::Impartial(p) => {
            let before = impartial::check(&ImpCtx::empty(), &p.expr, &p.ty).map(|res| res.found.valuenesses()).ok();
            (econ_expr(&p.expr), econ_type(&p.ty), before)
        }
        AnyProgram::Econ(p) => (p.expr.clone(), p.ty.clone(), None),
    };
    r.line(format!("expression: {e}"));
    r.line(format!("type: {s}"));
    let after = econ_check(&EconCtx::empty(), &e, &s);
    r.payload = json!({
        "expression": e.to_string(),
        "type": s.to_string(),
        "impartial_valueness": before.as_deref().map(phis),
    });
    match after {
        Ok(res) => {
            let found = res.found.valuenesses();
            r.line(format!("valueness: {}", phis(&found).join(", ")));
            r.payload["valueness"] = json!(phis(&found));
            r
        }
        Err(err) => {
            r.line(format!("type error: {err}"));
            r.payload["error"] = json!(err.to_string());
            r.fail("type-error")
        }
    }
}

fn elaborate(input: &str, s: &Subject) -> Report {
    let mut r = Report::new("elaborate", input);
    let ty = match try_ty_target(&s.ty) {
        Ok(t) => t,
        Err(e) => {
            r.line(format!("error: {e}"));
            r.payload = json!({ "error": e.to_string() });
            return r.fail("elaboration-error");
        }
    };
    match elaborate_closed(&s.expr, &s.ty) {
        Ok(results) => {
            let mut out = Vec::new();
            for (phi, res) in &results {
                r.line(format!("{phi}: {} : {ty}", res.term));
                out.push(json!({ "valueness": phi.to_string(), "derived": res.valueness.to_string(), "term": res.term.to_string() }));
            }
            r.payload = json!({ "type": ty.to_string(), "elaborations": out });
            r
        }
        Err(e) => {
            r.line(format!("error: {e}"));
            r.payload = json!({ "error": e.to_string() });
            r.fail("elaboration-error")
        }
    }
}

fn run(input: &str, s: &Subject, fuel: usize, trace: bool) -> Report {
    let mut r = Report::new("run", input);
    let term = match elaborate_closed(&s.expr, &s.ty) {
        Ok(mut results) if !results.is_empty() => results.remove(0).1.term,
        Ok(_) => unreachable!("a successful check derives a valueness"),
        Err(e) => {
            r.line(format!("error: {e}"));
            r.payload = json!({ "error": e.to_string() });
            return r.fail("elaboration-error");
        }
    };
    let ev = evaluate(&term, fuel, trace);
    let trace_out: Vec<Value> = ev
        .trace
        .iter()
        .map(|(m, rule)| {
            r.line(match rule {
                Some(rule) => format!("--{rule:?}--> {m}"),
                None => format!("{m}"),
            });
            json!({ "term": m.to_string(), "rule": rule })
        })
        .collect();
    let (verdict, last) = match &ev.outcome {
        Outcome::Value(w) => ("value", w),
        Outcome::OutOfFuel(m) => ("out-of-fuel", m),
        Outcome::Stuck(m) => ("stuck", m),
    };
    r.line(format!("{verdict} after {} steps: {last}", ev.steps));
    r.payload = json!({ "elaborated": term.to_string(), "result": last.to_string(), "steps": ev.steps, "trace": trace_out });
    r.verdict = verdict.into();
    if verdict == "stuck" {
        r.status = 1;
    }
    r
}

fn src_run(input: &str, s: &Subject, fuel: usize, trace: bool) -> Report {
    let mut r = Report::new("src-run", input);
    let ev = cbv_evaluate(&s.expr.erase(), fuel, trace);
    let trace_out: Vec<Value> = ev
        .trace
        .iter()
        .map(|(e, rule)| {
            r.line(match rule {
                Some(rule) => format!("--{rule:?}--> {e}"),
                None => format!("{e}"),
            });
            json!({ "term": e.to_string(), "rule": rule })
        })
        .collect();
    let (verdict, last) = match &ev.outcome {
        SrcOutcome::Value(v) => ("value", v),
        SrcOutcome::OutOfFuel(e) => ("out-of-fuel", e),
        SrcOutcome::Stuck(e) => ("stuck", e),
    };
    r.line(format!("{verdict} after {} steps: {last}", ev.steps));
    r.payload = json!({ "result": last.to_string(), "steps": ev.steps, "trace": trace_out });
    r.verdict = verdict.into();
    if verdict == "stuck" {
        r.status = 1;
    }
    r
}

fn steps(input: &str, s: &Subject) -> Report {
    let mut r = Report::new("steps", input);
    let e = s.expr.erase();
    let all = enumerate_steps(&e);
    r.line(format!("{e}"));
    let out: Vec<Value> = all
        .iter()
        .map(|st| {
            r.line(format!("  at {:?} {:?} {:?} -> {}", st.path, st.flavor, st.rule, st.result));
            json!({ "path": st.path, "flavor": st.flavor, "rule": st.rule, "result": st.result.to_string() })
        })
        .collect();
    if all.is_empty() {
        r.line("  no steps");
    }
    r.payload = json!({ "term": e.to_string(), "steps": out });
    r
}

fn freeness(input: &str, p: &AnyProgram, s: &Subject) -> Report {
    let mut r = Report::new("freeness", input);
    let imp = match p {
        AnyProgram::Impartial(p) => Some(n_free_impartial_judgment(&ImpCtx::empty(), &p.expr, &p.ty)),
        AnyProgram::Econ(_) => None,
    };
    let econ = n_free_econ_judgment(&EconCtx::empty(), &s.expr, &s.ty);
    let targets: Vec<(String, String, bool)> = match elaborate_closed(&s.expr, &s.ty) {
        Ok(results) => results.iter().map(|(phi, e)| (phi.to_string(), e.term.to_string(), n_free_target(&e.term))).collect(),
        Err(_) => Vec::new(),
    };
    if let Some(b) = imp {
        r.line(format!("impartial judgment N-free: {b}"));
    }
    r.line(format!("economical judgment N-free: {econ}"));
    for (phi, m, b) in &targets {
        r.line(format!("target at {phi} N-free: {b} ({m})"));
    }
    let targets_json: Vec<Value> =
        targets.iter().map(|(phi, m, b)| json!({ "valueness": phi, "term": m, "n_free": b })).collect();
    r.payload = json!({ "impartial": imp, "econ": econ, "targets": targets_json });
    r
}

fn verify_file(input: &str, s: &Subject, fuel: usize, depth: usize) -> Report {
    let mut r = Report::new("verify", input);
    let (records, consistency) = check_subject(s, Limits { fuel, depth, simulate: true });
    for rec in &records {
        r.line(rec.to_string());
    }
    let failed = records.iter().filter(|rec| rec.verdict.is_failure()).count();
    r.payload = json!({ "records": records, "consistency": consistency });
    if failed > 0 {
        r.line(format!("{failed} failing checks"));
        return r.fail("fail");
    }
    r.verdict = "pass".into();
    r
}

fn verify_enumeration(bound: usize, fuel: usize) -> Report {
    let mut r = Report::new("verify", &format!("--enumerate {bound}"));
    let records = check_enumeration(bound, fuel);
    let mut counts: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    for rec in &records {
        *counts.entry(rec.theorem).or_default().entry(rec.verdict.to_string()).or_insert(0) += 1;
    }
    for (theorem, by) in &counts {
        let parts: Vec<String> = by.iter().map(|(v, n)| format!("{n} {v}")).collect();
        r.line(format!("{theorem}: {}", parts.join(", ")));
    }
    let failures: Vec<_> = records.iter().filter(|rec| rec.verdict == Verdict::Fail).collect();
    for f in &failures {
        r.line(format!("FAIL {f}"));
    }
    r.payload = json!({ "bound": bound, "fuel": fuel, "counts": counts, "failures": failures });
    if !failures.is_empty() {
        return r.fail("fail");
    }
    r.verdict = "pass".into();
    r
}

/// Run a command on a file, or report why the file could not be read.
fn on_file(command: &'static str, path: &Path, f: impl FnOnce(&str, &AnyProgram) -> Report) -> Report {
    let input = path.display().to_string();
    match load(path) {
        Ok(p) => f(&input, &p),
        Err(e) => {
            let mut r = Report::new(command, &input);
            r.line(format!("error: {e}"));
            r.payload = json!({ "error": e });
            r.verdict = "parse-error".into();
            r.status = 2;
            r
        }
    }
}

fn dispatch(command: Command) -> Report {
    match command {
        Command::Check { file } => on_file("check", &file, check),
        Command::Econ { file } => on_file("econ", &file, econ),
        Command::Elaborate { file } => on_file("elaborate", &file, |i, p| elaborate(i, &subject(&file, p))),
        Command::Run { file, fuel, trace } => on_file("run", &file, |i, p| run(i, &subject(&file, p), fuel, trace)),
        Command::SrcRun { file, fuel, trace } => {
            on_file("src-run", &file, |i, p| src_run(i, &subject(&file, p), fuel, trace))
        }
        Command::Steps { file } => on_file("steps", &file, |i, p| steps(i, &subject(&file, p))),
        Command::Freeness { file } => on_file("freeness", &file, |i, p| freeness(i, p, &subject(&file, p))),
        Command::Verify { file: Some(file), fuel, depth, .. } => {
            on_file("verify", &file, |i, p| verify_file(i, &subject(&file, p), fuel, depth))
        }
        Command::Verify { enumerate: Some(bound), fuel, .. } => verify_enumeration(bound, fuel),
        Command::Verify { .. } => unreachable!("clap requires a file or a bound"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let out = with_deep_stack(move || {
        let r = dispatch(cli.command);
        let text = if json {
            serde_json::to_string(&r).expect("reports serialize")
        } else {
            r.lines.join("\n")
        };
        (text, r.status)
    });
    println!("{}", out.0);
    ExitCode::from(out.1)
}
