//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N ... PASS|FAIL` line straight to stderr, past the test
//! harness's output capture, so a plain `cargo test` run lists them all.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use eo_core::concrete::{parse_econ_expr, parse_econ_type, parse_program, parse_target_term, AnyProgram};
use eo_core::context::{EconCtx, ImpCtx};
use eo_core::derivation::Direction;
use eo_core::econ::econ_check;
use eo_core::elaborate::{elaborate_closed, try_ty_target};
use eo_core::expr::{Side, Term};
use eo_core::impartial;
use eo_core::source_semantics::{by_value_holes, cbv_evaluate, cbv_redex_path, enumerate_steps, Flavor, SrcOutcome, SrcRule};
use eo_core::target::{evaluate, Outcome, TargetTerm};
use eo_core::types::Valueness;
use eo_core::verify::harness::{ECONOMIZING, ECON_N_FREENESS, ELABORATION_SOUNDNESS, ELAB_N_FREENESS, TARGET_SAFETY};
use eo_core::verify::*;

/// Enumeration size bound for the exhaustive suites.
const BOUND: usize = 7;
/// Step budget for every evaluation.
const FUEL: usize = 10_000;
/// Breadth-first search depth for the per-step simulation.
const DEPTH: usize = 8;
/// Target steps allowed for the divergence-order witness.
const WITNESS_STEPS: usize = 10;
/// Wall-clock budget for each criterion.
const BUDGET: Duration = Duration::from_secs(60);

fn report(n: usize, title: &str, ok: bool, detail: &str, took: Duration) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {n:>2} {title}: {verdict} ({detail}; {:.1}s)\n", took.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn corpus() -> Vec<(String, AnyProgram)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "eo"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let src = std::fs::read_to_string(&p).expect("readable corpus file");
            let prog = parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, prog)
        })
        .collect()
}

fn corpus_program(name: &str) -> AnyProgram {
    corpus().into_iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no corpus program {name}")).1
}

fn subjects() -> Vec<Subject> {
    corpus().iter().map(|(n, p)| Subject::from_program(n, p)).collect()
}

/// The enumeration records, computed once and shared, with the time taken.
/// Criteria that use them count that time as their own.
fn enumeration() -> &'static (Vec<CheckRecord>, Duration) {
    static RECORDS: OnceLock<(Vec<CheckRecord>, Duration)> = OnceLock::new();
    RECORDS.get_or_init(|| {
        let t = Instant::now();
        let recs = check_enumeration(BOUND, FUEL);
        (recs, t.elapsed())
    })
}

struct Tally {
    total: usize,
    failures: Vec<String>,
    by_verdict: BTreeMap<String, usize>,
}

impl Tally {
    fn of<'a>(records: impl IntoIterator<Item = &'a CheckRecord>) -> Tally {
        let mut t = Tally { total: 0, failures: Vec::new(), by_verdict: Default::default() };
        for r in records {
            t.total += 1;
            *t.by_verdict.entry(r.verdict.to_string()).or_insert(0) += 1;
            if r.verdict.is_failure() {
                t.failures.push(r.to_string());
            }
        }
        t
    }

    fn count(&self, v: Verdict) -> usize {
        self.by_verdict.get(&v.to_string()).copied().unwrap_or(0)
    }

    fn summary(&self) -> String {
        let parts: Vec<String> = self.by_verdict.iter().map(|(v, n)| format!("{n} {v}")).collect();
        format!("{} checks: {}", self.total, parts.join(", "))
    }
}

fn enumerated(theorem: &str) -> impl Iterator<Item = &'static CheckRecord> + '_ {
    enumeration().0.iter().filter(move |r| r.theorem == theorem)
}

fn conclude(n: usize, title: &str, tally: &Tally, took: Duration) {
    let ok = tally.failures.is_empty() && took < BUDGET;
    report(n, title, ok, &tally.summary(), took);
    assert!(tally.failures.is_empty(), "{}", tally.failures.join("\n"));
    assert!(took < BUDGET, "took {took:?}");
}

#[test]
fn criterion_01_corpus_typechecks_at_val() {
    let t = Instant::now();
    let names = ["map_impartial", "stream_even", "stream_odd", "stream_odd_pair", "tree", "map_econ"];
    let mut records = Vec::new();
    for name in names {
        let found = match corpus_program(name) {
            AnyProgram::Impartial(p) => impartial::check(&ImpCtx::empty(), &p.expr, &p.ty).map(|r| r.found.valuenesses()),
            AnyProgram::Econ(p) => econ_check(&EconCtx::empty(), &p.expr, &p.ty).map(|r| r.found.valuenesses()),
        };
        let (verdict, witness) = match found {
            Ok(v) if v.contains(&Valueness::Val) => (Verdict::Pass, format!("{v:?}")),
            Ok(v) => (Verdict::Fail, format!("only {v:?}")),
            Err(e) => (Verdict::Fail, e.to_string()),
        };
        records.push(CheckRecord { theorem: "typechecks-at-val", program: name.to_string(), verdict, witness });
    }
    conclude(1, "corpus typechecks at val", &Tally::of(&records), t.elapsed());
}

#[test]
fn criterion_02_economizing() {
    let shared = enumeration().1;
    let t = Instant::now();
    let mut records: Vec<CheckRecord> = enumerated(ECONOMIZING).cloned().collect();
    for s in subjects() {
        if let Some((e, ty)) = &s.impartial {
            records.push(check_economizing(&s.name, &ImpCtx::empty(), e, ty, Direction::Check));
        }
    }
    let tally = Tally::of(&records);
    let vacuous = tally.count(Verdict::VacuousPass);
    assert_eq!(vacuous, 0, "every enumerated judgment is impartially typable");
    conclude(2, "economizing keeps typability and valueness", &tally, shared + t.elapsed());
}

#[test]
fn criterion_03_elaboration_soundness() {
    let shared = enumeration().1;
    let t = Instant::now();
    let mut records: Vec<CheckRecord> = enumerated(ELABORATION_SOUNDNESS).cloned().collect();
    for s in subjects() {
        records.push(check_elaboration_soundness(&s.name, &s.expr, &s.ty));
    }
    conclude(3, "elaboration target-typechecks", &Tally::of(&records), shared + t.elapsed());
}

#[test]
fn criterion_04_target_safety() {
    let shared = enumeration().1;
    let t = Instant::now();
    let mut records: Vec<CheckRecord> = enumerated(TARGET_SAFETY).cloned().collect();
    let corpus_records = with_deep_stack(|| {
        let mut out = Vec::new();
        for s in subjects() {
            let (Ok(results), Ok(ty)) = (elaborate_closed(&s.expr, &s.ty), try_ty_target(&s.ty)) else { continue };
            for (phi, r) in &results {
                out.push(check_target_safety(&format!("{}@{phi}", s.name), &r.witness, &ty, FUEL));
            }
        }
        out
    });
    records.extend(corpus_records);
    let tally = Tally::of(&records);
    assert_eq!(tally.count(Verdict::VacuousPass), 0);
    conclude(4, "target evaluation never sticks and keeps its type", &tally, shared + t.elapsed());
}

/// Whether every step of the call-by-value source run uses a by-value rule
/// in a by-value context.
fn by_value_only(e: &Term) -> bool {
    let run = cbv_evaluate(e, FUEL, true);
    run.trace.windows(2).all(|w| {
        let rule = w[1].1.expect("every later entry records its rule");
        let by_value = matches!(rule, SrcRule::BetaV | SrcRule::FixV | SrcRule::ProjV | SrcRule::CaseV);
        let path = cbv_redex_path(&w[0].0).expect("a step was taken");
        by_value && (path.is_empty() || by_value_holes(&w[0].0).contains(&path))
    })
}

#[test]
fn criterion_05_endpoint() {
    let t = Instant::now();
    let mut records = Vec::new();
    let mut by_name_uses = 0;
    for s in subjects() {
        let r = check_endpoint(&s.name, &s.expr, &s.ty, FUEL);
        if r.verdict == Verdict::Pass && !by_value_only(&s.expr.erase()) {
            by_name_uses += 1;
        }
        records.push(r);
    }
    let mut tally = Tally::of(&records);
    if by_name_uses > 0 {
        tally.failures.push(format!("{by_name_uses} source runs used a by-name step"));
    }
    assert!(tally.count(Verdict::Pass) > 0, "some program reaches the endpoint");
    conclude(5, "terminating N-free programs end at related source values", &tally, t.elapsed());
}

#[test]
fn criterion_06_per_step_simulation() {
    let t = Instant::now();
    let mixed = ["identity_by_value", "identity_by_name", "ignore_divergence", "map_stream", "map_by_value", "project", "choose"];
    let reports = with_deep_stack(move || {
        subjects()
            .into_iter()
            .filter(|s| mixed.contains(&s.name.as_str()))
            .map(|s| run_consistency(&s.name, &s.expr, &s.ty, FUEL, DEPTH))
            .collect::<Vec<_>>()
    });
    assert_eq!(reports.len(), mixed.len());
    let records: Vec<CheckRecord> = reports.iter().map(consistency_record).collect();
    let tally = Tally::of(&records);
    let exhausted = tally.count(Verdict::SearchExhausted);
    let title = format!("every target step matched in the source ({exhausted} searches exhausted)");
    conclude(6, &title, &tally, t.elapsed());
}

#[test]
fn criterion_07_n_freeness() {
    let shared = enumeration().1;
    let t = Instant::now();
    let records: Vec<&CheckRecord> = enumerated(ECON_N_FREENESS).chain(enumerated(ELAB_N_FREENESS)).collect();
    let tally = Tally::of(records.iter().copied());
    assert!(tally.count(Verdict::Pass) > 0);
    conclude(7, "N-free judgments economize and elaborate N-free", &tally, shared + t.elapsed());
}

#[test]
fn criterion_08_identity_elaborates_to_instance_pair() {
    let t = Instant::now();
    let AnyProgram::Econ(p) = corpus_program("identity") else { panic!("identity is economical") };
    let (_, r) = elaborate_closed(&p.expr, &p.ty).expect("identity elaborates").remove(0);
    let expected = parse_target_term("(\\x. x, \\x. force x)").unwrap();
    let ok = r.term.alpha_eq(&expected);
    report(8, "identity elaborates to its two instances", ok, &format!("{}", r.term), t.elapsed());
    assert!(ok, "{}", r.term);
}

#[test]
fn criterion_09_no_by_name_step_inside_pairs() {
    let t = Instant::now();
    let redex = Term::app(Term::lam("x", Term::var("x")), Term::Unit);
    let e = Term::proj(Side::Right, Term::pair(redex, Term::Unit));
    let steps = enumerate_steps(&e);
    let inside_by_name = steps.iter().filter(|s| s.flavor == Flavor::ByName && !s.path.is_empty()).count();
    let root_proj = steps.iter().any(|s| s.path.is_empty() && s.rule == SrcRule::ProjN);
    let ok = inside_by_name == 0 && root_proj;
    let detail = format!("{} steps, {inside_by_name} by-name inside the pair, root projection {root_proj}", steps.len());
    report(9, "no by-name step inside a projected pair", ok, &detail, t.elapsed());
    assert!(ok, "{steps:?}");
}

#[test]
fn criterion_10_divergence_order_witness() {
    let t = Instant::now();
    let s = Subject::from_program("ignore_divergence", &corpus_program("ignore_divergence"));
    let expected = parse_econ_expr("(\\x. () : susp[N] 1 -> 1) (fix u. u)").unwrap();
    assert_eq!(s.expr.erase(), expected.erase());
    assert!(s.ty.alpha_eq(&parse_econ_type("1").unwrap()));
    let (_, r) = elaborate_closed(&s.expr, &s.ty).unwrap().remove(0);
    let target = evaluate(&r.term, WITNESS_STEPS, false);
    let reached = matches!(&target.outcome, Outcome::Value(TargetTerm::Unit));
    let source = cbv_evaluate(&s.expr.erase(), FUEL, false);
    let exhausted = matches!(source.outcome, SrcOutcome::OutOfFuel(_));
    let ok = reached && exhausted && r.term.to_string().contains("thunk");
    let detail = format!("target {} reaches () in {} steps; source out of fuel: {exhausted}", r.term, target.steps);
    report(10, "argument order decides termination", ok, &detail, t.elapsed());
    assert!(ok, "{detail}");
}

#[test]
fn enumeration_counts_are_stable() {
    let counts: Vec<usize> = (1..=BOUND).map(|b| enumerate_welltyped(b, &type_menu()).len()).collect();
    assert_eq!(counts, [1, 26, 144, 527, 1689, 5496, 20320]);
    let checks = enumerate_welltyped(BOUND, &type_menu()).iter().filter(|j| j.dir == Direction::Check).count();
    assert_eq!(checks, 16512);
}

#[test]
fn enumeration_timing_is_reported() {
    let (recs, took) = enumeration();
    assert!(!recs.is_empty());
    assert!(*took < BUDGET, "enumeration suite took {took:?}");
}
