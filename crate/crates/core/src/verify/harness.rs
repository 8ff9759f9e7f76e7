//! One function per metatheorem: each runs both sides of the implication on
//! a concrete program and returns a record with a verdict and the evidence.

use std::fmt;

use serde::Serialize;

use crate::check_elab::{elab_verdict, ElabVerdict, DEFAULT_BUDGET};
use crate::context::{EconCtx, ImpCtx, TargetCtx};
use crate::derivation::Direction;
use crate::econ::{econ_check, econ_synth};
use crate::economize::{econ_ctx, econ_expr, econ_type};
use crate::elaborate::{elaborate, try_ty_target};
use crate::expr::{EconExpr, ImpExpr};
use crate::impartial;
use crate::source_semantics::{cbv_evaluate, is_source_value, SrcOutcome};
use crate::machine::{Machine, MachineStep, Watch};
use crate::target::{evaluate, reduce, Outcome};
use crate::target_check::target_check;
use crate::typed::{typed_check, typed_synth, TypedTerm};
use crate::types::{EconType, EvalOrder, ImpartialType, TargetType, Valueness};

use super::freeness::{n_free_econ_judgment, n_free_impartial_judgment, n_free_target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// The hypothesis did not hold, so there was nothing to check.
    VacuousPass,
    Fail,
    /// The simulation search hit its depth or budget bound.
    SearchExhausted,
    OutOfFuel,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::VacuousPass => "vacuous-pass",
            Verdict::Fail => "fail",
            Verdict::SearchExhausted => "search-exhausted",
            Verdict::OutOfFuel => "out-of-fuel",
        })
    }
}

/// The outcome of one property on one program.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub theorem: &'static str,
    pub program: String,
    pub verdict: Verdict,
    pub witness: String,
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.theorem, self.program, self.verdict, self.witness)
    }
}

pub const ECONOMIZING: &str = "economizing";
pub const ELABORATION_SOUNDNESS: &str = "elaboration-soundness";
pub const TARGET_SAFETY: &str = "target-safety";
pub const ENDPOINT: &str = "multi-step-consistency";
pub const CONSISTENCY: &str = "consistency";
pub const ECON_N_FREENESS: &str = "economizing-preserves-n-freeness";
pub const ELAB_N_FREENESS: &str = "elaboration-preserves-n-freeness";

fn record(theorem: &'static str, program: &str, verdict: Verdict, witness: impl Into<String>) -> CheckRecord {
    CheckRecord { theorem, program: program.to_string(), verdict, witness: witness.into() }
}

fn phis(v: &[Valueness]) -> String {
    let parts: Vec<String> = v.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Impartial valuenesses and type for the judgment, or `None` when it is
/// not derivable.
fn impartial_side(ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType, dir: Direction) -> Option<(ImpartialType, Vec<Valueness>)> {
    match dir {
        Direction::Check => impartial::check(ctx, e, ty).ok().map(|r| (ty.clone(), r.found.valuenesses())),
        Direction::Synth => impartial::synth(ctx, e).ok().map(|r| (r.ty.clone(), r.found.valuenesses())),
    }
}

/// Every valueness of the impartial judgment is derivable for its
/// economical image, at the translated type.
pub fn check_economizing(program: &str, ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType, dir: Direction) -> CheckRecord {
    let Some((ty, source)) = impartial_side(ctx, e, ty, dir) else {
        return record(ECONOMIZING, program, Verdict::VacuousPass, "not typable in the impartial system");
    };
    let (g, e2, s) = (econ_ctx(ctx), econ_expr(e), econ_type(&ty));
    let image = match dir {
        Direction::Check => econ_check(&g, &e2, &s).map(|r| (s.clone(), r.found.valuenesses())),
        Direction::Synth => econ_synth(&g, &e2).map(|r| (r.ty.clone(), r.found.valuenesses())),
    };
    match image {
        Err(err) => record(ECONOMIZING, program, Verdict::Fail, format!("image not typable at {s}: {err}")),
        Ok((mut got, mut found)) => {
            // A synthesized suspension may still be eliminated: by value
            // keeps the valueness, any other order gives top.
            loop {
                if got.alpha_eq(&s) && source.iter().all(|p| found.contains(p)) {
                    let msg = format!("{} at {} ~> {} at {}", phis(&source), ty, phis(&found), got);
                    return record(ECONOMIZING, program, Verdict::Pass, msg);
                }
                match (&got, dir) {
                    (EconType::Susp(order, inner), Direction::Synth) => {
                        if *order != EvalOrder::V {
                            found = vec![Valueness::Top];
                        }
                        got = (**inner).clone();
                    }
                    _ => break,
                }
            }
            record(ECONOMIZING, program, Verdict::Fail, format!("{} at {} ~> {} at {}", phis(&source), ty, phis(&found), got))
        }
    }
}

/// Lemmas relating target values and valueness, on one elaboration.
fn valueness_lemmas(valueness: Valueness, m: &crate::target::TargetTerm) -> Result<(), String> {
    if m.is_value() && valueness != Valueness::Val {
        return Err(format!("{m} is a value but elaborated at {valueness}"));
    }
    if valueness == Valueness::Val && !m.is_valuable() {
        return Err(format!("{m} elaborated at val but is not valuable"));
    }
    Ok(())
}

/// Every economical derivation of `· ⊢ e ⇐ S` elaborates to a target term
/// of type `|S|`, at a valueness no weaker than the derivation's, and the
/// elaboration relation independently recognises the pair.
pub fn check_elaboration_soundness(program: &str, e: &EconExpr, s: &EconType) -> CheckRecord {
    let Ok(result) = econ_check(&EconCtx::empty(), e, s) else {
        return record(ELABORATION_SOUNDNESS, program, Verdict::VacuousPass, "not typable in the economical system");
    };
    let Ok(target_ty) = try_ty_target(s) else {
        return record(ELABORATION_SOUNDNESS, program, Verdict::VacuousPass, format!("{s} has a free order"));
    };
    let mut evidence = Vec::new();
    let mut notes = Vec::new();
    let mut verdict = Verdict::Pass;
    let erased = e.erase();
    for d in result.found.all() {
        let r = match elaborate(d) {
            Ok(r) => r,
            Err(err) => {
                return record(ELABORATION_SOUNDNESS, program, Verdict::Fail, format!("{} derivation: {err}", d.valueness));
            }
        };
        let mut fail = |msg: String| {
            verdict = Verdict::Fail;
            evidence.push(msg);
        };
        if !r.valueness.leq(d.valueness) {
            fail(format!("elaborated at {} from a {} derivation", r.valueness, d.valueness));
        }
        // The annotated witness is the typing derivation; inference on the
        // bare term is an independent second opinion that may miss.
        let typed = match typed_check(&TargetCtx::empty(), &r.witness, &target_ty) {
            Err(err) => Err(err.message),
            Ok(()) if r.witness.erase() != r.term => Err("the witness erases to a different term".to_string()),
            Ok(()) => Ok(()),
        };
        let inferred = target_check(&TargetCtx::empty(), &r.term, &target_ty);
        match (&typed, inferred) {
            (Err(msg), _) => fail(format!("annotated {}: {msg}", r.term)),
            (Ok(()), false) => notes.push(format!("inference alone does not type {}", r.term)),
            (Ok(()), true) => {}
        }
        if let Err(msg) = valueness_lemmas(r.valueness, &r.term) {
            fail(msg);
        }
        match elab_verdict(&erased, s, &r.term, DEFAULT_BUDGET) {
            ElabVerdict::Holds(found) if found.iter().any(|p| p.leq(d.valueness)) => {}
            ElabVerdict::Unknown => evidence.push(format!("relation undecided for {}", r.term)),
            other => fail(format!("relation rejects {}: {other:?}", r.term)),
        }
        evidence.push(format!("{} ~> {} : {}", d.valueness, r.term, target_ty));
        evidence.append(&mut notes);
    }
    record(ELABORATION_SOUNDNESS, program, verdict, evidence.join("; "))
}

/// Run an annotated target term for up to `fuel` steps. The whole term is
/// checked at the start and at the end; each step checks that the contracted
/// redex and its reduct have the same closed type, which keeps the type of
/// the whole term by replacement in the evaluation context, and that the
/// untyped reduction agrees. The end result is compared with the untyped
/// evaluator. A run whose state recurs (see [`Watch`]) diverges by
/// replaying redexes it has already checked, so it stops there.
pub fn check_target_safety(program: &str, witness: &TypedTerm, ty: &TargetType, fuel: usize) -> CheckRecord {
    let ctx = TargetCtx::empty();
    let fail = |msg: String| record(TARGET_SAFETY, program, Verdict::Fail, msg);
    if let Err(err) = typed_check(&ctx, witness, ty) {
        return fail(format!("initially: {}", err.message));
    }
    let mut machine = Machine::new(witness.clone());
    let mut watch = Watch::default();
    let mut steps = 0;
    let mut recurred = None;
    let reached_value = loop {
        if steps == fuel {
            break false;
        }
        match machine.step() {
            MachineStep::Value => break true,
            MachineStep::Stuck => return fail(format!("stuck at {}", machine.term().erase())),
            MachineStep::Stepped { rule, redex, reduct } => {
                steps += 1;
                match (typed_synth(&ctx, &redex), typed_synth(&ctx, &reduct)) {
                    (Ok(a), Ok(b)) if a.alpha_eq(&b) => {}
                    (Ok(a), Ok(b)) => {
                        let (r, c) = (redex.erase(), reduct.erase());
                        return fail(format!("step {steps}: {r} of type {a} became {c} of type {b}"));
                    }
                    (_, Err(err)) | (Err(err), _) => return fail(format!("step {steps}: {}", err.message)),
                }
                if reduce(&redex.erase()) != Some((reduct.erase(), rule)) {
                    return fail(format!("step {steps}: annotated and untyped reductions of {} disagree", redex.erase()));
                }
                if let Some(r) = watch.observe(steps, &mut machine, &redex) {
                    recurred = Some(r);
                    break false;
                }
            }
        }
    };
    let last = machine.term();
    if let Err(err) = typed_check(&ctx, &last, ty) {
        return fail(format!("after {steps} steps: {}", err.message));
    }
    if let Some(r) = recurred {
        let detail = format!(
            "the state of step {} recurs every {} steps with {} more frames from step {steps} on, so the rest of the {fuel} steps repeat checked redexes",
            r.from, r.period, r.growth
        );
        return record(TARGET_SAFETY, program, Verdict::OutOfFuel, detail);
    }
    let m = last.erase();
    let untyped = evaluate(&witness.erase(), fuel, false);
    let same = match &untyped.outcome {
        Outcome::Value(w) | Outcome::OutOfFuel(w) => *w == m && untyped.steps == steps,
        Outcome::Stuck(_) => false,
    };
    if !same {
        return fail(format!("the untyped evaluator ends elsewhere than {m} after {steps} steps"));
    }
    if reached_value || m.is_value() {
        record(TARGET_SAFETY, program, Verdict::Pass, format!("{m} after {steps} steps"))
    } else {
        record(TARGET_SAFETY, program, Verdict::OutOfFuel, format!("no value within {fuel} steps"))
    }
}

/// For an N-free elaboration that terminates, call-by-value source
/// evaluation reaches a value related to the target value.
pub fn check_endpoint(program: &str, e: &EconExpr, s: &EconType, fuel: usize) -> CheckRecord {
    let Ok(result) = econ_check(&EconCtx::empty(), e, s) else {
        return record(ENDPOINT, program, Verdict::VacuousPass, "not typable in the economical system");
    };
    let d = result.found.all()[0];
    let r = match elaborate(d) {
        Ok(r) => r,
        Err(err) => return record(ENDPOINT, program, Verdict::Fail, err.to_string()),
    };
    if !n_free_target(&r.term) {
        return record(ENDPOINT, program, Verdict::VacuousPass, format!("{} uses thunks", r.term));
    }
    let w = match evaluate(&r.term, fuel, false).outcome {
        Outcome::Value(w) => w,
        Outcome::OutOfFuel(_) => return record(ENDPOINT, program, Verdict::OutOfFuel, "target did not terminate"),
        Outcome::Stuck(m) => return record(ENDPOINT, program, Verdict::Fail, format!("target stuck at {m}")),
    };
    let src = cbv_evaluate(&e.erase(), fuel, false);
    let v = match src.outcome {
        SrcOutcome::Value(v) => v,
        SrcOutcome::OutOfFuel(t) => {
            return record(ENDPOINT, program, Verdict::Fail, format!("target reached {w} but the source ran out of fuel at {t}"))
        }
        SrcOutcome::Stuck(t) => return record(ENDPOINT, program, Verdict::Fail, format!("source stuck at {t}")),
    };
    let related = elab_verdict(&v, s, &w, DEFAULT_BUDGET);
    let verdict = match &related {
        ElabVerdict::Holds(p) if p.contains(&Valueness::Val) && is_source_value(&v) => Verdict::Pass,
        ElabVerdict::Unknown => Verdict::SearchExhausted,
        _ => Verdict::Fail,
    };
    record(ENDPOINT, program, verdict, format!("{} by-value source steps to {v}; target {w}", src.steps))
}

/// An N-free impartial judgment economizes to an N-free judgment.
pub fn check_econ_n_freeness(program: &str, ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType, dir: Direction) -> CheckRecord {
    if !n_free_impartial_judgment(ctx, e, ty) {
        return record(ECON_N_FREENESS, program, Verdict::VacuousPass, "judgment is not N-free");
    }
    let Some((ty, _)) = impartial_side(ctx, e, ty, dir) else {
        return record(ECON_N_FREENESS, program, Verdict::VacuousPass, "not typable in the impartial system");
    };
    let (g, e2, s) = (econ_ctx(ctx), econ_expr(e), econ_type(&ty));
    let verdict = if n_free_econ_judgment(&g, &e2, &s) { Verdict::Pass } else { Verdict::Fail };
    record(ECON_N_FREENESS, program, verdict, format!("{e2} at {s}"))
}

/// An N-free economical judgment elaborates without thunks or forces.
pub fn check_elab_n_freeness(program: &str, e: &EconExpr, s: &EconType) -> CheckRecord {
    if !n_free_econ_judgment(&EconCtx::empty(), e, s) {
        return record(ELAB_N_FREENESS, program, Verdict::VacuousPass, "judgment is not N-free");
    }
    let Ok(result) = econ_check(&EconCtx::empty(), e, s) else {
        return record(ELAB_N_FREENESS, program, Verdict::VacuousPass, "not typable in the economical system");
    };
    let mut terms = Vec::new();
    for d in result.found.all() {
        match elaborate(d) {
            Ok(r) if n_free_target(&r.term) => terms.push(r.term.to_string()),
            Ok(r) => return record(ELAB_N_FREENESS, program, Verdict::Fail, format!("{} elaborates to {}", e, r.term)),
            Err(err) => return record(ELAB_N_FREENESS, program, Verdict::Fail, err.to_string()),
        }
    }
    record(ELAB_N_FREENESS, program, Verdict::Pass, terms.join("; "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type, parse_impartial_expr, parse_impartial_type};
    use crate::elaborate::elaborate_closed;

    #[test]
    fn economizing_by_name_identity() {
        let r = check_economizing(
            "id",
            &ImpCtx::empty(),
            &parse_impartial_expr("\\x. x").unwrap(),
            &parse_impartial_type("1 -[N]> 1").unwrap(),
            Direction::Check,
        );
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.witness.ends_with("at susp[N] 1 -> 1"), "{}", r.witness);
    }

    #[test]
    fn elaboration_of_n_free_identity() {
        let (e, s) = (parse_econ_expr("\\x. x").unwrap(), parse_econ_type("susp[V] 1 -> 1").unwrap());
        let r = check_elab_n_freeness("id", &e, &s);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.witness, "\\x. x");
        assert_eq!(check_elaboration_soundness("id", &e, &s).verdict, Verdict::Pass);
    }

    #[test]
    fn by_name_hypothesis_is_vacuous() {
        let r = check_econ_n_freeness(
            "inj",
            &ImpCtx::empty(),
            &parse_impartial_expr("inj1 ()").unwrap(),
            &parse_impartial_type("1 +[N] 1").unwrap(),
            Direction::Check,
        );
        assert_eq!(r.verdict, Verdict::VacuousPass);
    }

    #[test]
    fn safety_of_a_diverging_term() {
        let s = parse_econ_type("1").unwrap();
        let (_, r) = elaborate_closed(&parse_econ_expr("fix u. u").unwrap(), &s).unwrap().remove(0);
        let rec = check_target_safety("loop", &r.witness, &TargetType::Unit, 50);
        assert_eq!(rec.verdict, Verdict::OutOfFuel);
        let (_, r) = elaborate_closed(&parse_econ_expr("(\\x. x : susp[N] 1 -> 1) ()").unwrap(), &s).unwrap().remove(0);
        assert_eq!(check_target_safety("app", &r.witness, &TargetType::Unit, 50).verdict, Verdict::Pass);
    }

    #[test]
    fn endpoint_of_a_by_value_application() {
        let e = parse_econ_expr("(\\x. x : susp[V] 1 -> 1) ()").unwrap();
        let r = check_endpoint("app", &e, &EconType::Unit, 100);
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
        let e = parse_econ_expr("(\\x. x : susp[N] 1 -> 1) ()").unwrap();
        assert_eq!(check_endpoint("app", &e, &EconType::Unit, 100).verdict, Verdict::VacuousPass);
    }

    #[test]
    fn records_render_as_lines() {
        let r = record(ECONOMIZING, "p", Verdict::Pass, "w");
        assert_eq!(r.to_string(), "economizing p pass: w");
    }
}
