//! Running every property on a program file or on the enumeration.

use crate::concrete::AnyProgram;
use crate::context::{EconCtx, ImpCtx};
use crate::derivation::Direction;
use crate::econ::econ_check;
use crate::economize::{econ_expr, econ_type};
use crate::elaborate::{elaborate_closed, try_ty_target};
use crate::expr::{EconExpr, ImpExpr};
use crate::types::{EconType, ImpartialType};

use super::consistency::{run_consistency, ConsistencyReport};
use super::enumerate::{enumerate_welltyped, type_menu};
use super::harness::*;

/// A closed program with its economical form; impartial programs keep the
/// original too.
#[derive(Clone, Debug)]
pub struct Subject {
    pub name: String,
    pub impartial: Option<(ImpExpr, ImpartialType)>,
    pub expr: EconExpr,
    pub ty: EconType,
}

impl Subject {
    pub fn from_program(name: &str, p: &AnyProgram) -> Subject {
        match p {
            AnyProgram::Impartial(p) => Subject {
                name: name.to_string(),
                impartial: Some((p.expr.clone(), p.ty.clone())),
                expr: econ_expr(&p.expr),
                ty: econ_type(&p.ty),
            },
            AnyProgram::Econ(p) => Subject { name: name.to_string(), impartial: None, expr: p.expr.clone(), ty: p.ty.clone() },
        }
    }

    pub fn from_impartial(name: &str, e: &ImpExpr, ty: &ImpartialType) -> Subject {
        Subject { name: name.to_string(), impartial: Some((e.clone(), ty.clone())), expr: econ_expr(e), ty: econ_type(ty) }
    }
}

/// Bounds for the dynamic checks.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub fuel: usize,
    pub depth: usize,
    /// Whether to run the step-by-step simulation, the costliest check.
    pub simulate: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { fuel: 10_000, depth: super::consistency::DEFAULT_DEPTH, simulate: true }
    }
}

/// Every property that applies to a checked program (`e ⇐ τ`).
pub fn check_subject(subject: &Subject, limits: Limits) -> (Vec<CheckRecord>, Option<ConsistencyReport>) {
    let name = &subject.name;
    let mut out = Vec::new();
    if let Some((e, t)) = &subject.impartial {
        out.push(check_economizing(name, &ImpCtx::empty(), e, t, Direction::Check));
        out.push(check_econ_n_freeness(name, &ImpCtx::empty(), e, t, Direction::Check));
    }
    out.push(check_elaboration_soundness(name, &subject.expr, &subject.ty));
    out.push(check_elab_n_freeness(name, &subject.expr, &subject.ty));
    let typable = econ_check(&EconCtx::empty(), &subject.expr, &subject.ty).is_ok();
    let mut report = None;
    if let (true, Ok(target_ty)) = (typable, try_ty_target(&subject.ty)) {
        if let Ok(results) = elaborate_closed(&subject.expr, &subject.ty) {
            for (phi, r) in &results {
                out.push(check_target_safety(&format!("{name}@{phi}"), &r.witness, &target_ty, limits.fuel));
            }
        }
        out.push(check_endpoint(name, &subject.expr, &subject.ty, limits.fuel));
        if limits.simulate {
            let r = run_consistency(name, &subject.expr, &subject.ty, limits.fuel, limits.depth);
            out.push(consistency_record(&r));
            report = Some(r);
        }
    }
    (out, report)
}

pub fn consistency_record(r: &ConsistencyReport) -> CheckRecord {
    let depths: Vec<String> = r.steps.iter().map(|s| s.depth.to_string()).collect();
    CheckRecord {
        theorem: CONSISTENCY,
        program: r.program.clone(),
        verdict: r.verdict,
        witness: format!("{} target steps matched at source depths [{}]; {}", r.steps.len(), depths.join(","), r.detail),
    }
}

/// Stack for deep evaluations: a diverging program can grow its term by a
/// level on every step.
pub const DEEP_STACK: usize = 1 << 30;

/// Run `f` on a thread with a [`DEEP_STACK`]-sized stack.
pub fn with_deep_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(DEEP_STACK)
        .spawn(f)
        .expect("spawn checker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

/// The static properties, plus target safety, on every enumerated judgment.
/// Programs are named `enum-N` in enumeration order.
pub fn check_enumeration(bound: usize, fuel: usize) -> Vec<CheckRecord> {
    with_deep_stack(move || enumeration_records(bound, fuel))
}

fn enumeration_records(bound: usize, fuel: usize) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for (i, j) in enumerate_welltyped(bound, &type_menu()).iter().enumerate() {
        let name = format!("enum-{i}");
        out.push(check_economizing(&name, &ImpCtx::empty(), &j.expr, &j.ty, j.dir));
        out.push(check_econ_n_freeness(&name, &ImpCtx::empty(), &j.expr, &j.ty, j.dir));
        if j.dir == Direction::Check {
            let s = Subject::from_impartial(&name, &j.expr, &j.ty);
            out.push(check_elaboration_soundness(&name, &s.expr, &s.ty));
            out.push(check_elab_n_freeness(&name, &s.expr, &s.ty));
            if let (Ok(results), Ok(target_ty)) = (elaborate_closed(&s.expr, &s.ty), try_ty_target(&s.ty)) {
                for (phi, r) in &results {
                    out.push(check_target_safety(&format!("{name}@{phi}"), &r.witness, &target_ty, fuel));
                }
            }
        }
    }
    out
}
