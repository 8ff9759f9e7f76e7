//! Small-step semantics of erased source terms. A step contracts a by-value
//! redex in a by-value context, or a by-name redex in a by-name context; the
//! two choices make the relation nondeterministic.

use serde::Serialize;

use crate::expr::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Flavor {
    #[serde(rename = "byvalue")]
    ByValue,
    #[serde(rename = "byname")]
    ByName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SrcRule {
    BetaV,
    BetaN,
    FixV,
    FixN,
    ProjV,
    ProjN,
    CaseV,
    CaseN,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceStep {
    /// Child indices from the root to the redex.
    pub path: Vec<usize>,
    pub flavor: Flavor,
    pub rule: SrcRule,
    pub result: Term,
}

#[derive(Clone, Debug)]
pub enum SrcStepResult {
    Stepped(Term, SrcRule),
    Value,
    Stuck,
}

#[derive(Clone, Debug)]
pub enum SrcOutcome {
    Value(Term),
    OutOfFuel(Term),
    Stuck(Term),
}

#[derive(Clone, Debug)]
pub struct SrcEvaluation {
    pub outcome: SrcOutcome,
    pub steps: usize,
    pub trace: Vec<(Term, Option<SrcRule>)>,
}

pub fn is_source_value(e: &Term) -> bool {
    match e {
        Term::Unit | Term::Lam(..) => true,
        Term::Pair(a, b) => is_source_value(a) && is_source_value(b),
        Term::Inj(_, v) => is_source_value(v),
        _ => false,
    }
}

fn reduce_by_value(e: &Term) -> Option<(Term, SrcRule)> {
    match e {
        Term::App(f, a) => match &**f {
            Term::Lam(x, body) if is_source_value(a) => Some((body.subst_var(a, x), SrcRule::BetaV)),
            _ => None,
        },
        Term::Fix(u, body) => Some((body.subst_fixvar(e, u), SrcRule::FixV)),
        Term::Proj(k, p) => match &**p {
            Term::Pair(a, b) if is_source_value(a) && is_source_value(b) => {
                Some(((**k.pick(a, b)).clone(), SrcRule::ProjV))
            }
            _ => None,
        },
        Term::Case(s, x1, e1, x2, e2) => match &**s {
            Term::Inj(k, v) if is_source_value(v) => {
                let (x, body) = k.pick((x1, e1), (x2, e2));
                Some((body.subst_var(v, x), SrcRule::CaseV))
            }
            _ => None,
        },
        _ => None,
    }
}

fn reduce_by_name(e: &Term) -> Option<(Term, SrcRule)> {
    match e {
        Term::App(f, a) => match &**f {
            Term::Lam(x, body) => Some((body.subst_var(a, x), SrcRule::BetaN)),
            _ => None,
        },
        Term::Fix(u, body) => Some((body.subst_fixvar(e, u), SrcRule::FixN)),
        Term::Proj(k, p) => match &**p {
            Term::Pair(a, b) => Some(((**k.pick(a, b)).clone(), SrcRule::ProjN)),
            _ => None,
        },
        Term::Case(s, x1, e1, x2, e2) => match &**s {
            Term::Inj(k, v) => {
                let (x, body) = k.pick((x1, e1), (x2, e2));
                Some((body.subst_var(v, x), SrcRule::CaseN))
            }
            _ => None,
        },
        _ => None,
    }
}

fn child(e: &Term, i: usize) -> &Term {
    match (e, i) {
        (Term::App(a, _) | Term::Pair(a, _), 0) => a,
        (Term::App(_, b) | Term::Pair(_, b), 1) => b,
        (Term::Proj(_, c) | Term::Inj(_, c), 0) => c,
        (Term::Case(s, ..), 0) => s,
        _ => unreachable!("path does not address a child"),
    }
}

pub fn at_path<'a>(e: &'a Term, path: &[usize]) -> &'a Term {
    path.iter().fold(e, |t, &i| child(t, i))
}

pub fn plug(e: &Term, path: &[usize], new: Term) -> Term {
    use std::rc::Rc;
    let Some((&i, rest)) = path.split_first() else {
        return new;
    };
    let replaced = Rc::new(plug(child(e, i), rest, new));
    match (e, i) {
        (Term::App(_, b), 0) => Term::App(replaced, b.clone()),
        (Term::App(a, _), 1) => Term::App(a.clone(), replaced),
        (Term::Pair(_, b), 0) => Term::Pair(replaced, b.clone()),
        (Term::Pair(a, _), 1) => Term::Pair(a.clone(), replaced),
        (Term::Proj(k, _), 0) => Term::Proj(*k, replaced),
        (Term::Inj(k, _), 0) => Term::Inj(*k, replaced),
        (Term::Case(_, x1, e1, x2, e2), 0) => Term::Case(replaced, x1.clone(), e1.clone(), x2.clone(), e2.clone()),
        _ => unreachable!("path does not address a child"),
    }
}

/// Every hole position of a by-value context in `e`.
pub fn by_value_holes(e: &Term) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut under = |i: usize, c: &Term| {
        for mut p in by_value_holes(c) {
            p.insert(0, i);
            out.push(p);
        }
    };
    match e {
        Term::App(f, a) | Term::Pair(f, a) => {
            under(0, f);
            if is_source_value(f) {
                under(1, a);
            }
        }
        Term::Proj(_, c) | Term::Inj(_, c) => under(0, c),
        Term::Case(s, ..) => under(0, s),
        _ => {}
    }
    out
}

/// Every hole position of a by-name context in `e`.
pub fn by_name_holes(e: &Term) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut under = |i: usize, c: &Term| {
        for mut p in by_name_holes(c) {
            p.insert(0, i);
            out.push(p);
        }
    };
    match e {
        Term::App(f, _) => under(0, f),
        Term::Proj(_, c) | Term::Inj(_, c) => under(0, c),
        Term::Case(s, ..) => under(0, s),
        _ => {}
    }
    out
}

/// All steps from `e`. A contraction that both relations license at the
/// same position with the same result is reported once, as by-value.
pub fn enumerate_steps(e: &Term) -> Vec<SourceStep> {
    let mut out: Vec<SourceStep> = Vec::new();
    for path in by_value_holes(e) {
        if let Some((r, rule)) = reduce_by_value(at_path(e, &path)) {
            out.push(SourceStep { result: plug(e, &path, r), path, flavor: Flavor::ByValue, rule });
        }
    }
    for path in by_name_holes(e) {
        if let Some((r, rule)) = reduce_by_name(at_path(e, &path)) {
            let result = plug(e, &path, r);
            if !out.iter().any(|s| s.path == path && s.result.identical(&result)) {
                out.push(SourceStep { path, flavor: Flavor::ByName, rule, result });
            }
        }
    }
    out
}

fn cbv_path(e: &Term) -> Option<Vec<usize>> {
    if is_source_value(e) {
        return None;
    }
    if reduce_by_value(e).is_some() {
        return Some(vec![]);
    }
    let descend = |i: usize, c: &Term| {
        cbv_path(c).map(|mut p| {
            p.insert(0, i);
            p
        })
    };
    match e {
        Term::App(f, a) | Term::Pair(f, a) => {
            if !is_source_value(f) {
                descend(0, f)
            } else {
                descend(1, a)
            }
        }
        Term::Proj(_, c) | Term::Inj(_, c) => descend(0, c),
        Term::Case(s, ..) => descend(0, s),
        _ => None,
    }
}

/// The leftmost by-value step.
pub fn cbv_step(e: &Term) -> SrcStepResult {
    if is_source_value(e) {
        return SrcStepResult::Value;
    }
    match cbv_path(e) {
        None => SrcStepResult::Stuck,
        Some(path) => {
            let (r, rule) = reduce_by_value(at_path(e, &path)).expect("path ends at a redex");
            SrcStepResult::Stepped(plug(e, &path, r), rule)
        }
    }
}

/// Path of the redex `cbv_step` contracts, if any.
pub fn cbv_redex_path(e: &Term) -> Option<Vec<usize>> {
    cbv_path(e)
}

pub fn cbv_evaluate(e: &Term, fuel: usize, trace: bool) -> SrcEvaluation {
    let mut current = e.clone();
    let mut log = Vec::new();
    if trace {
        log.push((current.clone(), None));
    }
    for steps in 0..fuel {
        match cbv_step(&current) {
            SrcStepResult::Value => return SrcEvaluation { outcome: SrcOutcome::Value(current), steps, trace: log },
            SrcStepResult::Stuck => return SrcEvaluation { outcome: SrcOutcome::Stuck(current), steps, trace: log },
            SrcStepResult::Stepped(next, rule) => {
                if trace {
                    log.push((next.clone(), Some(rule)));
                }
                current = next;
            }
        }
    }
    let outcome =
        if is_source_value(&current) { SrcOutcome::Value(current) } else { SrcOutcome::OutOfFuel(current) };
    SrcEvaluation { outcome, steps: fuel, trace: log }
}

/// Whether an index path addresses a by-name hole of `e`.
pub fn is_by_name_hole(e: &Term, path: &[usize]) -> bool {
    by_name_holes(e).iter().any(|p| p == path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Side;

    fn id() -> Term {
        Term::lam("x", Term::var("x"))
    }
    fn omega() -> Term {
        Term::fix("u", Term::fixvar("u"))
    }

    #[test]
    fn values() {
        assert!(is_source_value(&Term::pair(Term::Unit, id())));
        assert!(!is_source_value(&Term::fix("u", id())));
        assert!(!is_source_value(&Term::inj(Side::Left, Term::app(Term::var("f"), Term::var("a")))));
    }

    #[test]
    fn no_by_name_step_inside_pairs() {
        let e = Term::proj(Side::Right, Term::pair(Term::app(id(), Term::Unit), Term::Unit));
        let steps = enumerate_steps(&e);
        assert_eq!(steps.len(), 2, "{steps:?}");
        let root = steps.iter().find(|s| s.path.is_empty()).unwrap();
        assert_eq!((root.flavor, root.rule), (Flavor::ByName, SrcRule::ProjN));
        assert_eq!(root.result, Term::Unit);
        let inner = steps.iter().find(|s| s.path == vec![0, 0]).unwrap();
        assert_eq!((inner.flavor, inner.rule), (Flavor::ByValue, SrcRule::BetaV));
    }

    #[test]
    fn divergent_argument() {
        let e = Term::app(Term::lam("x", Term::Unit), omega());
        let steps = enumerate_steps(&e);
        assert_eq!(steps.len(), 2);
        let root = steps.iter().find(|s| s.path.is_empty()).unwrap();
        assert_eq!((root.flavor, root.rule, root.result.clone()), (Flavor::ByName, SrcRule::BetaN, Term::Unit));
        let arg = steps.iter().find(|s| s.path == vec![1]).unwrap();
        assert_eq!((arg.flavor, arg.rule), (Flavor::ByValue, SrcRule::FixV));
        assert!(enumerate_steps(&Term::Unit).is_empty());
        assert!(matches!(cbv_evaluate(&e, 50, false).outcome, SrcOutcome::OutOfFuel(_)));
    }

    #[test]
    fn by_value_redex_at_by_name_hole_is_reported_once() {
        let e = Term::app(id(), Term::Unit);
        let steps = enumerate_steps(&e);
        assert_eq!(steps.len(), 1);
        assert_eq!((steps[0].flavor, steps[0].rule), (Flavor::ByValue, SrcRule::BetaV));
    }

    #[test]
    fn cbv_examples() {
        assert!(matches!(cbv_step(&Term::app(id(), Term::Unit)), SrcStepResult::Stepped(Term::Unit, SrcRule::BetaV)));
        let p = Term::proj(Side::Left, Term::pair(Term::Unit, Term::Unit));
        assert!(matches!(cbv_step(&p), SrcStepResult::Stepped(Term::Unit, SrcRule::ProjV)));
        let c = Term::case(Term::inj(Side::Right, Term::Unit), "a", Term::var("a"), "b", Term::var("b"));
        assert!(matches!(cbv_step(&c), SrcStepResult::Stepped(Term::Unit, SrcRule::CaseV)));
        assert!(matches!(cbv_evaluate(&Term::app(id(), Term::Unit), 10, false).outcome, SrcOutcome::Value(Term::Unit)));
        assert!(matches!(cbv_evaluate(&omega(), 5, false).outcome, SrcOutcome::OutOfFuel(_)));
        assert!(matches!(cbv_evaluate(&Term::proj(Side::Left, Term::Unit), 5, false).outcome, SrcOutcome::Stuck(_)));
    }
}
