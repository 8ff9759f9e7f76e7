//! Simulation of target evaluation by source steps. After each target step
//! a breadth-first search over source steps looks for a term that the
//! elaboration relation still connects to the new target term.

use std::collections::HashSet;

use serde::Serialize;

use crate::check_elab::{elab_verdict, ElabVerdict, DEFAULT_BUDGET};
use crate::elaborate::elaborate_closed;
use crate::expr::{EconExpr, Term};
use crate::source_semantics::{enumerate_steps, is_source_value, Flavor, SrcRule};
use crate::target::{step, Reduction, StepResult, TargetTerm};
use crate::types::{EconType, EvalOrder, Valueness};

use super::freeness::n_free_target;
use super::harness::Verdict;

pub const DEFAULT_DEPTH: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct MatchedStep {
    pub path: Vec<usize>,
    pub flavor: Flavor,
    pub rule: SrcRule,
}

/// One target step and the source steps found to match it.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationStep {
    pub reduction: Reduction,
    pub target: String,
    pub source: String,
    pub source_steps: Vec<MatchedStep>,
    pub depth: usize,
    pub valueness: Vec<Valueness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub program: String,
    pub elaborated: String,
    pub steps: Vec<SimulationStep>,
    pub verdict: Verdict,
    pub detail: String,
    pub target_n_free: bool,
    pub only_by_value: bool,
}

/// The valuenesses `e` elaborates to `m` at, or `Err(exhausted)` when none.
fn related(e: &Term, s: &EconType, m: &TargetTerm) -> Result<Vec<Valueness>, bool> {
    match elab_verdict(e, s, m, DEFAULT_BUDGET) {
        ElabVerdict::Holds(p) => Ok(p),
        ElabVerdict::Fails => Err(false),
        ElabVerdict::Unknown => Err(true),
    }
}

fn plausibly_related(e: &Term, s: &EconType, m: &TargetTerm) -> bool {
    elab_verdict(e, s, m, DEFAULT_BUDGET) != ElabVerdict::Fails
}

/// Decompose `e : S ↪ m` for the shapes whose sub-facts are closed
/// judgments, and check them. `None` when no shape applies.
pub fn inversion_holds(e: &Term, s: &EconType, m: &TargetTerm) -> Option<bool> {
    use EconType as S;
    use TargetTerm as M;
    let s = s.strip_by_value();
    match (m, s) {
        (M::Lam(..), S::Arrow(..)) => Some(matches!(e, Term::Lam(..))),
        (M::Pair(w1, w2), S::AllEo(a, s0)) if w1.is_value() && w2.is_value() => Some(
            plausibly_related(e, &s0.subst_eo(&EvalOrder::V, a), w1)
                && plausibly_related(e, &s0.subst_eo(&EvalOrder::N, a), w2),
        ),
        (M::Thunk(m0), S::Susp(EvalOrder::N, s0)) => Some(plausibly_related(e, s0, m0)),
        (M::Inj(k, w), S::Sum(l, r)) if w.is_value() => Some(match e {
            Term::Inj(j, e0) => j == k && plausibly_related(e0, k.pick(l, r), w),
            _ => false,
        }),
        (M::Roll(w), S::Rec(..)) if w.is_value() => Some(plausibly_related(e, &s.unfold().expect("rec"), w)),
        (M::Pair(w1, w2), S::Prod(l, r)) if w1.is_value() && w2.is_value() => Some(match e {
            Term::Pair(e1, e2) => plausibly_related(e1, l, w1) && plausibly_related(e2, r, w2),
            _ => false,
        }),
        _ => None,
    }
}

struct Node {
    term: Term,
    parent: Option<usize>,
    step: Option<MatchedStep>,
}

enum Search {
    Found { at: usize, depth: usize, phis: Vec<Valueness> },
    Missing { exhausted: bool },
}

struct Simulator<'a> {
    s: &'a EconType,
    depth: usize,
    by_value_only: bool,
}

impl Simulator<'_> {
    /// Breadth-first search from `from` for a term related to `m`. With
    /// `stay`, only `from` itself may match, and only at `val`.
    fn search(&self, nodes: &mut Vec<Node>, from: Term, m: &TargetTerm, stay: bool) -> Search {
        nodes.clear();
        nodes.push(Node { term: from, parent: None, step: None });
        let mut seen = HashSet::new();
        seen.insert(nodes[0].term.canonical().to_string());
        let mut level = vec![0usize];
        let mut exhausted = false;
        for depth in 0..=self.depth {
            for &i in &level {
                match related(&nodes[i].term, self.s, m) {
                    Ok(phis) if !stay || phis.contains(&Valueness::Val) => return Search::Found { at: i, depth, phis },
                    Ok(_) => {}
                    Err(unknown) => exhausted |= unknown,
                }
            }
            if stay {
                return Search::Missing { exhausted };
            }
            if depth == self.depth {
                exhausted |= level.iter().any(|&i| !enumerate_steps(&nodes[i].term).is_empty());
                break;
            }
            let mut next = Vec::new();
            for &i in &level {
                for st in enumerate_steps(&nodes[i].term) {
                    if self.by_value_only && st.flavor != Flavor::ByValue {
                        continue;
                    }
                    if seen.insert(st.result.canonical().to_string()) {
                        let step = MatchedStep { path: st.path, flavor: st.flavor, rule: st.rule };
                        nodes.push(Node { term: st.result, parent: Some(i), step: Some(step) });
                        next.push(nodes.len() - 1);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            level = next;
        }
        Search::Missing { exhausted }
    }
}

fn path_to(nodes: &[Node], mut at: usize) -> Vec<MatchedStep> {
    let mut out = Vec::new();
    while let Some(p) = nodes[at].parent {
        out.push(nodes[at].step.clone().expect("non-root nodes record their step"));
        at = p;
    }
    out.reverse();
    out
}

/// Elaborate `e` at `S` (the `val` derivation when there is one), run the
/// target for up to `fuel` steps and match every step in the source.
pub fn run_consistency(program: &str, e: &EconExpr, s: &EconType, fuel: usize, depth: usize) -> ConsistencyReport {
    let mut report = ConsistencyReport {
        program: program.to_string(),
        elaborated: String::new(),
        steps: Vec::new(),
        verdict: Verdict::Fail,
        detail: String::new(),
        target_n_free: false,
        only_by_value: true,
    };
    let m0 = match elaborate_closed(e, s) {
        Ok(rs) if !rs.is_empty() => rs[0].1.term.clone(),
        Ok(_) => unreachable!("a successful check derives some valueness"),
        Err(err) => {
            report.detail = err.to_string();
            return report;
        }
    };
    report.elaborated = m0.to_string();
    report.target_n_free = n_free_target(&m0);
    let sim = Simulator { s, depth, by_value_only: report.target_n_free };
    let mut source = e.erase();
    let mut phis = match related(&source, s, &m0) {
        Ok(p) => p,
        Err(unknown) => {
            report.verdict = if unknown { Verdict::SearchExhausted } else { Verdict::Fail };
            report.detail = format!("{source} is not related to its own elaboration");
            return report;
        }
    };
    let mut m = m0;
    let mut nodes = Vec::new();
    for _ in 0..fuel {
        if let Some(false) = inversion_holds(&source, s, &m) {
            report.detail = format!("inversion fails for {source} and {m}");
            return report;
        }
        let (next, reduction) = match step(&m) {
            StepResult::Value => return finish(report, &source, &m, &phis),
            StepResult::Stuck => {
                report.detail = format!("target stuck at {m}");
                return report;
            }
            StepResult::Stepped(n, r) => (n, r),
        };
        let stay = phis.contains(&Valueness::Val);
        match sim.search(&mut nodes, source.clone(), &next, stay) {
            Search::Found { at, depth, phis: found } => {
                let matched = path_to(&nodes, at);
                let by_name = matched.iter().any(|st| st.flavor == Flavor::ByName);
                report.only_by_value &= !by_name;
                // With no thunks in the target every match must be by value;
                // the search enforces this by construction.
                debug_assert!(!(report.target_n_free && by_name));
                source = nodes[at].term.clone();
                report.steps.push(SimulationStep {
                    reduction,
                    target: next.to_string(),
                    source: source.to_string(),
                    source_steps: matched,
                    depth,
                    valueness: found.clone(),
                });
                phis = found;
                m = next;
            }
            Search::Missing { exhausted } => {
                report.verdict = if exhausted { Verdict::SearchExhausted } else { Verdict::Fail };
                report.detail = if stay {
                    format!("{source} at val does not stay related after the target steps to {next}")
                } else {
                    format!("no source term within {depth} steps of {source} is related to {next}")
                };
                return report;
            }
        }
    }
    if m.is_value() {
        if let Some(false) = inversion_holds(&source, s, &m) {
            report.detail = format!("inversion fails for {source} and {m}");
            return report;
        }
        return finish(report, &source, &m, &phis);
    }
    report.verdict = Verdict::OutOfFuel;
    report.detail = format!("no target value within {fuel} steps");
    report
}

/// Checks on reaching a target value `w` related to `source`.
fn finish(mut report: ConsistencyReport, source: &Term, w: &TargetTerm, phis: &[Valueness]) -> ConsistencyReport {
    if !phis.contains(&Valueness::Val) {
        report.detail = format!("target value {w} is related to {source} only at top");
        return report;
    }
    if n_free_target(w) && !is_source_value(source) {
        report.detail = format!("N-free target value {w} but {source} is not a source value");
        return report;
    }
    report.verdict = Verdict::Pass;
    report.detail = format!("{source} ~ {w}");
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type};

    fn run(e: &str, s: &str) -> ConsistencyReport {
        run_consistency("t", &parse_econ_expr(e).unwrap(), &parse_econ_type(s).unwrap(), 100, DEFAULT_DEPTH)
    }

    #[test]
    fn one_beta_step() {
        let r = run("(\\x. x : susp[V] 1 -> 1) ()", "1");
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.detail);
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.steps[0].source_steps.len(), 1);
        assert_eq!(r.steps[0].source_steps[0].rule, SrcRule::BetaV);
        assert!(r.target_n_free && r.only_by_value);
    }

    #[test]
    fn suspended_unit_is_already_a_value() {
        let r = run("()", "susp[N] 1");
        assert_eq!(r.elaborated, "thunk ()");
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.detail);
        assert!(r.steps.is_empty());
    }

    #[test]
    fn order_polymorphic_identity_at_by_value() {
        let r = run("((\\x. x : all %a. susp[%a] 1 -> 1) {V}) ()", "1");
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.detail);
        assert_eq!(r.steps[0].reduction, Reduction::Proj);
        assert!(r.steps[0].source_steps.is_empty());
        assert_eq!(r.steps.last().unwrap().source, "()");
    }

    #[test]
    fn inversion_shapes() {
        let t = |s: &str| parse_econ_type(s).unwrap();
        let unit = Term::Unit;
        let thunk = TargetTerm::thunk(TargetTerm::Unit);
        assert_eq!(inversion_holds(&unit, &t("susp[N] 1"), &thunk), Some(true));
        let inj = Term::inj(crate::expr::Side::Left, Term::Unit);
        let m = TargetTerm::inj(crate::expr::Side::Left, TargetTerm::Unit);
        assert_eq!(inversion_holds(&inj, &t("1 + 1"), &m), Some(true));
        assert_eq!(inversion_holds(&unit, &t("1 + 1"), &m), Some(false));
        assert_eq!(inversion_holds(&unit, &t("1"), &TargetTerm::Unit), None);
    }
}
