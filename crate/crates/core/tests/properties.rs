use std::rc::Rc;

use proptest::prelude::*;

use eo_core::concrete::{parse_econ_expr, parse_econ_type, parse_impartial_type, parse_target_term};
use eo_core::derivation::Direction;
use eo_core::elaborate::{elaborate_closed, try_ty_target};
use eo_core::expr::{EconExpr, Expr, Side, Term};
use eo_core::machine::{Machine, MachineStep, Watch};
use eo_core::source_semantics::{cbv_step, enumerate_steps, is_source_value, Flavor, SrcStepResult};
use eo_core::target::{evaluate, step, Outcome, StepResult, TargetTerm};
use eo_core::typed::{typed_check, typed_step};
use eo_core::types::{EconType, EvalOrder, ImpartialType};
use eo_core::context::TargetCtx;
use eo_core::verify::{enumerate_welltyped, n_free_target, type_menu, with_deep_stack, Enumerated, Subject};

const NAMES: [&str; 3] = ["x", "y", "u"];

fn name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&NAMES[..])
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right)]
}

fn order() -> impl Strategy<Value = EvalOrder> {
    prop_oneof![Just(EvalOrder::V), Just(EvalOrder::N), Just(EvalOrder::Var("a".into()))]
}

fn econ_type() -> impl Strategy<Value = EconType> {
    let leaf = prop_oneof![Just(EconType::Unit), Just(EconType::tyvar("t"))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EconType::Arrow(Rc::new(a), Rc::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EconType::Prod(Rc::new(a), Rc::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EconType::Sum(Rc::new(a), Rc::new(b))),
            (order(), inner.clone()).prop_map(|(e, a)| EconType::Susp(e, Rc::new(a))),
            inner.clone().prop_map(|a| EconType::Forall("t".into(), Rc::new(a))),
            inner.clone().prop_map(|a| EconType::Rec("t".into(), Rc::new(a))),
            inner.prop_map(|a| EconType::AllEo("a".into(), Rc::new(a))),
        ]
    })
}

fn impartial_type() -> impl Strategy<Value = ImpartialType> {
    let leaf = prop_oneof![Just(ImpartialType::Unit), Just(ImpartialType::TyVar("t".into()))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), order()).prop_map(|(a, b, e)| ImpartialType::Arrow(Rc::new(a), Rc::new(b), e)),
            (inner.clone(), inner.clone(), order()).prop_map(|(a, b, e)| ImpartialType::Prod(Rc::new(a), Rc::new(b), e)),
            (inner.clone(), inner.clone(), order()).prop_map(|(a, b, e)| ImpartialType::Sum(Rc::new(a), Rc::new(b), e)),
            (inner.clone(), order()).prop_map(|(a, e)| ImpartialType::Rec("t".into(), Rc::new(a), e)),
            inner.clone().prop_map(|a| ImpartialType::Forall("t".into(), Rc::new(a))),
            inner.prop_map(|a| ImpartialType::AllEo("a".into(), Rc::new(a))),
        ]
    })
}

/// How a name is bound at a use site.
#[derive(Clone, Copy, PartialEq)]
enum Binder {
    Plain,
    Fixed,
}

fn bound(env: &[(&str, Binder)], x: &str) -> Option<Binder> {
    env.iter().rev().find(|(y, _)| *y == x).map(|(_, b)| *b)
}

fn target_term() -> impl Strategy<Value = TargetTerm> {
    use TargetTerm as M;
    let leaf = prop_oneof![Just(M::Unit), name().prop_map(M::var), name().prop_map(|u| M::FixVar(u.into()))];
    let open = leaf.prop_recursive(5, 40, 3, |inner| {
        let r = |m: M| Rc::new(m);
        prop_oneof![
            (name(), inner.clone()).prop_map(move |(x, m)| M::Lam(x.into(), r(m))),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| M::App(r(a), r(b))),
            (name(), inner.clone()).prop_map(move |(u, m)| M::Fix(u.into(), r(m))),
            inner.clone().prop_map(move |m| M::TyLam(r(m))),
            inner.clone().prop_map(move |m| M::TyApp(r(m))),
            inner.clone().prop_map(move |m| M::Thunk(r(m))),
            inner.clone().prop_map(move |m| M::Force(r(m))),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| M::Pair(r(a), r(b))),
            (side(), inner.clone()).prop_map(move |(k, m)| M::Proj(k, r(m))),
            (side(), inner.clone()).prop_map(move |(k, m)| M::Inj(k, r(m))),
            (inner.clone(), name(), inner.clone(), name(), inner.clone())
                .prop_map(move |(m, x, a, y, b)| M::Case(r(m), x.into(), r(a), y.into(), r(b))),
            inner.clone().prop_map(move |m| M::Roll(r(m))),
            inner.prop_map(move |m| M::Unroll(r(m))),
        ]
    });
    open.prop_map(|m| close_target(&m, &mut Vec::new()))
}

/// Replace every name not bound by a binder of its kind with `()`.
fn close_target(m: &TargetTerm, env: &mut Vec<(&'static str, Binder)>) -> TargetTerm {
    use TargetTerm as M;
    let r = |m: M| Rc::new(m);
    let key = |x: &str| NAMES.iter().copied().find(|n| *n == x).expect("generated name");
    match m {
        M::Var(x) if bound(env, x) == Some(Binder::Plain) => m.clone(),
        M::FixVar(u) if bound(env, u) == Some(Binder::Fixed) => m.clone(),
        M::Var(_) | M::FixVar(_) | M::Unit => M::Unit,
        M::Lam(x, b) | M::Fix(x, b) => {
            let kind = if matches!(m, M::Lam(..)) { Binder::Plain } else { Binder::Fixed };
            env.push((key(x), kind));
            let b = close_target(b, env);
            env.pop();
            if kind == Binder::Plain { M::Lam(x.clone(), r(b)) } else { M::Fix(x.clone(), r(b)) }
        }
        M::Case(s, x, a, y, b) => {
            let s = close_target(s, env);
            env.push((key(x), Binder::Plain));
            let a = close_target(a, env);
            env.pop();
            env.push((key(y), Binder::Plain));
            let b = close_target(b, env);
            env.pop();
            M::Case(r(s), x.clone(), r(a), y.clone(), r(b))
        }
        M::App(a, b) => M::App(r(close_target(a, env)), r(close_target(b, env))),
        M::Pair(a, b) => M::Pair(r(close_target(a, env)), r(close_target(b, env))),
        M::TyLam(a) => M::TyLam(r(close_target(a, env))),
        M::TyApp(a) => M::TyApp(r(close_target(a, env))),
        M::Thunk(a) => M::Thunk(r(close_target(a, env))),
        M::Force(a) => M::Force(r(close_target(a, env))),
        M::Proj(k, a) => M::Proj(*k, r(close_target(a, env))),
        M::Inj(k, a) => M::Inj(*k, r(close_target(a, env))),
        M::Roll(a) => M::Roll(r(close_target(a, env))),
        M::Unroll(a) => M::Unroll(r(close_target(a, env))),
    }
}

fn source_term() -> impl Strategy<Value = Term> {
    use Term as T;
    let leaf = prop_oneof![Just(T::Unit), name().prop_map(T::var), name().prop_map(T::fixvar)];
    let open = leaf.prop_recursive(5, 40, 3, |inner| {
        let r = |m: T| Rc::new(m);
        prop_oneof![
            (name(), inner.clone()).prop_map(move |(x, m)| T::Lam(x.into(), r(m))),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| T::App(r(a), r(b))),
            (name(), inner.clone()).prop_map(move |(u, m)| T::Fix(u.into(), r(m))),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| T::Pair(r(a), r(b))),
            (side(), inner.clone()).prop_map(move |(k, m)| T::Proj(k, r(m))),
            (side(), inner.clone()).prop_map(move |(k, m)| T::Inj(k, r(m))),
            (inner.clone(), name(), inner.clone(), name(), inner)
                .prop_map(move |(m, x, a, y, b)| T::Case(r(m), x.into(), r(a), y.into(), r(b))),
        ]
    });
    open.prop_map(|e| close_source(&e, &mut Vec::new()))
}

fn close_source(e: &Term, env: &mut Vec<(&'static str, Binder)>) -> Term {
    use Term as T;
    let r = |m: T| Rc::new(m);
    let key = |x: &str| NAMES.iter().copied().find(|n| *n == x).expect("generated name");
    match e {
        T::Var(x) if bound(env, x) == Some(Binder::Plain) => e.clone(),
        T::FixVar(u) if bound(env, u) == Some(Binder::Fixed) => e.clone(),
        T::Var(_) | T::FixVar(_) | T::Unit => T::Unit,
        T::Lam(x, b) => {
            env.push((key(x), Binder::Plain));
            let b = close_source(b, env);
            env.pop();
            T::Lam(x.clone(), r(b))
        }
        T::Fix(u, b) => {
            env.push((key(u), Binder::Fixed));
            let b = close_source(b, env);
            env.pop();
            T::Fix(u.clone(), r(b))
        }
        T::Case(s, x, a, y, b) => {
            let s = close_source(s, env);
            env.push((key(x), Binder::Plain));
            let a = close_source(a, env);
            env.pop();
            env.push((key(y), Binder::Plain));
            let b = close_source(b, env);
            env.pop();
            T::Case(r(s), x.clone(), r(a), y.clone(), r(b))
        }
        T::App(a, b) => T::App(r(close_source(a, env)), r(close_source(b, env))),
        T::Pair(a, b) => T::Pair(r(close_source(a, env)), r(close_source(b, env))),
        T::Proj(k, a) => T::Proj(*k, r(close_source(a, env))),
        T::Inj(k, a) => T::Inj(*k, r(close_source(a, env))),
    }
}

/// Source expressions with annotations, from closed erased terms.
fn econ_expr() -> impl Strategy<Value = EconExpr> {
    (source_term(), econ_type(), prop::collection::vec(0usize..4, 0..3)).prop_map(|(t, ty, wraps)| {
        let mut e = annotate(&t);
        for w in wraps {
            e = match w {
                0 => Expr::Anno(Rc::new(e), ty.clone()),
                1 => Expr::TyApp(Rc::new(e), ty.clone()),
                2 => Expr::EoApp(Rc::new(e), EvalOrder::N),
                _ => Expr::TyLam("t".into(), Rc::new(e)),
            };
        }
        e
    })
}

fn annotate(t: &Term) -> EconExpr {
    use Term as T;
    let r = |e: EconExpr| Rc::new(e);
    match t {
        T::Unit => Expr::Unit,
        T::Var(x) => Expr::Var(x.clone()),
        T::FixVar(u) => Expr::FixVar(u.clone()),
        T::Lam(x, b) => Expr::Lam(x.clone(), r(annotate(b))),
        T::App(a, b) => Expr::App(r(annotate(a)), r(annotate(b))),
        T::Fix(u, b) => Expr::Fix(u.clone(), r(annotate(b))),
        T::Pair(a, b) => Expr::Pair(r(annotate(a)), r(annotate(b))),
        T::Proj(k, a) => Expr::Proj(*k, r(annotate(a))),
        T::Inj(k, a) => Expr::Inj(*k, r(annotate(a))),
        T::Case(s, x, a, y, b) => Expr::Case(r(annotate(s)), x.clone(), r(annotate(a)), y.clone(), r(annotate(b))),
    }
}

fn check_judgments(bound: usize) -> Vec<Enumerated> {
    enumerate_welltyped(bound, &type_menu()).into_iter().filter(|j| j.dir == Direction::Check).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn target_terms_print_and_parse_back(m in target_term()) {
        let back = parse_target_term(&m.to_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, m);
    }

    #[test]
    fn economical_types_print_and_parse_back(s in econ_type()) {
        let back = parse_econ_type(&s.to_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(back.alpha_eq(&s), "{} vs {}", back, s);
    }

    #[test]
    fn impartial_types_print_and_parse_back(t in impartial_type()) {
        let back = parse_impartial_type(&t.to_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, t);
    }

    #[test]
    fn economical_expressions_print_and_parse_back(e in econ_expr()) {
        let back = parse_econ_expr(&e.to_string()).map_err(|err| TestCaseError::fail(format!("{e}: {err}")))?;
        prop_assert_eq!(back, e);
    }

    #[test]
    fn machine_agrees_with_root_stepping(m in target_term()) {
        let mut machine = Machine::new(m.clone());
        let mut cur = m;
        for _ in 0..40 {
            match (step(&cur), machine.step()) {
                (StepResult::Stepped(n, r), MachineStep::Stepped { rule, .. }) => {
                    prop_assert_eq!(r, rule);
                    prop_assert_eq!(&n, &machine.term());
                    cur = n;
                }
                (StepResult::Value, MachineStep::Value) | (StepResult::Stuck, MachineStep::Stuck) => break,
                (a, b) => prop_assert!(false, "{}: {:?} vs {:?}", cur, a, b),
            }
        }
    }

    #[test]
    fn target_steps_create_no_thunks(m in target_term()) {
        prop_assume!(n_free_target(&m));
        let run = evaluate(&m, 40, true);
        for (t, _) in &run.trace {
            prop_assert!(n_free_target(t), "{}", t);
        }
    }

    #[test]
    fn target_values_do_not_step(m in target_term()) {
        let stepped = matches!(step(&m), StepResult::Stepped(..));
        prop_assert!(!(m.is_value() && stepped));
        prop_assert_eq!(matches!(step(&m), StepResult::Value), m.is_value());
    }

    #[test]
    fn call_by_value_step_is_a_by_value_step(e in source_term()) {
        let all = enumerate_steps(&e);
        match cbv_step(&e) {
            SrcStepResult::Stepped(next, rule) => {
                prop_assert!(all.iter().any(|s| s.flavor == Flavor::ByValue && s.rule == rule && s.result == next));
            }
            SrcStepResult::Value => {
                prop_assert!(is_source_value(&e));
                prop_assert!(all.is_empty(), "{:?}", all);
            }
            SrcStepResult::Stuck => {
                prop_assert!(!all.iter().any(|s| s.flavor == Flavor::ByValue));
            }
        }
    }

    #[test]
    fn source_steps_are_deterministic(e in source_term()) {
        let (a, b) = (enumerate_steps(&e), enumerate_steps(&e));
        prop_assert_eq!(a, b);
        let by_value = |r: &SrcStepResult| match r {
            SrcStepResult::Stepped(t, rule) => Some((t.clone(), *rule)),
            _ => None,
        };
        prop_assert_eq!(by_value(&cbv_step(&e)), by_value(&cbv_step(&e)));
    }
}

/// Preservation and progress along the root-stepping evaluator, on every
/// small enumerated program.
#[test]
fn enumerated_programs_step_safely() {
    with_deep_stack(|| {
        for j in check_judgments(5) {
            let s = Subject::from_impartial("p", &j.expr, &j.ty);
            let ty = try_ty_target(&s.ty).unwrap();
            for (_, r) in elaborate_closed(&s.expr, &s.ty).unwrap() {
                let mut w = r.witness;
                for _ in 0..60 {
                    assert!(typed_check(&TargetCtx::empty(), &w, &ty).is_ok(), "{}", w.erase());
                    match typed_step(&w) {
                        Some((next, _)) => w = next,
                        None => {
                            assert!(w.erase().is_value(), "stuck at {}", w.erase());
                            break;
                        }
                    }
                }
            }
        }
    });
}

/// Every recurrence the watch reports is real: stepping on for several more
/// periods contracts exactly the redexes of the period before, and the run
/// never ends.
#[test]
fn recurrences_repeat_their_redexes() {
    let seen = with_deep_stack(|| {
        let mut seen = 0;
        for j in check_judgments(6) {
            let s = Subject::from_impartial("p", &j.expr, &j.ty);
            for (_, r) in elaborate_closed(&s.expr, &s.ty).unwrap() {
                let mut machine = Machine::new(r.witness.clone());
                let mut watch = Watch::default();
                let mut redexes = Vec::new();
                let mut found = None;
                for k in 1..=2000 {
                    let MachineStep::Stepped { redex, .. } = machine.step() else { break };
                    redexes.push(redex.erase());
                    if let Some(rec) = watch.observe(k, &mut machine, &redex) {
                        found = Some((k, rec));
                        break;
                    }
                }
                let Some((at, rec)) = found else {
                    let end = evaluate(&r.term, 10_000, false);
                    assert!(!matches!(end.outcome, Outcome::OutOfFuel(_)), "{} diverges unnoticed", r.term);
                    continue;
                };
                seen += 1;
                for k in at + 1..=at + 3 * rec.period {
                    let MachineStep::Stepped { redex, .. } = machine.step() else { panic!("{} ended after recurring", r.term) };
                    assert_eq!(redex.erase(), redexes[k - 1 - rec.period], "{} at step {k}", r.term);
                    redexes.push(redex.erase());
                }
            }
        }
        seen
    });
    assert!(seen > 100, "{seen} recurrences");
}
