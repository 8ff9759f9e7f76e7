//! Bidirectional checker for the economical system. Same strategy as the
//! impartial checker, plus suspension points: checking against `susp[E] S`
//! introduces one, and synthesis strips them whenever another connective is
//! needed.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::context::EconCtx;
use crate::derivation::{Derivation, Direction, Found, Rule, TypingResult};
use crate::error::TypeError;
use crate::expr::{EconExpr, Expr};
use crate::names::{fresh_avoiding, Name};
use crate::types::{Connective, EconType, EvalOrder, Valueness};
use crate::wellformed::{econ_ty_wf, eo_wf, rec_guarded_econ};

pub type EconDerivation = Derivation<EconType, EconType>;
pub type EconFound = Found<EconType, EconType>;
pub type EconResult = TypingResult<EconType, EconType>;

/// Backstop on consecutive unrollings and suspension strips.
pub const EXPOSE_LIMIT: usize = 64;

use EconType as S;
use Valueness::{Top, Val};

pub fn econ_check(ctx: &EconCtx, e: &EconExpr, ty: &EconType) -> Result<EconResult, TypeError> {
    annotation_ok(ctx, ty)?;
    let found = check_in(ctx, &Rc::new(e.clone()), ty)?;
    Ok(TypingResult::from_found(found).expect("check_in never returns an empty set"))
}

pub fn econ_synth(ctx: &EconCtx, e: &EconExpr) -> Result<EconResult, TypeError> {
    let (_, found) = synth_in(ctx, &Rc::new(e.clone()))?;
    Ok(TypingResult::from_found(found).expect("synth_in never returns an empty set"))
}

/// Strip suspensions and unroll recursive types until the head is `want`.
pub fn econ_expose(result: EconResult, want: Connective) -> Result<EconResult, TypeError> {
    let (_, found) = expose_found(result.ty.clone(), result.found, want)?;
    Ok(TypingResult::from_found(found).expect("nonempty"))
}

/// Every valueness derivable for `Γ ⊢ e ⇐ S`; empty when ill-typed.
pub fn econ_derivable(ctx: &EconCtx, e: &EconExpr, ty: &EconType) -> Vec<Valueness> {
    econ_check(ctx, e, ty).map(|r| r.found.valuenesses()).unwrap_or_default()
}

fn annotation_ok(ctx: &EconCtx, ty: &EconType) -> Result<(), TypeError> {
    if !econ_ty_wf(ctx, ty) {
        return Err(TypeError::IllFormedType(ty.to_string()));
    }
    if !rec_guarded_econ(ty) {
        return Err(TypeError::GuardednessViolation(ty.to_string()));
    }
    Ok(())
}

fn node(
    rule: Rule,
    ctx: &EconCtx,
    e: &Rc<EconExpr>,
    dir: Direction,
    ty: &EconType,
    phi: Valueness,
    children: Vec<Rc<EconDerivation>>,
) -> Rc<EconDerivation> {
    Rc::new(Derivation { rule, ctx: ctx.clone(), expr: e.clone(), dir, ty: ty.clone(), valueness: phi, children })
}

fn keep(found: &EconFound, rule: Rule, ctx: &EconCtx, e: &Rc<EconExpr>, dir: Direction, ty: &EconType) -> EconFound {
    let mut out = Found::default();
    for d in found.all() {
        out.add(node(rule, ctx, e, dir, ty, d.valueness, vec![d.clone()]));
    }
    out
}

fn least(found: &EconFound) -> Rc<EconDerivation> {
    found.least().expect("nonempty").clone()
}

fn one(d: Rc<EconDerivation>) -> EconFound {
    let mut f = Found::default();
    f.add(d);
    f
}

/// One synthesis step that removes the head suspension or recursive type.
/// `None` when the head is neither.
fn peel(ty: &EconType, found: &EconFound) -> Option<(EconType, EconFound)> {
    let d = least(found);
    let (ctx, e) = (&d.ctx, &d.expr);
    match ty {
        S::Susp(order, inner) => {
            let inner = (**inner).clone();
            let mut out = Found::default();
            if *order == EvalOrder::V {
                out.merge(keep(found, Rule::SuspElimV, ctx, e, Direction::Synth, &inner));
            }
            out.add(node(Rule::SuspElim, ctx, e, Direction::Synth, &inner, Top, vec![d.clone()]));
            Some((inner, out))
        }
        S::Rec(..) => {
            let unfolded = ty.unfold().expect("rec");
            Some((unfolded.clone(), one(node(Rule::RecElim, ctx, e, Direction::Synth, &unfolded, Top, vec![d.clone()]))))
        }
        _ => None,
    }
}

fn expose_found(mut ty: EconType, mut found: EconFound, want: Connective) -> Result<(EconType, EconFound), TypeError> {
    for _ in 0..=EXPOSE_LIMIT {
        if ty.head() == Some(want) {
            return Ok((ty, found));
        }
        match peel(&ty, &found) {
            Some((t, f)) => {
                ty = t;
                found = f;
            }
            None => {
                return Err(TypeError::ExposeFailed {
                    want: want.to_string(),
                    found: ty.to_string(),
                    expr: least(&found).expr.to_string(),
                })
            }
        }
    }
    Err(TypeError::UnrollLimit(EXPOSE_LIMIT))
}

fn synth_in(ctx: &EconCtx, e: &Rc<EconExpr>) -> Result<(EconType, EconFound), TypeError> {
    let s = Direction::Synth;
    match &**e {
        Expr::Var(x) => {
            let ty = ctx.lookup_var(x).ok_or_else(|| TypeError::UnboundVariable(x.to_string()))?;
            Ok((ty.clone(), one(node(Rule::Var, ctx, e, s, ty, Val, vec![]))))
        }
        Expr::FixVar(u) => {
            let ty = ctx.lookup_fixvar(u).ok_or_else(|| TypeError::UnboundFixVariable(u.to_string()))?;
            Ok((ty.clone(), one(node(Rule::FixVar, ctx, e, s, ty, Top, vec![]))))
        }
        Expr::Anno(e0, ty) => {
            annotation_ok(ctx, ty)?;
            let inner = check_in(ctx, e0, ty)?;
            Ok((ty.clone(), keep(&inner, Rule::Anno, ctx, e, s, ty)))
        }
        Expr::TyApp(e0, arg) => {
            annotation_ok(ctx, arg)?;
            let (ty0, f0) = synth_in(ctx, e0)?;
            let (ty0, f0) = expose_found(ty0, f0, Connective::Forall)?;
            let S::Forall(a, body) = ty0 else { unreachable!() };
            let ty = body.subst_ty(arg, &a);
            Ok((ty.clone(), keep(&f0, Rule::AllElim, ctx, e, s, &ty)))
        }
        Expr::EoApp(e0, order) => {
            if !eo_wf(ctx, order) {
                return Err(TypeError::UnboundEvalOrder(order.to_string()));
            }
            let (ty0, f0) = synth_in(ctx, e0)?;
            let (ty0, f0) = expose_found(ty0, f0, Connective::AllEo)?;
            let S::AllEo(a, body) = ty0 else { unreachable!() };
            let ty = body.subst_eo(order, &a);
            Ok((ty.clone(), keep(&f0, Rule::AllEoElim, ctx, e, s, &ty)))
        }
        Expr::App(e1, e2) => {
            let (ty1, f1) = synth_in(ctx, e1)?;
            let (ty1, f1) = expose_found(ty1, f1, Connective::Arrow)?;
            let S::Arrow(dom, cod) = ty1 else { unreachable!() };
            let f2 = check_in(ctx, e2, &dom)?;
            Ok(((*cod).clone(), one(node(Rule::ArrElim, ctx, e, s, &cod, Top, vec![least(&f1), least(&f2)]))))
        }
        Expr::Proj(k, e0) => {
            let (ty0, f0) = synth_in(ctx, e0)?;
            let (ty0, f0) = expose_found(ty0, f0, Connective::Prod)?;
            let S::Prod(l, r) = ty0 else { unreachable!() };
            let ty = (*k.pick(l, r)).clone();
            Ok((ty.clone(), one(node(Rule::ProdElim(*k), ctx, e, s, &ty, Top, vec![least(&f0)]))))
        }
        _ => Err(TypeError::CannotSynthesize(e.to_string())),
    }
}

fn check_by_type(ctx: &EconCtx, e: &Rc<EconExpr>, ty: &EconType) -> Option<Result<EconFound, TypeError>> {
    let c = Direction::Check;
    match ty {
        S::AllEo(a, body) => Some((|| {
            let (a2, e2, body2) = if ctx.has_eovar(a) {
                let mut avoid: BTreeSet<Name> = ctx.eovars().into_iter().collect();
                avoid.extend(e.free_eovars());
                avoid.extend(body.free_eovars());
                let b = fresh_avoiding(a, &avoid);
                let bv = EvalOrder::Var(b.clone());
                (b, Rc::new(e.subst_eovar_expr(&bv, a)), body.subst_eo(&bv, a))
            } else {
                (a.clone(), e.clone(), (**body).clone())
            };
            let inner = check_in(&ctx.with_eovar(a2), &e2, &body2)?;
            let Some(d) = inner.get(Val) else {
                return Err(TypeError::ValueRestriction { rule: "Ralleointro".into(), expr: e.to_string() });
            };
            Ok(one(node(Rule::AllEoIntro, ctx, e, c, ty, Val, vec![d.clone()])))
        })()),
        S::Forall(a, body) => {
            let Expr::TyLam(b, e0) = &**e else { return None };
            Some((|| {
                let (b2, e2) = if ctx.has_tyvar(b) {
                    let mut avoid: BTreeSet<Name> = ctx.tyvars().into_iter().collect();
                    avoid.extend(e0.free_tyvars());
                    avoid.extend(ty.free_tyvars());
                    let fresh = fresh_avoiding(b, &avoid);
                    (fresh.clone(), Rc::new(e0.rename_tyvar_expr(b, &fresh)))
                } else {
                    (b.clone(), e0.clone())
                };
                let body2 = body.subst_ty(&S::TyVar(b2.clone()), a);
                let inner = check_in(&ctx.with_tyvar(b2), &e2, &body2)?;
                let Some(d) = inner.get(Val) else {
                    return Err(TypeError::ValueRestriction { rule: "Rallintro".into(), expr: e.to_string() });
                };
                Ok(one(node(Rule::AllIntro, ctx, e, c, ty, Val, vec![d.clone()])))
            })())
        }
        S::Rec(..) if !matches!(&**e, Expr::Fix(..) | Expr::Case(..)) => Some((|| {
            let unfolded = ty.unfold().expect("rec");
            let inner = check_in(ctx, e, &unfolded)?;
            Ok(keep(&inner, Rule::RecIntro, ctx, e, c, ty))
        })()),
        S::Susp(order, inner_ty) => Some((|| {
            let inner = check_in(ctx, e, inner_ty)?;
            let mut out = keep(&inner, Rule::SuspIntro, ctx, e, c, ty);
            if *order == EvalOrder::N {
                out.add(node(Rule::SuspIntro, ctx, e, c, ty, Val, vec![least(&inner)]));
            }
            Ok(out)
        })()),
        _ => None,
    }
}

fn mismatch(e: &EconExpr, ty: &EconType) -> TypeError {
    TypeError::NoRule { expr: e.to_string(), expected: ty.to_string() }
}

fn check_by_expr(ctx: &EconCtx, e: &Rc<EconExpr>, ty: &EconType) -> Result<EconFound, TypeError> {
    let c = Direction::Check;
    match (&**e, ty) {
        (Expr::Unit, S::Unit) => Ok(one(node(Rule::UnitIntro, ctx, e, c, ty, Val, vec![]))),
        (Expr::Lam(x, body), S::Arrow(dom, cod)) => {
            let f = check_in(&ctx.with_var(x.clone(), (**dom).clone()), body, cod)?;
            Ok(one(node(Rule::ArrIntro, ctx, e, c, ty, Val, vec![least(&f)])))
        }
        (Expr::Pair(e1, e2), S::Prod(l, r)) => {
            let f1 = check_in(ctx, e1, l)?;
            let f2 = check_in(ctx, e2, r)?;
            let mut out = Found::default();
            for d1 in f1.all() {
                for d2 in f2.all() {
                    let phi = d1.valueness.join(d2.valueness);
                    out.add(node(Rule::ProdIntro, ctx, e, c, ty, phi, vec![d1.clone(), d2.clone()]));
                }
            }
            Ok(out)
        }
        (Expr::Inj(k, e0), S::Sum(l, r)) => {
            let f = check_in(ctx, e0, k.pick(l, r))?;
            Ok(keep(&f, Rule::SumIntro(*k), ctx, e, c, ty))
        }
        (Expr::Fix(u, body), _) => {
            let f = check_in(&ctx.with_fixvar(u.clone(), ty.clone()), body, ty)?;
            Ok(one(node(Rule::Fix, ctx, e, c, ty, Top, vec![least(&f)])))
        }
        // Under a suspension, the case is checked against the suspended type.
        (Expr::Case(..), S::Susp(..)) => Err(mismatch(e, ty)),
        (Expr::Case(scrut, x1, e1, x2, e2), _) => {
            let (s_ty, fs) = synth_in(ctx, scrut)?;
            let (s_ty, fs) = expose_found(s_ty, fs, Connective::Sum)?;
            let S::Sum(l, r) = s_ty else { unreachable!() };
            let f1 = check_in(&ctx.with_var(x1.clone(), (*l).clone()), e1, ty)?;
            let f2 = check_in(&ctx.with_var(x2.clone(), (*r).clone()), e2, ty)?;
            Ok(one(node(Rule::SumElim, ctx, e, c, ty, Top, vec![least(&fs), least(&f1), least(&f2)])))
        }
        (Expr::Var(_) | Expr::FixVar(_) | Expr::App(..) | Expr::Proj(..) | Expr::Anno(..) | Expr::TyApp(..) | Expr::EoApp(..), _) => {
            subsume(ctx, e, ty)
        }
        _ => Err(mismatch(e, ty)),
    }
}

/// Rsub, after stripping suspensions and unrolling as far as needed.
fn subsume(ctx: &EconCtx, e: &Rc<EconExpr>, ty: &EconType) -> Result<EconFound, TypeError> {
    let (mut got, mut found) = synth_in(ctx, e)?;
    for _ in 0..=EXPOSE_LIMIT {
        if got.alpha_eq(ty) {
            return Ok(keep(&found, Rule::Sub, ctx, e, Direction::Check, ty));
        }
        match peel(&got, &found) {
            Some((t, f)) => {
                got = t;
                found = f;
            }
            None => {
                return Err(TypeError::TypeMismatch {
                    expected: ty.to_string(),
                    found: got.to_string(),
                    expr: e.to_string(),
                })
            }
        }
    }
    Err(TypeError::UnrollLimit(EXPOSE_LIMIT))
}

fn check_in(ctx: &EconCtx, e: &Rc<EconExpr>, ty: &EconType) -> Result<EconFound, TypeError> {
    let mut found = Found::default();
    let by_type_err = match check_by_type(ctx, e, ty) {
        Some(Ok(f)) => {
            found.merge(f);
            None
        }
        Some(Err(err)) => Some(err),
        None => None,
    };
    let by_expr_err = if matches!((ty, &**e), (S::Forall(..), Expr::TyLam(..))) {
        None
    } else {
        match check_by_expr(ctx, e, ty) {
            Ok(f) => {
                found.merge(f);
                None
            }
            Err(err) => Some(err),
        }
    };
    if found.is_empty() {
        return Err(by_type_err.or(by_expr_err).unwrap_or_else(|| mismatch(e, ty)));
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type};

    fn e(s: &str) -> EconExpr {
        parse_econ_expr(s).unwrap()
    }
    fn t(s: &str) -> EconType {
        parse_econ_type(s).unwrap()
    }

    #[test]
    fn by_name_parameter_is_forced_at_top() {
        let r = econ_check(&EconCtx::empty(), &e("\\x. x"), &t("susp[N] 1 -> 1")).unwrap();
        assert_eq!(r.valueness, Val);
        let body = &r.derivation.children[0];
        assert_eq!(body.valueness, Top);
        assert_eq!(body.rule, Rule::Sub);
        assert_eq!(body.children[0].rule, Rule::SuspElim);
    }

    #[test]
    fn suspending_by_name_is_a_value() {
        let r = econ_check(&EconCtx::empty(), &Expr::Unit, &t("susp[N] 1")).unwrap();
        assert_eq!(r.valueness, Val);
        assert_eq!(r.derivation.rule, Rule::SuspIntro);
        let r = econ_check(&EconCtx::empty(), &e("fix u. u"), &t("susp[N] 1")).unwrap();
        assert_eq!(r.valueness, Val);
        assert!(r.derivable(Top));
    }

    #[test]
    fn by_value_strip_keeps_valueness() {
        let ctx = EconCtx::empty().with_var("x".into(), t("susp[V] 1"));
        let r = econ_synth(&ctx, &e("x")).unwrap();
        let r = econ_expose(r, Connective::Unit).unwrap();
        assert_eq!((r.ty.clone(), r.valueness), (S::Unit, Val));
        assert_eq!(r.derivation.rule, Rule::SuspElimV);
    }

    #[test]
    fn order_polymorphic_identity() {
        let r = econ_check(&EconCtx::empty(), &e("\\x. x"), &t("all %a. susp[%a] 1 -> 1")).unwrap();
        assert_eq!(r.valueness, Val);
    }

    #[test]
    fn case_under_by_name_sum() {
        let ctx = EconCtx::empty().with_var("s".into(), t("susp[N] (1 + 1)"));
        let r = econ_check(&ctx, &e("case s { inj1 a -> a | inj2 b -> b }"), &S::Unit).unwrap();
        assert_eq!(r.valueness, Top);
    }

    #[test]
    fn unguarded_suspension_rejected() {
        let err = econ_synth(&EconCtx::empty(), &e("(() : rec 'a. susp[N] 'a)")).unwrap_err();
        assert!(matches!(err, TypeError::GuardednessViolation(_)));
    }

    #[test]
    fn unguarded_type_makes_expose_spin() {
        // Bypass the annotation check by putting the type in the context.
        let ctx = EconCtx::empty().with_var("x".into(), t("rec 'a. susp[N] 'a"));
        let r = econ_synth(&ctx, &e("x")).unwrap();
        assert_eq!(econ_expose(r, Connective::Arrow).unwrap_err(), TypeError::UnrollLimit(EXPOSE_LIMIT));
    }
}
