//! Bidirectional checker for the impartial system.
//!
//! Each judgment is answered with every valueness the strategy can derive
//! (a `Found`), so callers can ask both "is it derivable at all" and "is it
//! derivable at `val`".

use std::rc::Rc;

use crate::context::ImpCtx;
use crate::derivation::{Derivation, Direction, Found, Rule, TypingResult};
use crate::error::TypeError;
use crate::expr::{Expr, ImpExpr};
use crate::names::{fresh_avoiding, Name};
use crate::types::{valof, Connective, EvalOrder, ImpartialType, Valueness};
use crate::wellformed::{eo_wf, impartial_ty_wf, rec_guarded_impartial};

pub type ImpDecl = (Valueness, ImpartialType);
pub type ImpDerivation = Derivation<ImpartialType, ImpDecl>;
pub type ImpFound = Found<ImpartialType, ImpDecl>;
pub type ImpResult = TypingResult<ImpartialType, ImpDecl>;

/// Backstop on consecutive recursive-type unrollings in one subsumption.
pub const UNROLL_LIMIT: usize = 64;

use ImpartialType as T;
use Valueness::{Top, Val};

pub fn check(ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType) -> Result<ImpResult, TypeError> {
    annotation_ok(ctx, ty)?;
    let found = check_in(ctx, &Rc::new(e.clone()), ty)?;
    Ok(TypingResult::from_found(found).expect("check_in never returns an empty set"))
}

pub fn synth(ctx: &ImpCtx, e: &ImpExpr) -> Result<ImpResult, TypeError> {
    let (_, found) = synth_in(ctx, &Rc::new(e.clone()))?;
    Ok(TypingResult::from_found(found).expect("synth_in never returns an empty set"))
}

/// Unroll recursive types until the head is `want`. Quantifiers are never
/// instantiated.
pub fn expose(result: ImpResult, want: Connective) -> Result<ImpResult, TypeError> {
    let (_, found) = expose_found(result.ty.clone(), result.found, want)?;
    Ok(TypingResult::from_found(found).expect("nonempty"))
}

fn annotation_ok(ctx: &ImpCtx, ty: &ImpartialType) -> Result<(), TypeError> {
    if !impartial_ty_wf(ctx, ty) {
        return Err(TypeError::IllFormedType(ty.to_string()));
    }
    if !rec_guarded_impartial(ty) {
        return Err(TypeError::GuardednessViolation(ty.to_string()));
    }
    Ok(())
}

fn node(
    rule: Rule,
    ctx: &ImpCtx,
    e: &Rc<ImpExpr>,
    dir: Direction,
    ty: &ImpartialType,
    phi: Valueness,
    children: Vec<Rc<ImpDerivation>>,
) -> Rc<ImpDerivation> {
    Rc::new(Derivation { rule, ctx: ctx.clone(), expr: e.clone(), dir, ty: ty.clone(), valueness: phi, children })
}

/// One conclusion per premise derivation, keeping its valueness.
fn keep(
    found: &ImpFound,
    rule: Rule,
    ctx: &ImpCtx,
    e: &Rc<ImpExpr>,
    dir: Direction,
    ty: &ImpartialType,
) -> ImpFound {
    let mut out = Found::default();
    for d in found.all() {
        out.add(node(rule, ctx, e, dir, ty, d.valueness, vec![d.clone()]));
    }
    out
}

fn least(found: &ImpFound) -> Rc<ImpDerivation> {
    found.least().expect("nonempty").clone()
}

fn expose_found(
    mut ty: ImpartialType,
    mut found: ImpFound,
    want: Connective,
) -> Result<(ImpartialType, ImpFound), TypeError> {
    for _ in 0..=UNROLL_LIMIT {
        if ty.head() == Some(want) {
            return Ok((ty, found));
        }
        let Some(unfolded) = ty.unfold() else {
            let d = least(&found);
            return Err(TypeError::ExposeFailed {
                want: want.to_string(),
                found: ty.to_string(),
                expr: d.expr.to_string(),
            });
        };
        let d = least(&found);
        found = Found::default();
        found.add(node(Rule::RecElim, &d.ctx, &d.expr, Direction::Synth, &unfolded, Top, vec![d.clone()]));
        ty = unfolded;
    }
    Err(TypeError::UnrollLimit(UNROLL_LIMIT))
}

fn synth_in(ctx: &ImpCtx, e: &Rc<ImpExpr>) -> Result<(ImpartialType, ImpFound), TypeError> {
    let s = Direction::Synth;
    match &**e {
        Expr::Var(x) => {
            let (phi, ty) = ctx.lookup_var(x).ok_or_else(|| TypeError::UnboundVariable(x.to_string()))?;
            Ok((ty.clone(), Found::one(Rc::unwrap_or_clone(node(Rule::Var, ctx, e, s, ty, *phi, vec![])))))
        }
        Expr::FixVar(u) => {
            let ty = ctx.lookup_fixvar(u).ok_or_else(|| TypeError::UnboundFixVariable(u.to_string()))?;
            Ok((ty.clone(), Found::one(Rc::unwrap_or_clone(node(Rule::FixVar, ctx, e, s, ty, Top, vec![])))))
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
            let T::Forall(a, body) = ty0 else { unreachable!() };
            let ty = body.subst_ty(arg, &a);
            Ok((ty.clone(), keep(&f0, Rule::AllElim, ctx, e, s, &ty)))
        }
        Expr::EoApp(e0, order) => {
            if !eo_wf(ctx, order) {
                return Err(TypeError::UnboundEvalOrder(order.to_string()));
            }
            let (ty0, f0) = synth_in(ctx, e0)?;
            let (ty0, f0) = expose_found(ty0, f0, Connective::AllEo)?;
            let T::AllEo(a, body) = ty0 else { unreachable!() };
            let ty = body.subst_eo(order, &a);
            Ok((ty.clone(), keep(&f0, Rule::AllEoElim, ctx, e, s, &ty)))
        }
        Expr::App(e1, e2) => {
            let (ty1, f1) = synth_in(ctx, e1)?;
            let (ty1, f1) = expose_found(ty1, f1, Connective::Arrow)?;
            let T::Arrow(dom, cod, _) = ty1 else { unreachable!() };
            let f2 = check_in(ctx, e2, &dom)?;
            let d = node(Rule::ArrElim, ctx, e, s, &cod, Top, vec![least(&f1), least(&f2)]);
            Ok(((*cod).clone(), Found::one(Rc::unwrap_or_clone(d))))
        }
        Expr::Proj(k, e0) => {
            let (ty0, f0) = synth_in(ctx, e0)?;
            let (ty0, f0) = expose_found(ty0, f0, Connective::Prod)?;
            let T::Prod(l, r, _) = ty0 else { unreachable!() };
            let ty = (*k.pick(l, r)).clone();
            let d = node(Rule::ProdElim(*k), ctx, e, s, &ty, Top, vec![least(&f0)]);
            Ok((ty, Found::one(Rc::unwrap_or_clone(d))))
        }
        _ => Err(TypeError::CannotSynthesize(e.to_string())),
    }
}

/// Type-directed rules whose applicability depends on the type alone.
fn check_by_type(ctx: &ImpCtx, e: &Rc<ImpExpr>, ty: &ImpartialType) -> Option<Result<ImpFound, TypeError>> {
    let c = Direction::Check;
    match ty {
        T::AllEo(a, body) => Some((|| {
            let (a2, e2, body2) = if ctx.has_eovar(a) {
                let mut avoid: std::collections::BTreeSet<Name> = ctx.eovars().into_iter().collect();
                avoid.extend(e.free_eovars());
                avoid.extend(body.free_eovars());
                let b = fresh_avoiding(a, &avoid);
                let bv = EvalOrder::Var(b.clone());
                (b, Rc::new(e.subst_eovar_expr(&bv, a)), body.subst_eo(&bv, a))
            } else {
                (a.clone(), e.clone(), (**body).clone())
            };
            let inner_ctx = ctx.with_eovar(a2);
            let inner = check_in(&inner_ctx, &e2, &body2)?;
            let Some(d) = inner.get(Val) else {
                return Err(TypeError::ValueRestriction { rule: "Ialleointro".into(), expr: e.to_string() });
            };
            Ok(Found::one(Rc::unwrap_or_clone(node(Rule::AllEoIntro, ctx, e, c, ty, Val, vec![d.clone()]))))
        })()),
        T::Forall(a, body) => {
            let Expr::TyLam(b, e0) = &**e else { return None };
            Some((|| {
                let (b2, e2) = if ctx.has_tyvar(b) {
                    let mut avoid: std::collections::BTreeSet<Name> = ctx.tyvars().into_iter().collect();
                    avoid.extend(e0.free_tyvars());
                    avoid.extend(ty.free_tyvars());
                    let fresh = fresh_avoiding(b, &avoid);
                    (fresh.clone(), Rc::new(e0.rename_tyvar_expr(b, &fresh)))
                } else {
                    (b.clone(), e0.clone())
                };
                let body2 = body.subst_ty(&T::TyVar(b2.clone()), a);
                let inner = check_in(&ctx.with_tyvar(b2), &e2, &body2)?;
                let Some(d) = inner.get(Val) else {
                    return Err(TypeError::ValueRestriction { rule: "Iallintro".into(), expr: e.to_string() });
                };
                Ok(Found::one(Rc::unwrap_or_clone(node(Rule::AllIntro, ctx, e, c, ty, Val, vec![d.clone()]))))
            })())
        }
        T::Rec(..) if !matches!(&**e, Expr::Fix(..) | Expr::Case(..)) => Some((|| {
            let unfolded = ty.unfold().expect("rec");
            let inner = check_in(ctx, e, &unfolded)?;
            Ok(keep(&inner, Rule::RecIntro, ctx, e, c, ty))
        })()),
        _ => None,
    }
}

fn mismatch(e: &ImpExpr, ty: &ImpartialType) -> TypeError {
    TypeError::NoRule { expr: e.to_string(), expected: ty.to_string() }
}

/// Rules chosen by the expression form, including subsumption for
/// synthesizing forms.
fn check_by_expr(ctx: &ImpCtx, e: &Rc<ImpExpr>, ty: &ImpartialType) -> Result<ImpFound, TypeError> {
    let c = Direction::Check;
    match (&**e, ty) {
        (Expr::Unit, T::Unit) => Ok(Found::one(Rc::unwrap_or_clone(node(Rule::UnitIntro, ctx, e, c, ty, Val, vec![])))),
        (Expr::Lam(x, body), T::Arrow(dom, cod, order)) => {
            let inner_ctx = ctx.with_var(x.clone(), (valof(order), (**dom).clone()));
            let f = check_in(&inner_ctx, body, cod)?;
            Ok(Found::one(Rc::unwrap_or_clone(node(Rule::ArrIntro, ctx, e, c, ty, Val, vec![least(&f)]))))
        }
        (Expr::Pair(e1, e2), T::Prod(l, r, _)) => {
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
        (Expr::Inj(k, e0), T::Sum(l, r, _)) => {
            let f = check_in(ctx, e0, k.pick(l, r))?;
            Ok(keep(&f, Rule::SumIntro(*k), ctx, e, c, ty))
        }
        (Expr::Fix(u, body), _) => {
            let f = check_in(&ctx.with_fixvar(u.clone(), ty.clone()), body, ty)?;
            Ok(Found::one(Rc::unwrap_or_clone(node(Rule::Fix, ctx, e, c, ty, Top, vec![least(&f)]))))
        }
        (Expr::Case(scrut, x1, e1, x2, e2), _) => {
            let (s_ty, fs) = synth_in(ctx, scrut)?;
            let (s_ty, fs) = expose_found(s_ty, fs, Connective::Sum)?;
            let T::Sum(l, r, _) = s_ty else { unreachable!() };
            let f1 = check_in(&ctx.with_var(x1.clone(), (Val, (*l).clone())), e1, ty)?;
            let f2 = check_in(&ctx.with_var(x2.clone(), (Val, (*r).clone())), e2, ty)?;
            let d = node(Rule::SumElim, ctx, e, c, ty, Top, vec![least(&fs), least(&f1), least(&f2)]);
            Ok(Found::one(Rc::unwrap_or_clone(d)))
        }
        (Expr::Var(_) | Expr::FixVar(_) | Expr::App(..) | Expr::Proj(..) | Expr::Anno(..) | Expr::TyApp(..) | Expr::EoApp(..), _) => {
            subsume(ctx, e, ty)
        }
        _ => Err(mismatch(e, ty)),
    }
}

/// Isub, after unrolling the synthesized type as far as needed.
fn subsume(ctx: &ImpCtx, e: &Rc<ImpExpr>, ty: &ImpartialType) -> Result<ImpFound, TypeError> {
    let (mut got, mut found) = synth_in(ctx, e)?;
    for _ in 0..=UNROLL_LIMIT {
        if got.alpha_eq(ty) {
            return Ok(keep(&found, Rule::Sub, ctx, e, Direction::Check, ty));
        }
        let Some(unfolded) = got.unfold() else {
            return Err(TypeError::TypeMismatch { expected: ty.to_string(), found: got.to_string(), expr: e.to_string() });
        };
        let d = least(&found);
        found = Found::default();
        found.add(node(Rule::RecElim, ctx, e, Direction::Synth, &unfolded, Top, vec![d]));
        got = unfolded;
    }
    Err(TypeError::UnrollLimit(UNROLL_LIMIT))
}

fn check_in(ctx: &ImpCtx, e: &Rc<ImpExpr>, ty: &ImpartialType) -> Result<ImpFound, TypeError> {
    let mut found = Found::default();
    let by_type = check_by_type(ctx, e, ty);
    let by_type_err = match by_type {
        Some(Ok(f)) => {
            found.merge(f);
            None
        }
        Some(Err(err)) => Some(err),
        None => None,
    };
    let by_expr_err = if matches!((ty, &**e), (T::Forall(..), Expr::TyLam(..))) {
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

/// Every valueness derivable for `γ ⊢ e ⇐ τ`; empty when ill-typed.
pub fn derivable(ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType) -> Vec<Valueness> {
    check(ctx, e, ty).map(|r| r.found.valuenesses()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_impartial_expr, parse_impartial_type};

    fn e(s: &str) -> ImpExpr {
        parse_impartial_expr(s).unwrap()
    }
    fn t(s: &str) -> ImpartialType {
        parse_impartial_type(s).unwrap()
    }

    #[test]
    fn identity_at_by_name_binds_at_top() {
        let r = check(&ImpCtx::empty(), &e("\\x. x"), &t("1 -[N]> 1")).unwrap();
        assert_eq!(r.valueness, Val);
        let body = &r.derivation.children[0];
        assert_eq!(body.valueness, Top);
        assert_eq!(body.ctx.lookup_var("x").unwrap().0, Top);
    }

    #[test]
    fn fix_is_top() {
        let r = check(&ImpCtx::empty(), &e("fix u. u"), &T::Unit).unwrap();
        assert_eq!(r.valueness, Top);
        assert_eq!(r.derivation.rule, Rule::Fix);
        assert_eq!(r.derivation.children[0].rule, Rule::Sub);
    }

    #[test]
    fn order_polymorphic_identity() {
        let r = check(&ImpCtx::empty(), &e("\\x. x"), &t("all %a. 1 -[%a]> 1")).unwrap();
        assert_eq!(r.valueness, Val);
        assert_eq!(r.derivation.rule, Rule::AllEoIntro);
    }

    #[test]
    fn synth_examples() {
        let ctx = ImpCtx::empty().with_var("x".into(), (Val, T::Unit));
        let r = synth(&ctx, &e("x")).unwrap();
        assert_eq!((r.ty, r.valueness), (T::Unit, Val));
        let r = synth(&ImpCtx::empty(), &e("(((), ()) : 1 *[V] 1)")).unwrap();
        assert_eq!((r.ty, r.valueness), (t("1 *[V] 1"), Val));
        let r = synth(&ImpCtx::empty(), &e("(\\x. x : 1 -[V]> 1) ()")).unwrap();
        assert_eq!((r.ty, r.valueness), (T::Unit, Top));
    }

    #[test]
    fn expose_unrolls_to_sum() {
        let ctx = ImpCtx::empty().with_var("l".into(), (Val, t("rec[V] 'a. 1 +[V] 'a")));
        let r = synth(&ctx, &e("l")).unwrap();
        let r = expose(r, Connective::Sum).unwrap();
        assert_eq!(r.ty, t("1 +[V] (rec[V] 'a. 1 +[V] 'a)"));
        assert_eq!(r.valueness, Top);
    }

    #[test]
    fn expose_keeps_exposed_arrow() {
        let ctx = ImpCtx::empty().with_var("f".into(), (Val, t("1 -[V]> 1")));
        let r = expose(synth(&ctx, &e("f")).unwrap(), Connective::Arrow).unwrap();
        assert_eq!((r.ty, r.valueness), (t("1 -[V]> 1"), Val));
    }

    #[test]
    fn expose_never_instantiates() {
        let ctx = ImpCtx::empty().with_var("f".into(), (Val, t("all %a. 1 -[%a]> 1")));
        let r = synth(&ctx, &e("f")).unwrap();
        assert!(matches!(expose(r, Connective::Arrow), Err(TypeError::ExposeFailed { .. })));
        assert!(synth(&ctx, &e("f ()")).is_err());
        let r = synth(&ctx, &e("f{V} ()")).unwrap();
        assert_eq!(r.ty, T::Unit);
    }

    #[test]
    fn value_restriction_on_order_quantifier() {
        let err = check(&ImpCtx::empty(), &e("(\\x. x : 1 -[V]> 1) ()"), &t("all %a. 1")).unwrap_err();
        assert!(matches!(err, TypeError::ValueRestriction { .. }), "{err}");
    }

    #[test]
    fn case_binds_branches_at_val() {
        let ctx = ImpCtx::empty().with_var("s".into(), (Top, t("1 +[N] 1")));
        let r = check(&ctx, &e("case s { inj1 a -> a | inj2 b -> b }"), &T::Unit).unwrap();
        assert_eq!(r.valueness, Top);
        assert!(r.derivation.children[1].valueness == Val);
    }

    #[test]
    fn mismatch_reports_types() {
        let err = check(&ImpCtx::empty(), &e("(() : 1)"), &t("1 -[V]> 1")).unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }), "{err}");
    }

    #[test]
    fn unguarded_annotation_rejected() {
        let err = synth(&ImpCtx::empty(), &e("(() : rec[V] 'a. 'a)")).unwrap_err();
        assert!(matches!(err, TypeError::GuardednessViolation(_)));
    }
}
