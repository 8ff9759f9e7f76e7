//! Elaboration of economical derivations into the target language, and the
//! translation of economical types it is typed by.

use std::rc::Rc;

use crate::context::{Decl, EconCtx, TargetCtx};
use crate::econ::{econ_check, EconDerivation};
use crate::error::ElabError;
use crate::expr::Expr;
use crate::target::TargetTerm;
use crate::typed::TypedTerm;
use crate::types::{EconType, EvalOrder, TargetType, Valueness};

/// Output of elaborating one derivation: the valueness the target term is
/// known to have (never weaker than the derivation's), the term, and the
/// same term with its type annotations.
#[derive(Clone, Debug)]
pub struct ElabResult {
    pub valueness: Valueness,
    pub term: TargetTerm,
    pub witness: TypedTerm,
}

/// `|S|`, or an error if `S` mentions an evaluation-order variable outside
/// any `Д` binding it.
pub fn try_ty_target(s: &EconType) -> Result<TargetType, ElabError> {
    use EconType as S;
    use TargetType as A;
    let r = |t: &EconType| try_ty_target(t).map(Rc::new);
    Ok(match s {
        S::Unit => A::Unit,
        S::TyVar(a) => A::TyVar(a.clone()),
        S::Forall(a, b) => A::Forall(a.clone(), r(b)?),
        S::Rec(a, b) => A::Rec(a.clone(), r(b)?),
        S::Arrow(x, y) => A::Arrow(r(x)?, r(y)?),
        S::Prod(x, y) => A::Prod(r(x)?, r(y)?),
        S::Sum(x, y) => A::Sum(r(x)?, r(y)?),
        S::Susp(EvalOrder::V, b) => try_ty_target(b)?,
        S::Susp(EvalOrder::N, b) => A::Thunk(r(b)?),
        S::Susp(EvalOrder::Var(a), _) => return Err(ElabError::EvalOrderVarInContext(a.to_string())),
        S::AllEo(a, b) => A::Prod(r(&b.subst_eo(&EvalOrder::V, a))?, r(&b.subst_eo(&EvalOrder::N, a))?),
    })
}

/// `|S|` for a type whose evaluation orders are all bound.
///
/// # Panics
/// If an evaluation-order variable occurs free.
pub fn ty_target(s: &EconType) -> TargetType {
    try_ty_target(s).expect("type with closed evaluation orders")
}

pub fn ctx_target(ctx: &EconCtx) -> Result<TargetCtx, ElabError> {
    ctx.try_map(try_ty_target, try_ty_target, |a| Err(ElabError::EvalOrderVarInContext(a.to_string())))
}

/// Elaborate a derivation produced by `econ_check` or `econ_synth`.
pub fn elaborate(d: &EconDerivation) -> Result<ElabResult, ElabError> {
    ctx_target(&d.ctx)?;
    elab(d)
}

/// Check `e` against `S` in the empty context and elaborate every derivable
/// valueness; the results are ordered `val` first.
pub fn elaborate_closed(e: &crate::expr::EconExpr, s: &EconType) -> Result<Vec<(Valueness, ElabResult)>, ElabError> {
    let r = econ_check(&EconCtx::empty(), e, s).map_err(ElabError::InstanceFailed)?;
    r.found.all().into_iter().map(|d| Ok((d.valueness, elaborate(d)?))).collect()
}

fn malformed(d: &EconDerivation) -> ElabError {
    ElabError::MalformedDerivation(d.rule_name('R'))
}

fn result(valueness: Valueness, witness: TypedTerm) -> ElabResult {
    ElabResult { valueness, term: witness.erase(), witness }
}

fn elab(d: &EconDerivation) -> Result<ElabResult, ElabError> {
    use crate::derivation::Rule;
    use EconType as S;
    use TypedTerm as W;
    use Valueness::{Top, Val};
    let sub = |i: usize| -> Result<ElabResult, ElabError> { elab(d.children.get(i).ok_or_else(|| malformed(d))?) };
    let w = |r: &ElabResult| Rc::new(r.witness.clone());
    Ok(match d.rule {
        Rule::Var => {
            let Expr::Var(x) = &*d.expr else { return Err(malformed(d)) };
            result(Val, W::Var(x.clone()))
        }
        Rule::FixVar => {
            let Expr::FixVar(u) = &*d.expr else { return Err(malformed(d)) };
            result(Top, W::FixVar(u.clone()))
        }
        Rule::Sub | Rule::Anno | Rule::SuspElimV => sub(0)?,
        Rule::UnitIntro => result(Val, W::Unit),
        Rule::Fix => {
            let Expr::Fix(u, _) = &*d.expr else { return Err(malformed(d)) };
            let body = sub(0)?;
            result(Top, W::Fix(u.clone(), try_ty_target(&d.ty)?, w(&body)))
        }
        Rule::AllIntro => {
            let child = d.children.first().ok_or_else(|| malformed(d))?;
            let Some(Decl::TyVar(a)) = child.ctx.iter().next() else { return Err(malformed(d)) };
            let body = elab(child)?;
            result(Val, W::TyLam(a.clone(), w(&body)))
        }
        Rule::AllElim => {
            let Expr::TyApp(_, arg) = &*d.expr else { return Err(malformed(d)) };
            let body = sub(0)?;
            result(body.valueness, W::TyApp(w(&body), try_ty_target(arg)?))
        }
        Rule::AllEoIntro => {
            let S::AllEo(a, body) = &d.ty else { return Err(malformed(d)) };
            let instance = |order: EvalOrder| -> Result<ElabResult, ElabError> {
                let e = d.expr.subst_eovar_expr(&order, a);
                let ty = body.subst_eo(&order, a);
                let found = econ_check(&d.ctx, &e, &ty).map_err(ElabError::InstanceFailed)?;
                let inst = found.found.get(Val).ok_or_else(|| malformed(d))?;
                elab(inst)
            };
            let (m1, m2) = (instance(EvalOrder::V)?, instance(EvalOrder::N)?);
            result(Val, W::Pair(w(&m1), w(&m2)))
        }
        Rule::AllEoElim => {
            let Expr::EoApp(_, order) = &*d.expr else { return Err(malformed(d)) };
            let side = match order {
                EvalOrder::V => crate::expr::Side::Left,
                EvalOrder::N => crate::expr::Side::Right,
                EvalOrder::Var(a) => return Err(ElabError::InstantiationNotClosed(a.to_string())),
            };
            let body = sub(0)?;
            result(body.valueness, W::Proj(side, w(&body)))
        }
        Rule::SuspIntro => {
            let S::Susp(order, _) = &d.ty else { return Err(malformed(d)) };
            let body = sub(0)?;
            match order {
                EvalOrder::V => body,
                EvalOrder::N => result(Val, W::Thunk(w(&body))),
                EvalOrder::Var(a) => return Err(ElabError::EvalOrderVarInContext(a.to_string())),
            }
        }
        Rule::SuspElim => {
            let child = d.children.first().ok_or_else(|| malformed(d))?;
            let S::Susp(order, _) = &child.ty else { return Err(malformed(d)) };
            let body = elab(child)?;
            match order {
                EvalOrder::V => body,
                EvalOrder::N => result(Top, W::Force(w(&body))),
                EvalOrder::Var(a) => return Err(ElabError::EvalOrderVarInContext(a.to_string())),
            }
        }
        Rule::ArrIntro => {
            let Expr::Lam(x, _) = &*d.expr else { return Err(malformed(d)) };
            let S::Arrow(dom, _) = &d.ty else { return Err(malformed(d)) };
            let body = sub(0)?;
            result(Val, W::Lam(x.clone(), try_ty_target(dom)?, w(&body)))
        }
        Rule::ArrElim => {
            let (f, a) = (sub(0)?, sub(1)?);
            result(Top, W::App(w(&f), w(&a)))
        }
        Rule::ProdIntro => {
            let (l, r) = (sub(0)?, sub(1)?);
            result(l.valueness.join(r.valueness), W::Pair(w(&l), w(&r)))
        }
        Rule::ProdElim(k) => {
            let body = sub(0)?;
            result(Top, W::Proj(k, w(&body)))
        }
        Rule::SumIntro(k) => {
            let body = sub(0)?;
            result(body.valueness, W::Inj(k, try_ty_target(&d.ty)?, w(&body)))
        }
        Rule::SumElim => {
            let Expr::Case(_, x1, _, x2, _) = &*d.expr else { return Err(malformed(d)) };
            let (s, m1, m2) = (sub(0)?, sub(1)?, sub(2)?);
            result(Top, W::Case(w(&s), x1.clone(), w(&m1), x2.clone(), w(&m2)))
        }
        Rule::RecIntro => {
            let body = sub(0)?;
            result(body.valueness, W::Roll(try_ty_target(&d.ty)?, w(&body)))
        }
        Rule::RecElim => {
            let body = sub(0)?;
            result(Top, W::Unroll(w(&body)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type, parse_target_term, parse_target_type};
    use crate::target_check::target_check;
    use crate::typed::typed_check;

    fn t(s: &str) -> EconType {
        parse_econ_type(s).unwrap()
    }

    fn elab_least(e: &str, s: &str) -> ElabResult {
        elaborate_closed(&parse_econ_expr(e).unwrap(), &t(s)).unwrap().remove(0).1
    }

    #[test]
    fn type_translation() {
        assert_eq!(ty_target(&t("susp[N] 1")), parse_target_type("U 1").unwrap());
        assert_eq!(ty_target(&t("all %a. susp[%a] 1 -> 1")), parse_target_type("(1 -> 1) * (U 1 -> 1)").unwrap());
        assert_eq!(ty_target(&t("susp[V] susp[V] 1")), TargetType::Unit);
    }

    #[test]
    fn context_translation() {
        let ctx = EconCtx::empty().with_var("x".into(), t("susp[N] 1"));
        let g = ctx_target(&ctx).unwrap();
        assert_eq!(g.lookup_var("x"), Some(&parse_target_type("U 1").unwrap()));
        assert!(ctx_target(&EconCtx::empty()).unwrap().is_empty());
        let open = EconCtx::empty().with_eovar("a".into());
        assert!(matches!(ctx_target(&open), Err(ElabError::EvalOrderVarInContext(_))));
    }

    #[test]
    fn order_polymorphic_identity_pairs_both_instances() {
        let r = elab_least("\\x. x", "all %a. susp[%a] 1 -> 1");
        assert_eq!(r.valueness, Valueness::Val);
        assert_eq!(r.term, parse_target_term("(\\x. x, \\x. force x)").unwrap());
        let a = ty_target(&t("all %a. susp[%a] 1 -> 1"));
        assert!(target_check(&TargetCtx::empty(), &r.term, &a));
        typed_check(&TargetCtx::empty(), &r.witness, &a).unwrap();
    }

    #[test]
    fn by_name_suspension_thunks() {
        let r = elab_least("()", "susp[N] 1");
        assert_eq!((r.valueness, r.term), (Valueness::Val, TargetTerm::thunk(TargetTerm::Unit)));
        let r = elab_least("()", "1");
        assert_eq!((r.valueness, r.term), (Valueness::Val, TargetTerm::Unit));
    }

    #[test]
    fn open_instantiation_is_rejected() {
        let ctx = EconCtx::empty().with_eovar("b".into()).with_var("f".into(), t("all %a. susp[%a] 1 -> 1"));
        let r = econ_check(&ctx, &parse_econ_expr("f {%b}").unwrap(), &t("susp[%b] 1 -> 1")).unwrap();
        assert!(matches!(elab(&r.derivation), Err(ElabError::InstantiationNotClosed(_))));
        assert!(matches!(elaborate(&r.derivation), Err(ElabError::EvalOrderVarInContext(_))));
    }

    #[test]
    fn type_abstraction_and_application() {
        let r = elab_least("((/\\'a. \\x. x : forall 'a. 'a -> 'a) [1]) ()", "1");
        assert_eq!(r.valueness, Valueness::Top);
        typed_check(&TargetCtx::empty(), &r.witness, &TargetType::Unit).unwrap();
        assert!(target_check(&TargetCtx::empty(), &r.term, &TargetType::Unit));
    }
}
