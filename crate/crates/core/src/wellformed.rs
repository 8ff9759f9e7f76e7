//! Scoping of evaluation orders and types, and the guardedness condition on
//! recursive types.

use crate::context::Ctx;
use crate::names::Name;
use crate::types::{EconType, EvalOrder, ImpartialType, TargetType};

pub fn eo_wf<X, U>(ctx: &Ctx<X, U>, order: &EvalOrder) -> bool {
    match order {
        EvalOrder::V | EvalOrder::N => true,
        EvalOrder::Var(a) => ctx.has_eovar(a),
    }
}

/// Scope of type and order variables available while checking a type.
#[derive(Clone, Default)]
struct Scope {
    tys: Vec<Name>,
    eos: Vec<Name>,
}

impl Scope {
    fn of<X, U>(ctx: &Ctx<X, U>) -> Scope {
        Scope { tys: ctx.tyvars(), eos: ctx.eovars() }
    }

    fn eo(&self, order: &EvalOrder) -> bool {
        match order {
            EvalOrder::V | EvalOrder::N => true,
            EvalOrder::Var(a) => self.eos.contains(a),
        }
    }
}

pub fn impartial_ty_wf<X, U>(ctx: &Ctx<X, U>, t: &ImpartialType) -> bool {
    fn go(s: &mut Scope, t: &ImpartialType) -> bool {
        use ImpartialType::*;
        match t {
            Unit => true,
            TyVar(a) => s.tys.contains(a),
            Forall(a, b) => {
                s.tys.push(a.clone());
                let ok = go(s, b);
                s.tys.pop();
                ok
            }
            Rec(a, b, e) => {
                if !s.eo(e) {
                    return false;
                }
                s.tys.push(a.clone());
                let ok = go(s, b);
                s.tys.pop();
                ok
            }
            AllEo(a, b) => {
                s.eos.push(a.clone());
                let ok = go(s, b);
                s.eos.pop();
                ok
            }
            Arrow(l, r, e) | Prod(l, r, e) | Sum(l, r, e) => s.eo(e) && go(s, l) && go(s, r),
        }
    }
    go(&mut Scope::of(ctx), t)
}

pub fn econ_ty_wf<X, U>(ctx: &Ctx<X, U>, t: &EconType) -> bool {
    fn go(s: &mut Scope, t: &EconType) -> bool {
        use EconType::*;
        match t {
            Unit => true,
            TyVar(a) => s.tys.contains(a),
            Forall(a, b) | Rec(a, b) => {
                s.tys.push(a.clone());
                let ok = go(s, b);
                s.tys.pop();
                ok
            }
            AllEo(a, b) => {
                s.eos.push(a.clone());
                let ok = go(s, b);
                s.eos.pop();
                ok
            }
            Susp(e, b) => s.eo(e) && go(s, b),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => go(s, l) && go(s, r),
        }
    }
    go(&mut Scope::of(ctx), t)
}

pub fn target_ty_wf<X, U>(ctx: &Ctx<X, U>, t: &TargetType) -> bool {
    fn go(s: &mut Scope, t: &TargetType) -> bool {
        use TargetType::*;
        match t {
            Unit => true,
            TyVar(a) => s.tys.contains(a),
            Forall(a, b) | Rec(a, b) => {
                s.tys.push(a.clone());
                let ok = go(s, b);
                s.tys.pop();
                ok
            }
            Thunk(b) => go(s, b),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => go(s, l) && go(s, r),
        }
    }
    go(&mut Scope::of(ctx), t)
}

/// Every occurrence of a `Rec`-bound variable lies under `->`, `*` or `+`
/// within that `Rec`'s body.
pub fn rec_guarded_impartial(t: &ImpartialType) -> bool {
    // `unguarded` holds the recursion variables not yet under a connective.
    fn go(t: &ImpartialType, unguarded: &mut Vec<Name>) -> bool {
        use ImpartialType::*;
        match t {
            Unit => true,
            TyVar(a) => !unguarded.contains(a),
            Forall(a, b) => {
                let saved = unguarded.clone();
                unguarded.retain(|x| x != a);
                let ok = go(b, unguarded);
                *unguarded = saved;
                ok
            }
            AllEo(_, b) => go(b, unguarded),
            Rec(a, b, _) => {
                let saved = unguarded.clone();
                unguarded.retain(|x| x != a);
                unguarded.push(a.clone());
                let ok = go(b, unguarded);
                *unguarded = saved;
                ok
            }
            Arrow(l, r, _) | Prod(l, r, _) | Sum(l, r, _) => {
                let mut none = Vec::new();
                go(l, &mut none) && go(r, &mut none)
            }
        }
    }
    go(t, &mut Vec::new())
}

/// As for impartial types; a suspension alone does not guard.
pub fn rec_guarded_econ(t: &EconType) -> bool {
    fn go(t: &EconType, unguarded: &mut Vec<Name>) -> bool {
        use EconType::*;
        match t {
            Unit => true,
            TyVar(a) => !unguarded.contains(a),
            Forall(a, b) => {
                let saved = unguarded.clone();
                unguarded.retain(|x| x != a);
                let ok = go(b, unguarded);
                *unguarded = saved;
                ok
            }
            AllEo(_, b) | Susp(_, b) => go(b, unguarded),
            Rec(a, b) => {
                let saved = unguarded.clone();
                unguarded.retain(|x| x != a);
                unguarded.push(a.clone());
                let ok = go(b, unguarded);
                *unguarded = saved;
                ok
            }
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                let mut none = Vec::new();
                go(l, &mut none) && go(r, &mut none)
            }
        }
    }
    go(t, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{EconCtx, ImpCtx};

    fn a() -> EvalOrder {
        EvalOrder::Var(Name::from("a"))
    }

    #[test]
    fn eo_examples() {
        let empty = ImpCtx::empty();
        assert!(eo_wf(&empty, &EvalOrder::V));
        assert!(!eo_wf(&empty, &a()));
        assert!(eo_wf(&empty.with_eovar(Name::from("a")), &a()));
    }

    #[test]
    fn type_examples() {
        let empty = ImpCtx::empty();
        use ImpartialType as T;
        assert!(impartial_ty_wf(&empty, &T::arrow(T::Unit, T::Unit, EvalOrder::V)));
        assert!(!impartial_ty_wf(&empty, &T::arrow(T::Unit, T::Unit, a())));
        assert!(econ_ty_wf(&EconCtx::empty(), &EconType::all_eo("a", EconType::susp(a(), EconType::Unit))));
        assert!(!target_ty_wf(&EconCtx::empty(), &TargetType::tyvar("z")));
    }

    #[test]
    fn guardedness_examples() {
        use ImpartialType as T;
        assert!(!rec_guarded_impartial(&T::rec("b", T::tyvar("b"), EvalOrder::V)));
        assert!(rec_guarded_impartial(&T::rec("b", T::sum(T::Unit, T::tyvar("b"), EvalOrder::V), EvalOrder::V)));
        assert!(!rec_guarded_econ(&EconType::rec("b", EconType::susp(EvalOrder::N, EconType::tyvar("b")))));
        assert!(rec_guarded_econ(&EconType::rec(
            "b",
            EconType::susp(EvalOrder::N, EconType::sum(EconType::Unit, EconType::tyvar("b")))
        )));
    }

    #[test]
    fn nested_recursion_guardedness() {
        use ImpartialType as T;
        // rec b. rec c. b is unguarded for b.
        let t = T::rec("b", T::rec("c", T::tyvar("b"), EvalOrder::V), EvalOrder::V);
        assert!(!rec_guarded_impartial(&t));
    }
}
