//! N-freeness: the absence of by-name orders and `Д` in types and
//! judgments, and of `thunk`/`force` in target terms.

use crate::context::{Decl, EconCtx, ImpCtx};
use crate::expr::{EconExpr, ImpExpr};
use crate::target::TargetTerm;
use crate::types::{EconType, EvalOrder, ImpartialType, Valueness};

pub fn n_free_impartial_type(t: &ImpartialType) -> bool {
    t.orders().iter().all(|e| *e == EvalOrder::V) && !t.has_all_eo()
}

pub fn n_free_econ_type(s: &EconType) -> bool {
    s.susp_orders().iter().all(|e| *e == EvalOrder::V) && !s.has_all_eo()
}

pub fn n_free_target(m: &TargetTerm) -> bool {
    !m.has_thunk_or_force()
}

/// `γ ⊢ e : τ` with no order variables in `γ`, every variable a value of
/// N-free type, and N-free annotations and result type. Fixed-point
/// variables are held to the same standard as their types.
pub fn n_free_impartial_judgment(ctx: &ImpCtx, e: &ImpExpr, ty: &ImpartialType) -> bool {
    let ctx_ok = ctx.iter().all(|d| match d {
        Decl::EoVar(_) => false,
        Decl::Var(_, (phi, t)) => *phi == Valueness::Val && n_free_impartial_type(t),
        Decl::FixVar(_, t) => n_free_impartial_type(t),
        Decl::TyVar(_) => true,
    });
    ctx_ok && e.annotations().into_iter().all(n_free_impartial_type) && n_free_impartial_type(ty)
}

pub fn n_free_econ_judgment(ctx: &EconCtx, e: &EconExpr, ty: &EconType) -> bool {
    let ctx_ok = ctx.iter().all(|d| match d {
        Decl::EoVar(_) => false,
        Decl::Var(_, t) | Decl::FixVar(_, t) => n_free_econ_type(t),
        Decl::TyVar(_) => true,
    });
    ctx_ok && e.annotations().into_iter().all(n_free_econ_type) && n_free_econ_type(ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type, parse_impartial_expr, parse_impartial_type, parse_target_term};

    #[test]
    fn types() {
        assert!(n_free_impartial_type(&parse_impartial_type("1 -[V]> 1").unwrap()));
        assert!(!n_free_impartial_type(&parse_impartial_type("1 -[N]> 1").unwrap()));
        assert!(!n_free_impartial_type(&parse_impartial_type("all %a. 1 -[V]> 1").unwrap()));
        assert!(!n_free_impartial_type(&parse_impartial_type("rec[%a] 'b. 1 +[V] 'b").unwrap()));
        assert!(!n_free_econ_type(&parse_econ_type("all %a. susp[V] 1").unwrap()));
        assert!(n_free_econ_type(&parse_econ_type("susp[V] 1 -> 1").unwrap()));
        assert!(!n_free_econ_type(&parse_econ_type("susp[N] 1 -> 1").unwrap()));
    }

    #[test]
    fn targets() {
        assert!(!n_free_target(&parse_target_term("force (thunk ())").unwrap()));
        assert!(n_free_target(&parse_target_term("(\\x. x) ()").unwrap()));
    }

    #[test]
    fn judgments() {
        let t = parse_impartial_type("1 -[V]> 1").unwrap();
        let e = parse_impartial_expr("(\\x. x : 1 -[N]> 1) ()").unwrap();
        assert!(!n_free_impartial_judgment(&ImpCtx::empty(), &e, &parse_impartial_type("1").unwrap()));
        let by_name = ImpCtx::empty().with_var("y".into(), (Valueness::Top, parse_impartial_type("1").unwrap()));
        assert!(!n_free_impartial_judgment(&by_name, &parse_impartial_expr("y").unwrap(), &parse_impartial_type("1").unwrap()));
        assert!(n_free_impartial_judgment(&ImpCtx::empty(), &parse_impartial_expr("\\x. x").unwrap(), &t));
        let open = ImpCtx::empty().with_eovar("a".into());
        assert!(!n_free_impartial_judgment(&open, &parse_impartial_expr("()").unwrap(), &parse_impartial_type("1").unwrap()));
        let s = parse_econ_type("susp[V] 1 -> 1").unwrap();
        assert!(n_free_econ_judgment(&EconCtx::empty(), &parse_econ_expr("\\x. x").unwrap(), &s));
        let g = EconCtx::empty().with_var("y".into(), parse_econ_type("susp[N] 1").unwrap());
        assert!(!n_free_econ_judgment(&g, &parse_econ_expr("()").unwrap(), &parse_econ_type("1").unwrap()));
    }
}
