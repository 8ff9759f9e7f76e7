//! Translation from the impartial system into the economical one: each
//! order on a connective becomes a suspension point.

use std::rc::Rc;

use crate::context::{Decl, EconCtx, ImpCtx};
use crate::expr::{EconExpr, ImpExpr};
use crate::types::{EconType, EvalOrder, ImpartialType, Valueness};

pub fn econ_type(t: &ImpartialType) -> EconType {
    use ImpartialType as I;
    let susp = |e: &EvalOrder, s: EconType| EconType::Susp(e.clone(), Rc::new(s));
    match t {
        I::Unit => EconType::Unit,
        I::TyVar(a) => EconType::TyVar(a.clone()),
        I::Forall(a, b) => EconType::Forall(a.clone(), Rc::new(econ_type(b))),
        I::AllEo(a, b) => EconType::AllEo(a.clone(), Rc::new(econ_type(b))),
        I::Arrow(d, c, e) => EconType::Arrow(Rc::new(susp(e, econ_type(d))), Rc::new(econ_type(c))),
        I::Sum(l, r, e) => susp(e, EconType::Sum(Rc::new(econ_type(l)), Rc::new(econ_type(r)))),
        I::Prod(l, r, e) => EconType::Prod(Rc::new(susp(e, econ_type(l))), Rc::new(susp(e, econ_type(r)))),
        I::Rec(a, b, e) => EconType::Rec(a.clone(), Rc::new(susp(e, econ_type(b)))),
    }
}

/// Variables known to be values are suspended by value, the rest by name.
pub fn econ_ctx(ctx: &ImpCtx) -> EconCtx {
    ctx.decls()
        .into_iter()
        .map(|d| match d {
            Decl::Var(x, (phi, t)) => {
                let order = match phi {
                    Valueness::Val => EvalOrder::V,
                    Valueness::Top => EvalOrder::N,
                };
                Decl::Var(x.clone(), EconType::Susp(order, Rc::new(econ_type(t))))
            }
            Decl::FixVar(u, t) => Decl::FixVar(u.clone(), econ_type(t)),
            Decl::EoVar(a) => Decl::EoVar(a.clone()),
            Decl::TyVar(a) => Decl::TyVar(a.clone()),
        })
        .collect()
}

pub fn econ_expr(e: &ImpExpr) -> EconExpr {
    e.map_annotation_type(&econ_type)
}
