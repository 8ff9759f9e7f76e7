//! Evaluation orders, valuenesses and the three type grammars: impartial
//! (every connective carries an order), economical (bare connectives plus a
//! suspension point) and target (bare connectives plus thunks).

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::names::{fresh_avoiding, AlphaEnv, Name};

/// `V`, `N`, or an evaluation-order variable bound by `Д`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EvalOrder {
    V,
    N,
    Var(Name),
}

impl EvalOrder {
    pub fn is_closed(&self) -> bool {
        !matches!(self, EvalOrder::Var(_))
    }

    pub fn subst(&self, replacement: &EvalOrder, var: &str) -> EvalOrder {
        match self {
            EvalOrder::Var(a) if &**a == var => replacement.clone(),
            other => other.clone(),
        }
    }

    fn alpha_eq_in(&self, other: &EvalOrder, eos: &AlphaEnv) -> bool {
        match (self, other) {
            (EvalOrder::V, EvalOrder::V) | (EvalOrder::N, EvalOrder::N) => true,
            (EvalOrder::Var(a), EvalOrder::Var(b)) => eos.vars_match(a, b),
            _ => false,
        }
    }

    fn free_into(&self, out: &mut BTreeSet<Name>) {
        if let EvalOrder::Var(a) = self {
            out.insert(a.clone());
        }
    }
}

impl fmt::Display for EvalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalOrder::V => write!(f, "V"),
            EvalOrder::N => write!(f, "N"),
            EvalOrder::Var(a) => write!(f, "%{a}"),
        }
    }
}

/// Whether a typed expression is certainly a value (`Val`) or not known to be
/// one (`Top`). Ordered `Val ⊑ Top`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Valueness {
    #[serde(rename = "val")]
    Val,
    #[serde(rename = "top")]
    Top,
}

impl Valueness {
    pub fn join(self, other: Valueness) -> Valueness {
        if self == Valueness::Val && other == Valueness::Val {
            Valueness::Val
        } else {
            Valueness::Top
        }
    }

    /// The partial order `⊑`.
    pub fn leq(self, other: Valueness) -> bool {
        self == Valueness::Val || other == Valueness::Top
    }
}

impl fmt::Display for Valueness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valueness::Val => write!(f, "val"),
            Valueness::Top => write!(f, "top"),
        }
    }
}

/// `|V| = val`, `|N| = |𝔞| = ⊤`.
pub fn valof(order: &EvalOrder) -> Valueness {
    match order {
        EvalOrder::V => Valueness::Val,
        EvalOrder::N | EvalOrder::Var(_) => Valueness::Top,
    }
}

pub fn join(a: Valueness, b: Valueness) -> Valueness {
    a.join(b)
}

/// Head connective, used when exposing a synthesized type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Connective {
    Unit,
    Arrow,
    Prod,
    Sum,
    Forall,
    AllEo,
    Rec,
    Susp,
    Thunk,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Connective::Unit => "unit",
            Connective::Arrow => "function",
            Connective::Prod => "product",
            Connective::Sum => "sum",
            Connective::Forall => "forall",
            Connective::AllEo => "evaluation-order quantifier",
            Connective::Rec => "recursive",
            Connective::Susp => "suspension",
            Connective::Thunk => "thunk",
        };
        f.write_str(s)
    }
}

// ---------------------------------------------------------------------------
// Impartial types τ

#[derive(Clone, Debug)]
pub enum ImpartialType {
    Unit,
    TyVar(Name),
    Forall(Name, Rc<ImpartialType>),
    AllEo(Name, Rc<ImpartialType>),
    Arrow(Rc<ImpartialType>, Rc<ImpartialType>, EvalOrder),
    Prod(Rc<ImpartialType>, Rc<ImpartialType>, EvalOrder),
    Sum(Rc<ImpartialType>, Rc<ImpartialType>, EvalOrder),
    Rec(Name, Rc<ImpartialType>, EvalOrder),
}

impl ImpartialType {
    pub fn tyvar(a: &str) -> Self {
        ImpartialType::TyVar(Name::from(a))
    }
    pub fn forall(a: &str, body: ImpartialType) -> Self {
        ImpartialType::Forall(Name::from(a), Rc::new(body))
    }
    pub fn all_eo(a: &str, body: ImpartialType) -> Self {
        ImpartialType::AllEo(Name::from(a), Rc::new(body))
    }
    pub fn arrow(a: ImpartialType, b: ImpartialType, e: EvalOrder) -> Self {
        ImpartialType::Arrow(Rc::new(a), Rc::new(b), e)
    }
    pub fn prod(a: ImpartialType, b: ImpartialType, e: EvalOrder) -> Self {
        ImpartialType::Prod(Rc::new(a), Rc::new(b), e)
    }
    pub fn sum(a: ImpartialType, b: ImpartialType, e: EvalOrder) -> Self {
        ImpartialType::Sum(Rc::new(a), Rc::new(b), e)
    }
    pub fn rec(a: &str, body: ImpartialType, e: EvalOrder) -> Self {
        ImpartialType::Rec(Name::from(a), Rc::new(body), e)
    }

    pub fn head(&self) -> Option<Connective> {
        Some(match self {
            ImpartialType::Unit => Connective::Unit,
            ImpartialType::TyVar(_) => return None,
            ImpartialType::Forall(..) => Connective::Forall,
            ImpartialType::AllEo(..) => Connective::AllEo,
            ImpartialType::Arrow(..) => Connective::Arrow,
            ImpartialType::Prod(..) => Connective::Prod,
            ImpartialType::Sum(..) => Connective::Sum,
            ImpartialType::Rec(..) => Connective::Rec,
        })
    }

    pub fn free_tyvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_tyvars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_tyvars_into(&self, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
        use ImpartialType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Forall(a, b) | Rec(a, b, _) => {
                bound.push(a.clone());
                b.free_tyvars_into(out, bound);
                bound.pop();
            }
            AllEo(_, b) => b.free_tyvars_into(out, bound),
            Arrow(l, r, _) | Prod(l, r, _) | Sum(l, r, _) => {
                l.free_tyvars_into(out, bound);
                r.free_tyvars_into(out, bound);
            }
        }
    }

    pub fn free_eovars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_eovars_into(&mut out);
        out
    }

    fn free_eovars_into(&self, out: &mut BTreeSet<Name>) {
        use ImpartialType::*;
        match self {
            Unit | TyVar(_) => {}
            Forall(_, b) => b.free_eovars_into(out),
            AllEo(a, b) => {
                let mut inner = BTreeSet::new();
                b.free_eovars_into(&mut inner);
                inner.remove(a);
                out.extend(inner);
            }
            Arrow(l, r, e) | Prod(l, r, e) | Sum(l, r, e) => {
                e.free_into(out);
                l.free_eovars_into(out);
                r.free_eovars_into(out);
            }
            Rec(_, b, e) => {
                e.free_into(out);
                b.free_eovars_into(out);
            }
        }
    }

    /// All names occurring anywhere (free or bound, both namespaces); used
    /// to pick binder names that cannot clash.
    fn all_names(&self, out: &mut BTreeSet<Name>) {
        use ImpartialType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                out.insert(a.clone());
            }
            Forall(a, b) | AllEo(a, b) => {
                out.insert(a.clone());
                b.all_names(out);
            }
            Arrow(l, r, e) | Prod(l, r, e) | Sum(l, r, e) => {
                e.free_into(out);
                l.all_names(out);
                r.all_names(out);
            }
            Rec(a, b, e) => {
                out.insert(a.clone());
                e.free_into(out);
                b.all_names(out);
            }
        }
    }

    /// Capture-avoiding `[replacement/var]self` on type variables.
    pub fn subst_ty(&self, replacement: &ImpartialType, var: &str) -> ImpartialType {
        let fv_ty = replacement.free_tyvars();
        let fv_eo = replacement.free_eovars();
        self.subst_ty_with(replacement, var, &fv_ty, &fv_eo)
    }

    fn subst_ty_with(
        &self,
        rep: &ImpartialType,
        var: &str,
        fv_ty: &BTreeSet<Name>,
        fv_eo: &BTreeSet<Name>,
    ) -> ImpartialType {
        use ImpartialType::*;
        match self {
            Unit => Unit,
            TyVar(a) if &**a == var => rep.clone(),
            TyVar(_) => self.clone(),
            Forall(a, b) | Rec(a, b, _) => {
                if &**a == var {
                    return self.clone();
                }
                let (a2, b2) = if fv_ty.contains(a) {
                    let mut avoid = fv_ty.clone();
                    b.all_names(&mut avoid);
                    avoid.insert(Name::from(var));
                    let fresh = fresh_avoiding(a, &avoid);
                    (fresh.clone(), Rc::new(b.subst_ty(&TyVar(fresh), a)))
                } else {
                    (a.clone(), b.clone())
                };
                let body = Rc::new(b2.subst_ty_with(rep, var, fv_ty, fv_eo));
                match self {
                    Forall(..) => Forall(a2, body),
                    Rec(_, _, e) => Rec(a2, body, e.clone()),
                    _ => unreachable!(),
                }
            }
            AllEo(a, b) => {
                if fv_eo.contains(a) {
                    let mut avoid = fv_eo.clone();
                    b.all_names(&mut avoid);
                    let fresh = fresh_avoiding(a, &avoid);
                    let b2 = b.subst_eo(&EvalOrder::Var(fresh.clone()), a);
                    AllEo(fresh, Rc::new(b2.subst_ty_with(rep, var, fv_ty, fv_eo)))
                } else {
                    AllEo(a.clone(), Rc::new(b.subst_ty_with(rep, var, fv_ty, fv_eo)))
                }
            }
            Arrow(l, r, e) => Arrow(
                Rc::new(l.subst_ty_with(rep, var, fv_ty, fv_eo)),
                Rc::new(r.subst_ty_with(rep, var, fv_ty, fv_eo)),
                e.clone(),
            ),
            Prod(l, r, e) => Prod(
                Rc::new(l.subst_ty_with(rep, var, fv_ty, fv_eo)),
                Rc::new(r.subst_ty_with(rep, var, fv_ty, fv_eo)),
                e.clone(),
            ),
            Sum(l, r, e) => Sum(
                Rc::new(l.subst_ty_with(rep, var, fv_ty, fv_eo)),
                Rc::new(r.subst_ty_with(rep, var, fv_ty, fv_eo)),
                e.clone(),
            ),
        }
    }

    /// Capture-avoiding `[order/var]self` on evaluation-order variables.
    pub fn subst_eo(&self, order: &EvalOrder, var: &str) -> ImpartialType {
        use ImpartialType::*;
        match self {
            Unit | TyVar(_) => self.clone(),
            Forall(a, b) => Forall(a.clone(), Rc::new(b.subst_eo(order, var))),
            AllEo(a, b) => {
                if &**a == var {
                    return self.clone();
                }
                match order {
                    EvalOrder::Var(c) if c == a => {
                        let mut avoid = BTreeSet::new();
                        b.all_names(&mut avoid);
                        avoid.insert(c.clone());
                        avoid.insert(Name::from(var));
                        let fresh = fresh_avoiding(a, &avoid);
                        let b2 = b.subst_eo(&EvalOrder::Var(fresh.clone()), a);
                        AllEo(fresh, Rc::new(b2.subst_eo(order, var)))
                    }
                    _ => AllEo(a.clone(), Rc::new(b.subst_eo(order, var))),
                }
            }
            Arrow(l, r, e) => Arrow(Rc::new(l.subst_eo(order, var)), Rc::new(r.subst_eo(order, var)), e.subst(order, var)),
            Prod(l, r, e) => Prod(Rc::new(l.subst_eo(order, var)), Rc::new(r.subst_eo(order, var)), e.subst(order, var)),
            Sum(l, r, e) => Sum(Rc::new(l.subst_eo(order, var)), Rc::new(r.subst_eo(order, var)), e.subst(order, var)),
            Rec(a, b, e) => Rec(a.clone(), Rc::new(b.subst_eo(order, var)), e.subst(order, var)),
        }
    }

    /// `[μ^ε α.τ / α]τ` for a `Rec`; `None` otherwise.
    pub fn unfold(&self) -> Option<ImpartialType> {
        match self {
            ImpartialType::Rec(a, body, _) => Some(body.subst_ty(self, a)),
            _ => None,
        }
    }

    pub fn alpha_eq(&self, other: &ImpartialType) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default(), &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &ImpartialType, tys: &mut AlphaEnv, eos: &mut AlphaEnv) -> bool {
        use ImpartialType::*;
        match (self, other) {
            (Unit, Unit) => true,
            (TyVar(a), TyVar(b)) => tys.vars_match(a, b),
            (Forall(a, x), Forall(b, y)) => tys.scoped(a, b, |tys| x.alpha_eq_in(y, tys, eos)),
            (AllEo(a, x), AllEo(b, y)) => eos.scoped(a, b, |eos| x.alpha_eq_in(y, tys, eos)),
            (Arrow(l1, r1, e1), Arrow(l2, r2, e2))
            | (Prod(l1, r1, e1), Prod(l2, r2, e2))
            | (Sum(l1, r1, e1), Sum(l2, r2, e2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && e1.alpha_eq_in(e2, eos)
                    && l1.alpha_eq_in(l2, tys, eos)
                    && r1.alpha_eq_in(r2, tys, eos)
            }
            (Rec(a, x, e1), Rec(b, y, e2)) => {
                e1.alpha_eq_in(e2, eos) && tys.scoped(a, b, |tys| x.alpha_eq_in(y, tys, eos))
            }
            _ => false,
        }
    }

    /// Every evaluation order decorating a connective (free or bound).
    pub fn orders(&self) -> Vec<EvalOrder> {
        use ImpartialType::*;
        let mut out = Vec::new();
        fn go(t: &ImpartialType, out: &mut Vec<EvalOrder>) {
            match t {
                Unit | TyVar(_) => {}
                Forall(_, b) | AllEo(_, b) => go(b, out),
                Arrow(l, r, e) | Prod(l, r, e) | Sum(l, r, e) => {
                    out.push(e.clone());
                    go(l, out);
                    go(r, out);
                }
                Rec(_, b, e) => {
                    out.push(e.clone());
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn has_all_eo(&self) -> bool {
        use ImpartialType::*;
        match self {
            Unit | TyVar(_) => false,
            AllEo(..) => true,
            Forall(_, b) | Rec(_, b, _) => b.has_all_eo(),
            Arrow(l, r, _) | Prod(l, r, _) | Sum(l, r, _) => l.has_all_eo() || r.has_all_eo(),
        }
    }

    pub fn size(&self) -> usize {
        use ImpartialType::*;
        match self {
            Unit | TyVar(_) => 1,
            Forall(_, b) | AllEo(_, b) | Rec(_, b, _) => 1 + b.size(),
            Arrow(l, r, _) | Prod(l, r, _) | Sum(l, r, _) => 1 + l.size() + r.size(),
        }
    }
}

impl PartialEq for ImpartialType {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for ImpartialType {}

// ---------------------------------------------------------------------------
// Economical types S

#[derive(Clone, Debug)]
pub enum EconType {
    Unit,
    TyVar(Name),
    Forall(Name, Rc<EconType>),
    AllEo(Name, Rc<EconType>),
    Susp(EvalOrder, Rc<EconType>),
    Arrow(Rc<EconType>, Rc<EconType>),
    Prod(Rc<EconType>, Rc<EconType>),
    Sum(Rc<EconType>, Rc<EconType>),
    Rec(Name, Rc<EconType>),
}

impl EconType {
    pub fn tyvar(a: &str) -> Self {
        EconType::TyVar(Name::from(a))
    }
    pub fn forall(a: &str, body: EconType) -> Self {
        EconType::Forall(Name::from(a), Rc::new(body))
    }
    pub fn all_eo(a: &str, body: EconType) -> Self {
        EconType::AllEo(Name::from(a), Rc::new(body))
    }
    pub fn susp(e: EvalOrder, body: EconType) -> Self {
        EconType::Susp(e, Rc::new(body))
    }
    pub fn arrow(a: EconType, b: EconType) -> Self {
        EconType::Arrow(Rc::new(a), Rc::new(b))
    }
    pub fn prod(a: EconType, b: EconType) -> Self {
        EconType::Prod(Rc::new(a), Rc::new(b))
    }
    pub fn sum(a: EconType, b: EconType) -> Self {
        EconType::Sum(Rc::new(a), Rc::new(b))
    }
    pub fn rec(a: &str, body: EconType) -> Self {
        EconType::Rec(Name::from(a), Rc::new(body))
    }

    pub fn head(&self) -> Option<Connective> {
        Some(match self {
            EconType::Unit => Connective::Unit,
            EconType::TyVar(_) => return None,
            EconType::Forall(..) => Connective::Forall,
            EconType::AllEo(..) => Connective::AllEo,
            EconType::Susp(..) => Connective::Susp,
            EconType::Arrow(..) => Connective::Arrow,
            EconType::Prod(..) => Connective::Prod,
            EconType::Sum(..) => Connective::Sum,
            EconType::Rec(..) => Connective::Rec,
        })
    }

    pub fn free_tyvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_tyvars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_tyvars_into(&self, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
        use EconType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Forall(a, b) | Rec(a, b) => {
                bound.push(a.clone());
                b.free_tyvars_into(out, bound);
                bound.pop();
            }
            AllEo(_, b) | Susp(_, b) => b.free_tyvars_into(out, bound),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                l.free_tyvars_into(out, bound);
                r.free_tyvars_into(out, bound);
            }
        }
    }

    pub fn free_eovars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_eovars_into(&mut out);
        out
    }

    fn free_eovars_into(&self, out: &mut BTreeSet<Name>) {
        use EconType::*;
        match self {
            Unit | TyVar(_) => {}
            Forall(_, b) | Rec(_, b) => b.free_eovars_into(out),
            AllEo(a, b) => {
                let mut inner = BTreeSet::new();
                b.free_eovars_into(&mut inner);
                inner.remove(a);
                out.extend(inner);
            }
            Susp(e, b) => {
                e.free_into(out);
                b.free_eovars_into(out);
            }
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                l.free_eovars_into(out);
                r.free_eovars_into(out);
            }
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Name>) {
        use EconType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                out.insert(a.clone());
            }
            Forall(a, b) | AllEo(a, b) | Rec(a, b) => {
                out.insert(a.clone());
                b.all_names(out);
            }
            Susp(e, b) => {
                e.free_into(out);
                b.all_names(out);
            }
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                l.all_names(out);
                r.all_names(out);
            }
        }
    }

    pub fn subst_ty(&self, replacement: &EconType, var: &str) -> EconType {
        let fv_ty = replacement.free_tyvars();
        let fv_eo = replacement.free_eovars();
        self.subst_ty_with(replacement, var, &fv_ty, &fv_eo)
    }

    fn subst_ty_with(&self, rep: &EconType, var: &str, fv_ty: &BTreeSet<Name>, fv_eo: &BTreeSet<Name>) -> EconType {
        use EconType::*;
        let go = |t: &Rc<EconType>| Rc::new(t.subst_ty_with(rep, var, fv_ty, fv_eo));
        match self {
            Unit => Unit,
            TyVar(a) if &**a == var => rep.clone(),
            TyVar(_) => self.clone(),
            Forall(a, b) | Rec(a, b) => {
                if &**a == var {
                    return self.clone();
                }
                let (a2, b2) = if fv_ty.contains(a) {
                    let mut avoid = fv_ty.clone();
                    b.all_names(&mut avoid);
                    avoid.insert(Name::from(var));
                    let fresh = fresh_avoiding(a, &avoid);
                    (fresh.clone(), Rc::new(b.subst_ty(&TyVar(fresh), a)))
                } else {
                    (a.clone(), b.clone())
                };
                let body = go(&b2);
                if matches!(self, Forall(..)) {
                    Forall(a2, body)
                } else {
                    Rec(a2, body)
                }
            }
            AllEo(a, b) => {
                if fv_eo.contains(a) {
                    let mut avoid = fv_eo.clone();
                    b.all_names(&mut avoid);
                    let fresh = fresh_avoiding(a, &avoid);
                    let b2 = Rc::new(b.subst_eo(&EvalOrder::Var(fresh.clone()), a));
                    AllEo(fresh, go(&b2))
                } else {
                    AllEo(a.clone(), go(b))
                }
            }
            Susp(e, b) => Susp(e.clone(), go(b)),
            Arrow(l, r) => Arrow(go(l), go(r)),
            Prod(l, r) => Prod(go(l), go(r)),
            Sum(l, r) => Sum(go(l), go(r)),
        }
    }

    pub fn subst_eo(&self, order: &EvalOrder, var: &str) -> EconType {
        use EconType::*;
        let go = |t: &Rc<EconType>| Rc::new(t.subst_eo(order, var));
        match self {
            Unit | TyVar(_) => self.clone(),
            Forall(a, b) => Forall(a.clone(), go(b)),
            Rec(a, b) => Rec(a.clone(), go(b)),
            AllEo(a, b) => {
                if &**a == var {
                    return self.clone();
                }
                match order {
                    EvalOrder::Var(c) if c == a => {
                        let mut avoid = BTreeSet::new();
                        b.all_names(&mut avoid);
                        avoid.insert(c.clone());
                        avoid.insert(Name::from(var));
                        let fresh = fresh_avoiding(a, &avoid);
                        let b2 = Rc::new(b.subst_eo(&EvalOrder::Var(fresh.clone()), a));
                        AllEo(fresh, go(&b2))
                    }
                    _ => AllEo(a.clone(), go(b)),
                }
            }
            Susp(e, b) => Susp(e.subst(order, var), go(b)),
            Arrow(l, r) => Arrow(go(l), go(r)),
            Prod(l, r) => Prod(go(l), go(r)),
            Sum(l, r) => Sum(go(l), go(r)),
        }
    }

    pub fn unfold(&self) -> Option<EconType> {
        match self {
            EconType::Rec(a, body) => Some(body.subst_ty(self, a)),
            _ => None,
        }
    }

    pub fn alpha_eq(&self, other: &EconType) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default(), &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &EconType, tys: &mut AlphaEnv, eos: &mut AlphaEnv) -> bool {
        use EconType::*;
        match (self, other) {
            (Unit, Unit) => true,
            (TyVar(a), TyVar(b)) => tys.vars_match(a, b),
            (Forall(a, x), Forall(b, y)) | (Rec(a, x), Rec(b, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && tys.scoped(a, b, |tys| x.alpha_eq_in(y, tys, eos))
            }
            (AllEo(a, x), AllEo(b, y)) => eos.scoped(a, b, |eos| x.alpha_eq_in(y, tys, eos)),
            (Susp(e1, x), Susp(e2, y)) => e1.alpha_eq_in(e2, eos) && x.alpha_eq_in(y, tys, eos),
            (Arrow(l1, r1), Arrow(l2, r2)) | (Prod(l1, r1), Prod(l2, r2)) | (Sum(l1, r1), Sum(l2, r2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && l1.alpha_eq_in(l2, tys, eos)
                    && r1.alpha_eq_in(r2, tys, eos)
            }
            _ => false,
        }
    }

    /// Orders carried by every suspension point in the type.
    pub fn susp_orders(&self) -> Vec<EvalOrder> {
        use EconType::*;
        fn go(t: &EconType, out: &mut Vec<EvalOrder>) {
            match t {
                Unit | TyVar(_) => {}
                Forall(_, b) | AllEo(_, b) | Rec(_, b) => go(b, out),
                Susp(e, b) => {
                    out.push(e.clone());
                    go(b, out);
                }
                Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                    go(l, out);
                    go(r, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn has_all_eo(&self) -> bool {
        use EconType::*;
        match self {
            Unit | TyVar(_) => false,
            AllEo(..) => true,
            Forall(_, b) | Rec(_, b) | Susp(_, b) => b.has_all_eo(),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => l.has_all_eo() || r.has_all_eo(),
        }
    }

    /// Remove every leading `▷V`.
    pub fn strip_by_value(&self) -> &EconType {
        let mut t = self;
        while let EconType::Susp(EvalOrder::V, inner) = t {
            t = inner;
        }
        t
    }

    pub fn size(&self) -> usize {
        use EconType::*;
        match self {
            Unit | TyVar(_) => 1,
            Forall(_, b) | AllEo(_, b) | Rec(_, b) | Susp(_, b) => 1 + b.size(),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => 1 + l.size() + r.size(),
        }
    }
}

impl PartialEq for EconType {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for EconType {}

// ---------------------------------------------------------------------------
// Target types A

#[derive(Clone, Debug)]
pub enum TargetType {
    Unit,
    TyVar(Name),
    Forall(Name, Rc<TargetType>),
    Thunk(Rc<TargetType>),
    Arrow(Rc<TargetType>, Rc<TargetType>),
    Prod(Rc<TargetType>, Rc<TargetType>),
    Sum(Rc<TargetType>, Rc<TargetType>),
    Rec(Name, Rc<TargetType>),
}

impl TargetType {
    pub fn tyvar(a: &str) -> Self {
        TargetType::TyVar(Name::from(a))
    }
    pub fn forall(a: &str, body: TargetType) -> Self {
        TargetType::Forall(Name::from(a), Rc::new(body))
    }
    pub fn thunk(body: TargetType) -> Self {
        TargetType::Thunk(Rc::new(body))
    }
    pub fn arrow(a: TargetType, b: TargetType) -> Self {
        TargetType::Arrow(Rc::new(a), Rc::new(b))
    }
    pub fn prod(a: TargetType, b: TargetType) -> Self {
        TargetType::Prod(Rc::new(a), Rc::new(b))
    }
    pub fn sum(a: TargetType, b: TargetType) -> Self {
        TargetType::Sum(Rc::new(a), Rc::new(b))
    }
    pub fn rec(a: &str, body: TargetType) -> Self {
        TargetType::Rec(Name::from(a), Rc::new(body))
    }

    pub fn free_tyvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_tyvars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_tyvars_into(&self, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
        use TargetType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Forall(a, b) | Rec(a, b) => {
                bound.push(a.clone());
                b.free_tyvars_into(out, bound);
                bound.pop();
            }
            Thunk(b) => b.free_tyvars_into(out, bound),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                l.free_tyvars_into(out, bound);
                r.free_tyvars_into(out, bound);
            }
        }
    }

    pub(crate) fn all_names(&self, out: &mut BTreeSet<Name>) {
        use TargetType::*;
        match self {
            Unit => {}
            TyVar(a) => {
                out.insert(a.clone());
            }
            Forall(a, b) | Rec(a, b) => {
                out.insert(a.clone());
                b.all_names(out);
            }
            Thunk(b) => b.all_names(out),
            Arrow(l, r) | Prod(l, r) | Sum(l, r) => {
                l.all_names(out);
                r.all_names(out);
            }
        }
    }

    pub fn subst_ty(&self, replacement: &TargetType, var: &str) -> TargetType {
        let fv = replacement.free_tyvars();
        self.subst_ty_with(replacement, var, &fv)
    }

    fn subst_ty_with(&self, rep: &TargetType, var: &str, fv: &BTreeSet<Name>) -> TargetType {
        use TargetType::*;
        let go = |t: &Rc<TargetType>| Rc::new(t.subst_ty_with(rep, var, fv));
        match self {
            Unit => Unit,
            TyVar(a) if &**a == var => rep.clone(),
            TyVar(_) => self.clone(),
            Forall(a, b) | Rec(a, b) => {
                if &**a == var {
                    return self.clone();
                }
                let (a2, b2) = if fv.contains(a) {
                    let mut avoid = fv.clone();
                    b.all_names(&mut avoid);
                    avoid.insert(Name::from(var));
                    let fresh = fresh_avoiding(a, &avoid);
                    (fresh.clone(), Rc::new(b.subst_ty(&TyVar(fresh), a)))
                } else {
                    (a.clone(), b.clone())
                };
                let body = go(&b2);
                if matches!(self, Forall(..)) {
                    Forall(a2, body)
                } else {
                    Rec(a2, body)
                }
            }
            Thunk(b) => Thunk(go(b)),
            Arrow(l, r) => Arrow(go(l), go(r)),
            Prod(l, r) => Prod(go(l), go(r)),
            Sum(l, r) => Sum(go(l), go(r)),
        }
    }

    pub fn unfold(&self) -> Option<TargetType> {
        match self {
            TargetType::Rec(a, body) => Some(body.subst_ty(self, a)),
            _ => None,
        }
    }

    pub fn alpha_eq(&self, other: &TargetType) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &TargetType, tys: &mut AlphaEnv) -> bool {
        use TargetType::*;
        match (self, other) {
            (Unit, Unit) => true,
            (TyVar(a), TyVar(b)) => tys.vars_match(a, b),
            (Forall(a, x), Forall(b, y)) | (Rec(a, x), Rec(b, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && tys.scoped(a, b, |tys| x.alpha_eq_in(y, tys))
            }
            (Thunk(x), Thunk(y)) => x.alpha_eq_in(y, tys),
            (Arrow(l1, r1), Arrow(l2, r2)) | (Prod(l1, r1), Prod(l2, r2)) | (Sum(l1, r1), Sum(l2, r2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && l1.alpha_eq_in(l2, tys)
                    && r1.alpha_eq_in(r2, tys)
            }
            _ => false,
        }
    }
}

impl PartialEq for TargetType {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for TargetType {}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> EvalOrder {
        EvalOrder::Var(Name::from("a"))
    }

    #[test]
    fn valof_table() {
        assert_eq!(valof(&EvalOrder::V), Valueness::Val);
        assert_eq!(valof(&EvalOrder::N), Valueness::Top);
        assert_eq!(valof(&a()), Valueness::Top);
    }

    #[test]
    fn join_table() {
        use Valueness::*;
        assert_eq!(join(Val, Val), Val);
        assert_eq!(join(Val, Top), Top);
        assert_eq!(join(Top, Val), Top);
        assert_eq!(join(Top, Top), Top);
    }

    #[test]
    fn order_is_not_symmetric() {
        use Valueness::*;
        assert!(Val.leq(Val) && Val.leq(Top) && Top.leq(Top));
        assert!(!Top.leq(Val));
    }

    #[test]
    fn eo_substitution_single_occurrence() {
        let t = ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, a());
        let expected = ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, EvalOrder::V);
        assert_eq!(t.subst_eo(&EvalOrder::V, "a"), expected);
    }

    #[test]
    fn ty_substitution_respects_shadowing() {
        let t = ImpartialType::forall("al", ImpartialType::tyvar("al"));
        assert_eq!(t.subst_ty(&ImpartialType::Unit, "al"), t);
    }

    #[test]
    fn ty_substitution_avoids_capture() {
        // [b/a](forall b. a -> b) must not capture the replacement.
        let t = EconType::forall("b", EconType::arrow(EconType::tyvar("a"), EconType::tyvar("b")));
        let out = t.subst_ty(&EconType::tyvar("b"), "a");
        match &out {
            EconType::Forall(bound, body) => {
                assert_ne!(&**bound, "b");
                assert_eq!(**body, EconType::arrow(EconType::tyvar("b"), EconType::TyVar(bound.clone())));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eo_substitution_avoids_capture() {
        // [%b/%a] (all %b. 1 -[%a]> 1) renames the inner binder.
        let t = ImpartialType::all_eo(
            "b",
            ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, a()),
        );
        let out = t.subst_eo(&EvalOrder::Var(Name::from("b")), "a");
        let expected = ImpartialType::all_eo(
            "c",
            ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, EvalOrder::Var(Name::from("b"))),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn alpha_renamed_binders() {
        assert_eq!(
            ImpartialType::forall("a", ImpartialType::tyvar("a")),
            ImpartialType::forall("b", ImpartialType::tyvar("b"))
        );
        assert_ne!(
            EconType::forall("a", EconType::tyvar("a")),
            EconType::forall("b", EconType::tyvar("a"))
        );
        assert_eq!(
            EconType::all_eo("a", EconType::susp(a(), EconType::Unit)),
            EconType::all_eo("z", EconType::susp(EvalOrder::Var(Name::from("z")), EconType::Unit))
        );
    }

    #[test]
    fn unfold_recursive_type() {
        let list = ImpartialType::rec(
            "b",
            ImpartialType::sum(ImpartialType::Unit, ImpartialType::tyvar("b"), EvalOrder::V),
            EvalOrder::V,
        );
        let expected = ImpartialType::sum(ImpartialType::Unit, list.clone(), EvalOrder::V);
        assert_eq!(list.unfold().unwrap(), expected);
    }
}
