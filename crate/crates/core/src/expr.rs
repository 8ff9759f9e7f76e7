//! Source expressions. `Expr<A>` is an annotated expression whose type
//! annotations have type `A` (impartial or economical); `Term` is the erased
//! form that the source semantics reduces.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use crate::names::{fresh_avoiding, AlphaEnv, Name};
use crate::types::{EconType, EvalOrder, ImpartialType};

/// What an annotation type must support for expressions to be substituted
/// into and compared.
pub trait Annotation: Clone + fmt::Debug + PartialEq {
    fn subst_tyvar(&self, replacement: &Self, var: &str) -> Self;
    fn subst_eovar(&self, order: &EvalOrder, var: &str) -> Self;
    fn rename_tyvar(&self, from: &str, to: &Name) -> Self;
    fn tyvars(&self) -> BTreeSet<Name>;
    fn eovars(&self) -> BTreeSet<Name>;
    fn alpha_eq_ann(&self, other: &Self) -> bool;
}

impl Annotation for ImpartialType {
    fn subst_tyvar(&self, replacement: &Self, var: &str) -> Self {
        self.subst_ty(replacement, var)
    }
    fn subst_eovar(&self, order: &EvalOrder, var: &str) -> Self {
        self.subst_eo(order, var)
    }
    fn rename_tyvar(&self, from: &str, to: &Name) -> Self {
        self.subst_ty(&ImpartialType::TyVar(to.clone()), from)
    }
    fn tyvars(&self) -> BTreeSet<Name> {
        self.free_tyvars()
    }
    fn eovars(&self) -> BTreeSet<Name> {
        self.free_eovars()
    }
    fn alpha_eq_ann(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Annotation for EconType {
    fn subst_tyvar(&self, replacement: &Self, var: &str) -> Self {
        self.subst_ty(replacement, var)
    }
    fn subst_eovar(&self, order: &EvalOrder, var: &str) -> Self {
        self.subst_eo(order, var)
    }
    fn rename_tyvar(&self, from: &str, to: &Name) -> Self {
        self.subst_ty(&EconType::TyVar(to.clone()), from)
    }
    fn tyvars(&self) -> BTreeSet<Name> {
        self.free_tyvars()
    }
    fn eovars(&self) -> BTreeSet<Name> {
        self.free_eovars()
    }
    fn alpha_eq_ann(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

/// Projection / injection index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }

    pub fn from_index(k: u8) -> Option<Side> {
        match k {
            1 => Some(Side::Left),
            2 => Some(Side::Right),
            _ => None,
        }
    }

    pub fn pick<T>(self, l: T, r: T) -> T {
        match self {
            Side::Left => l,
            Side::Right => r,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Expr<A> {
    Unit,
    Var(Name),
    FixVar(Name),
    Lam(Name, Rc<Expr<A>>),
    App(Rc<Expr<A>>, Rc<Expr<A>>),
    Fix(Name, Rc<Expr<A>>),
    TyLam(Name, Rc<Expr<A>>),
    TyApp(Rc<Expr<A>>, A),
    /// Explicit instantiation of an evaluation-order quantifier.
    EoApp(Rc<Expr<A>>, EvalOrder),
    Pair(Rc<Expr<A>>, Rc<Expr<A>>),
    Proj(Side, Rc<Expr<A>>),
    Inj(Side, Rc<Expr<A>>),
    Case(Rc<Expr<A>>, Name, Rc<Expr<A>>, Name, Rc<Expr<A>>),
    Anno(Rc<Expr<A>>, A),
}

pub type ImpExpr = Expr<ImpartialType>;
pub type EconExpr = Expr<EconType>;

impl<A: Annotation> Expr<A> {
    pub fn var(x: &str) -> Self {
        Expr::Var(Name::from(x))
    }
    pub fn fixvar(u: &str) -> Self {
        Expr::FixVar(Name::from(u))
    }
    pub fn lam(x: &str, body: Expr<A>) -> Self {
        Expr::Lam(Name::from(x), Rc::new(body))
    }
    pub fn app(f: Expr<A>, a: Expr<A>) -> Self {
        Expr::App(Rc::new(f), Rc::new(a))
    }
    pub fn fix(u: &str, body: Expr<A>) -> Self {
        Expr::Fix(Name::from(u), Rc::new(body))
    }
    pub fn tylam(a: &str, body: Expr<A>) -> Self {
        Expr::TyLam(Name::from(a), Rc::new(body))
    }
    pub fn tyapp(e: Expr<A>, t: A) -> Self {
        Expr::TyApp(Rc::new(e), t)
    }
    pub fn eoapp(e: Expr<A>, order: EvalOrder) -> Self {
        Expr::EoApp(Rc::new(e), order)
    }
    pub fn pair(a: Expr<A>, b: Expr<A>) -> Self {
        Expr::Pair(Rc::new(a), Rc::new(b))
    }
    pub fn proj(k: Side, e: Expr<A>) -> Self {
        Expr::Proj(k, Rc::new(e))
    }
    pub fn inj(k: Side, e: Expr<A>) -> Self {
        Expr::Inj(k, Rc::new(e))
    }
    pub fn case(e: Expr<A>, x1: &str, e1: Expr<A>, x2: &str, e2: Expr<A>) -> Self {
        Expr::Case(Rc::new(e), Name::from(x1), Rc::new(e1), Name::from(x2), Rc::new(e2))
    }
    pub fn anno(e: Expr<A>, t: A) -> Self {
        Expr::Anno(Rc::new(e), t)
    }

    /// Node count; annotations and instantiation markers count as one node.
    pub fn size(&self) -> usize {
        use Expr::*;
        match self {
            Unit | Var(_) | FixVar(_) => 1,
            Lam(_, b) | Fix(_, b) | TyLam(_, b) | TyApp(b, _) | EoApp(b, _) | Proj(_, b) | Inj(_, b) | Anno(b, _) => {
                1 + b.size()
            }
            App(a, b) | Pair(a, b) => 1 + a.size() + b.size(),
            Case(s, _, a, _, b) => 1 + s.size() + a.size() + b.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
        use Expr::*;
        match self {
            Unit | FixVar(_) => {}
            Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Lam(x, b) => {
                bound.push(x.clone());
                b.free_vars_into(out, bound);
                bound.pop();
            }
            Fix(_, b) | TyLam(_, b) | TyApp(b, _) | EoApp(b, _) | Proj(_, b) | Inj(_, b) | Anno(b, _) => {
                b.free_vars_into(out, bound)
            }
            App(a, b) | Pair(a, b) => {
                a.free_vars_into(out, bound);
                b.free_vars_into(out, bound);
            }
            Case(s, x1, a, x2, b) => {
                s.free_vars_into(out, bound);
                bound.push(x1.clone());
                a.free_vars_into(out, bound);
                bound.pop();
                bound.push(x2.clone());
                b.free_vars_into(out, bound);
                bound.pop();
            }
        }
    }

    pub fn free_fixvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_fixvars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_fixvars_into(&self, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
        use Expr::*;
        match self {
            Unit | Var(_) => {}
            FixVar(u) => {
                if !bound.contains(u) {
                    out.insert(u.clone());
                }
            }
            Fix(u, b) => {
                bound.push(u.clone());
                b.free_fixvars_into(out, bound);
                bound.pop();
            }
            Lam(_, b) | TyLam(_, b) | TyApp(b, _) | EoApp(b, _) | Proj(_, b) | Inj(_, b) | Anno(b, _) => {
                b.free_fixvars_into(out, bound)
            }
            App(a, b) | Pair(a, b) => {
                a.free_fixvars_into(out, bound);
                b.free_fixvars_into(out, bound);
            }
            Case(s, _, a, _, b) => {
                s.free_fixvars_into(out, bound);
                a.free_fixvars_into(out, bound);
                b.free_fixvars_into(out, bound);
            }
        }
    }

    /// Free type variables of the annotations (respecting `TyLam` binders).
    pub fn free_tyvars(&self) -> BTreeSet<Name> {
        use Expr::*;
        match self {
            Unit | Var(_) | FixVar(_) => BTreeSet::new(),
            TyLam(a, b) => {
                let mut s = b.free_tyvars();
                s.remove(a);
                s
            }
            TyApp(b, t) | Anno(b, t) => {
                let mut s = b.free_tyvars();
                s.extend(t.tyvars());
                s
            }
            Lam(_, b) | Fix(_, b) | EoApp(b, _) | Proj(_, b) | Inj(_, b) => b.free_tyvars(),
            App(a, b) | Pair(a, b) => {
                let mut s = a.free_tyvars();
                s.extend(b.free_tyvars());
                s
            }
            Case(s0, _, a, _, b) => {
                let mut s = s0.free_tyvars();
                s.extend(a.free_tyvars());
                s.extend(b.free_tyvars());
                s
            }
        }
    }

    pub fn free_eovars(&self) -> BTreeSet<Name> {
        use Expr::*;
        match self {
            Unit | Var(_) | FixVar(_) => BTreeSet::new(),
            TyApp(b, t) | Anno(b, t) => {
                let mut s = b.free_eovars();
                s.extend(t.eovars());
                s
            }
            EoApp(b, e) => {
                let mut s = b.free_eovars();
                if let EvalOrder::Var(a) = e {
                    s.insert(a.clone());
                }
                s
            }
            Lam(_, b) | Fix(_, b) | TyLam(_, b) | Proj(_, b) | Inj(_, b) => b.free_eovars(),
            App(a, b) | Pair(a, b) => {
                let mut s = a.free_eovars();
                s.extend(b.free_eovars());
                s
            }
            Case(s0, _, a, _, b) => {
                let mut s = s0.free_eovars();
                s.extend(a.free_eovars());
                s.extend(b.free_eovars());
                s
            }
        }
    }

    fn bound_and_free_names(&self, out: &mut BTreeSet<Name>) {
        use Expr::*;
        match self {
            Unit => {}
            Var(x) | FixVar(x) => {
                out.insert(x.clone());
            }
            Lam(x, b) | Fix(x, b) => {
                out.insert(x.clone());
                b.bound_and_free_names(out);
            }
            TyLam(_, b) | TyApp(b, _) | EoApp(b, _) | Proj(_, b) | Inj(_, b) | Anno(b, _) => b.bound_and_free_names(out),
            App(a, b) | Pair(a, b) => {
                a.bound_and_free_names(out);
                b.bound_and_free_names(out);
            }
            Case(s, x1, a, x2, b) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
                s.bound_and_free_names(out);
                a.bound_and_free_names(out);
                b.bound_and_free_names(out);
            }
        }
    }

    /// Capture-avoiding `[replacement/x]self` for an ordinary variable.
    pub fn subst_var(&self, replacement: &Expr<A>, x: &str) -> Expr<A> {
        let fv = replacement.free_vars();
        let ftv = replacement.free_tyvars();
        self.subst_var_with(replacement, x, &fv, &ftv)
    }

    fn subst_var_with(&self, rep: &Expr<A>, x: &str, fv: &BTreeSet<Name>, ftv: &BTreeSet<Name>) -> Expr<A> {
        use Expr::*;
        let go = |e: &Rc<Expr<A>>| Rc::new(e.subst_var_with(rep, x, fv, ftv));
        match self {
            Var(y) if &**y == x => rep.clone(),
            Unit | Var(_) | FixVar(_) => self.clone(),
            Lam(y, b) => {
                let (y2, b2) = self.freshen_binder(y, b, x, fv, rep);
                match (y2, b2) {
                    (None, _) => self.clone(),
                    (Some(y2), b2) => Lam(y2, go(&b2)),
                }
            }
            Fix(u, b) => Fix(u.clone(), go(b)),
            TyLam(a, b) => {
                if ftv.contains(a) {
                    let mut avoid = ftv.clone();
                    avoid.extend(b.free_tyvars());
                    let fresh = fresh_avoiding(a, &avoid);
                    let b2 = Rc::new(b.rename_tyvar_expr(a, &fresh));
                    TyLam(fresh, go(&b2))
                } else {
                    TyLam(a.clone(), go(b))
                }
            }
            TyApp(b, t) => TyApp(go(b), t.clone()),
            EoApp(b, e) => EoApp(go(b), e.clone()),
            Anno(b, t) => Anno(go(b), t.clone()),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => {
                let branch = |y: &Name, body: &Rc<Expr<A>>| -> (Name, Rc<Expr<A>>) {
                    match self.freshen_binder(y, body, x, fv, rep) {
                        (None, _) => (y.clone(), body.clone()),
                        (Some(y2), b2) => (y2, go(&b2)),
                    }
                };
                let (y1, a2) = branch(x1, a);
                let (y2, b2) = branch(x2, b);
                Case(go(s), y1, a2, y2, b2)
            }
        }
    }

    /// For a binder `y` over `body`: `None` if `y` shadows the substituted
    /// variable, otherwise the (possibly renamed) binder and body.
    fn freshen_binder(
        &self,
        y: &Name,
        body: &Rc<Expr<A>>,
        x: &str,
        fv: &BTreeSet<Name>,
        rep: &Expr<A>,
    ) -> (Option<Name>, Rc<Expr<A>>) {
        if &**y == x {
            return (None, body.clone());
        }
        if fv.contains(y) {
            let mut avoid = fv.clone();
            body.bound_and_free_names(&mut avoid);
            rep.bound_and_free_names(&mut avoid);
            avoid.insert(Name::from(x));
            let fresh = fresh_avoiding(y, &avoid);
            let renamed = Rc::new(body.subst_var(&Expr::Var(fresh.clone()), y));
            (Some(fresh), renamed)
        } else {
            (Some(y.clone()), body.clone())
        }
    }

    /// Capture-avoiding `[replacement/u]self` for a fixed-point variable.
    pub fn subst_fixvar(&self, replacement: &Expr<A>, u: &str) -> Expr<A> {
        use Expr::*;
        let fv = replacement.free_vars();
        let fu = replacement.free_fixvars();
        let go = |e: &Rc<Expr<A>>| Rc::new(e.subst_fixvar(replacement, u));
        match self {
            FixVar(v) if &**v == u => replacement.clone(),
            Unit | Var(_) | FixVar(_) => self.clone(),
            Fix(v, b) => {
                if &**v == u {
                    self.clone()
                } else if fu.contains(v) {
                    let mut avoid = fu.clone();
                    b.bound_and_free_names(&mut avoid);
                    avoid.insert(Name::from(u));
                    let fresh = fresh_avoiding(v, &avoid);
                    let b2 = Rc::new(b.subst_fixvar(&FixVar(fresh.clone()), v));
                    Fix(fresh, go(&b2))
                } else {
                    Fix(v.clone(), go(b))
                }
            }
            Lam(y, b) => {
                if fv.contains(y) {
                    let mut avoid = fv.clone();
                    b.bound_and_free_names(&mut avoid);
                    let fresh = fresh_avoiding(y, &avoid);
                    let b2 = Rc::new(b.subst_var(&Var(fresh.clone()), y));
                    Lam(fresh, go(&b2))
                } else {
                    Lam(y.clone(), go(b))
                }
            }
            Case(s, x1, a, x2, b) => {
                let branch = |y: &Name, body: &Rc<Expr<A>>| -> (Name, Rc<Expr<A>>) {
                    if fv.contains(y) {
                        let mut avoid = fv.clone();
                        body.bound_and_free_names(&mut avoid);
                        let fresh = fresh_avoiding(y, &avoid);
                        let b2 = Rc::new(body.subst_var(&Var(fresh.clone()), y));
                        (fresh, go(&b2))
                    } else {
                        (y.clone(), go(body))
                    }
                };
                let (y1, a2) = branch(x1, a);
                let (y2, b2) = branch(x2, b);
                Case(go(s), y1, a2, y2, b2)
            }
            TyLam(a, b) => TyLam(a.clone(), go(b)),
            TyApp(b, t) => TyApp(go(b), t.clone()),
            EoApp(b, e) => EoApp(go(b), e.clone()),
            Anno(b, t) => Anno(go(b), t.clone()),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
        }
    }

    /// Rename a free type variable throughout the annotations.
    pub fn rename_tyvar_expr(&self, from: &str, to: &Name) -> Expr<A> {
        self.map_annotations(&|t: &A| t.rename_tyvar(from, to), from)
    }

    /// `[replacement/α]` in every annotation.
    pub fn subst_tyvar_expr(&self, replacement: &A, var: &str) -> Expr<A> {
        let ftv = replacement.tyvars();
        self.subst_tyvar_expr_with(replacement, var, &ftv)
    }

    fn subst_tyvar_expr_with(&self, rep: &A, var: &str, ftv: &BTreeSet<Name>) -> Expr<A> {
        use Expr::*;
        let go = |e: &Rc<Expr<A>>| Rc::new(e.subst_tyvar_expr_with(rep, var, ftv));
        match self {
            Unit | Var(_) | FixVar(_) => self.clone(),
            TyLam(a, b) => {
                if &**a == var {
                    self.clone()
                } else if ftv.contains(a) {
                    let mut avoid = ftv.clone();
                    avoid.extend(b.free_tyvars());
                    avoid.insert(Name::from(var));
                    let fresh = fresh_avoiding(a, &avoid);
                    let b2 = Rc::new(b.rename_tyvar_expr(a, &fresh));
                    TyLam(fresh, go(&b2))
                } else {
                    TyLam(a.clone(), go(b))
                }
            }
            TyApp(b, t) => TyApp(go(b), t.subst_tyvar(rep, var)),
            Anno(b, t) => Anno(go(b), t.subst_tyvar(rep, var)),
            EoApp(b, e) => EoApp(go(b), e.clone()),
            Lam(x, b) => Lam(x.clone(), go(b)),
            Fix(u, b) => Fix(u.clone(), go(b)),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => Case(go(s), x1.clone(), go(a), x2.clone(), go(b)),
        }
    }

    /// `[order/𝔞]` in every annotation and instantiation marker.
    pub fn subst_eovar_expr(&self, order: &EvalOrder, var: &str) -> Expr<A> {
        use Expr::*;
        let go = |e: &Rc<Expr<A>>| Rc::new(e.subst_eovar_expr(order, var));
        match self {
            Unit | Var(_) | FixVar(_) => self.clone(),
            TyApp(b, t) => TyApp(go(b), t.subst_eovar(order, var)),
            Anno(b, t) => Anno(go(b), t.subst_eovar(order, var)),
            EoApp(b, e) => EoApp(go(b), e.subst(order, var)),
            TyLam(a, b) => TyLam(a.clone(), go(b)),
            Lam(x, b) => Lam(x.clone(), go(b)),
            Fix(u, b) => Fix(u.clone(), go(b)),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => Case(go(s), x1.clone(), go(a), x2.clone(), go(b)),
        }
    }

    /// Apply `f` to every annotation not under a `TyLam` binding `shadow`.
    fn map_annotations(&self, f: &dyn Fn(&A) -> A, shadow: &str) -> Expr<A> {
        use Expr::*;
        let go = |e: &Rc<Expr<A>>| Rc::new(e.map_annotations(f, shadow));
        match self {
            Unit | Var(_) | FixVar(_) => self.clone(),
            TyLam(a, _) if &**a == shadow => self.clone(),
            TyLam(a, b) => TyLam(a.clone(), go(b)),
            TyApp(b, t) => TyApp(go(b), f(t)),
            Anno(b, t) => Anno(go(b), f(t)),
            EoApp(b, e) => EoApp(go(b), e.clone()),
            Lam(x, b) => Lam(x.clone(), go(b)),
            Fix(u, b) => Fix(u.clone(), go(b)),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => Case(go(s), x1.clone(), go(a), x2.clone(), go(b)),
        }
    }

    /// Translate every annotation; the expression structure is unchanged.
    pub fn map_annotation_type<B>(&self, f: &dyn Fn(&A) -> B) -> Expr<B> {
        use Expr::*;
        let go = |e: &Rc<Expr<A>>| Rc::new(e.map_annotation_type(f));
        match self {
            Unit => Unit,
            Var(x) => Var(x.clone()),
            FixVar(u) => FixVar(u.clone()),
            Lam(x, b) => Lam(x.clone(), go(b)),
            App(a, b) => App(go(a), go(b)),
            Fix(u, b) => Fix(u.clone(), go(b)),
            TyLam(a, b) => TyLam(a.clone(), go(b)),
            TyApp(b, t) => TyApp(go(b), f(t)),
            EoApp(b, e) => EoApp(go(b), e.clone()),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => Case(go(s), x1.clone(), go(a), x2.clone(), go(b)),
            Anno(b, t) => Anno(go(b), f(t)),
        }
    }

    pub fn alpha_eq(&self, other: &Expr<A>) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default(), &mut AlphaEnv::default(), &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &Expr<A>, xs: &mut AlphaEnv, us: &mut AlphaEnv, tys: &mut AlphaEnv) -> bool {
        use Expr::*;
        match (self, other) {
            (Unit, Unit) => true,
            (Var(a), Var(b)) => xs.vars_match(a, b),
            (FixVar(a), FixVar(b)) => us.vars_match(a, b),
            (Lam(a, x), Lam(b, y)) => xs.scoped(a, b, |xs| x.alpha_eq_in(y, xs, us, tys)),
            (Fix(a, x), Fix(b, y)) => us.scoped(a, b, |us| x.alpha_eq_in(y, xs, us, tys)),
            (TyLam(a, x), TyLam(b, y)) => {
                // Annotations compare up to renaming the bound type variable
                // on the right to the left's name.
                if a == b {
                    tys.scoped(a, b, |tys| x.alpha_eq_in(y, xs, us, tys))
                } else {
                    let mut avoid = x.free_tyvars();
                    avoid.extend(y.free_tyvars());
                    let fresh = fresh_avoiding(a, &avoid);
                    let x2 = x.rename_tyvar_expr(a, &fresh);
                    let y2 = y.rename_tyvar_expr(b, &fresh);
                    x2.alpha_eq_in(&y2, xs, us, tys)
                }
            }
            (TyApp(x, s), TyApp(y, t)) | (Anno(x, s), Anno(y, t)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && s.alpha_eq_ann(t)
                    && x.alpha_eq_in(y, xs, us, tys)
            }
            (EoApp(x, e1), EoApp(y, e2)) => e1 == e2 && x.alpha_eq_in(y, xs, us, tys),
            (App(a1, b1), App(a2, b2)) | (Pair(a1, b1), Pair(a2, b2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && a1.alpha_eq_in(a2, xs, us, tys)
                    && b1.alpha_eq_in(b2, xs, us, tys)
            }
            (Proj(k1, x), Proj(k2, y)) | (Inj(k1, x), Inj(k2, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && k1 == k2
                    && x.alpha_eq_in(y, xs, us, tys)
            }
            (Case(s1, a1, l1, b1, r1), Case(s2, a2, l2, b2, r2)) => {
                s1.alpha_eq_in(s2, xs, us, tys)
                    && xs.scoped(a1, a2, |xs| l1.alpha_eq_in(l2, xs, us, tys))
                    && xs.scoped(b1, b2, |xs| r1.alpha_eq_in(r2, xs, us, tys))
            }
            _ => false,
        }
    }

    /// Remove annotations, type abstractions/applications and instantiation
    /// markers.
    pub fn erase(&self) -> Term {
        use Expr::*;
        match self {
            Unit => Term::Unit,
            Var(x) => Term::Var(x.clone()),
            FixVar(u) => Term::FixVar(u.clone()),
            Lam(x, b) => Term::Lam(x.clone(), Rc::new(b.erase())),
            App(a, b) => Term::App(Rc::new(a.erase()), Rc::new(b.erase())),
            Fix(u, b) => Term::Fix(u.clone(), Rc::new(b.erase())),
            TyLam(_, b) | TyApp(b, _) | EoApp(b, _) | Anno(b, _) => b.erase(),
            Pair(a, b) => Term::Pair(Rc::new(a.erase()), Rc::new(b.erase())),
            Proj(k, b) => Term::Proj(*k, Rc::new(b.erase())),
            Inj(k, b) => Term::Inj(*k, Rc::new(b.erase())),
            Case(s, x1, a, x2, b) => Term::Case(Rc::new(s.erase()), x1.clone(), Rc::new(a.erase()), x2.clone(), Rc::new(b.erase())),
        }
    }

    /// Every annotation in the expression, in order.
    pub fn annotations(&self) -> Vec<&A> {
        use Expr::*;
        fn go<'a, A>(e: &'a Expr<A>, out: &mut Vec<&'a A>) {
            match e {
                Unit | Var(_) | FixVar(_) => {}
                TyApp(b, t) | Anno(b, t) => {
                    go(b, out);
                    out.push(t);
                }
                Lam(_, b) | Fix(_, b) | TyLam(_, b) | EoApp(b, _) | Proj(_, b) | Inj(_, b) => go(b, out),
                App(a, b) | Pair(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Case(s, _, a, _, b) => {
                    go(s, out);
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Every order used by an instantiation marker.
    pub fn instantiations(&self) -> Vec<&EvalOrder> {
        use Expr::*;
        fn go<'a, A>(e: &'a Expr<A>, out: &mut Vec<&'a EvalOrder>) {
            match e {
                Unit | Var(_) | FixVar(_) => {}
                EoApp(b, o) => {
                    go(b, out);
                    out.push(o);
                }
                Lam(_, b) | Fix(_, b) | TyLam(_, b) | TyApp(b, _) | Anno(b, _) | Proj(_, b) | Inj(_, b) => go(b, out),
                App(a, b) | Pair(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Case(s, _, a, _, b) => {
                    go(s, out);
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

impl<A: Annotation> PartialEq for Expr<A> {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

// ---------------------------------------------------------------------------
// Erased expressions

#[derive(Clone, Debug)]
pub enum Term {
    Unit,
    Var(Name),
    FixVar(Name),
    Lam(Name, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Fix(Name, Rc<Term>),
    Pair(Rc<Term>, Rc<Term>),
    Proj(Side, Rc<Term>),
    Inj(Side, Rc<Term>),
    Case(Rc<Term>, Name, Rc<Term>, Name, Rc<Term>),
}

impl Term {
    pub fn var(x: &str) -> Self {
        Term::Var(Name::from(x))
    }
    pub fn fixvar(u: &str) -> Self {
        Term::FixVar(Name::from(u))
    }
    pub fn lam(x: &str, body: Term) -> Self {
        Term::Lam(Name::from(x), Rc::new(body))
    }
    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Rc::new(f), Rc::new(a))
    }
    pub fn fix(u: &str, body: Term) -> Self {
        Term::Fix(Name::from(u), Rc::new(body))
    }
    pub fn pair(a: Term, b: Term) -> Self {
        Term::Pair(Rc::new(a), Rc::new(b))
    }
    pub fn proj(k: Side, e: Term) -> Self {
        Term::Proj(k, Rc::new(e))
    }
    pub fn inj(k: Side, e: Term) -> Self {
        Term::Inj(k, Rc::new(e))
    }
    pub fn case(e: Term, x1: &str, e1: Term, x2: &str, e2: Term) -> Self {
        Term::Case(Rc::new(e), Name::from(x1), Rc::new(e1), Name::from(x2), Rc::new(e2))
    }

    pub fn size(&self) -> usize {
        use Term::*;
        match self {
            Unit | Var(_) | FixVar(_) => 1,
            Lam(_, b) | Fix(_, b) | Proj(_, b) | Inj(_, b) => 1 + b.size(),
            App(a, b) | Pair(a, b) => 1 + a.size() + b.size(),
            Case(s, _, a, _, b) => 1 + s.size() + a.size() + b.size(),
        }
    }

    /// View an erased term as an expression of any annotation phase.
    pub fn to_expr<A: Annotation>(&self) -> Expr<A> {
        use Term::*;
        match self {
            Unit => Expr::Unit,
            Var(x) => Expr::Var(x.clone()),
            FixVar(u) => Expr::FixVar(u.clone()),
            Lam(x, b) => Expr::Lam(x.clone(), Rc::new(b.to_expr())),
            App(a, b) => Expr::App(Rc::new(a.to_expr()), Rc::new(b.to_expr())),
            Fix(u, b) => Expr::Fix(u.clone(), Rc::new(b.to_expr())),
            Pair(a, b) => Expr::Pair(Rc::new(a.to_expr()), Rc::new(b.to_expr())),
            Proj(k, b) => Expr::Proj(*k, Rc::new(b.to_expr())),
            Inj(k, b) => Expr::Inj(*k, Rc::new(b.to_expr())),
            Case(s, x1, a, x2, b) => Expr::Case(Rc::new(s.to_expr()), x1.clone(), Rc::new(a.to_expr()), x2.clone(), Rc::new(b.to_expr())),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
            use Term::*;
            match t {
                Unit | FixVar(_) => {}
                Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Lam(x, b) => {
                    bound.push(x.clone());
                    go(b, out, bound);
                    bound.pop();
                }
                Fix(_, b) | Proj(_, b) | Inj(_, b) => go(b, out, bound),
                App(a, b) | Pair(a, b) => {
                    go(a, out, bound);
                    go(b, out, bound);
                }
                Case(s, x1, a, x2, b) => {
                    go(s, out, bound);
                    bound.push(x1.clone());
                    go(a, out, bound);
                    bound.pop();
                    bound.push(x2.clone());
                    go(b, out, bound);
                    bound.pop();
                }
            }
        }
        go(self, &mut out, &mut Vec::new());
        out
    }

    pub fn free_fixvars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
            use Term::*;
            match t {
                Unit | Var(_) => {}
                FixVar(u) => {
                    if !bound.contains(u) {
                        out.insert(u.clone());
                    }
                }
                Fix(u, b) => {
                    bound.push(u.clone());
                    go(b, out, bound);
                    bound.pop();
                }
                Lam(_, b) | Proj(_, b) | Inj(_, b) => go(b, out, bound),
                App(a, b) | Pair(a, b) => {
                    go(a, out, bound);
                    go(b, out, bound);
                }
                Case(s, _, a, _, b) => {
                    go(s, out, bound);
                    go(a, out, bound);
                    go(b, out, bound);
                }
            }
        }
        go(self, &mut out, &mut Vec::new());
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty() && self.free_fixvars().is_empty()
    }

    fn names(&self, out: &mut BTreeSet<Name>) {
        use Term::*;
        match self {
            Unit => {}
            Var(x) | FixVar(x) => {
                out.insert(x.clone());
            }
            Lam(x, b) | Fix(x, b) => {
                out.insert(x.clone());
                b.names(out);
            }
            Proj(_, b) | Inj(_, b) => b.names(out),
            App(a, b) | Pair(a, b) => {
                a.names(out);
                b.names(out);
            }
            Case(s, x1, a, x2, b) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
                s.names(out);
                a.names(out);
                b.names(out);
            }
        }
    }

    /// Capture-avoiding `[replacement/x]self`.
    pub fn subst_var(&self, replacement: &Term, x: &str) -> Term {
        let fv = replacement.free_vars();
        self.subst_var_with(replacement, x, &fv)
    }

    fn subst_var_with(&self, rep: &Term, x: &str, fv: &BTreeSet<Name>) -> Term {
        use Term::*;
        let go = |t: &Rc<Term>| Rc::new(t.subst_var_with(rep, x, fv));
        let binder = |y: &Name, body: &Rc<Term>| -> (Name, Rc<Term>) {
            if &**y == x {
                (y.clone(), body.clone())
            } else if fv.contains(y) {
                let mut avoid = fv.clone();
                body.names(&mut avoid);
                avoid.insert(Name::from(x));
                let fresh = fresh_avoiding(y, &avoid);
                let renamed = Rc::new(body.subst_var(&Var(fresh.clone()), y));
                (fresh, go(&renamed))
            } else {
                (y.clone(), go(body))
            }
        };
        match self {
            Var(y) if &**y == x => rep.clone(),
            Unit | Var(_) | FixVar(_) => self.clone(),
            Lam(y, b) => {
                let (y2, b2) = binder(y, b);
                Lam(y2, b2)
            }
            Fix(u, b) => Fix(u.clone(), go(b)),
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => {
                let (y1, a2) = binder(x1, a);
                let (y2, b2) = binder(x2, b);
                Case(go(s), y1, a2, y2, b2)
            }
        }
    }

    /// Capture-avoiding `[replacement/u]self`.
    pub fn subst_fixvar(&self, replacement: &Term, u: &str) -> Term {
        let fv = replacement.free_vars();
        let fu = replacement.free_fixvars();
        self.subst_fixvar_with(replacement, u, &fv, &fu)
    }

    fn subst_fixvar_with(&self, rep: &Term, u: &str, fv: &BTreeSet<Name>, fu: &BTreeSet<Name>) -> Term {
        use Term::*;
        let go = |t: &Rc<Term>| Rc::new(t.subst_fixvar_with(rep, u, fv, fu));
        let xbinder = |y: &Name, body: &Rc<Term>| -> (Name, Rc<Term>) {
            if fv.contains(y) {
                let mut avoid = fv.clone();
                body.names(&mut avoid);
                let fresh = fresh_avoiding(y, &avoid);
                let renamed = Rc::new(body.subst_var(&Var(fresh.clone()), y));
                (fresh, go(&renamed))
            } else {
                (y.clone(), go(body))
            }
        };
        match self {
            FixVar(v) if &**v == u => rep.clone(),
            Unit | Var(_) | FixVar(_) => self.clone(),
            Fix(v, b) => {
                if &**v == u {
                    self.clone()
                } else if fu.contains(v) {
                    let mut avoid = fu.clone();
                    b.names(&mut avoid);
                    avoid.insert(Name::from(u));
                    let fresh = fresh_avoiding(v, &avoid);
                    let b2 = Rc::new(b.subst_fixvar(&FixVar(fresh.clone()), v));
                    Fix(fresh, go(&b2))
                } else {
                    Fix(v.clone(), go(b))
                }
            }
            Lam(y, b) => {
                let (y2, b2) = xbinder(y, b);
                Lam(y2, b2)
            }
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Proj(k, b) => Proj(*k, go(b)),
            Inj(k, b) => Inj(*k, go(b)),
            Case(s, x1, a, x2, b) => {
                let (y1, a2) = xbinder(x1, a);
                let (y2, b2) = xbinder(x2, b);
                Case(go(s), y1, a2, y2, b2)
            }
        }
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default(), &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &Term, xs: &mut AlphaEnv, us: &mut AlphaEnv) -> bool {
        use Term::*;
        match (self, other) {
            (Unit, Unit) => true,
            (Var(a), Var(b)) => xs.vars_match(a, b),
            (FixVar(a), FixVar(b)) => us.vars_match(a, b),
            (Lam(a, x), Lam(b, y)) => xs.scoped(a, b, |xs| x.alpha_eq_in(y, xs, us)),
            (Fix(a, x), Fix(b, y)) => us.scoped(a, b, |us| x.alpha_eq_in(y, xs, us)),
            (App(a1, b1), App(a2, b2)) | (Pair(a1, b1), Pair(a2, b2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && a1.alpha_eq_in(a2, xs, us)
                    && b1.alpha_eq_in(b2, xs, us)
            }
            (Proj(k1, x), Proj(k2, y)) | (Inj(k1, x), Inj(k2, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && k1 == k2 && x.alpha_eq_in(y, xs, us)
            }
            (Case(s1, a1, l1, b1, r1), Case(s2, a2, l2, b2, r2)) => {
                s1.alpha_eq_in(s2, xs, us)
                    && xs.scoped(a1, a2, |xs| l1.alpha_eq_in(l2, xs, us))
                    && xs.scoped(b1, b2, |xs| r1.alpha_eq_in(r2, xs, us))
            }
            _ => false,
        }
    }

    /// A representative of the α-class with binders named by depth; two
    /// terms are α-equivalent iff their canonical forms are identical.
    pub fn canonical(&self) -> Term {
        fn go(t: &Term, xs: &mut Vec<(Name, Name)>, us: &mut Vec<(Name, Name)>) -> Term {
            use Term::*;
            let look = |env: &Vec<(Name, Name)>, n: &Name| {
                env.iter().rev().find(|(a, _)| a == n).map(|(_, b)| b.clone()).unwrap_or_else(|| n.clone())
            };
            match t {
                Unit => Unit,
                Var(x) => Var(look(xs, x)),
                FixVar(u) => FixVar(look(us, u)),
                Lam(x, b) => {
                    let c: Name = Name::from(format!("#x{}", xs.len()));
                    xs.push((x.clone(), c.clone()));
                    let b2 = go(b, xs, us);
                    xs.pop();
                    Lam(c, Rc::new(b2))
                }
                Fix(u, b) => {
                    let c: Name = Name::from(format!("#u{}", us.len()));
                    us.push((u.clone(), c.clone()));
                    let b2 = go(b, xs, us);
                    us.pop();
                    Fix(c, Rc::new(b2))
                }
                App(a, b) => App(Rc::new(go(a, xs, us)), Rc::new(go(b, xs, us))),
                Pair(a, b) => Pair(Rc::new(go(a, xs, us)), Rc::new(go(b, xs, us))),
                Proj(k, b) => Proj(*k, Rc::new(go(b, xs, us))),
                Inj(k, b) => Inj(*k, Rc::new(go(b, xs, us))),
                Case(s, x1, a, x2, b) => {
                    let s2 = go(s, xs, us);
                    let c1: Name = Name::from(format!("#x{}", xs.len()));
                    xs.push((x1.clone(), c1.clone()));
                    let a2 = go(a, xs, us);
                    xs.pop();
                    let c2: Name = Name::from(format!("#x{}", xs.len()));
                    xs.push((x2.clone(), c2.clone()));
                    let b2 = go(b, xs, us);
                    xs.pop();
                    Case(Rc::new(s2), c1, Rc::new(a2), c2, Rc::new(b2))
                }
            }
        }
        go(self, &mut Vec::new(), &mut Vec::new())
    }

    /// Structural identity (no α-renaming); used on canonical forms.
    pub fn identical(&self, other: &Term) -> bool {
        use Term::*;
        match (self, other) {
            (Unit, Unit) => true,
            (Var(a), Var(b)) | (FixVar(a), FixVar(b)) => a == b,
            (Lam(a, x), Lam(b, y)) | (Fix(a, x), Fix(b, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && a == b && x.identical(y)
            }
            (App(a1, b1), App(a2, b2)) | (Pair(a1, b1), Pair(a2, b2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && a1.identical(a2) && b1.identical(b2)
            }
            (Proj(k1, x), Proj(k2, y)) | (Inj(k1, x), Inj(k2, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && k1 == k2 && x.identical(y)
            }
            (Case(s1, a1, l1, b1, r1), Case(s2, a2, l2, b2, r2)) => {
                a1 == a2 && b1 == b2 && s1.identical(s2) && l1.identical(l2) && r1.identical(r2)
            }
            _ => false,
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for Term {}

#[cfg(test)]
mod tests {
    use super::*;

    type E = Expr<ImpartialType>;

    #[test]
    fn erase_drops_annotation() {
        assert_eq!(E::anno(E::Unit, ImpartialType::Unit).erase(), Term::Unit);
    }

    #[test]
    fn erase_drops_type_abstraction() {
        let e = E::tylam("a", E::lam("x", E::var("x")));
        assert_eq!(e.erase(), Term::lam("x", Term::var("x")));
    }

    #[test]
    fn erase_is_homomorphic_on_application() {
        let e = E::app(E::var("f"), E::Unit);
        assert_eq!(e.erase(), Term::app(Term::var("f"), Term::Unit));
    }

    #[test]
    fn erase_drops_instantiation_marker() {
        let e = E::eoapp(E::var("f"), EvalOrder::V);
        assert_eq!(e.erase(), Term::var("f"));
    }

    #[test]
    fn substitution_under_unrelated_binder() {
        let e = E::lam("y", E::var("x"));
        assert_eq!(e.subst_var(&E::Unit, "x"), E::lam("y", E::Unit));
        let t = Term::lam("y", Term::var("x"));
        assert_eq!(t.subst_var(&Term::Unit, "x"), Term::lam("y", Term::Unit));
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = Term::lam("y", Term::app(Term::var("x"), Term::var("y")));
        let out = t.subst_var(&Term::var("y"), "x");
        match &out {
            Term::Lam(b, body) => {
                assert_ne!(&**b, "y");
                assert_eq!(**body, Term::app(Term::var("y"), Term::Var(b.clone())));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_equivalence_examples() {
        assert!(Term::lam("x", Term::var("x")).alpha_eq(&Term::lam("y", Term::var("y"))));
        assert!(!Term::lam("x", Term::var("x")).alpha_eq(&Term::lam("y", Term::Unit)));
        assert!(E::lam("x", E::var("x")).alpha_eq(&E::lam("y", E::var("y"))));
    }

    #[test]
    fn type_abstraction_alpha() {
        let l = E::tylam("a", E::anno(E::Unit, ImpartialType::tyvar("a")));
        let r = E::tylam("b", E::anno(E::Unit, ImpartialType::tyvar("b")));
        let s = E::tylam("b", E::anno(E::Unit, ImpartialType::tyvar("a")));
        assert!(l.alpha_eq(&r));
        assert!(!l.alpha_eq(&s));
    }

    #[test]
    fn canonical_forms_agree_on_alpha_classes() {
        let a = Term::case(Term::var("z"), "p", Term::var("p"), "q", Term::Unit);
        let b = Term::case(Term::var("z"), "r", Term::var("r"), "s", Term::Unit);
        assert!(a.canonical().identical(&b.canonical()));
    }
}
