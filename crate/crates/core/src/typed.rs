//! Church-style target terms: the same shapes as `TargetTerm`, with the
//! types needed to check them syntactically. Elaboration emits one alongside
//! every target term, so type preservation can be checked exactly along an
//! evaluation.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::context::TargetCtx;
use crate::machine::{Evaluable, Shape};
use crate::expr::Side;
use crate::names::{fresh_avoiding, Name};
use crate::target::{Reduction, TargetTerm};
use crate::types::TargetType;
use crate::wellformed::target_ty_wf;

#[derive(Clone, Debug)]
pub enum TypedTerm {
    Unit,
    Var(Name),
    FixVar(Name),
    Lam(Name, TargetType, Rc<TypedTerm>),
    App(Rc<TypedTerm>, Rc<TypedTerm>),
    Fix(Name, TargetType, Rc<TypedTerm>),
    TyLam(Name, Rc<TypedTerm>),
    TyApp(Rc<TypedTerm>, TargetType),
    Thunk(Rc<TypedTerm>),
    Force(Rc<TypedTerm>),
    Pair(Rc<TypedTerm>, Rc<TypedTerm>),
    Proj(Side, Rc<TypedTerm>),
    /// The annotation is the whole sum type.
    Inj(Side, TargetType, Rc<TypedTerm>),
    Case(Rc<TypedTerm>, Name, Rc<TypedTerm>, Name, Rc<TypedTerm>),
    /// The annotation is the recursive type being introduced.
    Roll(TargetType, Rc<TypedTerm>),
    Unroll(Rc<TypedTerm>),
}

use TypedTerm as W;

impl TypedTerm {
    pub fn erase(&self) -> TargetTerm {
        use TargetTerm as M;
        let r = |t: &Rc<TypedTerm>| Rc::new(t.erase());
        match self {
            W::Unit => M::Unit,
            W::Var(x) => M::Var(x.clone()),
            W::FixVar(u) => M::FixVar(u.clone()),
            W::Lam(x, _, b) => M::Lam(x.clone(), r(b)),
            W::App(a, b) => M::App(r(a), r(b)),
            W::Fix(u, _, b) => M::Fix(u.clone(), r(b)),
            W::TyLam(_, b) => M::TyLam(r(b)),
            W::TyApp(b, _) => M::TyApp(r(b)),
            W::Thunk(b) => M::Thunk(r(b)),
            W::Force(b) => M::Force(r(b)),
            W::Pair(a, b) => M::Pair(r(a), r(b)),
            W::Proj(k, b) => M::Proj(*k, r(b)),
            W::Inj(k, _, b) => M::Inj(*k, r(b)),
            W::Case(s, x1, a, x2, b) => M::Case(r(s), x1.clone(), r(a), x2.clone(), r(b)),
            W::Roll(_, b) => M::Roll(r(b)),
            W::Unroll(b) => M::Unroll(r(b)),
        }
    }

    fn is_value(&self) -> bool {
        self.erase().is_value()
    }

    fn free_vars_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            W::Unit | W::FixVar(_) => {}
            W::Var(x) => {
                out.insert(x.clone());
            }
            W::Lam(x, _, b) => {
                let mut inner = BTreeSet::new();
                b.free_vars_into(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
            W::Case(s, x1, a, x2, b) => {
                s.free_vars_into(out);
                for (x, body) in [(x1, a), (x2, b)] {
                    let mut inner = BTreeSet::new();
                    body.free_vars_into(&mut inner);
                    inner.remove(x);
                    out.extend(inner);
                }
            }
            _ => self.children().into_iter().for_each(|c| c.free_vars_into(out)),
        }
    }

    fn children(&self) -> Vec<&Rc<TypedTerm>> {
        match self {
            W::Unit | W::Var(_) | W::FixVar(_) => vec![],
            W::Lam(_, _, b) | W::Fix(_, _, b) | W::TyLam(_, b) | W::TyApp(b, _) | W::Thunk(b) | W::Force(b) => vec![b],
            W::Proj(_, b) | W::Inj(_, _, b) | W::Roll(_, b) | W::Unroll(b) => vec![b],
            W::App(a, b) | W::Pair(a, b) => vec![a, b],
            W::Case(s, _, a, _, b) => vec![s, a, b],
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            W::Var(x) | W::FixVar(x) => {
                out.insert(x.clone());
            }
            W::Lam(x, _, _) | W::Fix(x, _, _) | W::TyLam(x, _) => {
                out.insert(x.clone());
            }
            W::Case(_, x1, _, x2, _) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.all_names(out);
        }
    }

    fn map_children(&self, f: &mut dyn FnMut(&TypedTerm) -> TypedTerm) -> TypedTerm {
        let mut g = |t: &Rc<TypedTerm>| Rc::new(f(t));
        match self {
            W::Unit | W::Var(_) | W::FixVar(_) => self.clone(),
            W::Lam(x, a, b) => W::Lam(x.clone(), a.clone(), g(b)),
            W::Fix(u, a, b) => W::Fix(u.clone(), a.clone(), g(b)),
            W::TyLam(a, b) => W::TyLam(a.clone(), g(b)),
            W::TyApp(b, a) => W::TyApp(g(b), a.clone()),
            W::Thunk(b) => W::Thunk(g(b)),
            W::Force(b) => W::Force(g(b)),
            W::Proj(k, b) => W::Proj(*k, g(b)),
            W::Inj(k, a, b) => W::Inj(*k, a.clone(), g(b)),
            W::Roll(a, b) => W::Roll(a.clone(), g(b)),
            W::Unroll(b) => W::Unroll(g(b)),
            W::App(a, b) => W::App(g(a), g(b)),
            W::Pair(a, b) => W::Pair(g(a), g(b)),
            W::Case(s, x1, a, x2, b) => W::Case(g(s), x1.clone(), g(a), x2.clone(), g(b)),
        }
    }

    /// `[rep/x]self`, renaming binders that would capture free variables
    /// of `rep`.
    pub fn subst_var(&self, rep: &TypedTerm, x: &str) -> TypedTerm {
        let mut fv = BTreeSet::new();
        rep.free_vars_into(&mut fv);
        self.subst_var_with(rep, x, &fv)
    }

    fn subst_var_with(&self, rep: &TypedTerm, x: &str, fv: &BTreeSet<Name>) -> TypedTerm {
        let under = |binder: &Name, body: &Rc<TypedTerm>| -> (Name, TypedTerm) {
            if &**binder == x {
                return (binder.clone(), (**body).clone());
            }
            if fv.contains(binder) {
                let mut avoid = fv.clone();
                body.all_names(&mut avoid);
                avoid.insert(Name::from(x));
                let fresh = fresh_avoiding(binder, &avoid);
                let renamed = body.subst_var(&W::Var(fresh.clone()), binder);
                return (fresh, renamed.subst_var_with(rep, x, fv));
            }
            (binder.clone(), body.subst_var_with(rep, x, fv))
        };
        match self {
            W::Var(y) if &**y == x => rep.clone(),
            W::Lam(y, a, b) => {
                let (y2, b2) = under(y, b);
                W::Lam(y2, a.clone(), Rc::new(b2))
            }
            W::Case(s, x1, a, x2, b) => {
                let (y1, a2) = under(x1, a);
                let (y2, b2) = under(x2, b);
                W::Case(Rc::new(s.subst_var_with(rep, x, fv)), y1, Rc::new(a2), y2, Rc::new(b2))
            }
            _ => self.map_children(&mut |c| c.subst_var_with(rep, x, fv)),
        }
    }

    /// `[rep/u]self` for a fixed-point variable. `rep` is closed in every
    /// use (it is the enclosing `fix`), so no renaming is needed unless it
    /// has free variables.
    pub fn subst_fixvar(&self, rep: &TypedTerm, u: &str) -> TypedTerm {
        let mut fv = BTreeSet::new();
        rep.free_vars_into(&mut fv);
        self.subst_fixvar_with(rep, u, &fv)
    }

    fn subst_fixvar_with(&self, rep: &TypedTerm, u: &str, fv: &BTreeSet<Name>) -> TypedTerm {
        match self {
            W::FixVar(v) if &**v == u => rep.clone(),
            W::Fix(v, _, _) if &**v == u => self.clone(),
            W::Lam(y, a, b) if fv.contains(y) => {
                let mut avoid = fv.clone();
                b.all_names(&mut avoid);
                let fresh = fresh_avoiding(y, &avoid);
                let b2 = b.subst_var(&W::Var(fresh.clone()), y);
                W::Lam(fresh, a.clone(), Rc::new(b2.subst_fixvar_with(rep, u, fv)))
            }
            W::Case(s, x1, a, x2, b) if fv.contains(x1) || fv.contains(x2) => {
                let mut avoid = fv.clone();
                self.all_names(&mut avoid);
                let y1 = fresh_avoiding(x1, &avoid);
                avoid.insert(y1.clone());
                let y2 = fresh_avoiding(x2, &avoid);
                let a2 = a.subst_var(&W::Var(y1.clone()), x1);
                let b2 = b.subst_var(&W::Var(y2.clone()), x2);
                W::Case(
                    Rc::new(s.subst_fixvar_with(rep, u, fv)),
                    y1,
                    Rc::new(a2.subst_fixvar_with(rep, u, fv)),
                    y2,
                    Rc::new(b2.subst_fixvar_with(rep, u, fv)),
                )
            }
            _ => self.map_children(&mut |c| c.subst_fixvar_with(rep, u, fv)),
        }
    }

    /// `[rep/α]self` on the type annotations.
    pub fn subst_ty(&self, rep: &TargetType, a: &str) -> TypedTerm {
        let fv = rep.free_tyvars();
        match self {
            W::TyLam(b, _) if &**b == a => self.clone(),
            W::TyLam(b, body) if fv.contains(b) => {
                let mut avoid = fv.clone();
                body.all_names(&mut avoid);
                avoid.insert(Name::from(a));
                let fresh = fresh_avoiding(b, &avoid);
                let renamed = body.subst_ty(&TargetType::TyVar(fresh.clone()), b);
                W::TyLam(fresh, Rc::new(renamed.subst_ty(rep, a)))
            }
            W::Lam(x, t, b) => W::Lam(x.clone(), t.subst_ty(rep, a), Rc::new(b.subst_ty(rep, a))),
            W::Fix(u, t, b) => W::Fix(u.clone(), t.subst_ty(rep, a), Rc::new(b.subst_ty(rep, a))),
            W::TyApp(b, t) => W::TyApp(Rc::new(b.subst_ty(rep, a)), t.subst_ty(rep, a)),
            W::Inj(k, t, b) => W::Inj(*k, t.subst_ty(rep, a), Rc::new(b.subst_ty(rep, a))),
            W::Roll(t, b) => W::Roll(t.subst_ty(rep, a), Rc::new(b.subst_ty(rep, a))),
            _ => self.map_children(&mut |c| c.subst_ty(rep, a)),
        }
    }
}

/// Where a typed term fails to check: the offending subterm and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedError {
    pub term: String,
    pub message: String,
}

fn fail<T>(t: &TypedTerm, message: impl Into<String>) -> Result<T, TypedError> {
    Err(TypedError { term: t.erase().to_string(), message: message.into() })
}

fn expect_eq(t: &TypedTerm, want: &TargetType, got: &TargetType) -> Result<(), TypedError> {
    if want.alpha_eq(got) {
        Ok(())
    } else {
        fail(t, format!("expected {want}, found {got}"))
    }
}

/// The unique type of a typed term, if it has one.
pub fn typed_synth(ctx: &TargetCtx, t: &TypedTerm) -> Result<TargetType, TypedError> {
    use TargetType as A;
    let wf = |ty: &TargetType| if target_ty_wf(ctx, ty) { Ok(()) } else { fail(t, format!("ill-formed type {ty}")) };
    match t {
        W::Unit => Ok(A::Unit),
        W::Var(x) => ctx.lookup_var(x).cloned().map_or_else(|| fail(t, "unbound variable"), Ok),
        W::FixVar(u) => ctx.lookup_fixvar(u).cloned().map_or_else(|| fail(t, "unbound fixed-point variable"), Ok),
        W::Lam(x, a, b) => {
            wf(a)?;
            let bt = typed_synth(&ctx.with_var(x.clone(), a.clone()), b)?;
            Ok(A::Arrow(Rc::new(a.clone()), Rc::new(bt)))
        }
        W::App(f, arg) => match typed_synth(ctx, f)? {
            A::Arrow(dom, cod) => {
                expect_eq(arg, &dom, &typed_synth(ctx, arg)?)?;
                Ok((*cod).clone())
            }
            other => fail(t, format!("applying a term of type {other}")),
        },
        W::Fix(u, a, b) => {
            wf(a)?;
            expect_eq(b, a, &typed_synth(&ctx.with_fixvar(u.clone(), a.clone()), b)?)?;
            Ok(a.clone())
        }
        W::TyLam(a, b) => {
            if !b.erase().is_valuable() {
                return fail(t, "type abstraction over a term that is not valuable");
            }
            if ctx.has_tyvar(a) {
                return fail(t, "type variable already in scope");
            }
            Ok(A::Forall(a.clone(), Rc::new(typed_synth(&ctx.with_tyvar(a.clone()), b)?)))
        }
        W::TyApp(b, arg) => {
            wf(arg)?;
            match typed_synth(ctx, b)? {
                A::Forall(a, body) => Ok(body.subst_ty(arg, &a)),
                other => fail(t, format!("instantiating a term of type {other}")),
            }
        }
        W::Thunk(b) => Ok(A::Thunk(Rc::new(typed_synth(ctx, b)?))),
        W::Force(b) => match typed_synth(ctx, b)? {
            A::Thunk(inner) => Ok((*inner).clone()),
            other => fail(t, format!("forcing a term of type {other}")),
        },
        W::Pair(a, b) => Ok(A::Prod(Rc::new(typed_synth(ctx, a)?), Rc::new(typed_synth(ctx, b)?))),
        W::Proj(k, b) => match typed_synth(ctx, b)? {
            A::Prod(l, r) => Ok((*k.pick(l, r)).clone()),
            other => fail(t, format!("projecting from a term of type {other}")),
        },
        W::Inj(k, sum, b) => {
            wf(sum)?;
            let A::Sum(l, r) = sum else { return fail(t, format!("injection annotated with {sum}")) };
            expect_eq(b, k.pick(l, r), &typed_synth(ctx, b)?)?;
            Ok(sum.clone())
        }
        W::Case(s, x1, a, x2, b) => match typed_synth(ctx, s)? {
            A::Sum(l, r) => {
                let ta = typed_synth(&ctx.with_var(x1.clone(), (*l).clone()), a)?;
                let tb = typed_synth(&ctx.with_var(x2.clone(), (*r).clone()), b)?;
                expect_eq(b, &ta, &tb)?;
                Ok(ta)
            }
            other => fail(t, format!("case on a term of type {other}")),
        },
        W::Roll(mu, b) => {
            wf(mu)?;
            let Some(unfolded) = mu.unfold() else { return fail(t, format!("roll annotated with {mu}")) };
            expect_eq(b, &unfolded, &typed_synth(ctx, b)?)?;
            Ok(mu.clone())
        }
        W::Unroll(b) => {
            let bt = typed_synth(ctx, b)?;
            bt.unfold().map_or_else(|| fail(t, format!("unrolling a term of type {bt}")), Ok)
        }
    }
}

pub fn typed_check(ctx: &TargetCtx, t: &TypedTerm, ty: &TargetType) -> Result<(), TypedError> {
    expect_eq(t, ty, &typed_synth(ctx, t)?)
}

fn reduce(t: &TypedTerm) -> Option<(TypedTerm, Reduction)> {
    match t {
        W::App(f, a) => match &**f {
            W::Lam(x, _, body) if a.is_value() => Some((body.subst_var(a, x), Reduction::Beta)),
            _ => None,
        },
        W::Force(b) => match &**b {
            W::Thunk(inner) => Some(((**inner).clone(), Reduction::Force)),
            _ => None,
        },
        W::Fix(u, _, body) => Some((body.subst_fixvar(t, u), Reduction::Fix)),
        W::TyApp(b, arg) => match &**b {
            W::TyLam(a, body) => Some((body.subst_ty(arg, a), Reduction::TyApp)),
            _ => None,
        },
        W::Proj(k, p) => match &**p {
            W::Pair(a, b) if a.is_value() && b.is_value() => Some(((**k.pick(a, b)).clone(), Reduction::Proj)),
            _ => None,
        },
        W::Case(s, x1, m1, x2, m2) => match &**s {
            W::Inj(k, _, w) if w.is_value() => {
                let (x, body) = k.pick((x1, m1), (x2, m2));
                Some((body.subst_var(w, x), Reduction::Case))
            }
            _ => None,
        },
        W::Unroll(r) => match &**r {
            W::Roll(_, w) if w.is_value() => Some(((**w).clone(), Reduction::Unroll)),
            _ => None,
        },
        _ => None,
    }
}

fn child(t: &TypedTerm, i: usize) -> &TypedTerm {
    match (t, i) {
        (W::App(a, _) | W::Pair(a, _), 0) => a,
        (W::App(_, b) | W::Pair(_, b), 1) => b,
        (W::TyApp(c, _) | W::Force(c) | W::Proj(_, c) | W::Inj(_, _, c) | W::Roll(_, c) | W::Unroll(c), 0) => c,
        (W::Case(s, ..), 0) => s,
        _ => unreachable!("path does not address a child"),
    }
}

fn plug(t: &TypedTerm, path: &[usize], new: TypedTerm) -> TypedTerm {
    let Some((&i, rest)) = path.split_first() else {
        return new;
    };
    let replaced = Rc::new(plug(child(t, i), rest, new));
    match (t, i) {
        (W::App(_, b), 0) => W::App(replaced, b.clone()),
        (W::App(a, _), 1) => W::App(a.clone(), replaced),
        (W::Pair(_, b), 0) => W::Pair(replaced, b.clone()),
        (W::Pair(a, _), 1) => W::Pair(a.clone(), replaced),
        (W::TyApp(_, a), 0) => W::TyApp(replaced, a.clone()),
        (W::Force(_), 0) => W::Force(replaced),
        (W::Proj(k, _), 0) => W::Proj(*k, replaced),
        (W::Inj(k, a, _), 0) => W::Inj(*k, a.clone(), replaced),
        (W::Roll(a, _), 0) => W::Roll(a.clone(), replaced),
        (W::Unroll(_), 0) => W::Unroll(replaced),
        (W::Case(_, x1, m1, x2, m2), 0) => W::Case(replaced, x1.clone(), m1.clone(), x2.clone(), m2.clone()),
        _ => unreachable!("path does not address a child"),
    }
}

impl Evaluable for TypedTerm {
    fn shape(&self) -> Shape {
        match self {
            W::Unit | W::Var(_) | W::Lam(..) | W::TyLam(..) | W::Thunk(_) => Shape::Value,
            W::FixVar(_) => Shape::Stuck,
            W::Fix(..) => Shape::Redex,
            W::App(..) | W::Pair(..) => Shape::Eval(2),
            W::TyApp(..) | W::Force(_) | W::Proj(..) | W::Inj(..) | W::Roll(..) | W::Unroll(_) | W::Case(..) => Shape::Eval(1),
        }
    }

    fn settled(&self) -> Shape {
        let redex_if = |b: bool| if b { Shape::Redex } else { Shape::Stuck };
        match self {
            W::Pair(..) | W::Inj(..) | W::Roll(..) => Shape::Value,
            W::App(f, _) => redex_if(matches!(&**f, W::Lam(..))),
            W::TyApp(c, _) => redex_if(matches!(&**c, W::TyLam(..))),
            W::Force(c) => redex_if(matches!(&**c, W::Thunk(_))),
            W::Proj(_, c) => redex_if(matches!(&**c, W::Pair(..))),
            W::Unroll(c) => redex_if(matches!(&**c, W::Roll(..))),
            W::Case(c, ..) => redex_if(matches!(&**c, W::Inj(..))),
            _ => self.shape(),
        }
    }

    fn eval_child(&self, i: usize) -> &Self {
        child(self, i)
    }

    fn replace_child(&self, i: usize, new: Self) -> Self {
        plug(self, &[i], new)
    }

    fn contract(&self) -> Option<(Self, Reduction)> {
        reduce(self)
    }

    fn identical(&self, other: &Self) -> bool {
        let same = |a: &Rc<W>, b: &Rc<W>| Rc::ptr_eq(a, b) || a.identical(b);
        match (self, other) {
            (W::Unit, W::Unit) => true,
            (W::Var(a), W::Var(b)) | (W::FixVar(a), W::FixVar(b)) => a == b,
            (W::Lam(x, a, m), W::Lam(y, b, n)) | (W::Fix(x, a, m), W::Fix(y, b, n)) => x == y && a == b && same(m, n),
            (W::App(a, b), W::App(c, d)) | (W::Pair(a, b), W::Pair(c, d)) => same(a, c) && same(b, d),
            (W::TyLam(a, m), W::TyLam(b, n)) => a == b && same(m, n),
            (W::TyApp(m, a), W::TyApp(n, b)) | (W::Roll(a, m), W::Roll(b, n)) => a == b && same(m, n),
            (W::Thunk(m), W::Thunk(n)) | (W::Force(m), W::Force(n)) | (W::Unroll(m), W::Unroll(n)) => same(m, n),
            (W::Proj(i, m), W::Proj(j, n)) => i == j && same(m, n),
            (W::Inj(i, a, m), W::Inj(j, b, n)) => i == j && a == b && same(m, n),
            (W::Case(m, x, l, y, r), W::Case(n, x2, l2, y2, r2)) => {
                x == x2 && y == y2 && same(m, n) && same(l, l2) && same(r, r2)
            }
            _ => false,
        }
    }
}

/// One step, at the redex the untyped evaluator would contract.
pub fn typed_step(t: &TypedTerm) -> Option<(TypedTerm, Reduction)> {
    typed_step_at(t).map(|s| (s.next, s.rule))
}

/// A step together with the redex it contracted. Evaluation contexts bind
/// no variables, so the redex and its reduct are closed.
#[derive(Clone, Debug)]
pub struct TypedStep {
    pub next: TypedTerm,
    pub rule: Reduction,
    pub redex: TypedTerm,
    pub reduct: TypedTerm,
}

pub fn typed_step_at(t: &TypedTerm) -> Option<TypedStep> {
    let path = crate::target::decompose(&t.erase())?;
    let mut sub = t;
    for &i in &path {
        sub = child(sub, i);
    }
    let (reduct, rule) = reduce(sub)?;
    Some(TypedStep { next: plug(t, &path, reduct.clone()), rule, redex: sub.clone(), reduct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{step, StepResult};

    fn id_at(a: TargetType) -> TypedTerm {
        W::Lam("x".into(), a, Rc::new(W::Var("x".into())))
    }

    #[test]
    fn polymorphic_identity_checks_and_instantiates() {
        let a = TargetType::tyvar("a");
        let poly = W::TyLam("a".into(), Rc::new(id_at(a.clone())));
        let ty = TargetType::forall("a", TargetType::arrow(a.clone(), a));
        typed_check(&TargetCtx::empty(), &poly, &ty).unwrap();
        let applied = W::App(Rc::new(W::TyApp(Rc::new(poly), TargetType::Unit)), Rc::new(W::Unit));
        typed_check(&TargetCtx::empty(), &applied, &TargetType::Unit).unwrap();
        let (next, rule) = typed_step(&applied).unwrap();
        assert_eq!(rule, Reduction::TyApp);
        typed_check(&TargetCtx::empty(), &next, &TargetType::Unit).unwrap();
        // Mirrors the untyped evaluator.
        let StepResult::Stepped(m, _) = step(&applied.erase()) else { panic!() };
        assert_eq!(next.erase(), m);
    }

    #[test]
    fn valuability_restriction() {
        let body = W::App(Rc::new(id_at(TargetType::Unit)), Rc::new(W::Unit));
        let bad = W::TyLam("a".into(), Rc::new(body));
        assert!(typed_synth(&TargetCtx::empty(), &bad).is_err());
    }

    #[test]
    fn force_of_thunk() {
        let t = W::Force(Rc::new(W::Thunk(Rc::new(W::Unit))));
        typed_check(&TargetCtx::empty(), &t, &TargetType::Unit).unwrap();
    }

    #[test]
    fn substitution_renames_binders() {
        let t = W::Lam("y".into(), TargetType::Unit, Rc::new(W::Var("x".into())));
        let s = t.subst_var(&W::Var("y".into()), "x");
        let W::Lam(y, _, body) = &s else { panic!() };
        assert_ne!(&**y, "y");
        assert!(matches!(&**body, W::Var(v) if &**v == "y"));
    }
}
