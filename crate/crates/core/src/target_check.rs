//! Type checking for the unannotated target language. Missing annotations
//! (λ-bound variables, `fix`, injections, instantiations) are recovered by
//! unification. The checker is bidirectional and does not backtrack, so it
//! can reject some typeable terms; it never accepts an untypeable one.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::context::TargetCtx;
use crate::names::Name;
use crate::target::TargetTerm;
use crate::types::TargetType;
use crate::wellformed::target_ty_wf;

use TargetTerm as M;
use TargetType as A;

const META: char = '?';
const RIGID: char = '!';

struct Checker {
    solved: HashMap<Name, TargetType>,
    /// Rigid type variables each unsolved meta may mention.
    scope: HashMap<Name, BTreeSet<Name>>,
    counter: usize,
}

fn is_meta(a: &str) -> bool {
    a.starts_with(META)
}

impl Checker {
    fn new() -> Self {
        Checker { solved: HashMap::new(), scope: HashMap::new(), counter: 0 }
    }

    fn meta(&mut self, ctx: &TargetCtx) -> TargetType {
        self.counter += 1;
        let n: Name = format!("{META}{}", self.counter).into();
        self.scope.insert(n.clone(), ctx.tyvars().into_iter().collect());
        A::TyVar(n)
    }

    fn rigid(&mut self, base: &str) -> Name {
        self.counter += 1;
        format!("{RIGID}{base}{}", self.counter).into()
    }

    /// Follow solved metas at the head.
    fn head(&self, t: &TargetType) -> TargetType {
        let mut t = t.clone();
        while let A::TyVar(a) = &t {
            match self.solved.get(a) {
                Some(s) => t = s.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &TargetType) -> TargetType {
        let r = |x: &Rc<TargetType>| Rc::new(self.resolve(x));
        match self.head(t) {
            A::Forall(a, b) => A::Forall(a, r(&b)),
            A::Rec(a, b) => A::Rec(a, r(&b)),
            A::Thunk(b) => A::Thunk(r(&b)),
            A::Arrow(x, y) => A::Arrow(r(&x), r(&y)),
            A::Prod(x, y) => A::Prod(r(&x), r(&y)),
            A::Sum(x, y) => A::Sum(r(&x), r(&y)),
            other => other,
        }
    }

    fn bind(&mut self, m: &Name, t: &TargetType) -> bool {
        let t = self.resolve(t);
        let fv = t.free_tyvars();
        if fv.contains(m) {
            return false;
        }
        let allowed = self.scope[m].clone();
        for v in &fv {
            if is_meta(v) {
                let narrowed = self.scope[v].intersection(&allowed).cloned().collect();
                self.scope.insert(v.clone(), narrowed);
            } else if !allowed.contains(v) {
                return false;
            }
        }
        self.solved.insert(m.clone(), t);
        true
    }

    fn unify(&mut self, a: &TargetType, b: &TargetType) -> bool {
        let (a, b) = (self.head(a), self.head(b));
        match (&a, &b) {
            (A::TyVar(x), A::TyVar(y)) if x == y => true,
            (A::TyVar(x), _) if is_meta(x) => self.bind(x, &b),
            (_, A::TyVar(y)) if is_meta(y) => self.bind(y, &a),
            (A::Unit, A::Unit) => true,
            (A::Thunk(x), A::Thunk(y)) => self.unify(x, y),
            (A::Arrow(x1, y1), A::Arrow(x2, y2))
            | (A::Prod(x1, y1), A::Prod(x2, y2))
            | (A::Sum(x1, y1), A::Sum(x2, y2)) => self.unify(x1, x2) && self.unify(y1, y2),
            (A::Forall(x, b1), A::Forall(y, b2)) | (A::Rec(x, b1), A::Rec(y, b2)) => {
                let r = A::TyVar(self.rigid(x));
                self.unify(&b1.subst_ty(&r, x), &b2.subst_ty(&r, y))
            }
            _ => false,
        }
    }

    fn infer(&mut self, ctx: &TargetCtx, m: &TargetTerm) -> Option<TargetType> {
        match m {
            M::Unit => Some(A::Unit),
            M::Var(x) => ctx.lookup_var(x).cloned(),
            M::FixVar(u) => ctx.lookup_fixvar(u).cloned(),
            M::Lam(x, body) => {
                let dom = self.meta(ctx);
                let cod = self.infer(&ctx.with_var(x.clone(), dom.clone()), body)?;
                Some(A::Arrow(Rc::new(dom), Rc::new(cod)))
            }
            M::App(f, arg) => {
                if let M::Lam(..) = &**f {
                    let a = self.infer(ctx, arg)?;
                    let cod = self.meta(ctx);
                    self.check(ctx, f, &A::Arrow(Rc::new(a), Rc::new(cod.clone()))).then_some(cod)
                } else {
                    let ft = self.infer(ctx, f)?;
                    let (dom, cod) = match self.head(&ft) {
                        A::Arrow(d, c) => ((*d).clone(), (*c).clone()),
                        _ => {
                            let (d, c) = (self.meta(ctx), self.meta(ctx));
                            if !self.unify(&ft, &A::Arrow(Rc::new(d.clone()), Rc::new(c.clone()))) {
                                return None;
                            }
                            (d, c)
                        }
                    };
                    self.check(ctx, arg, &dom).then_some(cod)
                }
            }
            M::Fix(u, body) => {
                let t = self.meta(ctx);
                self.check(&ctx.with_fixvar(u.clone(), t.clone()), body, &t).then_some(t)
            }
            M::TyLam(body) => {
                if !body.is_valuable() {
                    return None;
                }
                let a = self.rigid("a");
                let t = self.infer(&ctx.with_tyvar(a.clone()), body)?;
                Some(A::Forall(a, Rc::new(t)))
            }
            M::TyApp(body) => {
                let t = self.infer(ctx, body)?;
                match self.head(&t) {
                    A::Forall(a, t) => {
                        let inst = self.meta(ctx);
                        Some(t.subst_ty(&inst, &a))
                    }
                    _ => None,
                }
            }
            M::Thunk(body) => Some(A::Thunk(Rc::new(self.infer(ctx, body)?))),
            M::Force(body) => {
                let t = self.infer(ctx, body)?;
                let inner = self.meta(ctx);
                self.unify(&t, &A::Thunk(Rc::new(inner.clone()))).then_some(inner)
            }
            M::Pair(a, b) => {
                let ta = self.infer(ctx, a)?;
                let tb = self.infer(ctx, b)?;
                Some(A::Prod(Rc::new(ta), Rc::new(tb)))
            }
            M::Proj(k, body) => {
                let t = self.infer(ctx, body)?;
                let (l, r) = (self.meta(ctx), self.meta(ctx));
                let ok = self.unify(&t, &A::Prod(Rc::new(l.clone()), Rc::new(r.clone())));
                ok.then(|| k.pick(l, r))
            }
            M::Inj(..) => {
                let t = A::Sum(Rc::new(self.meta(ctx)), Rc::new(self.meta(ctx)));
                self.check(ctx, m, &t).then_some(t)
            }
            M::Case(..) => {
                let t = self.meta(ctx);
                self.check(ctx, m, &t).then_some(t)
            }
            M::Roll(_) => None,
            M::Unroll(body) => {
                let t = self.infer(ctx, body)?;
                self.resolve(&t).unfold()
            }
        }
    }

    fn check(&mut self, ctx: &TargetCtx, m: &TargetTerm, ty: &TargetType) -> bool {
        let expected = self.head(ty);
        match (m, &expected) {
            (M::Lam(x, body), A::Arrow(dom, cod)) => self.check(&ctx.with_var(x.clone(), (**dom).clone()), body, cod),
            (M::Lam(..), A::TyVar(v)) if is_meta(v) => {
                let (d, c) = (self.meta(ctx), self.meta(ctx));
                self.unify(&expected, &A::Arrow(Rc::new(d.clone()), Rc::new(c.clone())))
                    && self.check(ctx, m, &A::Arrow(Rc::new(d), Rc::new(c)))
            }
            (M::TyLam(body), A::Forall(a, t)) => {
                if !body.is_valuable() {
                    return false;
                }
                let r = self.rigid(a);
                self.check(&ctx.with_tyvar(r.clone()), body, &t.subst_ty(&A::TyVar(r), a))
            }
            (M::Fix(u, body), _) => self.check(&ctx.with_fixvar(u.clone(), expected.clone()), body, &expected),
            (M::Thunk(body), A::Thunk(t)) => self.check(ctx, body, t),
            (M::Pair(a, b), A::Prod(l, r)) => self.check(ctx, a, l) && self.check(ctx, b, r),
            (M::Inj(k, body), A::Sum(l, r)) => self.check(ctx, body, k.pick(l, r)),
            (M::Inj(..), A::TyVar(v)) if is_meta(v) => {
                let sum = A::Sum(Rc::new(self.meta(ctx)), Rc::new(self.meta(ctx)));
                self.unify(&expected, &sum) && self.check(ctx, m, &sum)
            }
            (M::Roll(body), A::Rec(..)) => {
                let unfolded = self.resolve(&expected).unfold().expect("recursive type unfolds");
                self.check(ctx, body, &unfolded)
            }
            (M::Case(s, x1, m1, x2, m2), _) => {
                let Some(st) = self.infer(ctx, s) else { return false };
                let (l, r) = match self.head(&st) {
                    A::Sum(l, r) => ((*l).clone(), (*r).clone()),
                    _ => {
                        let (l, r) = (self.meta(ctx), self.meta(ctx));
                        if !self.unify(&st, &A::Sum(Rc::new(l.clone()), Rc::new(r.clone()))) {
                            return false;
                        }
                        (l, r)
                    }
                };
                self.check(&ctx.with_var(x1.clone(), l), m1, &expected)
                    && self.check(&ctx.with_var(x2.clone(), r), m2, &expected)
            }
            (M::App(f, arg), _) if matches!(&**f, M::Lam(..)) => {
                let Some(a) = self.infer(ctx, arg) else { return false };
                self.check(ctx, f, &A::Arrow(Rc::new(a), Rc::new(expected.clone())))
            }
            (M::TyLam(_) | M::Roll(_), _) => false,
            _ => match self.infer(ctx, m) {
                Some(t) => self.unify(&t, &expected),
                None => false,
            },
        }
    }

    /// Replace every unsolved meta by the unit type.
    fn default_metas(&self, t: &TargetType) -> TargetType {
        let t = self.resolve(t);
        t.free_tyvars().iter().filter(|v| is_meta(v)).fold(t.clone(), |acc, v| acc.subst_ty(&A::Unit, v))
    }
}

/// `Γ ⊢ M : A` in the target language.
pub fn target_check(ctx: &TargetCtx, m: &TargetTerm, ty: &TargetType) -> bool {
    target_ty_wf(ctx, ty) && Checker::new().check(ctx, m, ty)
}

/// A type for `M`, with uninferrable parts defaulted to the unit type.
pub fn target_infer(ctx: &TargetCtx, m: &TargetTerm) -> Option<TargetType> {
    let mut c = Checker::new();
    let t = c.infer(ctx, m)?;
    let t = c.default_metas(&t);
    // Rigid variables from inferred type abstractions are renamed back to
    // ordinary names.
    Some(rename_rigids(&t))
}

fn rename_rigids(t: &TargetType) -> TargetType {
    let r = |x: &Rc<TargetType>| Rc::new(rename_rigids(x));
    let clean = |a: &Name| -> Name {
        if a.starts_with(RIGID) {
            format!("t{}", a[1..].trim_start_matches(|c: char| !c.is_ascii_digit())).into()
        } else {
            a.clone()
        }
    };
    match t {
        A::Unit => A::Unit,
        A::TyVar(a) => A::TyVar(clean(a)),
        A::Forall(a, b) => A::Forall(clean(a), r(b)),
        A::Rec(a, b) => A::Rec(clean(a), r(b)),
        A::Thunk(b) => A::Thunk(r(b)),
        A::Arrow(x, y) => A::Arrow(r(x), r(y)),
        A::Prod(x, y) => A::Prod(r(x), r(y)),
        A::Sum(x, y) => A::Sum(r(x), r(y)),
    }
}
