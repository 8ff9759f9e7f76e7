//! Membership in the elaboration relation: does some elaboration derivation
//! take an erased source term at a given type to a given target term?
//!
//! Erased terms carry no annotations, so the types of λ-bound variables,
//! function arguments and instantiations are recovered by unification. Two
//! facts about the relation keep the search finite. By-value suspensions are
//! transparent (the by-value suspension rules change neither the term nor
//! the valueness), so they are dropped from types. And an order-polymorphic
//! type is only ever used through its two instances, so it is represented
//! by the pair of instances; pairs invented during the search are checked at
//! the end to be instances of one type.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::rc::Rc;

use crate::context::Ctx;
use crate::expr::{Side, Term};
use crate::names::{fresh_avoiding, Name};
use crate::target::TargetTerm;
use crate::types::{EconType, EvalOrder, Valueness};

/// Steps of the search before it gives up.
pub const DEFAULT_BUDGET: usize = 200_000;

const GUIDE_ROUNDS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElabVerdict {
    /// The valuenesses at which the elaboration is derivable.
    Holds(Vec<Valueness>),
    Fails,
    /// The search ran out of budget.
    Unknown,
}

impl ElabVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ElabVerdict::Holds(_))
    }
}

#[derive(Clone, Debug)]
enum Ty {
    Unit,
    Var(Name),
    Meta(usize),
    Forall(Name, Rc<Ty>),
    Arrow(Rc<Ty>, Rc<Ty>),
    Prod(Rc<Ty>, Rc<Ty>),
    Sum(Rc<Ty>, Rc<Ty>),
    Rec(Name, Rc<Ty>),
    ByName(Rc<Ty>),
    /// The instances of an order-polymorphic type at `V` and at `N`.
    Instances(Rc<Ty>, Rc<Ty>),
}

fn rc(t: Ty) -> Rc<Ty> {
    Rc::new(t)
}

impl Ty {
    fn from_econ(s: &EconType) -> Option<Ty> {
        use EconType as S;
        let r = |t: &EconType| Ty::from_econ(t).map(rc);
        Some(match s {
            S::Unit => Ty::Unit,
            S::TyVar(a) => Ty::Var(a.clone()),
            S::Forall(a, b) => Ty::Forall(a.clone(), r(b)?),
            S::Rec(a, b) => Ty::Rec(a.clone(), r(b)?),
            S::Arrow(x, y) => Ty::Arrow(r(x)?, r(y)?),
            S::Prod(x, y) => Ty::Prod(r(x)?, r(y)?),
            S::Sum(x, y) => Ty::Sum(r(x)?, r(y)?),
            S::Susp(EvalOrder::V, b) => Ty::from_econ(b)?,
            S::Susp(EvalOrder::N, b) => Ty::ByName(r(b)?),
            S::Susp(EvalOrder::Var(_), _) => return None,
            S::AllEo(a, b) => Ty::Instances(r(&b.subst_eo(&EvalOrder::V, a))?, r(&b.subst_eo(&EvalOrder::N, a))?),
        })
    }

    fn free_vars_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            Ty::Unit | Ty::Meta(_) => {}
            Ty::Var(a) => {
                out.insert(a.clone());
            }
            Ty::Forall(a, b) | Ty::Rec(a, b) => {
                let mut inner = BTreeSet::new();
                b.free_vars_into(&mut inner);
                inner.remove(a);
                out.extend(inner);
            }
            Ty::ByName(b) => b.free_vars_into(out),
            Ty::Arrow(x, y) | Ty::Prod(x, y) | Ty::Sum(x, y) | Ty::Instances(x, y) => {
                x.free_vars_into(out);
                y.free_vars_into(out);
            }
        }
    }

    fn subst(&self, rep: &Ty, a: &str) -> Ty {
        let go = |t: &Rc<Ty>| rc(t.subst(rep, a));
        match self {
            Ty::Var(b) if &**b == a => rep.clone(),
            Ty::Unit | Ty::Var(_) | Ty::Meta(_) => self.clone(),
            Ty::Forall(b, body) | Ty::Rec(b, body) => {
                let (b2, body2) = if &**b == a {
                    return self.clone();
                } else {
                    let mut fv = BTreeSet::new();
                    rep.free_vars_into(&mut fv);
                    if fv.contains(b) {
                        body.free_vars_into(&mut fv);
                        fv.insert(Name::from(a));
                        let fresh = fresh_avoiding(b, &fv);
                        (fresh.clone(), rc(body.subst(&Ty::Var(fresh), b)))
                    } else {
                        (b.clone(), body.clone())
                    }
                };
                let body3 = rc(body2.subst(rep, a));
                match self {
                    Ty::Forall(..) => Ty::Forall(b2, body3),
                    _ => Ty::Rec(b2, body3),
                }
            }
            Ty::ByName(b) => Ty::ByName(go(b)),
            Ty::Arrow(x, y) => Ty::Arrow(go(x), go(y)),
            Ty::Prod(x, y) => Ty::Prod(go(x), go(y)),
            Ty::Sum(x, y) => Ty::Sum(go(x), go(y)),
            Ty::Instances(x, y) => Ty::Instances(go(x), go(y)),
        }
    }
}

/// A constraint on a type that may not be known yet.
#[derive(Clone)]
enum Pending {
    /// The first type is recursive and unfolds to the second.
    Unfold(Ty, Ty),
    /// The first type is universal and instantiates to the second.
    Instance(Ty, Ty),
}

#[derive(Clone)]
struct State {
    metas: Vec<Option<Ty>>,
    /// Instance pairs created for unknown types, checked at the end.
    invented: Vec<Ty>,
    pending: Vec<Pending>,
    fresh: usize,
    /// When finishing, try recursive types already in the solution before
    /// inventing one.
    reuse: bool,
}

impl State {
    fn meta(&mut self) -> Ty {
        self.metas.push(None);
        Ty::Meta(self.metas.len() - 1)
    }

    fn fresh_name(&mut self, base: &str) -> Name {
        self.fresh += 1;
        format!("{base}#{}", self.fresh).into()
    }

    fn head(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(i) = t {
            match &self.metas[i] {
                Some(s) => t = s.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &Ty) -> Ty {
        let r = |x: &Rc<Ty>| rc(self.resolve(x));
        match self.head(t) {
            Ty::Forall(a, b) => Ty::Forall(a, r(&b)),
            Ty::Rec(a, b) => Ty::Rec(a, r(&b)),
            Ty::ByName(b) => Ty::ByName(r(&b)),
            Ty::Arrow(x, y) => Ty::Arrow(r(&x), r(&y)),
            Ty::Prod(x, y) => Ty::Prod(r(&x), r(&y)),
            Ty::Sum(x, y) => Ty::Sum(r(&x), r(&y)),
            Ty::Instances(x, y) => Ty::Instances(r(&x), r(&y)),
            other => other,
        }
    }

    /// Discharge every pending constraint whose subject is known. With
    /// `finish`, subjects still unknown get the least committal solution:
    /// a recursive type whose unfolding refers back to itself, or a
    /// quantifier that the instance does not depend on.
    fn settle(&mut self, finish: bool) -> bool {
        loop {
            let mut progress = false;
            let mut waiting = Vec::new();
            for p in std::mem::take(&mut self.pending) {
                let subject = match &p {
                    Pending::Unfold(t, _) | Pending::Instance(t, _) => self.head(t),
                };
                let ok = match (&p, &subject) {
                    (_, Ty::Meta(_)) => {
                        waiting.push(p);
                        continue;
                    }
                    (Pending::Unfold(_, u), Ty::Rec(a, body)) => {
                        let mu = self.resolve(&subject);
                        self.unify(&body.subst(&mu, a), u)
                    }
                    (Pending::Instance(_, t), Ty::Forall(a, body)) => {
                        let inst = self.meta();
                        self.unify(&body.subst(&inst, a), t)
                    }
                    _ => false,
                };
                if !ok {
                    return false;
                }
                progress = true;
            }
            // Two unfoldings of one type are the same type.
            let mut merged: Vec<Pending> = Vec::new();
            for p in waiting {
                let same = match &p {
                    Pending::Unfold(t, u) => merged.iter().find_map(|q| match q {
                        Pending::Unfold(t2, u2) if self.same_meta(t, t2) => Some(u2.clone()),
                        _ => None,
                    }).map(|u2| (u.clone(), u2)),
                    Pending::Instance(..) => None,
                };
                match same {
                    Some((u, u2)) => {
                        if !self.unify(&u, &u2) {
                            return false;
                        }
                        progress = true;
                    }
                    None => merged.push(p),
                }
            }
            self.pending = merged;
            if progress {
                continue;
            }
            if !finish || self.pending.is_empty() {
                return true;
            }
            if self.reuse && self.reuse_known() {
                continue;
            }
            // A self-referential unfolding gives a well-tied type, and the
            // types solved from it can then be reused.
            let at = self
                .pending
                .iter()
                .position(|p| match p {
                    Pending::Unfold(t, u) => matches!(self.head(t), Ty::Meta(i) if self.occurs(i, u)),
                    Pending::Instance(..) => false,
                })
                .unwrap_or(0);
            let p = self.pending.remove(at);
            let ok = match p {
                Pending::Unfold(t, u) => {
                    let Ty::Meta(i) = self.head(&t) else { unreachable!() };
                    let a = self.fresh_name("r");
                    let body = self.abstract_meta(i, &self.resolve(&u), &a);
                    self.metas[i] = Some(Ty::Rec(a, rc(body)));
                    true
                }
                Pending::Instance(t, inst) => {
                    let a = self.fresh_name("a");
                    self.unify(&t, &Ty::Forall(a, rc(inst)))
                }
            };
            if !ok {
                return false;
            }
        }
    }

    /// Solve some pending unfolding by a recursive type already known.
    fn reuse_known(&mut self) -> bool {
        let known = self.known_recs();
        for k in 0..self.pending.len() {
            let Pending::Unfold(t, u) = self.pending[k].clone() else { continue };
            for c in &known {
                let mut s = self.clone();
                s.pending.remove(k);
                if s.unify(&t, c) && s.unify(&s.unfolding(c).expect("rec"), &u) {
                    *self = s;
                    return true;
                }
            }
        }
        false
    }

    /// Closed recursive types occurring in solved metas.
    fn known_recs(&self) -> Vec<Ty> {
        fn walk(t: &Ty, bound: &mut Vec<Name>, out: &mut Vec<Ty>) {
            match t {
                Ty::Rec(a, b) | Ty::Forall(a, b) => {
                    if let Ty::Rec(..) = t {
                        let mut fv = BTreeSet::new();
                        t.free_vars_into(&mut fv);
                        if !fv.iter().any(|v| bound.contains(v)) {
                            out.push(t.clone());
                        }
                    }
                    bound.push(a.clone());
                    walk(b, bound, out);
                    bound.pop();
                }
                Ty::ByName(b) => walk(b, bound, out),
                Ty::Arrow(x, y) | Ty::Prod(x, y) | Ty::Sum(x, y) | Ty::Instances(x, y) => {
                    walk(x, bound, out);
                    walk(y, bound, out);
                }
                Ty::Unit | Ty::Var(_) | Ty::Meta(_) => {}
            }
        }
        let mut out = Vec::new();
        for t in self.metas.iter().flatten() {
            walk(&self.resolve(t), &mut Vec::new(), &mut out);
        }
        out
    }

    fn solved(&self) -> usize {
        self.metas.iter().filter(|m| m.is_some()).count()
    }

    fn same_meta(&self, a: &Ty, b: &Ty) -> bool {
        matches!((self.head(a), self.head(b)), (Ty::Meta(i), Ty::Meta(j)) if i == j)
    }

    /// The unfolding of a recursive type, or the pending one of a meta.
    fn unfolding(&self, t: &Ty) -> Option<Ty> {
        match self.head(t) {
            Ty::Rec(a, body) => Some(body.subst(&self.resolve(t), &a)),
            m @ Ty::Meta(_) => self.pending.iter().find_map(|p| match p {
                Pending::Unfold(t2, u) if self.same_meta(&m, t2) => Some(u.clone()),
                _ => None,
            }),
            _ => None,
        }
    }

    /// Solve metas of an instance pair so that the two instances line up,
    /// comparing recursive types by their unfoldings and tying the knot when
    /// a pair comes round again. Only a guide: the result is re-checked.
    fn guide(&mut self, v: &Ty, n: &Ty, seen: &mut Vec<(Ty, Ty)>) -> bool {
        let (v, n) = (self.head(v), self.head(n));
        let key = |st: &State, t: &Ty| format!("{:?}", st.resolve(t));
        let (kv, kn) = (key(self, &v), key(self, &n));
        if seen.iter().any(|(a, b)| key(self, a) == kv && key(self, b) == kn) {
            return true;
        }
        let earlier = |st: &State, mine: &str, pick_v: bool| {
            seen.iter().find_map(|(a, b)| {
                let (k, other) = if pick_v { (key(st, b), a) } else { (key(st, a), b) };
                (k == mine).then(|| other.clone())
            })
        };
        // Only metas already known to be recursive are tied: any other
        // unknown could as well be a suspension of the earlier type.
        if let (Ty::Meta(_), Some(_)) = (&n, self.unfolding(&n)) {
            if let Some(other) = earlier(self, &kv, false) {
                let saved = self.clone();
                if self.unify(&n, &other) {
                    return true;
                }
                *self = saved;
            }
        }
        if let (Ty::Meta(_), Some(_)) = (&v, self.unfolding(&v)) {
            if let Some(other) = earlier(self, &kn, true) {
                let saved = self.clone();
                if self.unify(&v, &other) {
                    return true;
                }
                *self = saved;
            }
        }
        if let (Some(uv), Some(un)) = (self.unfolding(&v), self.unfolding(&n)) {
            seen.push((v, n));
            return self.guide(&uv, &un, seen);
        }
        match (&v, &n) {
            (Ty::Meta(_), _) | (_, Ty::Meta(_)) => true,
            (Ty::ByName(x), Ty::ByName(y)) => {
                let saved = self.clone();
                let mut s2 = seen.clone();
                if self.guide(x, y, &mut s2) {
                    *seen = s2;
                    return true;
                }
                *self = saved;
                self.guide(&v, y, seen)
            }
            (_, Ty::ByName(y)) => self.guide(&v, y, seen),
            (Ty::Arrow(x1, y1), Ty::Arrow(x2, y2))
            | (Ty::Prod(x1, y1), Ty::Prod(x2, y2))
            | (Ty::Sum(x1, y1), Ty::Sum(x2, y2))
            | (Ty::Instances(x1, y1), Ty::Instances(x2, y2)) => self.guide(x1, x2, seen) && self.guide(y1, y2, seen),
            (Ty::Forall(x, b1), Ty::Forall(y, b2)) => {
                let r = Ty::Var(Name::from(format!("{x}#agree")));
                self.guide(&b1.subst(&r, x), &b2.subst(&r, y), seen)
            }
            _ => true,
        }
    }

    /// Replace the unsolved meta `i` by the type variable `a`.
    fn abstract_meta(&self, i: usize, t: &Ty, a: &Name) -> Ty {
        let r = |x: &Rc<Ty>| rc(self.abstract_meta(i, x, a));
        match self.head(t) {
            Ty::Meta(j) if j == i => Ty::Var(a.clone()),
            Ty::Forall(b, x) => Ty::Forall(b, r(&x)),
            Ty::Rec(b, x) => Ty::Rec(b, r(&x)),
            Ty::ByName(x) => Ty::ByName(r(&x)),
            Ty::Arrow(x, y) => Ty::Arrow(r(&x), r(&y)),
            Ty::Prod(x, y) => Ty::Prod(r(&x), r(&y)),
            Ty::Sum(x, y) => Ty::Sum(r(&x), r(&y)),
            Ty::Instances(x, y) => Ty::Instances(r(&x), r(&y)),
            other => other,
        }
    }

    fn occurs(&self, i: usize, t: &Ty) -> bool {
        match self.head(t) {
            Ty::Meta(j) => i == j,
            Ty::Unit | Ty::Var(_) => false,
            Ty::Forall(_, b) | Ty::Rec(_, b) | Ty::ByName(b) => self.occurs(i, &b),
            Ty::Arrow(x, y) | Ty::Prod(x, y) | Ty::Sum(x, y) | Ty::Instances(x, y) => {
                self.occurs(i, &x) || self.occurs(i, &y)
            }
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.head(a), self.head(b));
        match (&a, &b) {
            (Ty::Meta(i), Ty::Meta(j)) if i == j => true,
            (Ty::Meta(i), _) => {
                if self.occurs(*i, &b) {
                    return false;
                }
                self.metas[*i] = Some(b.clone());
                true
            }
            (_, Ty::Meta(_)) => self.unify(&b, &a),
            (Ty::Unit, Ty::Unit) => true,
            (Ty::Var(x), Ty::Var(y)) => x == y,
            (Ty::ByName(x), Ty::ByName(y)) => self.unify(x, y),
            (Ty::Arrow(x1, y1), Ty::Arrow(x2, y2))
            | (Ty::Prod(x1, y1), Ty::Prod(x2, y2))
            | (Ty::Sum(x1, y1), Ty::Sum(x2, y2))
            | (Ty::Instances(x1, y1), Ty::Instances(x2, y2)) => self.unify(x1, x2) && self.unify(y1, y2),
            (Ty::Forall(x, b1), Ty::Forall(y, b2)) | (Ty::Rec(x, b1), Ty::Rec(y, b2)) => {
                // Keep the left binder when possible, so that metas solved
                // under it may mention it.
                let mut fv = BTreeSet::new();
                b2.free_vars_into(&mut fv);
                if x == y || !fv.contains(x) {
                    self.unify(b1, &b2.subst(&Ty::Var(x.clone()), y))
                } else {
                    let r = Ty::Var(self.fresh_name(x));
                    self.unify(&b1.subst(&r, x), &b2.subst(&r, y))
                }
            }
            _ => false,
        }
    }

    /// Whether some order-polymorphic body has these two instances. Unsolved
    /// metas match anything.
    fn instances_agree(&self, v: &Ty, n: &Ty) -> bool {
        let (v, n) = (self.head(v), self.head(n));
        if let Ty::ByName(inner) = &n {
            // A suspension at the bound order.
            if self.instances_agree(&v, inner) {
                return true;
            }
        }
        match (&v, &n) {
            (Ty::Meta(_), _) | (_, Ty::Meta(_)) => true,
            (Ty::Unit, Ty::Unit) => true,
            (Ty::Var(x), Ty::Var(y)) => x == y,
            (Ty::ByName(x), Ty::ByName(y)) => self.instances_agree(x, y),
            (Ty::Arrow(x1, y1), Ty::Arrow(x2, y2))
            | (Ty::Prod(x1, y1), Ty::Prod(x2, y2))
            | (Ty::Sum(x1, y1), Ty::Sum(x2, y2))
            | (Ty::Instances(x1, y1), Ty::Instances(x2, y2)) => {
                self.instances_agree(x1, x2) && self.instances_agree(y1, y2)
            }
            (Ty::Forall(x, b1), Ty::Forall(y, b2)) | (Ty::Rec(x, b1), Ty::Rec(y, b2))
                if std::mem::discriminant(&v) == std::mem::discriminant(&n) =>
            {
                let r = Ty::Var(Name::from(format!("{x}#agree")));
                self.instances_agree(&b1.subst(&r, x), &b2.subst(&r, y))
            }
            _ => false,
        }
    }
}

type TyCtx = Ctx<Ty, Ty>;
type Solutions = Vec<(Valueness, State)>;

struct Search {
    budget: Cell<usize>,
    exhausted: Cell<bool>,
}

use Valueness::{Top, Val};

fn with_phi(sols: Solutions, phi: Valueness) -> Solutions {
    sols.into_iter().map(|(_, s)| (phi, s)).collect()
}

/// Rename the binders of a source and a target abstraction to one name.
fn align(st: &mut State, x: &Name, e: &Term, y: &Name, m: &TargetTerm) -> (Name, Term, TargetTerm) {
    if x == y {
        return (x.clone(), e.clone(), m.clone());
    }
    let z = st.fresh_name(x);
    (z.clone(), e.subst_var(&Term::Var(z.clone()), x), m.subst_var(&TargetTerm::Var(z), y))
}

fn align_fix(st: &mut State, x: &Name, e: &Term, y: &Name, m: &TargetTerm) -> (Name, Term, TargetTerm) {
    if x == y {
        return (x.clone(), e.clone(), m.clone());
    }
    let z = st.fresh_name(x);
    (z.clone(), e.subst_fixvar(&Term::FixVar(z.clone()), x), m.subst_fixvar(&TargetTerm::FixVar(z), y))
}

impl Search {
    fn tick(&self) -> bool {
        let left = self.budget.get();
        if left == 0 {
            self.exhausted.set(true);
            return false;
        }
        self.budget.set(left - 1);
        true
    }

    /// Solve a subgoal in every state of `sols`, keeping the subgoal's
    /// valueness alongside the earlier one.
    fn then(
        &self,
        sols: Solutions,
        mut goal: impl FnMut(State) -> Solutions,
    ) -> Vec<(Valueness, Valueness, State)> {
        let mut out = Vec::new();
        for (phi, st) in sols {
            for (psi, st2) in goal(st) {
                out.push((phi, psi, st2));
            }
        }
        out
    }

    fn solve(&self, mut st: State, ctx: &TyCtx, e: &Term, ty: &Ty, m: &TargetTerm) -> Solutions {
        if !self.tick() {
            return vec![];
        }
        use TargetTerm as M;
        match m {
            M::Var(y) => {
                let Term::Var(x) = e else { return vec![] };
                if x != y {
                    return vec![];
                }
                match ctx.lookup_var(x).cloned() {
                    Some(t) if st.unify(&t, ty) => vec![(Val, st)],
                    _ => vec![],
                }
            }
            M::FixVar(v) => {
                let Term::FixVar(u) = e else { return vec![] };
                if u != v {
                    return vec![];
                }
                match ctx.lookup_fixvar(u).cloned() {
                    Some(t) if st.unify(&t, ty) => vec![(Top, st)],
                    _ => vec![],
                }
            }
            M::Unit => match e {
                Term::Unit if st.unify(&Ty::Unit, ty) => vec![(Val, st)],
                _ => vec![],
            },
            M::Fix(v, m0) => {
                let Term::Fix(u, e0) = e else { return vec![] };
                let (z, e0, m0) = align_fix(&mut st, u, e0, v, m0);
                with_phi(self.solve(st, &ctx.with_fixvar(z, ty.clone()), &e0, ty, &m0), Top)
            }
            M::Lam(y, m0) => {
                let Term::Lam(x, e0) = e else { return vec![] };
                let (dom, cod) = match st.head(ty) {
                    Ty::Arrow(d, c) => ((*d).clone(), (*c).clone()),
                    t @ Ty::Meta(_) => {
                        let (d, c) = (st.meta(), st.meta());
                        st.unify(&t, &Ty::Arrow(rc(d.clone()), rc(c.clone())));
                        (d, c)
                    }
                    _ => return vec![],
                };
                let (z, e0, m0) = align(&mut st, x, e0, y, m0);
                with_phi(self.solve(st, &ctx.with_var(z, dom), &e0, &cod, &m0), Val)
            }
            M::TyLam(m0) => {
                let (a, body) = match st.head(ty) {
                    Ty::Forall(a, b) => (a.clone(), (*b).clone()),
                    t @ Ty::Meta(_) => {
                        let a = st.fresh_name("a");
                        let b = st.meta();
                        st.unify(&t, &Ty::Forall(a.clone(), rc(b.clone())));
                        (a, b)
                    }
                    _ => return vec![],
                };
                let sols = self.solve(st, &ctx.with_tyvar(a), e, &body, m0);
                sols.into_iter().filter(|(phi, _)| *phi == Val).collect()
            }
            M::TyApp(m0) => {
                let poly = st.meta();
                st.pending.push(Pending::Instance(poly.clone(), ty.clone()));
                self.solve(st, ctx, e, &poly, m0)
            }
            M::Thunk(m0) => {
                let inner = match st.head(ty) {
                    Ty::ByName(b) => (*b).clone(),
                    t @ Ty::Meta(_) => {
                        let b = st.meta();
                        st.unify(&t, &Ty::ByName(rc(b.clone())));
                        b
                    }
                    _ => return vec![],
                };
                with_phi(self.solve(st, ctx, e, &inner, m0), Val)
            }
            M::Force(m0) => {
                let susp = Ty::ByName(rc(ty.clone()));
                with_phi(self.solve(st, ctx, e, &susp, m0), Top)
            }
            M::Pair(m1, m2) => {
                let mut out = Vec::new();
                if let Term::Pair(e1, e2) = e {
                    let mut s = st.clone();
                    let parts = match s.head(ty) {
                        Ty::Prod(l, r) => Some(((*l).clone(), (*r).clone())),
                        t @ Ty::Meta(_) => {
                            let (l, r) = (s.meta(), s.meta());
                            s.unify(&t, &Ty::Prod(rc(l.clone()), rc(r.clone())));
                            Some((l, r))
                        }
                        _ => None,
                    };
                    if let Some((l, r)) = parts {
                        let first = self.solve(s, ctx, e1, &l, m1);
                        for (p1, p2, s) in self.then(first, |s| self.solve(s, ctx, e2, &r, m2)) {
                            out.push((p1.join(p2), s));
                        }
                    }
                }
                let parts = match st.head(ty) {
                    Ty::Instances(v, n) => Some(((*v).clone(), (*n).clone())),
                    t @ Ty::Meta(_) => {
                        let (v, n) = (st.meta(), st.meta());
                        let pair = Ty::Instances(rc(v.clone()), rc(n.clone()));
                        st.unify(&t, &pair);
                        st.invented.push(pair);
                        Some((v, n))
                    }
                    _ => None,
                };
                if let Some((v, n)) = parts {
                    let first: Solutions = self.solve(st, ctx, e, &v, m1).into_iter().filter(|(p, _)| *p == Val).collect();
                    for (_, p2, s) in self.then(first, |s| self.solve(s, ctx, e, &n, m2)) {
                        if p2 == Val {
                            out.push((Val, s));
                        }
                    }
                }
                out
            }
            M::Proj(k, m0) => {
                let mut out = Vec::new();
                if let Term::Proj(j, e0) = e {
                    if j == k {
                        let mut s = st.clone();
                        let other = s.meta();
                        let (l, r) = match k {
                            Side::Left => (ty.clone(), other),
                            Side::Right => (other, ty.clone()),
                        };
                        let prod = Ty::Prod(rc(l), rc(r));
                        out.extend(with_phi(self.solve(s, ctx, e0, &prod, m0), Top));
                    }
                }
                let other = st.meta();
                let (v, n) = match k {
                    Side::Left => (ty.clone(), other),
                    Side::Right => (other, ty.clone()),
                };
                let pair = Ty::Instances(rc(v), rc(n));
                st.invented.push(pair.clone());
                out.extend(self.solve(st, ctx, e, &pair, m0));
                out
            }
            M::Inj(k, m0) => {
                let Term::Inj(j, e0) = e else { return vec![] };
                if j != k {
                    return vec![];
                }
                let (l, r) = match st.head(ty) {
                    Ty::Sum(l, r) => ((*l).clone(), (*r).clone()),
                    t @ Ty::Meta(_) => {
                        let (l, r) = (st.meta(), st.meta());
                        st.unify(&t, &Ty::Sum(rc(l.clone()), rc(r.clone())));
                        (l, r)
                    }
                    _ => return vec![],
                };
                self.solve(st, ctx, e0, k.pick(&l, &r), m0)
            }
            M::Case(m0, y1, m1, y2, m2) => {
                let Term::Case(e0, x1, e1, x2, e2) = e else { return vec![] };
                let (l, r) = (st.meta(), st.meta());
                let sum = Ty::Sum(rc(l.clone()), rc(r.clone()));
                let (z1, e1, m1) = align(&mut st, x1, e1, y1, m1);
                let (z2, e2, m2) = align(&mut st, x2, e2, y2, m2);
                let scrut = self.solve(st, ctx, e0, &sum, m0);
                let left = self.then(scrut, |s| self.solve(s, &ctx.with_var(z1.clone(), l.clone()), &e1, ty, &m1));
                let left = left.into_iter().map(|(_, _, s)| (Top, s)).collect();
                let both = self.then(left, |s| self.solve(s, &ctx.with_var(z2.clone(), r.clone()), &e2, ty, &m2));
                both.into_iter().map(|(_, _, s)| (Top, s)).collect()
            }
            M::Roll(m0) => {
                let unfolded = st.meta();
                st.pending.push(Pending::Unfold(ty.clone(), unfolded.clone()));
                if !st.settle(false) {
                    return vec![];
                }
                self.solve(st, ctx, e, &unfolded, m0)
            }
            M::Unroll(m0) => {
                let mu = st.meta();
                st.pending.push(Pending::Unfold(mu.clone(), ty.clone()));
                with_phi(self.solve(st, ctx, e, &mu, m0), Top)
            }
            M::App(m1, m2) => {
                let Term::App(e1, e2) = e else { return vec![] };
                let dom = st.meta();
                let fun = Ty::Arrow(rc(dom.clone()), rc(ty.clone()));
                // With a literal abstraction in function position, the
                // argument is what determines the parameter's type.
                let sols = if matches!(&**e1, Term::Lam(..)) {
                    let first = self.solve(st, ctx, e2, &dom, m2);
                    self.then(first, |s| self.solve(s, ctx, e1, &fun, m1))
                } else {
                    let first = self.solve(st, ctx, e1, &fun, m1);
                    self.then(first, |s| self.solve(s, ctx, e2, &dom, m2))
                };
                sols.into_iter().map(|(_, _, s)| (Top, s)).collect()
            }
        }
    }
}

/// Decide `· ⊢ e : φ S ↪ M` for some `φ`, within `budget` search steps.
pub fn elab_verdict(e: &Term, s: &EconType, m: &TargetTerm, budget: usize) -> ElabVerdict {
    let Some(ty) = Ty::from_econ(s) else { return ElabVerdict::Fails };
    let search = Search { budget: Cell::new(budget), exhausted: Cell::new(false) };
    let st = State { metas: Vec::new(), invented: Vec::new(), pending: Vec::new(), fresh: 0, reuse: false };
    let sols = search.solve(st, &TyCtx::empty(), e, &ty, m);
    let mut phis = Vec::new();
    for (phi, st) in sols {
        if phis.contains(&phi) {
            continue;
        }
        let mut guided = st.clone();
        let mut tied = true;
        // Tying one knot merges unfoldings, which can expose the next.
        for _ in 0..GUIDE_ROUNDS {
            let before = guided.solved();
            tied = guided.settle(false)
                && guided.invented.clone().iter().all(|p| match guided.head(p) {
                    Ty::Instances(v, n) => guided.guide(&v, &n, &mut Vec::new()),
                    _ => true,
                });
            if !tied || guided.solved() == before {
                break;
            }
        }
        let mut attempts = if tied { vec![guided, st.clone()] } else { vec![st.clone()] };
        for a in &mut attempts {
            a.reuse = true;
        }
        attempts.push(st);
        if attempts.into_iter().any(finish) {
            phis.push(phi);
        }
    }
    phis.sort_by_key(|p| *p == Top);
    if !phis.is_empty() {
        ElabVerdict::Holds(phis)
    } else if search.exhausted.get() {
        ElabVerdict::Unknown
    } else {
        ElabVerdict::Fails
    }
}

/// Settle every constraint and check the invented instance pairs.
fn finish(mut st: State) -> bool {
    st.settle(true)
        && st.invented.iter().all(|p| match st.resolve(p) {
            Ty::Instances(v, n) => st.instances_agree(&v, &n),
            _ => false,
        })
}

pub fn check_elab(e: &Term, s: &EconType, m: &TargetTerm) -> bool {
    elab_verdict(e, s, m, DEFAULT_BUDGET).holds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_econ_expr, parse_econ_type, parse_target_term};
    use crate::elaborate::elaborate_closed;

    fn holds(e: &str, s: &str, m: &str) -> bool {
        let e = parse_econ_expr(e).unwrap().erase();
        check_elab(&e, &parse_econ_type(s).unwrap(), &parse_target_term(m).unwrap())
    }

    #[test]
    fn thunk_only_under_by_name() {
        assert!(holds("()", "susp[N] 1", "thunk ()"));
        assert!(!holds("()", "1", "thunk ()"));
    }

    #[test]
    fn order_polymorphic_identity() {
        assert!(holds("\\x. x", "all %a. susp[%a] 1 -> 1", "(\\x. x, \\x. force x)"));
        assert!(!holds("\\x. x", "all %a. susp[%a] 1 -> 1", "(\\x. force x, \\x. x)"));
    }

    #[test]
    fn valuenesses_are_reported() {
        let e = parse_econ_expr("fix u. u").unwrap().erase();
        let t = parse_econ_type("susp[N] 1").unwrap();
        let v = elab_verdict(&e, &t, &parse_target_term("thunk (fix u. u)").unwrap(), DEFAULT_BUDGET);
        assert_eq!(v, ElabVerdict::Holds(vec![Val]));
        let v = elab_verdict(&e, &t, &parse_target_term("fix u. u").unwrap(), DEFAULT_BUDGET);
        assert_eq!(v, ElabVerdict::Holds(vec![Top]));
        let v = elab_verdict(&e, &t, &parse_target_term("thunk ()").unwrap(), DEFAULT_BUDGET);
        assert_eq!(v, ElabVerdict::Fails);
    }

    #[test]
    fn projection_of_instances_after_a_step() {
        // The identity used at V, before and after the projection step.
        let e = parse_econ_expr("(\\x. x) ()").unwrap().erase();
        let before = parse_target_term("(\\x. x, \\x. force x).1 ()").unwrap();
        let after = parse_target_term("(\\x. x) ()").unwrap();
        assert!(check_elab(&e, &EconType::Unit, &before));
        assert!(check_elab(&e, &EconType::Unit, &after));
        // Used at N the argument is thunked.
        let n = parse_target_term("(\\x. x, \\x. force x).2 (thunk ())").unwrap();
        assert!(check_elab(&e, &EconType::Unit, &n));
        // The instances must come from one polymorphic type.
        let bad = parse_target_term("(\\x. x, \\x. ()).1 ()").unwrap();
        assert!(!check_elab(&e, &EconType::Unit, &bad));
    }

    #[test]
    fn agrees_with_elaboration() {
        let cases = [
            ("((/\\'a. \\x. x : forall 'a. 'a -> 'a) [1]) ()", "1"),
            ("(\\f. f () : susp[V] (susp[V] 1 -> 1) -> 1) (\\y. y)", "1"),
            ("case (inj1 () : 1 + 1) { inj1 a -> a | inj2 b -> () }", "1"),
            ("(((), ()) : susp[V] 1 * susp[N] 1).2", "susp[N] 1"),
            ("(() : susp[N] 1)", "1"),
            ("((\\x. x : all %a. susp[%a] 1 -> 1) {N}) ()", "1"),
        ];
        for (src, s) in cases {
            let e = parse_econ_expr(src).unwrap();
            let s = parse_econ_type(s).unwrap();
            for (_, r) in elaborate_closed(&e, &s).unwrap() {
                assert!(check_elab(&e.erase(), &s, &r.term), "{src} at {s} to {}", r.term);
            }
        }
    }
}
