//! The explicit call-by-value target language: terms, the value/valuable
//! classification, and the deterministic small-step evaluator.

use std::collections::BTreeSet;
use std::rc::Rc;

use serde::Serialize;

use crate::expr::Side;
use crate::machine::{Evaluable, Machine, MachineStep, Shape};
use crate::names::{fresh_avoiding, AlphaEnv, Name};

#[derive(Clone, Debug)]
pub enum TargetTerm {
    Unit,
    Var(Name),
    FixVar(Name),
    Lam(Name, Rc<TargetTerm>),
    App(Rc<TargetTerm>, Rc<TargetTerm>),
    Fix(Name, Rc<TargetTerm>),
    TyLam(Rc<TargetTerm>),
    TyApp(Rc<TargetTerm>),
    Thunk(Rc<TargetTerm>),
    Force(Rc<TargetTerm>),
    Pair(Rc<TargetTerm>, Rc<TargetTerm>),
    Proj(Side, Rc<TargetTerm>),
    Inj(Side, Rc<TargetTerm>),
    Case(Rc<TargetTerm>, Name, Rc<TargetTerm>, Name, Rc<TargetTerm>),
    Roll(Rc<TargetTerm>),
    Unroll(Rc<TargetTerm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "value")]
    Value,
    #[serde(rename = "valuable")]
    Valuable,
    #[serde(rename = "neither")]
    Neither,
}

/// Name of the reduction that fired in a target step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reduction {
    Beta,
    Force,
    Fix,
    TyApp,
    Proj,
    Case,
    Unroll,
}

#[derive(Clone, Debug)]
pub enum StepResult {
    Stepped(TargetTerm, Reduction),
    Value,
    Stuck,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(TargetTerm),
    OutOfFuel(TargetTerm),
    Stuck(TargetTerm),
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub outcome: Outcome,
    pub steps: usize,
    /// Every intermediate term, starting with the input, when tracing.
    pub trace: Vec<(TargetTerm, Option<Reduction>)>,
}

use TargetTerm::*;

impl TargetTerm {
    pub fn var(x: &str) -> Self {
        Var(Name::from(x))
    }
    pub fn fixvar(u: &str) -> Self {
        FixVar(Name::from(u))
    }
    pub fn lam(x: &str, body: TargetTerm) -> Self {
        Lam(Name::from(x), Rc::new(body))
    }
    pub fn app(f: TargetTerm, a: TargetTerm) -> Self {
        App(Rc::new(f), Rc::new(a))
    }
    pub fn fix(u: &str, body: TargetTerm) -> Self {
        Fix(Name::from(u), Rc::new(body))
    }
    pub fn tylam(body: TargetTerm) -> Self {
        TyLam(Rc::new(body))
    }
    pub fn tyapp(m: TargetTerm) -> Self {
        TyApp(Rc::new(m))
    }
    pub fn thunk(m: TargetTerm) -> Self {
        Thunk(Rc::new(m))
    }
    pub fn force(m: TargetTerm) -> Self {
        Force(Rc::new(m))
    }
    pub fn pair(a: TargetTerm, b: TargetTerm) -> Self {
        Pair(Rc::new(a), Rc::new(b))
    }
    pub fn proj(k: Side, m: TargetTerm) -> Self {
        Proj(k, Rc::new(m))
    }
    pub fn inj(k: Side, m: TargetTerm) -> Self {
        Inj(k, Rc::new(m))
    }
    pub fn case(m: TargetTerm, x1: &str, m1: TargetTerm, x2: &str, m2: TargetTerm) -> Self {
        Case(Rc::new(m), Name::from(x1), Rc::new(m1), Name::from(x2), Rc::new(m2))
    }
    pub fn roll(m: TargetTerm) -> Self {
        Roll(Rc::new(m))
    }
    pub fn unroll(m: TargetTerm) -> Self {
        Unroll(Rc::new(m))
    }

    pub fn size(&self) -> usize {
        match self {
            Unit | Var(_) | FixVar(_) => 1,
            Lam(_, b) | Fix(_, b) | TyLam(b) | TyApp(b) | Thunk(b) | Force(b) | Proj(_, b) | Inj(_, b) | Roll(b)
            | Unroll(b) => 1 + b.size(),
            App(a, b) | Pair(a, b) => 1 + a.size() + b.size(),
            Case(s, _, a, _, b) => 1 + s.size() + a.size() + b.size(),
        }
    }

    pub fn is_value(&self) -> bool {
        match self {
            Unit | Var(_) | Lam(..) | TyLam(_) | Thunk(_) => true,
            Pair(a, b) => a.is_value() && b.is_value(),
            Inj(_, m) | Roll(m) => m.is_value(),
            _ => false,
        }
    }

    pub fn is_valuable(&self) -> bool {
        match self {
            Unit | Var(_) | Lam(..) | Thunk(_) => true,
            TyLam(m) | TyApp(m) | Proj(_, m) | Inj(_, m) | Roll(m) | Unroll(m) => m.is_valuable(),
            Pair(a, b) => a.is_valuable() && b.is_valuable(),
            _ => false,
        }
    }

    /// Whether the term mentions `thunk` or `force` anywhere.
    pub fn has_thunk_or_force(&self) -> bool {
        match self {
            Thunk(_) | Force(_) => true,
            Unit | Var(_) | FixVar(_) => false,
            Lam(_, b) | Fix(_, b) | TyLam(b) | TyApp(b) | Proj(_, b) | Inj(_, b) | Roll(b) | Unroll(b) => {
                b.has_thunk_or_force()
            }
            App(a, b) | Pair(a, b) => a.has_thunk_or_force() || b.has_thunk_or_force(),
            Case(s, _, a, _, b) => s.has_thunk_or_force() || a.has_thunk_or_force() || b.has_thunk_or_force(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        fn go(t: &TargetTerm, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
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
                Fix(_, b) | TyLam(b) | TyApp(b) | Thunk(b) | Force(b) | Proj(_, b) | Inj(_, b) | Roll(b) | Unroll(b) => {
                    go(b, out, bound)
                }
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
        let mut out = BTreeSet::new();
        go(self, &mut out, &mut Vec::new());
        out
    }

    pub fn free_fixvars(&self) -> BTreeSet<Name> {
        fn go(t: &TargetTerm, out: &mut BTreeSet<Name>, bound: &mut Vec<Name>) {
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
                Lam(_, b) | TyLam(b) | TyApp(b) | Thunk(b) | Force(b) | Proj(_, b) | Inj(_, b) | Roll(b) | Unroll(b) => {
                    go(b, out, bound)
                }
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
        let mut out = BTreeSet::new();
        go(self, &mut out, &mut Vec::new());
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty() && self.free_fixvars().is_empty()
    }

    fn names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Unit => {}
            Var(x) | FixVar(x) => {
                out.insert(x.clone());
            }
            Lam(x, b) | Fix(x, b) => {
                out.insert(x.clone());
                b.names(out);
            }
            TyLam(b) | TyApp(b) | Thunk(b) | Force(b) | Proj(_, b) | Inj(_, b) | Roll(b) | Unroll(b) => b.names(out),
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

    /// Rebuild a node with the same shape over new children.
    fn map_children(&self, f: &mut dyn FnMut(&Rc<TargetTerm>) -> Rc<TargetTerm>) -> TargetTerm {
        match self {
            Unit | Var(_) | FixVar(_) => self.clone(),
            Lam(x, b) => Lam(x.clone(), f(b)),
            Fix(u, b) => Fix(u.clone(), f(b)),
            TyLam(b) => TyLam(f(b)),
            TyApp(b) => TyApp(f(b)),
            Thunk(b) => Thunk(f(b)),
            Force(b) => Force(f(b)),
            Proj(k, b) => Proj(*k, f(b)),
            Inj(k, b) => Inj(*k, f(b)),
            Roll(b) => Roll(f(b)),
            Unroll(b) => Unroll(f(b)),
            App(a, b) => App(f(a), f(b)),
            Pair(a, b) => Pair(f(a), f(b)),
            Case(s, x1, a, x2, b) => Case(f(s), x1.clone(), f(a), x2.clone(), f(b)),
        }
    }

    /// Capture-avoiding `[replacement/x]self`.
    pub fn subst_var(&self, replacement: &TargetTerm, x: &str) -> TargetTerm {
        let fv = replacement.free_vars();
        self.subst_var_with(replacement, x, &fv)
    }

    fn subst_var_with(&self, rep: &TargetTerm, x: &str, fv: &BTreeSet<Name>) -> TargetTerm {
        let binder = |y: &Name, body: &Rc<TargetTerm>| -> (Name, Rc<TargetTerm>) {
            if &**y == x {
                (y.clone(), body.clone())
            } else if fv.contains(y) {
                let mut avoid = fv.clone();
                body.names(&mut avoid);
                avoid.insert(Name::from(x));
                let fresh = fresh_avoiding(y, &avoid);
                let renamed = body.subst_var(&Var(fresh.clone()), y);
                (fresh, Rc::new(renamed.subst_var_with(rep, x, fv)))
            } else {
                (y.clone(), Rc::new(body.subst_var_with(rep, x, fv)))
            }
        };
        match self {
            Var(y) if &**y == x => rep.clone(),
            Lam(y, b) => {
                let (y2, b2) = binder(y, b);
                Lam(y2, b2)
            }
            Case(s, x1, a, x2, b) => {
                let (y1, a2) = binder(x1, a);
                let (y2, b2) = binder(x2, b);
                Case(Rc::new(s.subst_var_with(rep, x, fv)), y1, a2, y2, b2)
            }
            _ => self.map_children(&mut |c| Rc::new(c.subst_var_with(rep, x, fv))),
        }
    }

    /// Capture-avoiding `[replacement/u]self`.
    pub fn subst_fixvar(&self, replacement: &TargetTerm, u: &str) -> TargetTerm {
        let fv = replacement.free_vars();
        let fu = replacement.free_fixvars();
        self.subst_fixvar_with(replacement, u, &fv, &fu)
    }

    fn subst_fixvar_with(&self, rep: &TargetTerm, u: &str, fv: &BTreeSet<Name>, fu: &BTreeSet<Name>) -> TargetTerm {
        let xbinder = |y: &Name, body: &Rc<TargetTerm>| -> (Name, Rc<TargetTerm>) {
            if fv.contains(y) {
                let mut avoid = fv.clone();
                body.names(&mut avoid);
                let fresh = fresh_avoiding(y, &avoid);
                let renamed = body.subst_var(&Var(fresh.clone()), y);
                (fresh, Rc::new(renamed.subst_fixvar_with(rep, u, fv, fu)))
            } else {
                (y.clone(), Rc::new(body.subst_fixvar_with(rep, u, fv, fu)))
            }
        };
        match self {
            FixVar(v) if &**v == u => rep.clone(),
            Fix(v, b) => {
                if &**v == u {
                    self.clone()
                } else if fu.contains(v) {
                    let mut avoid = fu.clone();
                    b.names(&mut avoid);
                    avoid.insert(Name::from(u));
                    let fresh = fresh_avoiding(v, &avoid);
                    let b2 = b.subst_fixvar(&FixVar(fresh.clone()), v);
                    Fix(fresh, Rc::new(b2.subst_fixvar_with(rep, u, fv, fu)))
                } else {
                    Fix(v.clone(), Rc::new(b.subst_fixvar_with(rep, u, fv, fu)))
                }
            }
            Lam(y, b) => {
                let (y2, b2) = xbinder(y, b);
                Lam(y2, b2)
            }
            Case(s, x1, a, x2, b) => {
                let (y1, a2) = xbinder(x1, a);
                let (y2, b2) = xbinder(x2, b);
                Case(Rc::new(s.subst_fixvar_with(rep, u, fv, fu)), y1, a2, y2, b2)
            }
            _ => self.map_children(&mut |c| Rc::new(c.subst_fixvar_with(rep, u, fv, fu))),
        }
    }

    pub fn alpha_eq(&self, other: &TargetTerm) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::default(), &mut AlphaEnv::default())
    }

    fn alpha_eq_in(&self, other: &TargetTerm, xs: &mut AlphaEnv, us: &mut AlphaEnv) -> bool {
        match (self, other) {
            (Unit, Unit) => true,
            (Var(a), Var(b)) => xs.vars_match(a, b),
            (FixVar(a), FixVar(b)) => us.vars_match(a, b),
            (Lam(a, x), Lam(b, y)) => xs.scoped(a, b, |xs| x.alpha_eq_in(y, xs, us)),
            (Fix(a, x), Fix(b, y)) => us.scoped(a, b, |us| x.alpha_eq_in(y, xs, us)),
            (TyLam(x), TyLam(y))
            | (TyApp(x), TyApp(y))
            | (Thunk(x), Thunk(y))
            | (Force(x), Force(y))
            | (Roll(x), Roll(y))
            | (Unroll(x), Unroll(y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && x.alpha_eq_in(y, xs, us)
            }
            (Proj(k1, x), Proj(k2, y)) | (Inj(k1, x), Inj(k2, y)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other) && k1 == k2 && x.alpha_eq_in(y, xs, us)
            }
            (App(a1, b1), App(a2, b2)) | (Pair(a1, b1), Pair(a2, b2)) => {
                std::mem::discriminant(self) == std::mem::discriminant(other)
                    && a1.alpha_eq_in(a2, xs, us)
                    && b1.alpha_eq_in(b2, xs, us)
            }
            (Case(s1, a1, l1, b1, r1), Case(s2, a2, l2, b2, r2)) => {
                s1.alpha_eq_in(s2, xs, us)
                    && xs.scoped(a1, a2, |xs| l1.alpha_eq_in(l2, xs, us))
                    && xs.scoped(b1, b2, |xs| r1.alpha_eq_in(r2, xs, us))
            }
            _ => false,
        }
    }
}

impl PartialEq for TargetTerm {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for TargetTerm {}

pub fn classify(m: &TargetTerm) -> Classification {
    if m.is_value() {
        Classification::Value
    } else if m.is_valuable() {
        Classification::Valuable
    } else {
        Classification::Neither
    }
}

/// Contract a redex at the root, if the root is one.
pub fn reduce(m: &TargetTerm) -> Option<(TargetTerm, Reduction)> {
    match m {
        App(f, a) => match &**f {
            Lam(x, body) if a.is_value() => Some((body.subst_var(a, x), Reduction::Beta)),
            _ => None,
        },
        Force(t) => match &**t {
            Thunk(body) => Some(((**body).clone(), Reduction::Force)),
            _ => None,
        },
        Fix(u, body) => Some((body.subst_fixvar(m, u), Reduction::Fix)),
        TyApp(t) => match &**t {
            TyLam(body) => Some(((**body).clone(), Reduction::TyApp)),
            _ => None,
        },
        Proj(k, p) => match &**p {
            Pair(a, b) if a.is_value() && b.is_value() => Some(((**k.pick(a, b)).clone(), Reduction::Proj)),
            _ => None,
        },
        Case(s, x1, m1, x2, m2) => match &**s {
            Inj(k, w) if w.is_value() => {
                let (x, body) = match k {
                    Side::Left => (x1, m1),
                    Side::Right => (x2, m2),
                };
                Some((body.subst_var(w, x), Reduction::Case))
            }
            _ => None,
        },
        Unroll(r) => match &**r {
            Roll(w) if w.is_value() => Some(((**w).clone(), Reduction::Unroll)),
            _ => None,
        },
        _ => None,
    }
}

/// Location of the redex inside an evaluation context, as a path of child
/// indices from the root.
pub fn decompose(m: &TargetTerm) -> Option<Vec<usize>> {
    let mut path = Vec::new();
    (locate(m, &mut path) == Located::Redex).then_some(path)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Located {
    Value,
    Stuck,
    /// The path so far leads to it.
    Redex,
}

/// One pass over the evaluation context: is `m` a value, stuck, or does it
/// contain a redex (whose path is then left in `path`)?
fn locate(m: &TargetTerm, path: &mut Vec<usize>) -> Located {
    use Located::*;
    let sub = |i: usize, c: &TargetTerm, path: &mut Vec<usize>| {
        path.push(i);
        let r = locate(c, path);
        if r != Redex {
            path.pop();
        }
        r
    };
    let redex_if = |b: bool| if b { Redex } else { Stuck };
    match m {
        Unit | Var(_) | Lam(..) | TyLam(_) | Thunk(_) => Value,
        FixVar(_) => Stuck,
        Fix(..) => Redex,
        App(f, a) | Pair(f, a) => match sub(0, f, path) {
            Value => match sub(1, a, path) {
                Value => match m {
                    App(..) => redex_if(matches!(&**f, Lam(..))),
                    _ => Value,
                },
                r => r,
            },
            r => r,
        },
        Inj(_, c) | Roll(c) => sub(0, c, path),
        TyApp(c) | Force(c) | Proj(_, c) | Unroll(c) | Case(c, ..) => match sub(0, c, path) {
            Value => redex_if(matches!(
                (m, &**c),
                (TyApp(_), TyLam(_)) | (Force(_), Thunk(_)) | (Proj(..), Pair(..)) | (Unroll(_), Roll(_)) | (Case(..), Inj(..))
            )),
            r => r,
        },
    }
}

fn child(m: &TargetTerm, i: usize) -> &TargetTerm {
    match (m, i) {
        (App(a, _), 0) | (Pair(a, _), 0) => a,
        (App(_, b), 1) | (Pair(_, b), 1) => b,
        (TyApp(c), 0) | (Force(c), 0) | (Proj(_, c), 0) | (Inj(_, c), 0) | (Roll(c), 0) | (Unroll(c), 0) => c,
        (Case(s, ..), 0) => s,
        _ => unreachable!("path does not address a child"),
    }
}

/// The subterm at `path`.
pub fn at_path<'a>(m: &'a TargetTerm, path: &[usize]) -> &'a TargetTerm {
    path.iter().fold(m, |t, &i| child(t, i))
}

/// Replace the subterm at `path`.
pub fn plug(m: &TargetTerm, path: &[usize], new: TargetTerm) -> TargetTerm {
    let Some((&i, rest)) = path.split_first() else {
        return new;
    };
    let replaced = Rc::new(plug(child(m, i), rest, new));
    match (m, i) {
        (App(_, b), 0) => App(replaced, b.clone()),
        (App(a, _), 1) => App(a.clone(), replaced),
        (Pair(_, b), 0) => Pair(replaced, b.clone()),
        (Pair(a, _), 1) => Pair(a.clone(), replaced),
        (TyApp(_), 0) => TyApp(replaced),
        (Force(_), 0) => Force(replaced),
        (Proj(k, _), 0) => Proj(*k, replaced),
        (Inj(k, _), 0) => Inj(*k, replaced),
        (Roll(_), 0) => Roll(replaced),
        (Unroll(_), 0) => Unroll(replaced),
        (Case(_, x1, m1, x2, m2), 0) => Case(replaced, x1.clone(), m1.clone(), x2.clone(), m2.clone()),
        _ => unreachable!("path does not address a child"),
    }
}

impl Evaluable for TargetTerm {
    fn shape(&self) -> Shape {
        match self {
            Unit | Var(_) | Lam(..) | TyLam(_) | Thunk(_) => Shape::Value,
            FixVar(_) => Shape::Stuck,
            Fix(..) => Shape::Redex,
            App(..) | Pair(..) => Shape::Eval(2),
            TyApp(_) | Force(_) | Proj(..) | Inj(..) | Roll(_) | Unroll(_) | Case(..) => Shape::Eval(1),
        }
    }

    fn settled(&self) -> Shape {
        let redex_if = |b: bool| if b { Shape::Redex } else { Shape::Stuck };
        match self {
            Pair(..) | Inj(..) | Roll(_) => Shape::Value,
            App(f, _) => redex_if(matches!(&**f, Lam(..))),
            TyApp(c) => redex_if(matches!(&**c, TyLam(_))),
            Force(c) => redex_if(matches!(&**c, Thunk(_))),
            Proj(_, c) => redex_if(matches!(&**c, Pair(..))),
            Unroll(c) => redex_if(matches!(&**c, Roll(_))),
            Case(c, ..) => redex_if(matches!(&**c, Inj(..))),
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
        self.alpha_eq(other)
    }
}

pub fn step(m: &TargetTerm) -> StepResult {
    let mut path = Vec::new();
    match locate(m, &mut path) {
        Located::Value => StepResult::Value,
        Located::Stuck => StepResult::Stuck,
        Located::Redex => {
            let (reduct, rule) = reduce(at_path(m, &path)).expect("decomposition ends at a redex");
            StepResult::Stepped(plug(m, &path, reduct), rule)
        }
    }
}

pub fn evaluate(m: &TargetTerm, fuel: usize, trace: bool) -> Evaluation {
    let mut machine = Machine::new(m.clone());
    let mut log = Vec::new();
    if trace {
        log.push((m.clone(), None));
    }
    for steps in 0..fuel {
        match machine.step() {
            MachineStep::Value => {
                return Evaluation { outcome: Outcome::Value(machine.term()), steps, trace: log };
            }
            MachineStep::Stuck => {
                return Evaluation { outcome: Outcome::Stuck(machine.term()), steps, trace: log };
            }
            MachineStep::Stepped { rule, .. } => {
                if trace {
                    log.push((machine.term(), Some(rule)));
                }
            }
        }
    }
    let current = machine.term();
    let outcome = if current.is_value() { Outcome::Value(current) } else { Outcome::OutOfFuel(current) };
    Evaluation { outcome, steps: fuel, trace: log }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id() -> TargetTerm {
        TargetTerm::lam("x", TargetTerm::var("x"))
    }

    fn omega_fix() -> TargetTerm {
        TargetTerm::fix("u", TargetTerm::fixvar("u"))
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&TargetTerm::thunk(omega_fix())), Classification::Value);
        assert_eq!(
            classify(&TargetTerm::proj(Side::Left, TargetTerm::pair(TargetTerm::Unit, TargetTerm::Unit))),
            Classification::Valuable
        );
        assert_eq!(classify(&TargetTerm::app(id(), TargetTerm::Unit)), Classification::Neither);
    }

    #[test]
    fn step_examples() {
        match step(&TargetTerm::app(id(), TargetTerm::Unit)) {
            StepResult::Stepped(m, Reduction::Beta) => assert_eq!(m, TargetTerm::Unit),
            other => panic!("{other:?}"),
        }
        match step(&TargetTerm::force(TargetTerm::thunk(omega_fix()))) {
            StepResult::Stepped(m, Reduction::Force) => assert_eq!(m, omega_fix()),
            other => panic!("{other:?}"),
        }
        let p = TargetTerm::proj(Side::Right, TargetTerm::pair(TargetTerm::Unit, TargetTerm::thunk(TargetTerm::Unit)));
        match step(&p) {
            StepResult::Stepped(m, Reduction::Proj) => assert_eq!(m, TargetTerm::thunk(TargetTerm::Unit)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn evaluate_examples() {
        assert!(matches!(evaluate(&TargetTerm::app(id(), TargetTerm::Unit), 10, false).outcome, Outcome::Value(TargetTerm::Unit)));
        assert!(matches!(evaluate(&omega_fix(), 5, false).outcome, Outcome::OutOfFuel(_)));
        assert!(matches!(evaluate(&TargetTerm::force(TargetTerm::Unit), 10, false).outcome, Outcome::Stuck(_)));
    }

    #[test]
    fn arguments_are_evaluated_first() {
        // (\x. ()) ((\y. y) ()) reduces the argument before the outer redex.
        let m = TargetTerm::app(TargetTerm::lam("x", TargetTerm::Unit), TargetTerm::app(id(), TargetTerm::Unit));
        assert_eq!(decompose(&m), Some(vec![1]));
    }

    #[test]
    fn trace_records_every_term() {
        let ev = evaluate(&TargetTerm::app(id(), TargetTerm::Unit), 10, true);
        assert_eq!(ev.trace.len(), 2);
        assert_eq!(ev.trace[1].1, Some(Reduction::Beta));
    }
}
