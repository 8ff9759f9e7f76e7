//! Exhaustive enumeration of small well-typed impartial programs.
//!
//! The enumerated language is the closed expressions whose annotations sit
//! only on introduction forms and `case`, with type annotations drawn from a
//! fixed menu. Candidates are produced by following the checker's rules
//! backwards, then confirmed by the checker itself. Binders are named by
//! their depth, so alpha-equivalent programs come out identical.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::context::ImpCtx;
use crate::derivation::Direction;
use crate::expr::{Expr, ImpExpr, Side};
use crate::impartial::{check, synth, UNROLL_LIMIT};
use crate::names::{fresh_avoiding, Name};
use crate::types::{Connective, EvalOrder, ImpartialType, Valueness};

/// One enumerated judgment `· ⊢ e ⇐ τ` or `· ⊢ e ⇒ τ`.
#[derive(Clone, Debug)]
pub struct Enumerated {
    pub expr: ImpExpr,
    pub ty: ImpartialType,
    pub dir: Direction,
    pub valuenesses: Vec<Valueness>,
}

/// `1`, and `1 →ε 1`, `1 *ε 1`, `1 +ε 1`, `μεα. 1 +ε α` for both orders,
/// and `Д𝔞. 1 →𝔞 1`.
pub fn type_menu() -> Vec<ImpartialType> {
    use ImpartialType as T;
    let mut menu = vec![T::Unit];
    for e in [EvalOrder::V, EvalOrder::N] {
        menu.push(T::arrow(T::Unit, T::Unit, e.clone()));
        menu.push(T::prod(T::Unit, T::Unit, e.clone()));
        menu.push(T::sum(T::Unit, T::Unit, e.clone()));
        menu.push(T::rec("r", T::sum(T::Unit, T::tyvar("r"), e.clone()), e));
    }
    menu.push(T::all_eo("a", T::arrow(T::Unit, T::Unit, EvalOrder::Var(Name::from("a")))));
    menu
}

/// Every well-typed judgment over the menu with at most `bound` nodes, in
/// order of size.
pub fn enumerate_welltyped(bound: usize, menu: &[ImpartialType]) -> Vec<Enumerated> {
    let gen = Generator { menu, check_memo: RefCell::default(), synth_memo: RefCell::default() };
    let empty = Scope::default();
    let ctx = ImpCtx::empty();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for n in 1..=bound {
        for ty in menu {
            for e in gen.check(&empty, ty, n).iter() {
                if let Ok(r) = check(&ctx, e, ty) {
                    if seen.insert((e.to_string(), ty.to_string(), Direction::Check)) {
                        out.push(Enumerated { expr: e.clone(), ty: ty.clone(), dir: Direction::Check, valuenesses: r.found.valuenesses() });
                    }
                }
            }
        }
        for (e, _) in gen.synth(&empty, n).iter() {
            if let Ok(r) = synth(&ctx, e) {
                if seen.insert((e.to_string(), r.ty.to_string(), Direction::Synth)) {
                    out.push(Enumerated { expr: e.clone(), ty: r.ty.clone(), dir: Direction::Synth, valuenesses: r.found.valuenesses() });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
struct Scope {
    /// Term variables, innermost last: name, whether it is a fixed-point
    /// variable, type.
    vars: Vec<(Name, bool, ImpartialType)>,
    eovars: Vec<Name>,
}

impl Scope {
    fn key(&self) -> String {
        let mut s = String::new();
        for (x, fix, t) in &self.vars {
            s.push_str(&format!("{}{x}:{t};", if *fix { "u" } else { "" }));
        }
        for a in &self.eovars {
            s.push_str(&format!("%{a};"));
        }
        s
    }

    fn next_name(&self, fix: bool) -> Name {
        Name::from(format!("{}{}", if fix { "u" } else { "x" }, self.vars.len()).as_str())
    }

    fn bind(&self, x: Name, fix: bool, t: ImpartialType) -> Scope {
        let mut s = self.clone();
        s.vars.push((x, fix, t));
        s
    }

    fn orders(&self) -> Vec<EvalOrder> {
        let mut out = vec![EvalOrder::V, EvalOrder::N];
        out.extend(self.eovars.iter().map(|a| EvalOrder::Var(a.clone())));
        out
    }
}

type Exprs = Rc<Vec<ImpExpr>>;
type Typed = Rc<Vec<(ImpExpr, ImpartialType)>>;

struct Generator<'m> {
    menu: &'m [ImpartialType],
    check_memo: RefCell<HashMap<(String, String, usize), Exprs>>,
    synth_memo: RefCell<HashMap<(String, usize), Typed>>,
}

fn is_intro(e: &ImpExpr) -> bool {
    matches!(e, Expr::Unit | Expr::Lam(..) | Expr::Fix(..) | Expr::Pair(..) | Expr::Inj(..) | Expr::Case(..))
}

/// Unroll until the head is `want`, as the checker's elimination rules do.
fn expose(t: &ImpartialType, want: Connective) -> Option<ImpartialType> {
    let mut t = t.clone();
    for _ in 0..=UNROLL_LIMIT {
        if t.head() == Some(want) {
            return Some(t);
        }
        t = t.unfold()?;
    }
    None
}

fn subsumes(got: &ImpartialType, want: &ImpartialType) -> bool {
    let mut t = got.clone();
    for _ in 0..=UNROLL_LIMIT {
        if t.alpha_eq(want) {
            return true;
        }
        match t.unfold() {
            Some(u) => t = u,
            None => return false,
        }
    }
    false
}

/// Sizes `(a, b)` with `a + b = n` and both at least one.
fn splits(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..n).map(move |a| (a, n - a))
}

impl Generator<'_> {
    fn check(&self, scope: &Scope, ty: &ImpartialType, n: usize) -> Exprs {
        let key = (scope.key(), ty.to_string(), n);
        if let Some(hit) = self.check_memo.borrow().get(&key) {
            return hit.clone();
        }
        let out = Rc::new(self.check_uncached(scope, ty, n));
        self.check_memo.borrow_mut().insert(key, out.clone());
        out
    }

    fn check_uncached(&self, scope: &Scope, ty: &ImpartialType, n: usize) -> Vec<ImpExpr> {
        use ImpartialType as T;
        let mut out = Vec::new();
        let mut by_type = false;
        match ty {
            T::AllEo(a, body) => {
                by_type = true;
                let (a2, body2) = if scope.eovars.contains(a) {
                    let mut avoid: BTreeSet<Name> = scope.eovars.iter().cloned().collect();
                    avoid.extend(body.free_eovars());
                    let b = fresh_avoiding(a, &avoid);
                    (b.clone(), body.subst_eo(&EvalOrder::Var(b), a))
                } else {
                    (a.clone(), (**body).clone())
                };
                let mut inner = scope.clone();
                inner.eovars.push(a2);
                out.extend(self.check(&inner, &body2, n).iter().cloned());
            }
            T::Rec(..) => {
                by_type = true;
                let unfolded = ty.unfold().expect("rec");
                out.extend(self.check(scope, &unfolded, n).iter().filter(|e| !matches!(e, Expr::Fix(..) | Expr::Case(..))).cloned());
            }
            _ => {}
        }
        if n == 1 && matches!(ty, T::Unit) {
            out.push(Expr::Unit);
        }
        if n >= 2 {
            match ty {
                T::Arrow(dom, cod, _) => {
                    let x = scope.next_name(false);
                    let inner = scope.bind(x.clone(), false, (**dom).clone());
                    for b in self.check(&inner, cod, n - 1).iter() {
                        out.push(Expr::Lam(x.clone(), Rc::new(b.clone())));
                    }
                }
                T::Prod(l, r, _) => {
                    for (i, j) in splits(n - 1) {
                        let rs = self.check(scope, r, j);
                        for a in self.check(scope, l, i).iter() {
                            for b in rs.iter() {
                                out.push(Expr::pair(a.clone(), b.clone()));
                            }
                        }
                    }
                }
                T::Sum(l, r, _) => {
                    for (k, t) in [(Side::Left, l), (Side::Right, r)] {
                        for a in self.check(scope, t, n - 1).iter() {
                            out.push(Expr::inj(k, a.clone()));
                        }
                    }
                }
                _ => {}
            }
            let u = scope.next_name(true);
            let inner = scope.bind(u.clone(), true, ty.clone());
            for b in self.check(&inner, ty, n - 1).iter() {
                out.push(Expr::Fix(u.clone(), Rc::new(b.clone())));
            }
        }
        if n >= 4 {
            for s in 1..=n - 3 {
                for (scrut, sty) in self.synth(scope, s).iter() {
                    let Some(T::Sum(l, r, _)) = expose(sty, Connective::Sum) else { continue };
                    let x = scope.next_name(false);
                    let left = scope.bind(x.clone(), false, (*l).clone());
                    let right = scope.bind(x.clone(), false, (*r).clone());
                    for (i, j) in splits(n - 1 - s) {
                        let bs = self.check(&right, ty, j);
                        for a in self.check(&left, ty, i).iter() {
                            for b in bs.iter() {
                                out.push(Expr::Case(Rc::new(scrut.clone()), x.clone(), Rc::new(a.clone()), x.clone(), Rc::new(b.clone())));
                            }
                        }
                    }
                }
            }
        }
        for (e, got) in self.synth(scope, n).iter() {
            if subsumes(got, ty) {
                out.push(e.clone());
            }
        }
        if by_type {
            let mut seen = HashSet::new();
            out.retain(|e| seen.insert(e.to_string()));
        }
        out
    }

    fn synth(&self, scope: &Scope, n: usize) -> Typed {
        let key = (scope.key(), n);
        if let Some(hit) = self.synth_memo.borrow().get(&key) {
            return hit.clone();
        }
        let out = Rc::new(self.synth_uncached(scope, n));
        self.synth_memo.borrow_mut().insert(key, out.clone());
        out
    }

    fn synth_uncached(&self, scope: &Scope, n: usize) -> Vec<(ImpExpr, ImpartialType)> {
        use ImpartialType as T;
        let mut out = Vec::new();
        if n == 1 {
            // Only the innermost binding of each name is visible.
            let mut shadowed = HashSet::new();
            for (x, fix, t) in scope.vars.iter().rev() {
                if shadowed.insert((x.clone(), *fix)) {
                    out.push((if *fix { Expr::FixVar(x.clone()) } else { Expr::Var(x.clone()) }, t.clone()));
                }
            }
            return out;
        }
        for ty in self.menu {
            for e in self.check(scope, ty, n - 1).iter().filter(|e| is_intro(e)) {
                out.push((Expr::anno(e.clone(), ty.clone()), ty.clone()));
            }
        }
        for (e, t) in self.synth(scope, n - 1).iter() {
            if let Some(T::Prod(l, r, _)) = expose(t, Connective::Prod) {
                out.push((Expr::proj(Side::Left, e.clone()), (*l).clone()));
                out.push((Expr::proj(Side::Right, e.clone()), (*r).clone()));
            }
            if let Some(T::AllEo(a, body)) = expose(t, Connective::AllEo) {
                for order in scope.orders() {
                    out.push((Expr::eoapp(e.clone(), order.clone()), body.subst_eo(&order, &a)));
                }
            }
        }
        for (i, j) in splits(n - 1) {
            for (f, t) in self.synth(scope, i).iter() {
                let Some(T::Arrow(dom, cod, _)) = expose(t, Connective::Arrow) else { continue };
                for a in self.check(scope, &dom, j).iter() {
                    out.push((Expr::app(f.clone(), a.clone()), (*cod).clone()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::{parse_impartial_expr, parse_impartial_type};

    fn has(js: &[Enumerated], e: &str, t: &str, dir: Direction) -> bool {
        let (e, t) = (parse_impartial_expr(e).unwrap(), parse_impartial_type(t).unwrap());
        js.iter().any(|j| j.dir == dir && j.expr.alpha_eq(&e) && j.ty.alpha_eq(&t))
    }

    #[test]
    fn smallest_programs() {
        let js = enumerate_welltyped(1, &type_menu());
        assert_eq!(js.len(), 1);
        assert!(has(&js, "()", "1", Direction::Check));
        let js = enumerate_welltyped(3, &type_menu());
        assert!(has(&js, "\\x. x", "1 -[V]> 1", Direction::Check));
        assert!(has(&js, "\\x. x", "1 -[N]> 1", Direction::Check));
        let js = enumerate_welltyped(5, &type_menu());
        assert!(has(&js, "(\\x. x : 1 -[V]> 1) ()", "1", Direction::Synth));
        assert!(has(&js, "(\\x. x : 1 -[V]> 1) ()", "1", Direction::Check));
    }

    /// Every annotation-normal closed expression with at most `bound` nodes.
    fn brute_force(scope: &Scope, n: usize, menu: &[ImpartialType]) -> Vec<ImpExpr> {
        let mut out = Vec::new();
        if n == 1 {
            out.push(Expr::Unit);
            out.extend(synth_leaves(scope));
            return out;
        }
        let x = scope.next_name(false);
        let u = scope.next_name(true);
        let inner = scope.bind(x.clone(), false, ImpartialType::Unit);
        let fixed = scope.bind(u.clone(), true, ImpartialType::Unit);
        for b in brute_force(&inner, n - 1, menu) {
            out.push(Expr::Lam(x.clone(), Rc::new(b)));
        }
        for b in brute_force(&fixed, n - 1, menu) {
            out.push(Expr::Fix(u.clone(), Rc::new(b)));
        }
        for b in brute_force(scope, n - 1, menu) {
            for k in [Side::Left, Side::Right] {
                out.push(Expr::inj(k, b.clone()));
                out.push(Expr::proj(k, b.clone()));
            }
            // `%a` is bound when the whole program is checked against the
            // menu's quantifier.
            for o in [EvalOrder::V, EvalOrder::N, EvalOrder::Var(Name::from("a"))] {
                out.push(Expr::eoapp(b.clone(), o));
            }
            if is_intro(&b) {
                for t in menu {
                    out.push(Expr::anno(b.clone(), t.clone()));
                }
            }
        }
        for (i, j) in splits(n - 1) {
            let bs = brute_force(scope, j, menu);
            for a in brute_force(scope, i, menu) {
                for b in &bs {
                    out.push(Expr::app(a.clone(), b.clone()));
                    out.push(Expr::pair(a.clone(), b.clone()));
                }
            }
        }
        if n >= 4 {
            for s in 1..=n - 3 {
                for scrut in brute_force(scope, s, menu) {
                    for (i, j) in splits(n - 1 - s) {
                        let bs = brute_force(&inner, j, menu);
                        for a in brute_force(&inner, i, menu) {
                            for b in &bs {
                                out.push(Expr::Case(Rc::new(scrut.clone()), x.clone(), Rc::new(a.clone()), x.clone(), Rc::new(b.clone())));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn synth_leaves(scope: &Scope) -> Vec<ImpExpr> {
        let mut seen = HashSet::new();
        scope
            .vars
            .iter()
            .rev()
            .filter(|(x, fix, _)| seen.insert((x.clone(), *fix)))
            .map(|(x, fix, _)| if *fix { Expr::FixVar(x.clone()) } else { Expr::Var(x.clone()) })
            .collect()
    }

    #[test]
    fn agrees_with_brute_force() {
        let menu = type_menu();
        let bound = 5;
        let ctx = ImpCtx::empty();
        let mut expected = BTreeSet::new();
        for n in 1..=bound {
            for e in brute_force(&Scope::default(), n, &menu) {
                for t in &menu {
                    if check(&ctx, &e, t).is_ok() {
                        expected.insert((e.to_string(), t.to_string(), "check"));
                    }
                }
                if let Ok(r) = synth(&ctx, &e) {
                    expected.insert((e.to_string(), r.ty.to_string(), "synth"));
                }
            }
        }
        let got: BTreeSet<_> = enumerate_welltyped(bound, &menu)
            .into_iter()
            .map(|j| (j.expr.to_string(), j.ty.to_string(), if j.dir == Direction::Check { "check" } else { "synth" }))
            .collect();
        let missing: Vec<_> = expected.difference(&got).collect();
        let extra: Vec<_> = got.difference(&expected).collect();
        assert!(missing.is_empty() && extra.is_empty(), "missing {missing:?}\nextra {extra:?}");
    }
}
