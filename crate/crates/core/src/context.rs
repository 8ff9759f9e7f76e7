//! Typing contexts as persistent lists (cheap to extend and share between
//! derivation nodes). Lookups find the most recent declaration.

use std::fmt;
use std::rc::Rc;

use crate::names::Name;
use crate::types::{EconType, EvalOrder, ImpartialType, TargetType, Valueness};

#[derive(Clone, Debug)]
pub enum Decl<X, U> {
    Var(Name, X),
    FixVar(Name, U),
    EoVar(Name),
    TyVar(Name),
}

impl<X, U> Decl<X, U> {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Var(n, _) | Decl::FixVar(n, _) | Decl::EoVar(n) | Decl::TyVar(n) => n,
        }
    }

    fn namespace(&self) -> u8 {
        match self {
            Decl::Var(..) => 0,
            Decl::FixVar(..) => 1,
            Decl::EoVar(_) => 2,
            Decl::TyVar(_) => 3,
        }
    }
}

struct Node<X, U> {
    decl: Decl<X, U>,
    rest: Ctx<X, U>,
}

pub struct Ctx<X, U>(Option<Rc<Node<X, U>>>);

impl<X, U> Clone for Ctx<X, U> {
    fn clone(&self) -> Self {
        Ctx(self.0.clone())
    }
}

impl<X: fmt::Debug, U: fmt::Debug> fmt::Debug for Ctx<X, U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.decls()).finish()
    }
}

impl<X, U> Default for Ctx<X, U> {
    fn default() -> Self {
        Ctx(None)
    }
}

/// `x :^φ τ`, `u :^⊤ τ`, `𝔞 evalorder`, `α type`.
pub type ImpCtx = Ctx<(Valueness, ImpartialType), ImpartialType>;
pub type EconCtx = Ctx<EconType, EconType>;
/// Target contexts never contain evaluation-order declarations.
pub type TargetCtx = Ctx<TargetType, TargetType>;

impl<X, U> Ctx<X, U> {
    pub fn empty() -> Self {
        Ctx(None)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn extend(&self, decl: Decl<X, U>) -> Self {
        Ctx(Some(Rc::new(Node { decl, rest: self.clone() })))
    }

    pub fn with_var(&self, x: Name, payload: X) -> Self {
        self.extend(Decl::Var(x, payload))
    }

    pub fn with_fixvar(&self, u: Name, ty: U) -> Self {
        self.extend(Decl::FixVar(u, ty))
    }

    pub fn with_eovar(&self, a: Name) -> Self {
        self.extend(Decl::EoVar(a))
    }

    pub fn with_tyvar(&self, a: Name) -> Self {
        self.extend(Decl::TyVar(a))
    }

    /// Most recent first.
    pub fn iter(&self) -> CtxIter<'_, X, U> {
        CtxIter { cur: self.0.as_deref() }
    }

    /// Oldest first.
    pub fn decls(&self) -> Vec<&Decl<X, U>> {
        let mut v: Vec<_> = self.iter().collect();
        v.reverse();
        v
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn lookup_var(&self, x: &str) -> Option<&X> {
        self.iter().find_map(|d| match d {
            Decl::Var(n, p) if &**n == x => Some(p),
            _ => None,
        })
    }

    pub fn lookup_fixvar(&self, u: &str) -> Option<&U> {
        self.iter().find_map(|d| match d {
            Decl::FixVar(n, p) if &**n == u => Some(p),
            _ => None,
        })
    }

    pub fn has_eovar(&self, a: &str) -> bool {
        self.iter().any(|d| matches!(d, Decl::EoVar(n) if &**n == a))
    }

    pub fn has_tyvar(&self, a: &str) -> bool {
        self.iter().any(|d| matches!(d, Decl::TyVar(n) if &**n == a))
    }

    pub fn has_any_eovar(&self) -> bool {
        self.iter().any(|d| matches!(d, Decl::EoVar(_)))
    }

    /// Whether some identifier is declared twice in the same namespace.
    pub fn has_duplicates(&self) -> bool {
        let decls = self.decls();
        decls.iter().enumerate().any(|(i, d)| {
            decls[i + 1..].iter().any(|e| e.namespace() == d.namespace() && e.name() == d.name())
        })
    }

    pub fn tyvars(&self) -> Vec<Name> {
        self.iter()
            .filter_map(|d| match d {
                Decl::TyVar(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn eovars(&self) -> Vec<Name> {
        self.iter()
            .filter_map(|d| match d {
                Decl::EoVar(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    /// Rebuild the context with both payload kinds translated, oldest first;
    /// `None` from a callback aborts.
    pub fn try_map<Y, V, E>(
        &self,
        mut var: impl FnMut(&X) -> Result<Y, E>,
        mut fix: impl FnMut(&U) -> Result<V, E>,
        mut eovar: impl FnMut(&Name) -> Result<(), E>,
    ) -> Result<Ctx<Y, V>, E> {
        let mut out = Ctx::empty();
        for d in self.decls() {
            out = match d {
                Decl::Var(n, p) => out.with_var(n.clone(), var(p)?),
                Decl::FixVar(n, p) => out.with_fixvar(n.clone(), fix(p)?),
                Decl::EoVar(n) => {
                    eovar(n)?;
                    out.with_eovar(n.clone())
                }
                Decl::TyVar(n) => out.with_tyvar(n.clone()),
            };
        }
        Ok(out)
    }

    pub fn map<Y, V>(&self, mut var: impl FnMut(&X) -> Y, mut fix: impl FnMut(&U) -> V) -> Ctx<Y, V> {
        self.try_map::<Y, V, ()>(|x| Ok(var(x)), |u| Ok(fix(u)), |_| Ok(())).expect("infallible")
    }
}

pub struct CtxIter<'a, X, U> {
    cur: Option<&'a Node<X, U>>,
}

impl<'a, X, U> Iterator for CtxIter<'a, X, U> {
    type Item = &'a Decl<X, U>;
    fn next(&mut self) -> Option<Self::Item> {
        let node = self.cur?;
        self.cur = node.rest.0.as_deref();
        Some(&node.decl)
    }
}

impl<X, U> FromIterator<Decl<X, U>> for Ctx<X, U> {
    fn from_iter<I: IntoIterator<Item = Decl<X, U>>>(iter: I) -> Self {
        iter.into_iter().fold(Ctx::empty(), |c, d| c.extend(d))
    }
}

impl ImpCtx {
    pub fn subst_eo(&self, order: &EvalOrder, var: &str) -> ImpCtx {
        let decls: Vec<_> = self
            .decls()
            .into_iter()
            .filter(|d| !matches!(d, Decl::EoVar(n) if &**n == var))
            .map(|d| match d {
                Decl::Var(n, (phi, t)) => Decl::Var(n.clone(), (*phi, t.subst_eo(order, var))),
                Decl::FixVar(n, t) => Decl::FixVar(n.clone(), t.subst_eo(order, var)),
                Decl::EoVar(n) => Decl::EoVar(n.clone()),
                Decl::TyVar(n) => Decl::TyVar(n.clone()),
            })
            .collect();
        decls.into_iter().collect()
    }
}

impl EconCtx {
    pub fn subst_eo(&self, order: &EvalOrder, var: &str) -> EconCtx {
        let decls: Vec<_> = self
            .decls()
            .into_iter()
            .filter(|d| !matches!(d, Decl::EoVar(n) if &**n == var))
            .map(|d| match d {
                Decl::Var(n, t) => Decl::Var(n.clone(), t.subst_eo(order, var)),
                Decl::FixVar(n, t) => Decl::FixVar(n.clone(), t.subst_eo(order, var)),
                Decl::EoVar(n) => Decl::EoVar(n.clone()),
                Decl::TyVar(n) => Decl::TyVar(n.clone()),
            })
            .collect();
        decls.into_iter().collect()
    }
}

impl<X: fmt::Display, U: fmt::Display> fmt::Display for Ctx<X, U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decls = self.decls();
        if decls.is_empty() {
            return write!(f, ".");
        }
        for (i, d) in decls.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match d {
                Decl::Var(n, p) => write!(f, "{n} : {p}")?,
                Decl::FixVar(n, p) => write!(f, "{n} : {p}")?,
                Decl::EoVar(n) => write!(f, "%{n} evalorder")?,
                Decl::TyVar(n) => write!(f, "'{n} type")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_finds_most_recent() {
        let c: EconCtx = Ctx::empty().with_var(Name::from("x"), EconType::Unit).with_var(
            Name::from("x"),
            EconType::susp(EvalOrder::N, EconType::Unit),
        );
        assert_eq!(c.lookup_var("x"), Some(&EconType::susp(EvalOrder::N, EconType::Unit)));
        assert!(c.has_duplicates());
    }

    #[test]
    fn namespaces_are_distinct() {
        let c: EconCtx = Ctx::empty().with_var(Name::from("x"), EconType::Unit).with_fixvar(Name::from("x"), EconType::Unit);
        assert!(!c.has_duplicates());
        assert!(c.lookup_fixvar("x").is_some());
    }

    #[test]
    fn eo_substitution_removes_declaration() {
        let c: EconCtx = Ctx::empty()
            .with_eovar(Name::from("a"))
            .with_var(Name::from("x"), EconType::susp(EvalOrder::Var(Name::from("a")), EconType::Unit));
        let d = c.subst_eo(&EvalOrder::N, "a");
        assert!(!d.has_any_eovar());
        assert_eq!(d.lookup_var("x"), Some(&EconType::susp(EvalOrder::N, EconType::Unit)));
    }
}
