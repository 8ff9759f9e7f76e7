//! Reified typing derivations shared by the impartial and economical
//! checkers, and the result type both checkers return.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::context::Ctx;
use crate::expr::{Expr, Side};
use crate::types::Valueness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Check,
    Synth,
}

/// Rule names without the system prefix; `Derivation::rule_name` adds it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Var,
    FixVar,
    Fix,
    Sub,
    Anno,
    UnitIntro,
    AllIntro,
    AllElim,
    AllEoIntro,
    AllEoElim,
    ArrIntro,
    ArrElim,
    ProdIntro,
    ProdElim(Side),
    SumIntro(Side),
    SumElim,
    RecIntro,
    RecElim,
    /// Economical only: checking against a suspension.
    SuspIntro,
    /// Economical only: the by-value elimination that keeps valueness.
    SuspElimV,
    /// Economical only: the elimination for any order, yielding `⊤`.
    SuspElim,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::ProdElim(k) => write!(f, "prodelim{}", k.index()),
            Rule::SumIntro(k) => write!(f, "sumintro{}", k.index()),
            Rule::SuspElimV => write!(f, "suspelimV"),
            other => {
                let s = format!("{other:?}").to_lowercase();
                f.write_str(&s)
            }
        }
    }
}

/// `(context, expression, direction, type, valueness)` plus the rule and
/// premises that justify it.
#[derive(Debug)]
pub struct Derivation<T, X> {
    pub rule: Rule,
    pub ctx: Ctx<X, T>,
    pub expr: Rc<Expr<T>>,
    pub dir: Direction,
    pub ty: T,
    pub valueness: Valueness,
    pub children: Vec<Rc<Derivation<T, X>>>,
}

impl<X, T: Clone> Clone for Derivation<T, X> {
    fn clone(&self) -> Self {
        Derivation {
            rule: self.rule,
            ctx: self.ctx.clone(),
            expr: self.expr.clone(),
            dir: self.dir,
            ty: self.ty.clone(),
            valueness: self.valueness,
            children: self.children.clone(),
        }
    }
}

impl<T, X> Derivation<T, X> {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Pre-order walk.
    pub fn nodes(&self) -> Vec<&Derivation<T, X>> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    pub fn rule_name(&self, prefix: char) -> String {
        format!("{prefix}{}", self.rule)
    }
}

/// The derivations found for a judgment, at most one per valueness.
pub struct Found<T, X> {
    pub val: Option<Rc<Derivation<T, X>>>,
    pub top: Option<Rc<Derivation<T, X>>>,
}

impl<T, X> Clone for Found<T, X> {
    fn clone(&self) -> Self {
        Found { val: self.val.clone(), top: self.top.clone() }
    }
}

impl<T, X> Default for Found<T, X> {
    fn default() -> Self {
        Found { val: None, top: None }
    }
}

impl<T, X> Found<T, X> {
    pub fn one(d: Derivation<T, X>) -> Self {
        let mut f = Found::default();
        f.add(Rc::new(d));
        f
    }

    pub fn add(&mut self, d: Rc<Derivation<T, X>>) {
        let slot = match d.valueness {
            Valueness::Val => &mut self.val,
            Valueness::Top => &mut self.top,
        };
        match slot {
            Some(existing) if existing.size() <= d.size() => {}
            _ => *slot = Some(d),
        }
    }

    pub fn merge(&mut self, other: Found<T, X>) {
        if let Some(d) = other.val {
            self.add(d);
        }
        if let Some(d) = other.top {
            self.add(d);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.val.is_none() && self.top.is_none()
    }

    pub fn least(&self) -> Option<&Rc<Derivation<T, X>>> {
        self.val.as_ref().or(self.top.as_ref())
    }

    pub fn get(&self, phi: Valueness) -> Option<&Rc<Derivation<T, X>>> {
        match phi {
            Valueness::Val => self.val.as_ref(),
            Valueness::Top => self.top.as_ref(),
        }
    }

    pub fn valuenesses(&self) -> Vec<Valueness> {
        let mut v = Vec::new();
        if self.val.is_some() {
            v.push(Valueness::Val);
        }
        if self.top.is_some() {
            v.push(Valueness::Top);
        }
        v
    }

    pub fn all(&self) -> Vec<&Rc<Derivation<T, X>>> {
        self.val.iter().chain(self.top.iter()).collect()
    }
}

/// What a checker call returns: the judgment's type, the least valueness
/// derived, its derivation, and every valueness that was derivable.
pub struct TypingResult<T, X> {
    pub ty: T,
    pub valueness: Valueness,
    pub derivation: Rc<Derivation<T, X>>,
    pub found: Found<T, X>,
}

impl<T: Clone, X> TypingResult<T, X> {
    pub fn from_found(found: Found<T, X>) -> Option<Self> {
        let d = found.least()?.clone();
        Some(TypingResult { ty: d.ty.clone(), valueness: d.valueness, derivation: d, found })
    }

    pub fn derivable(&self, phi: Valueness) -> bool {
        self.found.get(phi).is_some()
    }
}

impl<T: fmt::Debug, X> fmt::Debug for TypingResult<T, X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TypingResult")
            .field("ty", &self.ty)
            .field("valueness", &self.valueness)
            .field("derivable", &self.found.valuenesses())
            .finish()
    }
}
