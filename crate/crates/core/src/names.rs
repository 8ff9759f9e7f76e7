//! Identifiers and fresh-name generation.
//!
//! All binders are named. Capture is avoided by renaming a binder to a name
//! that is not free in the replacement, and equality of syntax is always
//! α-equivalence (see the `alpha` helpers in each syntax module).

use std::collections::BTreeSet;
use std::rc::Rc;

/// A variable name. Cheap to clone.
pub type Name = Rc<str>;

pub fn name(s: &str) -> Name {
    Rc::from(s)
}

/// Strip a numeric suffix so that freshening `x3` yields `x4`, not `x31`.
fn stem(base: &str) -> &str {
    let trimmed = base.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.is_empty() {
        base
    } else {
        trimmed
    }
}

/// Pick a name based on `base` that `taken` rejects.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return name(base);
    }
    let stem = stem(base);
    (1u32..)
        .map(|i| format!("{stem}{i}"))
        .find(|candidate| !taken(candidate))
        .map(|s| name(&s))
        .expect("unbounded counter")
}

pub fn fresh_avoiding(base: &str, avoid: &BTreeSet<Name>) -> Name {
    fresh_name(base, |s| avoid.contains(s))
}

/// Binder environment used by α-equivalence: a stack of paired binder names.
#[derive(Default)]
pub(crate) struct AlphaEnv {
    pairs: Vec<(Name, Name)>,
}

impl AlphaEnv {
    pub(crate) fn push(&mut self, l: &Name, r: &Name) {
        self.pairs.push((l.clone(), r.clone()));
    }

    pub(crate) fn pop(&mut self) {
        self.pairs.pop();
    }

    /// Two occurrences correspond iff they refer to the same binder pair, or
    /// are both free and textually equal.
    pub(crate) fn vars_match(&self, l: &Name, r: &Name) -> bool {
        let li = self.pairs.iter().rposition(|(a, _)| a == l);
        let ri = self.pairs.iter().rposition(|(_, b)| b == r);
        match (li, ri) {
            (Some(i), Some(j)) => i == j,
            (None, None) => l == r,
            _ => false,
        }
    }

    pub(crate) fn scoped<T>(&mut self, l: &Name, r: &Name, f: impl FnOnce(&mut Self) -> T) -> T {
        self.push(l, r);
        let out = f(self);
        self.pop();
        out
    }
}
