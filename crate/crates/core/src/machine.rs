//! Evaluation with an explicit context stack. `target::step` finds the redex
//! from the root every time, which costs the depth of the term; the machine
//! keeps its place, so a step costs about as much as the redex it contracts.

use crate::target::Reduction;

/// How evaluation treats a term at the focus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Value,
    Stuck,
    Redex,
    /// Evaluate this many children, left to right, then ask
    /// [`Evaluable::settled`].
    Eval(usize),
}

pub trait Evaluable: Clone {
    fn shape(&self) -> Shape;
    /// The shape once every evaluated child is a value; never `Eval`.
    fn settled(&self) -> Shape;
    fn eval_child(&self, i: usize) -> &Self;
    fn replace_child(&self, i: usize, new: Self) -> Self;
    fn contract(&self) -> Option<(Self, Reduction)>;
    /// Syntactic identity, strong enough that identical terms evaluate
    /// identically.
    fn identical(&self, other: &Self) -> bool;
}

#[derive(Clone, Debug)]
pub enum MachineStep<T> {
    Value,
    Stuck,
    Stepped { rule: Reduction, redex: T, reduct: T },
}

#[derive(Clone, Debug)]
pub struct Machine<T> {
    /// Enclosing terms, innermost last: the child index under evaluation
    /// and the number of evaluated children.
    frames: Vec<(T, usize, usize)>,
    focus: T,
    /// The fewest frames held since [`Machine::mark_low`].
    low: usize,
}

impl<T: Evaluable> Machine<T> {
    pub fn new(t: T) -> Self {
        Machine { frames: Vec::new(), focus: t, low: 0 }
    }

    /// Move the focus to the next redex, or finish.
    fn refocus(&mut self) -> Shape {
        let mut shape = self.focus.shape();
        loop {
            match shape {
                Shape::Eval(n) => {
                    let c = self.focus.eval_child(0).clone();
                    let parent = std::mem::replace(&mut self.focus, c);
                    self.frames.push((parent, 0, n));
                    shape = self.focus.shape();
                }
                Shape::Value => {
                    let Some((parent, i, n)) = self.frames.pop() else { return Shape::Value };
                    self.low = self.low.min(self.frames.len());
                    let parent = parent.replace_child(i, self.focus.clone());
                    if i + 1 < n {
                        self.focus = parent.eval_child(i + 1).clone();
                        self.frames.push((parent, i + 1, n));
                        shape = self.focus.shape();
                    } else {
                        self.focus = parent;
                        shape = self.focus.settled();
                    }
                }
                Shape::Redex | Shape::Stuck => return shape,
            }
        }
    }

    pub fn step(&mut self) -> MachineStep<T> {
        match self.refocus() {
            Shape::Value => MachineStep::Value,
            Shape::Redex => {
                let (reduct, rule) = self.focus.contract().expect("the focus is a redex");
                let redex = std::mem::replace(&mut self.focus, reduct.clone());
                MachineStep::Stepped { rule, redex, reduct }
            }
            _ => MachineStep::Stuck,
        }
    }

    pub fn mark_low(&mut self) {
        self.low = self.frames.len();
    }

    /// The whole term.
    pub fn term(&self) -> T {
        self.frames.iter().rev().fold(self.focus.clone(), |t, (p, i, _)| p.replace_child(*i, t))
    }
}

/// A state that came back: from step `from` on, every `period` steps the
/// run reaches the same redex with `growth` more frames under it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub from: usize,
    pub period: usize,
    pub growth: usize,
}

struct Mark<T> {
    step: usize,
    redex: T,
    frames: Vec<(T, usize, usize)>,
}

/// Watches a run for a recurring state, remembering states at
/// exponentially spaced steps.
///
/// Between a marked step and a later one the run only touches the frames
/// above its low-water mark. If the later step has the same redex and the
/// touched frames of the marked state sit identically on top of its stack,
/// the run from there replays the run from the mark, pushing the same
/// frames again, and never ends. Every later step contracts a redex already
/// contracted.
pub struct Watch<T> {
    mark: Option<Mark<T>>,
    next: usize,
}

impl<T: Evaluable> Default for Watch<T> {
    fn default() -> Self {
        Watch { mark: None, next: 1 }
    }
}

impl<T: Evaluable> Watch<T> {
    /// Call after step number `step` contracted `redex`.
    pub fn observe(&mut self, step: usize, machine: &mut Machine<T>, redex: &T) -> Option<Recurrence> {
        if let Some(m) = &self.mark {
            if let Some(r) = recurs(m, step, machine, redex) {
                return Some(r);
            }
        }
        if step == self.next {
            self.next *= 2;
            self.mark = Some(Mark { step, redex: redex.clone(), frames: machine.frames.clone() });
            machine.mark_low();
        }
        None
    }
}

fn recurs<T: Evaluable>(m: &Mark<T>, step: usize, machine: &Machine<T>, redex: &T) -> Option<Recurrence> {
    let now = &machine.frames;
    if now.len() < m.frames.len() || !redex.identical(&m.redex) {
        return None;
    }
    let touched = &m.frames[machine.low..];
    let top = &now[now.len() - touched.len()..];
    let same = touched.iter().zip(top).all(|((a, i, n), (b, j, k))| i == j && n == k && a.identical(b));
    same.then(|| Recurrence { from: m.step, period: step - m.step, growth: now.len() - m.frames.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::parse_target_term;
    use crate::target::{step, StepResult};

    fn agree(src: &str, fuel: usize) {
        let m = parse_target_term(src).unwrap();
        let mut mach = Machine::new(m.clone());
        let mut cur = m;
        for _ in 0..fuel {
            match (step(&cur), mach.step()) {
                (StepResult::Stepped(n, r), MachineStep::Stepped { rule, .. }) => {
                    assert_eq!(r, rule);
                    assert_eq!(n, mach.term());
                    cur = n;
                }
                (StepResult::Value, MachineStep::Value) | (StepResult::Stuck, MachineStep::Stuck) => return,
                (a, b) => panic!("{cur}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn agrees_with_root_stepping() {
        agree("((\\x. (x, x)) (force thunk ())).2", 20);
        agree("case inj2 ((\\y. y) ()) { inj1 a -> a | inj2 b -> (b, b).1 }", 20);
        agree("unroll roll ((/\\. \\z. z) [] ())", 20);
        agree("fix u. roll inj2 roll inj2 u", 30);
        agree("((), () ())", 5);
    }

    fn recurrence(src: &str, fuel: usize) -> Option<Recurrence> {
        let mut mach = Machine::new(parse_target_term(src).unwrap());
        let mut watch = Watch::default();
        for k in 1..=fuel {
            match mach.step() {
                MachineStep::Stepped { redex, .. } => {
                    if let Some(r) = watch.observe(k, &mut mach, &redex) {
                        return Some(r);
                    }
                }
                _ => return None,
            }
        }
        None
    }

    #[test]
    fn spots_loops_in_place_and_growing() {
        let r = recurrence("fix u. u", 100).unwrap();
        assert_eq!((r.period, r.growth), (1, 0));
        let r = recurrence("fix u. force thunk u", 100).unwrap();
        assert_eq!((r.period, r.growth), (2, 0));
        let r = recurrence("fix u. unroll u", 100).unwrap();
        assert_eq!((r.period, r.growth), (1, 1));
        let r = recurrence("fix u. (\\x. x) u", 100).unwrap();
        assert_eq!(r.growth, 1);
    }

    #[test]
    fn terminating_runs_do_not_recur() {
        assert_eq!(recurrence("((\\x. (x, x)) (force thunk ())).2", 100), None);
        assert_eq!(recurrence("(fix u. \\x. x) ((fix u. \\y. y) ())", 100), None);
        assert!(recurrence("fix u. roll inj2 roll inj2 u", 100).is_some());
    }
}
