//! Rendering in the concrete syntax accepted by the parser.

use std::fmt::{self, Display, Formatter};

use crate::expr::{Expr, Term};
use crate::target::TargetTerm;
use crate::types::{EconType, EvalOrder, ImpartialType, TargetType};

// Type precedence: 0 binders and arrows, 1 sums, 2 products, 3 prefix, 4 atoms.

fn paren(f: &mut Formatter<'_>, open: bool, body: impl FnOnce(&mut Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if open {
        f.write_str("(")?;
    }
    body(f)?;
    if open {
        f.write_str(")")?;
    }
    Ok(())
}

fn imp(t: &ImpartialType, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use ImpartialType::*;
    match t {
        Unit => f.write_str("1"),
        TyVar(a) => write!(f, "'{a}"),
        Forall(a, b) => paren(f, prec > 0, |f| {
            write!(f, "forall '{a}. ")?;
            imp(b, 0, f)
        }),
        AllEo(a, b) => paren(f, prec > 0, |f| {
            write!(f, "all %{a}. ")?;
            imp(b, 0, f)
        }),
        Rec(a, b, e) => paren(f, prec > 0, |f| {
            write!(f, "rec[{e}] '{a}. ")?;
            imp(b, 0, f)
        }),
        Arrow(l, r, e) => paren(f, prec > 0, |f| {
            imp(l, 1, f)?;
            write!(f, " -[{e}]> ")?;
            imp(r, 0, f)
        }),
        Sum(l, r, e) => paren(f, prec > 1, |f| {
            imp(l, 2, f)?;
            write!(f, " +[{e}] ")?;
            imp(r, 1, f)
        }),
        Prod(l, r, e) => paren(f, prec > 2, |f| {
            imp(l, 3, f)?;
            write!(f, " *[{e}] ")?;
            imp(r, 2, f)
        }),
    }
}

fn econ(t: &EconType, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use EconType::*;
    match t {
        Unit => f.write_str("1"),
        TyVar(a) => write!(f, "'{a}"),
        Forall(a, b) => paren(f, prec > 0, |f| {
            write!(f, "forall '{a}. ")?;
            econ(b, 0, f)
        }),
        AllEo(a, b) => paren(f, prec > 0, |f| {
            write!(f, "all %{a}. ")?;
            econ(b, 0, f)
        }),
        Rec(a, b) => paren(f, prec > 0, |f| {
            write!(f, "rec '{a}. ")?;
            econ(b, 0, f)
        }),
        Susp(e, b) => paren(f, prec > 3, |f| {
            write!(f, "susp[{e}] ")?;
            econ(b, 3, f)
        }),
        Arrow(l, r) => paren(f, prec > 0, |f| {
            econ(l, 1, f)?;
            f.write_str(" -> ")?;
            econ(r, 0, f)
        }),
        Sum(l, r) => paren(f, prec > 1, |f| {
            econ(l, 2, f)?;
            f.write_str(" + ")?;
            econ(r, 1, f)
        }),
        Prod(l, r) => paren(f, prec > 2, |f| {
            econ(l, 3, f)?;
            f.write_str(" * ")?;
            econ(r, 2, f)
        }),
    }
}

fn target_ty(t: &TargetType, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use TargetType::*;
    match t {
        Unit => f.write_str("1"),
        TyVar(a) => write!(f, "'{a}"),
        Forall(a, b) => paren(f, prec > 0, |f| {
            write!(f, "forall '{a}. ")?;
            target_ty(b, 0, f)
        }),
        Rec(a, b) => paren(f, prec > 0, |f| {
            write!(f, "rec '{a}. ")?;
            target_ty(b, 0, f)
        }),
        Thunk(b) => paren(f, prec > 3, |f| {
            f.write_str("U ")?;
            target_ty(b, 3, f)
        }),
        Arrow(l, r) => paren(f, prec > 0, |f| {
            target_ty(l, 1, f)?;
            f.write_str(" -> ")?;
            target_ty(r, 0, f)
        }),
        Sum(l, r) => paren(f, prec > 1, |f| {
            target_ty(l, 2, f)?;
            f.write_str(" + ")?;
            target_ty(r, 1, f)
        }),
        Prod(l, r) => paren(f, prec > 2, |f| {
            target_ty(l, 3, f)?;
            f.write_str(" * ")?;
            target_ty(r, 2, f)
        }),
    }
}

impl Display for ImpartialType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        imp(self, 0, f)
    }
}

impl Display for EconType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        econ(self, 0, f)
    }
}

impl Display for TargetType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        target_ty(self, 0, f)
    }
}

// Expression precedence: 0 binders, 1 application, 2 prefix operators,
// 3 postfix operators, 4 atoms.

fn expr<A: Display>(e: &Expr<A>, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use Expr::*;
    match e {
        Unit => f.write_str("()"),
        Var(x) | FixVar(x) => write!(f, "{x}"),
        Lam(x, b) => paren(f, prec > 0, |f| {
            write!(f, "\\{x}. ")?;
            expr(b, 0, f)
        }),
        Fix(u, b) => paren(f, prec > 0, |f| {
            write!(f, "fix {u}. ")?;
            expr(b, 0, f)
        }),
        TyLam(a, b) => paren(f, prec > 0, |f| {
            write!(f, "/\\'{a}. ")?;
            expr(b, 0, f)
        }),
        Case(s, x1, e1, x2, e2) => paren(f, prec > 0, |f| {
            f.write_str("case ")?;
            expr(s, 0, f)?;
            write!(f, " {{ inj1 {x1} -> ")?;
            expr(e1, 0, f)?;
            write!(f, " | inj2 {x2} -> ")?;
            expr(e2, 0, f)?;
            f.write_str(" }")
        }),
        App(a, b) => paren(f, prec > 1, |f| {
            expr(a, 1, f)?;
            f.write_str(" ")?;
            expr(b, 3, f)
        }),
        Inj(k, b) => paren(f, prec > 2, |f| {
            write!(f, "inj{} ", k.index())?;
            expr(b, 2, f)
        }),
        Proj(k, b) => paren(f, prec > 3, |f| {
            expr(b, 3, f)?;
            write!(f, ".{}", k.index())
        }),
        TyApp(b, t) => paren(f, prec > 3, |f| {
            expr(b, 3, f)?;
            write!(f, " [{t}]")
        }),
        EoApp(b, o) => paren(f, prec > 3, |f| {
            expr(b, 3, f)?;
            write!(f, " {{{o}}}")
        }),
        Pair(a, b) => {
            f.write_str("(")?;
            expr(a, 0, f)?;
            f.write_str(", ")?;
            expr(b, 0, f)?;
            f.write_str(")")
        }
        Anno(b, t) => {
            f.write_str("(")?;
            expr(b, 0, f)?;
            write!(f, " : {t})")
        }
    }
}

impl<A: Display> Display for Expr<A> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        expr(self, 0, f)
    }
}

fn term(e: &Term, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use Term::*;
    match e {
        Unit => f.write_str("()"),
        Var(x) | FixVar(x) => write!(f, "{x}"),
        Lam(x, b) => paren(f, prec > 0, |f| {
            write!(f, "\\{x}. ")?;
            term(b, 0, f)
        }),
        Fix(u, b) => paren(f, prec > 0, |f| {
            write!(f, "fix {u}. ")?;
            term(b, 0, f)
        }),
        Case(s, x1, e1, x2, e2) => paren(f, prec > 0, |f| {
            f.write_str("case ")?;
            term(s, 0, f)?;
            write!(f, " {{ inj1 {x1} -> ")?;
            term(e1, 0, f)?;
            write!(f, " | inj2 {x2} -> ")?;
            term(e2, 0, f)?;
            f.write_str(" }")
        }),
        App(a, b) => paren(f, prec > 1, |f| {
            term(a, 1, f)?;
            f.write_str(" ")?;
            term(b, 3, f)
        }),
        Inj(k, b) => paren(f, prec > 2, |f| {
            write!(f, "inj{} ", k.index())?;
            term(b, 2, f)
        }),
        Proj(k, b) => paren(f, prec > 3, |f| {
            term(b, 3, f)?;
            write!(f, ".{}", k.index())
        }),
        Pair(a, b) => {
            f.write_str("(")?;
            term(a, 0, f)?;
            f.write_str(", ")?;
            term(b, 0, f)?;
            f.write_str(")")
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        term(self, 0, f)
    }
}

fn tterm(m: &TargetTerm, prec: u8, f: &mut Formatter<'_>) -> fmt::Result {
    use TargetTerm::*;
    let prefix = |f: &mut Formatter<'_>, kw: &str, b: &TargetTerm| {
        paren(f, prec > 2, |f| {
            write!(f, "{kw} ")?;
            tterm(b, 2, f)
        })
    };
    match m {
        Unit => f.write_str("()"),
        Var(x) | FixVar(x) => write!(f, "{x}"),
        Lam(x, b) => paren(f, prec > 0, |f| {
            write!(f, "\\{x}. ")?;
            tterm(b, 0, f)
        }),
        Fix(u, b) => paren(f, prec > 0, |f| {
            write!(f, "fix {u}. ")?;
            tterm(b, 0, f)
        }),
        TyLam(b) => paren(f, prec > 0, |f| {
            f.write_str("/\\. ")?;
            tterm(b, 0, f)
        }),
        Case(s, x1, e1, x2, e2) => paren(f, prec > 0, |f| {
            f.write_str("case ")?;
            tterm(s, 0, f)?;
            write!(f, " {{ inj1 {x1} -> ")?;
            tterm(e1, 0, f)?;
            write!(f, " | inj2 {x2} -> ")?;
            tterm(e2, 0, f)?;
            f.write_str(" }")
        }),
        App(a, b) => paren(f, prec > 1, |f| {
            tterm(a, 1, f)?;
            f.write_str(" ")?;
            tterm(b, 3, f)
        }),
        Inj(k, b) => prefix(f, &format!("inj{}", k.index()), b),
        Thunk(b) => prefix(f, "thunk", b),
        Force(b) => prefix(f, "force", b),
        Roll(b) => prefix(f, "roll", b),
        Unroll(b) => prefix(f, "unroll", b),
        Proj(k, b) => paren(f, prec > 3, |f| {
            tterm(b, 3, f)?;
            write!(f, ".{}", k.index())
        }),
        TyApp(b) => paren(f, prec > 3, |f| {
            tterm(b, 3, f)?;
            f.write_str(" []")
        }),
        Pair(a, b) => {
            f.write_str("(")?;
            tterm(a, 0, f)?;
            f.write_str(", ")?;
            tterm(b, 0, f)?;
            f.write_str(")")
        }
    }
}

impl Display for TargetTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        tterm(self, 0, f)
    }
}

/// Render an order without the surrounding brackets used in types.
pub fn order(e: &EvalOrder) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ImpExpr, Side};

    #[test]
    fn renders_impartial_types() {
        use ImpartialType as T;
        let a = EvalOrder::Var("a".into());
        let t = T::all_eo("a", T::arrow(T::Unit, T::Unit, a));
        assert_eq!(t.to_string(), "all %a. 1 -[%a]> 1");
        let l = T::rec("b", T::sum(T::Unit, T::prod(T::tyvar("al"), T::tyvar("b"), EvalOrder::V), EvalOrder::V), EvalOrder::V);
        assert_eq!(l.to_string(), "rec[V] 'b. 1 +[V] 'al *[V] 'b");
        let nested = T::arrow(T::arrow(T::Unit, T::Unit, EvalOrder::V), T::Unit, EvalOrder::N);
        assert_eq!(nested.to_string(), "(1 -[V]> 1) -[N]> 1");
    }

    #[test]
    fn renders_econ_types() {
        let t = EconType::arrow(EconType::susp(EvalOrder::N, EconType::Unit), EconType::Unit);
        assert_eq!(t.to_string(), "susp[N] 1 -> 1");
        let s = EconType::susp(EvalOrder::N, EconType::sum(EconType::Unit, EconType::Unit));
        assert_eq!(s.to_string(), "susp[N] (1 + 1)");
    }

    #[test]
    fn renders_expressions() {
        let e = ImpExpr::anno(
            ImpExpr::lam("x", ImpExpr::var("x")),
            ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, EvalOrder::N),
        );
        assert_eq!(e.to_string(), "(\\x. x : 1 -[N]> 1)");
        let p = ImpExpr::proj(Side::Left, ImpExpr::app(ImpExpr::var("f"), ImpExpr::var("x")));
        assert_eq!(p.to_string(), "(f x).1");
    }

    #[test]
    fn renders_target_terms() {
        let m = TargetTerm::pair(
            TargetTerm::lam("x", TargetTerm::var("x")),
            TargetTerm::lam("x", TargetTerm::force(TargetTerm::var("x"))),
        );
        assert_eq!(m.to_string(), "(\\x. x, \\x. force x)");
        assert_eq!(TargetTerm::tyapp(TargetTerm::var("f")).to_string(), "f []");
    }
}
