//! Recursive-descent parser for types, source expressions, target terms and
//! program files.

use std::collections::HashMap;
use std::rc::Rc;

use super::lexer::{lex, Spanned, Tok};
use super::{Lang, Param, ParseError, Program, TypeAbbrev};
use crate::expr::{Annotation, Expr, Side};
use crate::names::Name;
use crate::target::TargetTerm;
use crate::types::{EconType, EvalOrder, ImpartialType, TargetType};

/// Which type grammar is being read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Grammar {
    Impartial,
    Econ,
    Target,
}

/// A type in any of the three grammars, before it's checked against one of
/// them.
#[derive(Clone, Debug)]
enum Raw {
    Unit,
    Var(Name),
    Forall(Name, Box<Raw>),
    AllEo(Name, Box<Raw>),
    Rec(Name, Option<EvalOrder>, Box<Raw>),
    Arrow(Box<Raw>, Box<Raw>, Option<EvalOrder>),
    Prod(Box<Raw>, Box<Raw>, Option<EvalOrder>),
    Sum(Box<Raw>, Box<Raw>, Option<EvalOrder>),
    Susp(EvalOrder, Box<Raw>),
    Thunk(Box<Raw>),
    Abbrev(String, Vec<RawArg>, usize, usize),
}

#[derive(Clone, Debug)]
enum RawArg {
    Order(EvalOrder),
    Type(Raw),
}

/// How a grammar's types are built from raw syntax.
trait FromRaw: Annotation + Sized {
    const GRAMMAR: Grammar;
    fn unit() -> Self;
    fn var(a: Name) -> Self;
    fn forall(a: Name, b: Self) -> Self;
    fn all_eo(a: Name, b: Self) -> Option<Self>;
    fn rec(a: Name, e: Option<EvalOrder>, b: Self) -> Option<Self>;
    fn arrow(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self>;
    fn prod(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self>;
    fn sum(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self>;
    fn susp(e: EvalOrder, b: Self) -> Option<Self>;
    fn thunk(b: Self) -> Option<Self>;
}

impl FromRaw for ImpartialType {
    const GRAMMAR: Grammar = Grammar::Impartial;
    fn unit() -> Self {
        ImpartialType::Unit
    }
    fn var(a: Name) -> Self {
        ImpartialType::TyVar(a)
    }
    fn forall(a: Name, b: Self) -> Self {
        ImpartialType::Forall(a, Rc::new(b))
    }
    fn all_eo(a: Name, b: Self) -> Option<Self> {
        Some(ImpartialType::AllEo(a, Rc::new(b)))
    }
    fn rec(a: Name, e: Option<EvalOrder>, b: Self) -> Option<Self> {
        Some(ImpartialType::Rec(a, Rc::new(b), e?))
    }
    fn arrow(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        Some(ImpartialType::Arrow(Rc::new(l), Rc::new(r), e?))
    }
    fn prod(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        Some(ImpartialType::Prod(Rc::new(l), Rc::new(r), e?))
    }
    fn sum(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        Some(ImpartialType::Sum(Rc::new(l), Rc::new(r), e?))
    }
    fn susp(_: EvalOrder, _: Self) -> Option<Self> {
        None
    }
    fn thunk(_: Self) -> Option<Self> {
        None
    }
}

impl FromRaw for EconType {
    const GRAMMAR: Grammar = Grammar::Econ;
    fn unit() -> Self {
        EconType::Unit
    }
    fn var(a: Name) -> Self {
        EconType::TyVar(a)
    }
    fn forall(a: Name, b: Self) -> Self {
        EconType::Forall(a, Rc::new(b))
    }
    fn all_eo(a: Name, b: Self) -> Option<Self> {
        Some(EconType::AllEo(a, Rc::new(b)))
    }
    fn rec(a: Name, e: Option<EvalOrder>, b: Self) -> Option<Self> {
        e.is_none().then(|| EconType::Rec(a, Rc::new(b)))
    }
    fn arrow(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| EconType::Arrow(Rc::new(l), Rc::new(r)))
    }
    fn prod(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| EconType::Prod(Rc::new(l), Rc::new(r)))
    }
    fn sum(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| EconType::Sum(Rc::new(l), Rc::new(r)))
    }
    fn susp(e: EvalOrder, b: Self) -> Option<Self> {
        Some(EconType::Susp(e, Rc::new(b)))
    }
    fn thunk(_: Self) -> Option<Self> {
        None
    }
}

/// Target types only appear in tests and tooling; they reuse the machinery
/// through a thin wrapper that satisfies `Annotation`.
#[derive(Clone, Debug, PartialEq)]
struct TargetAnn(TargetType);

impl Annotation for TargetAnn {
    fn subst_tyvar(&self, r: &Self, v: &str) -> Self {
        TargetAnn(self.0.subst_ty(&r.0, v))
    }
    fn subst_eovar(&self, _: &EvalOrder, _: &str) -> Self {
        self.clone()
    }
    fn rename_tyvar(&self, from: &str, to: &Name) -> Self {
        TargetAnn(self.0.subst_ty(&TargetType::TyVar(to.clone()), from))
    }
    fn tyvars(&self) -> std::collections::BTreeSet<Name> {
        self.0.free_tyvars()
    }
    fn eovars(&self) -> std::collections::BTreeSet<Name> {
        Default::default()
    }
    fn alpha_eq_ann(&self, other: &Self) -> bool {
        self.0.alpha_eq(&other.0)
    }
}

impl FromRaw for TargetAnn {
    const GRAMMAR: Grammar = Grammar::Target;
    fn unit() -> Self {
        TargetAnn(TargetType::Unit)
    }
    fn var(a: Name) -> Self {
        TargetAnn(TargetType::TyVar(a))
    }
    fn forall(a: Name, b: Self) -> Self {
        TargetAnn(TargetType::Forall(a, Rc::new(b.0)))
    }
    fn all_eo(_: Name, _: Self) -> Option<Self> {
        None
    }
    fn rec(a: Name, e: Option<EvalOrder>, b: Self) -> Option<Self> {
        e.is_none().then(|| TargetAnn(TargetType::Rec(a, Rc::new(b.0))))
    }
    fn arrow(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| TargetAnn(TargetType::Arrow(Rc::new(l.0), Rc::new(r.0))))
    }
    fn prod(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| TargetAnn(TargetType::Prod(Rc::new(l.0), Rc::new(r.0))))
    }
    fn sum(l: Self, r: Self, e: Option<EvalOrder>) -> Option<Self> {
        e.is_none().then(|| TargetAnn(TargetType::Sum(Rc::new(l.0), Rc::new(r.0))))
    }
    fn susp(_: EvalOrder, _: Self) -> Option<Self> {
        None
    }
    fn thunk(b: Self) -> Option<Self> {
        Some(TargetAnn(TargetType::Thunk(Rc::new(b.0))))
    }
}

const KEYWORDS: &[&str] =
    &["forall", "all", "rec", "susp", "fix", "case", "inj1", "inj2", "thunk", "force", "roll", "unroll", "type"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Ordinary,
    Fixed,
}

struct Parser<'a, T> {
    toks: Vec<Spanned>,
    pos: usize,
    abbrevs: &'a HashMap<String, TypeAbbrev<T>>,
    scope: Vec<(String, VarKind)>,
}

impl<'a, T: FromRaw> Parser<'a, T> {
    fn new(toks: Vec<Spanned>, abbrevs: &'a HashMap<String, TypeAbbrev<T>>) -> Self {
        Parser { toks, pos: 0, abbrevs, scope: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, message: message.into() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected an identifier, found {other}"))),
        }
    }

    fn tyvar(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::TyVar(s) => {
                self.bump();
                Ok(Name::from(s))
            }
            other => Err(self.error(format!("expected a type variable, found {other}"))),
        }
    }

    fn eovar(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::EoVar(s) => {
                self.bump();
                Ok(Name::from(s))
            }
            other => Err(self.error(format!("expected an evaluation-order variable, found {other}"))),
        }
    }

    fn order(&mut self) -> Result<EvalOrder, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "V" => {
                self.bump();
                Ok(EvalOrder::V)
            }
            Tok::Ident(s) if s == "N" => {
                self.bump();
                Ok(EvalOrder::N)
            }
            Tok::EoVar(s) => {
                self.bump();
                Ok(EvalOrder::Var(Name::from(s)))
            }
            other => Err(self.error(format!("expected an evaluation order, found {other}"))),
        }
    }

    /// `[E]` when the grammar decorates connectives.
    fn decoration(&mut self) -> Result<Option<EvalOrder>, ParseError> {
        if *self.peek() == Tok::LBrack {
            self.bump();
            let e = self.order()?;
            self.expect(Tok::RBrack)?;
            Ok(Some(e))
        } else {
            Ok(None)
        }
    }

    // ---- types -----------------------------------------------------------

    fn raw_type(&mut self) -> Result<Raw, ParseError> {
        if self.is_kw("forall") || self.is_kw("all") || self.is_kw("rec") {
            let kw = match self.bump() {
                Tok::Ident(s) => s,
                _ => unreachable!(),
            };
            return match kw.as_str() {
                "forall" => {
                    let a = self.tyvar()?;
                    self.expect(Tok::Dot)?;
                    Ok(Raw::Forall(a, Box::new(self.raw_type()?)))
                }
                "all" => {
                    let a = self.eovar()?;
                    self.expect(Tok::Dot)?;
                    Ok(Raw::AllEo(a, Box::new(self.raw_type()?)))
                }
                _ => {
                    let e = self.decoration()?;
                    let a = self.tyvar()?;
                    self.expect(Tok::Dot)?;
                    Ok(Raw::Rec(a, e, Box::new(self.raw_type()?)))
                }
            };
        }
        let lhs = self.raw_sum()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                Ok(Raw::Arrow(Box::new(lhs), Box::new(self.raw_type()?), None))
            }
            Tok::Minus if *self.peek_at(1) == Tok::LBrack => {
                self.bump();
                let e = self.decoration()?;
                self.expect(Tok::Gt)?;
                Ok(Raw::Arrow(Box::new(lhs), Box::new(self.raw_type()?), e))
            }
            _ => Ok(lhs),
        }
    }

    fn raw_sum(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.raw_prod()?;
        if *self.peek() == Tok::Plus {
            self.bump();
            let e = self.decoration()?;
            return Ok(Raw::Sum(Box::new(lhs), Box::new(self.raw_sum()?), e));
        }
        Ok(lhs)
    }

    fn raw_prod(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.raw_prefix()?;
        if *self.peek() == Tok::Star {
            self.bump();
            let e = self.decoration()?;
            return Ok(Raw::Prod(Box::new(lhs), Box::new(self.raw_prod()?), e));
        }
        Ok(lhs)
    }

    fn raw_prefix(&mut self) -> Result<Raw, ParseError> {
        if self.is_kw("susp") {
            self.bump();
            self.expect(Tok::LBrack)?;
            let e = self.order()?;
            self.expect(Tok::RBrack)?;
            return Ok(Raw::Susp(e, Box::new(self.raw_prefix()?)));
        }
        if T::GRAMMAR == Grammar::Target && matches!(self.peek(), Tok::Ident(s) if s == "U") {
            self.bump();
            return Ok(Raw::Thunk(Box::new(self.raw_prefix()?)));
        }
        self.raw_atom()
    }

    fn raw_atom(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Int(1) => {
                self.bump();
                Ok(Raw::Unit)
            }
            Tok::TyVar(a) => {
                self.bump();
                Ok(Raw::Var(Name::from(a)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.raw_type()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
                self.bump();
                let Some(abbrev) = self.abbrevs.get(&name) else {
                    return Err(ParseError { line, col, message: format!("unknown type `{name}`") });
                };
                let params = abbrev.params.clone();
                let mut args = Vec::new();
                for p in &params {
                    args.push(match p {
                        Param::Order(_) => RawArg::Order(self.order()?),
                        Param::Type(_) => RawArg::Type(self.raw_prefix()?),
                    });
                }
                Ok(Raw::Abbrev(name, args, line, col))
            }
            other => Err(self.error(format!("expected a type, found {other}"))),
        }
    }

    fn convert(&self, raw: &Raw) -> Result<T, ParseError> {
        let here = self.toks[self.pos.saturating_sub(1)].clone();
        let bad = |what: &str| ParseError {
            line: here.line,
            col: here.col,
            message: format!("{what} is not allowed in {} types", grammar_name(T::GRAMMAR)),
        };
        Ok(match raw {
            Raw::Unit => T::unit(),
            Raw::Var(a) => T::var(a.clone()),
            Raw::Forall(a, b) => T::forall(a.clone(), self.convert(b)?),
            Raw::AllEo(a, b) => T::all_eo(a.clone(), self.convert(b)?).ok_or_else(|| bad("`all`"))?,
            Raw::Rec(a, e, b) => T::rec(a.clone(), e.clone(), self.convert(b)?).ok_or_else(|| bad(decorated("rec", e)))?,
            Raw::Arrow(l, r, e) => {
                T::arrow(self.convert(l)?, self.convert(r)?, e.clone()).ok_or_else(|| bad(decorated("this arrow", e)))?
            }
            Raw::Prod(l, r, e) => {
                T::prod(self.convert(l)?, self.convert(r)?, e.clone()).ok_or_else(|| bad(decorated("this product", e)))?
            }
            Raw::Sum(l, r, e) => {
                T::sum(self.convert(l)?, self.convert(r)?, e.clone()).ok_or_else(|| bad(decorated("this sum", e)))?
            }
            Raw::Susp(e, b) => T::susp(e.clone(), self.convert(b)?).ok_or_else(|| bad("`susp`"))?,
            Raw::Thunk(b) => T::thunk(self.convert(b)?).ok_or_else(|| bad("`U`"))?,
            Raw::Abbrev(name, args, line, col) => {
                let abbrev = &self.abbrevs[name];
                expand(abbrev, args.iter().map(|a| self.convert_arg(a)).collect::<Result<Vec<_>, _>>()?).map_err(
                    |message| ParseError { line: *line, col: *col, message },
                )?
            }
        })
    }

    fn convert_arg(&self, a: &RawArg) -> Result<Arg<T>, ParseError> {
        Ok(match a {
            RawArg::Order(e) => Arg::Order(e.clone()),
            RawArg::Type(t) => Arg::Type(self.convert(t)?),
        })
    }

    fn ty(&mut self) -> Result<T, ParseError> {
        let raw = self.raw_type()?;
        self.convert(&raw)
    }

    // ---- expressions -----------------------------------------------------

    fn lookup(&self, x: &str) -> VarKind {
        self.scope.iter().rev().find(|(n, _)| n == x).map(|(_, k)| *k).unwrap_or(VarKind::Ordinary)
    }

    fn scoped<R>(&mut self, x: &str, k: VarKind, f: impl FnOnce(&mut Self) -> R) -> R {
        self.scope.push((x.to_string(), k));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn expr(&mut self) -> Result<Expr<T>, ParseError> {
        match self.peek().clone() {
            Tok::Backslash => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.scoped(&x, VarKind::Ordinary, |p| p.expr())?;
                Ok(Expr::Lam(Name::from(x), Rc::new(body)))
            }
            Tok::BigLambda => {
                self.bump();
                let a = self.tyvar()?;
                self.expect(Tok::Dot)?;
                Ok(Expr::TyLam(a, Rc::new(self.expr()?)))
            }
            Tok::Ident(s) if s == "fix" => {
                self.bump();
                let u = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.scoped(&u, VarKind::Fixed, |p| p.expr())?;
                Ok(Expr::Fix(Name::from(u), Rc::new(body)))
            }
            Tok::Ident(s) if s == "case" => {
                self.bump();
                let scrut = self.expr()?;
                let (x1, e1, x2, e2) = self.branches(|p| p.expr())?;
                Ok(Expr::Case(Rc::new(scrut), x1, Rc::new(e1), x2, Rc::new(e2)))
            }
            _ => self.app(),
        }
    }

    /// `{ inj1 x1 -> e1 | inj2 x2 -> e2 }`
    fn branches<E>(&mut self, mut body: impl FnMut(&mut Self) -> Result<E, ParseError>) -> Result<(Name, E, Name, E), ParseError> {
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Ident("inj1".into()))?;
        let x1 = self.ident()?;
        self.expect(Tok::Arrow)?;
        let e1 = self.scoped(&x1, VarKind::Ordinary, &mut body)?;
        self.expect(Tok::Bar)?;
        self.expect(Tok::Ident("inj2".into()))?;
        let x2 = self.ident()?;
        self.expect(Tok::Arrow)?;
        let e2 = self.scoped(&x2, VarKind::Ordinary, &mut body)?;
        self.expect(Tok::RBrace)?;
        Ok((Name::from(x1), e1, Name::from(x2), e2))
    }

    fn instantiation_follows(&self) -> bool {
        let order = match self.peek_at(1) {
            Tok::Ident(s) => s == "V" || s == "N",
            Tok::EoVar(_) => true,
            _ => false,
        };
        order && *self.peek_at(2) == Tok::RBrace
    }

    fn starts_operand(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => s == "inj1" || s == "inj2" || !KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Expr<T>, ParseError> {
        let mut head = self.unary()?;
        while self.starts_operand() {
            let arg = self.unary()?;
            head = Expr::App(Rc::new(head), Rc::new(arg));
        }
        // A trailing binder form is an argument too: `f \x. x`.
        if matches!(self.peek(), Tok::Backslash | Tok::BigLambda)
            || self.is_kw("fix")
            || self.is_kw("case")
        {
            let arg = self.expr()?;
            head = Expr::App(Rc::new(head), Rc::new(arg));
        }
        Ok(head)
    }

    fn unary(&mut self) -> Result<Expr<T>, ParseError> {
        if let Tok::Ident(s) = self.peek().clone() {
            if s == "inj1" || s == "inj2" {
                self.bump();
                let k = if s == "inj1" { Side::Left } else { Side::Right };
                return Ok(Expr::Inj(k, Rc::new(self.unary()?)));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr<T>, ParseError> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let k = match self.bump() {
                        Tok::Int(1) => Side::Left,
                        Tok::Int(2) => Side::Right,
                        other => return Err(self.error(format!("expected `1` or `2` after `.`, found {other}"))),
                    };
                    e = Expr::Proj(k, Rc::new(e));
                }
                Tok::LBrack => {
                    self.bump();
                    let t = self.ty()?;
                    self.expect(Tok::RBrack)?;
                    e = Expr::TyApp(Rc::new(e), t);
                }
                // `{ inj1 ...` opens case branches rather than an instantiation.
                Tok::LBrace if self.instantiation_follows() => {
                    self.bump();
                    let o = self.order()?;
                    self.expect(Tok::RBrace)?;
                    e = Expr::EoApp(Rc::new(e), o);
                }
                _ => return Ok(e),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr<T>, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Expr::Unit);
                }
                let e = self.expr()?;
                match self.bump() {
                    Tok::RParen => Ok(e),
                    Tok::Comma => {
                        let e2 = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Pair(Rc::new(e), Rc::new(e2)))
                    }
                    Tok::Colon => {
                        let t = self.ty()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Anno(Rc::new(e), t))
                    }
                    other => {
                        self.pos -= 1;
                        Err(self.error(format!("expected `)`, `,` or `:`, found {other}")))
                    }
                }
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(match self.lookup(&x) {
                    VarKind::Ordinary => Expr::Var(Name::from(x)),
                    VarKind::Fixed => Expr::FixVar(Name::from(x)),
                })
            }
            other => Err(self.error(format!("expected an expression, found {other}"))),
        }
    }

    // ---- target terms ----------------------------------------------------

    fn tterm(&mut self) -> Result<TargetTerm, ParseError> {
        match self.peek().clone() {
            Tok::Backslash => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.scoped(&x, VarKind::Ordinary, |p| p.tterm())?;
                Ok(TargetTerm::Lam(Name::from(x), Rc::new(body)))
            }
            Tok::BigLambda => {
                self.bump();
                self.expect(Tok::Dot)?;
                Ok(TargetTerm::TyLam(Rc::new(self.tterm()?)))
            }
            Tok::Ident(s) if s == "fix" => {
                self.bump();
                let u = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.scoped(&u, VarKind::Fixed, |p| p.tterm())?;
                Ok(TargetTerm::Fix(Name::from(u), Rc::new(body)))
            }
            Tok::Ident(s) if s == "case" => {
                self.bump();
                let scrut = self.tterm()?;
                let (x1, m1, x2, m2) = self.branches(|p| p.tterm())?;
                Ok(TargetTerm::Case(Rc::new(scrut), x1, Rc::new(m1), x2, Rc::new(m2)))
            }
            _ => {
                let mut head = self.tunary()?;
                while self.starts_operand() || self.is_kw("thunk") || self.is_kw("force") || self.is_kw("roll") || self.is_kw("unroll") {
                    let arg = self.tunary()?;
                    head = TargetTerm::App(Rc::new(head), Rc::new(arg));
                }
                if matches!(self.peek(), Tok::Backslash | Tok::BigLambda) || self.is_kw("fix") || self.is_kw("case") {
                    let arg = self.tterm()?;
                    head = TargetTerm::App(Rc::new(head), Rc::new(arg));
                }
                Ok(head)
            }
        }
    }

    fn tunary(&mut self) -> Result<TargetTerm, ParseError> {
        if let Tok::Ident(s) = self.peek().clone() {
            let wrap: Option<fn(Rc<TargetTerm>) -> TargetTerm> = match s.as_str() {
                "inj1" => Some(|m| TargetTerm::Inj(Side::Left, m)),
                "inj2" => Some(|m| TargetTerm::Inj(Side::Right, m)),
                "thunk" => Some(TargetTerm::Thunk),
                "force" => Some(TargetTerm::Force),
                "roll" => Some(TargetTerm::Roll),
                "unroll" => Some(TargetTerm::Unroll),
                _ => None,
            };
            if let Some(w) = wrap {
                self.bump();
                return Ok(w(Rc::new(self.tunary()?)));
            }
        }
        let mut m = self.tatom()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let k = match self.bump() {
                        Tok::Int(1) => Side::Left,
                        Tok::Int(2) => Side::Right,
                        other => return Err(self.error(format!("expected `1` or `2` after `.`, found {other}"))),
                    };
                    m = TargetTerm::Proj(k, Rc::new(m));
                }
                Tok::LBrack => {
                    self.bump();
                    self.expect(Tok::RBrack)?;
                    m = TargetTerm::TyApp(Rc::new(m));
                }
                _ => return Ok(m),
            }
        }
    }

    fn tatom(&mut self) -> Result<TargetTerm, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(TargetTerm::Unit);
                }
                let m = self.tterm()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let m2 = self.tterm()?;
                    self.expect(Tok::RParen)?;
                    return Ok(TargetTerm::Pair(Rc::new(m), Rc::new(m2)));
                }
                self.expect(Tok::RParen)?;
                Ok(m)
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(match self.lookup(&x) {
                    VarKind::Ordinary => TargetTerm::Var(Name::from(x)),
                    VarKind::Fixed => TargetTerm::FixVar(Name::from(x)),
                })
            }
            other => Err(self.error(format!("expected a target term, found {other}"))),
        }
    }

    fn eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {} after the end of the input", self.peek())))
        }
    }
}

fn grammar_name(g: Grammar) -> &'static str {
    match g {
        Grammar::Impartial => "impartial",
        Grammar::Econ => "economical",
        Grammar::Target => "target",
    }
}

fn decorated(what: &'static str, e: &Option<EvalOrder>) -> &'static str {
    match (what, e.is_some()) {
        ("rec", true) => "`rec[E]`",
        ("rec", false) => "undecorated `rec`",
        (_, true) => "a decorated connective",
        (_, false) => "an undecorated connective",
    }
}

enum Arg<T> {
    Order(EvalOrder),
    Type(T),
}

/// Instantiate an abbreviation. Parameters are first renamed apart so the
/// substitutions cannot interfere with one another.
fn expand<T: FromRaw>(abbrev: &TypeAbbrev<T>, args: Vec<Arg<T>>) -> Result<T, String> {
    let mut body = abbrev.body.clone();
    let mut temps = Vec::new();
    for (i, p) in abbrev.params.iter().enumerate() {
        let temp = Name::from(format!("#{i}"));
        body = match p {
            Param::Type(a) => body.rename_tyvar(a, &temp),
            Param::Order(a) => body.subst_eovar(&EvalOrder::Var(temp.clone()), a),
        };
        temps.push(temp);
    }
    for ((p, arg), temp) in abbrev.params.iter().zip(args).zip(temps) {
        body = match (p, arg) {
            (Param::Type(_), Arg::Type(t)) => body.subst_tyvar(&t, &temp),
            (Param::Order(_), Arg::Order(e)) => body.subst_eovar(&e, &temp),
            _ => return Err(format!("argument kinds do not match the parameters of `{}`", abbrev.name)),
        };
    }
    Ok(body)
}

fn parse_program_with<T: FromRaw>(toks: Vec<Spanned>, lang: Lang) -> Result<Program<T>, ParseError> {
    let mut abbrevs: HashMap<String, TypeAbbrev<T>> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut pos = 1;
    loop {
        let mut p = Parser::new(toks.clone(), &abbrevs);
        p.pos = pos;
        if !p.is_kw("type") {
            let e = p.expr()?;
            p.eof()?;
            let Expr::Anno(inner, ty) = e else {
                return Err(ParseError {
                    line: toks[pos].line,
                    col: toks[pos].col,
                    message: "the main expression must be annotated: `(e : T)`".into(),
                });
            };
            let abbrevs = order.iter().map(|n| abbrevs[n].clone()).collect();
            return Ok(Program { lang, abbrevs, expr: (*inner).clone(), ty });
        }
        p.bump();
        let name = p.ident()?;
        if abbrevs.contains_key(&name) {
            return Err(p.error(format!("type `{name}` is defined twice")));
        }
        let mut params = Vec::new();
        loop {
            match p.peek().clone() {
                Tok::TyVar(a) => {
                    p.bump();
                    params.push(Param::Type(Name::from(a)));
                }
                Tok::EoVar(a) => {
                    p.bump();
                    params.push(Param::Order(Name::from(a)));
                }
                _ => break,
            }
        }
        p.expect(Tok::Eq)?;
        let body = p.ty()?;
        pos = p.pos;
        let abbrev = TypeAbbrev { name: name.clone(), params, body };
        abbrevs.insert(name.clone(), abbrev);
        order.push(name);
    }
}

pub enum AnyProgram {
    Impartial(Program<ImpartialType>),
    Econ(Program<EconType>),
}

pub fn parse_program(src: &str) -> Result<AnyProgram, ParseError> {
    let toks = lex(src)?;
    let lang = match &toks[0].tok {
        Tok::Lang(l) if l == "impartial" => Lang::Impartial,
        Tok::Lang(l) if l == "econ" => Lang::Econ,
        Tok::Lang(l) => {
            return Err(ParseError {
                line: toks[0].line,
                col: toks[0].col,
                message: format!("unknown language `{l}`; expected `impartial` or `econ`"),
            })
        }
        _ => {
            return Err(ParseError {
                line: toks[0].line,
                col: toks[0].col,
                message: "a program starts with `#lang impartial` or `#lang econ`".into(),
            })
        }
    };
    Ok(match lang {
        Lang::Impartial => AnyProgram::Impartial(parse_program_with(toks, lang)?),
        Lang::Econ => AnyProgram::Econ(parse_program_with(toks, lang)?),
    })
}

fn tokens_without_header(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let toks = lex(src)?;
    if let Tok::Lang(_) = toks[0].tok {
        return Err(ParseError { line: toks[0].line, col: toks[0].col, message: "unexpected `#lang` header".into() });
    }
    Ok(toks)
}

fn parse_type_with<T: FromRaw>(src: &str) -> Result<T, ParseError> {
    let toks = tokens_without_header(src)?;
    let abbrevs = HashMap::new();
    let mut p = Parser::new(toks, &abbrevs);
    let t = p.ty()?;
    p.eof()?;
    Ok(t)
}

fn parse_expr_with<T: FromRaw>(src: &str) -> Result<Expr<T>, ParseError> {
    let toks = tokens_without_header(src)?;
    let abbrevs = HashMap::new();
    let mut p = Parser::new(toks, &abbrevs);
    let e = p.expr()?;
    p.eof()?;
    Ok(e)
}

pub fn parse_impartial_type(src: &str) -> Result<ImpartialType, ParseError> {
    parse_type_with(src)
}

pub fn parse_econ_type(src: &str) -> Result<EconType, ParseError> {
    parse_type_with(src)
}

pub fn parse_target_type(src: &str) -> Result<TargetType, ParseError> {
    parse_type_with::<TargetAnn>(src).map(|t| t.0)
}

pub fn parse_impartial_expr(src: &str) -> Result<Expr<ImpartialType>, ParseError> {
    parse_expr_with(src)
}

pub fn parse_econ_expr(src: &str) -> Result<Expr<EconType>, ParseError> {
    parse_expr_with(src)
}

pub fn parse_target_term(src: &str) -> Result<TargetTerm, ParseError> {
    let toks = tokens_without_header(src)?;
    let abbrevs: HashMap<String, TypeAbbrev<TargetAnn>> = HashMap::new();
    let mut p = Parser::new(toks, &abbrevs);
    let m = p.tterm()?;
    p.eof()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ImpExpr;

    #[test]
    fn annotated_lambda() {
        let e = parse_impartial_expr("(\\x. x : 1 -[N]> 1)").unwrap();
        let expected = ImpExpr::anno(
            ImpExpr::lam("x", ImpExpr::var("x")),
            ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, EvalOrder::N),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn order_quantifier() {
        let t = parse_impartial_type("all %a. 1 -[%a]> 1").unwrap();
        let expected = ImpartialType::all_eo(
            "a",
            ImpartialType::arrow(ImpartialType::Unit, ImpartialType::Unit, EvalOrder::Var("a".into())),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn list_body_at_by_value() {
        use ImpartialType as T;
        let t = parse_impartial_type("rec[V] 'b. 1 +[V] ('a *[V] 'b)").unwrap();
        let expected =
            T::rec("b", T::sum(T::Unit, T::prod(T::tyvar("a"), T::tyvar("b"), EvalOrder::V), EvalOrder::V), EvalOrder::V);
        assert_eq!(t, expected);
    }

    #[test]
    fn econ_rejects_decorations() {
        assert!(parse_econ_type("1 -[V]> 1").is_err());
        assert!(parse_impartial_type("1 -> 1").is_err());
        assert!(parse_impartial_type("susp[N] 1").is_err());
    }

    #[test]
    fn fixed_point_variables_are_resolved_by_scope() {
        let e = parse_impartial_expr("fix u. \\x. u x").unwrap();
        let expected = ImpExpr::fix("u", ImpExpr::lam("x", ImpExpr::app(ImpExpr::fixvar("u"), ImpExpr::var("x"))));
        assert_eq!(e, expected);
    }

    #[test]
    fn abbreviations_expand() {
        let src = "#lang impartial\ntype List %a 'al = rec[%a] 'b. 1 +[%a] ('al *[%a] 'b)\n(() : List V 1 -[V]> 1)";
        let AnyProgram::Impartial(p) = parse_program(src).unwrap() else { panic!() };
        let list = parse_impartial_type("rec[V] 'b. 1 +[V] (1 *[V] 'b)").unwrap();
        assert_eq!(p.ty, ImpartialType::arrow(list, ImpartialType::Unit, EvalOrder::V));
    }

    #[test]
    fn abbreviation_arguments_are_not_captured() {
        let src = "#lang impartial\ntype L 'al = rec[V] 'b. 1 +[V] ('al *[V] 'b)\n(() : forall 'b. L 'b)";
        let AnyProgram::Impartial(p) = parse_program(src).unwrap() else { panic!() };
        let expected = parse_impartial_type("forall 'z. rec[V] 'c. 1 +[V] ('z *[V] 'c)").unwrap();
        assert_eq!(p.ty, expected);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_impartial_expr("(\\x. x : 1 -[Q]> 1)").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col > 10);
    }

    #[test]
    fn target_terms() {
        let m = parse_target_term("(\\x. x, \\x. force x)").unwrap();
        assert_eq!(
            m,
            TargetTerm::pair(TargetTerm::lam("x", TargetTerm::var("x")), TargetTerm::lam("x", TargetTerm::force(TargetTerm::var("x"))))
        );
        let n = parse_target_term("(/\\. \\x. x) [] ()").unwrap();
        assert_eq!(
            n,
            TargetTerm::app(TargetTerm::tyapp(TargetTerm::tylam(TargetTerm::lam("x", TargetTerm::var("x")))), TargetTerm::Unit)
        );
        assert_eq!(parse_target_type("U 1 -> 1").unwrap(), TargetType::arrow(TargetType::thunk(TargetType::Unit), TargetType::Unit));
    }
}
