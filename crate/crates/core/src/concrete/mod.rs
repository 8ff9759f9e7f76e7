//! Concrete syntax: lexer, parser and pretty-printer, plus program files.

use std::fmt;

use thiserror::Error;

use crate::expr::{Annotation, Expr};
use crate::names::Name;

pub mod lexer;
pub mod parser;
pub mod pretty;

pub use parser::{
    parse_econ_expr, parse_econ_type, parse_impartial_expr, parse_impartial_type, parse_program, parse_target_term,
    parse_target_type, AnyProgram,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// The `#lang` header of a program file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lang {
    Impartial,
    Econ,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Impartial => "impartial",
            Lang::Econ => "econ",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Order(Name),
    Type(Name),
}

/// `type Name params = body`. The body mentions its parameters as free
/// variables; abbreviations used inside it are already expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeAbbrev<T> {
    pub name: String,
    pub params: Vec<Param>,
    pub body: T,
}

/// A parsed file: abbreviations in declaration order and the main
/// expression `(expr : ty)` with every abbreviation expanded.
#[derive(Clone, Debug)]
pub struct Program<T> {
    pub lang: Lang,
    pub abbrevs: Vec<TypeAbbrev<T>>,
    pub expr: Expr<T>,
    pub ty: T,
}

impl<T: Annotation> PartialEq for Program<T> {
    fn eq(&self, other: &Self) -> bool {
        self.lang == other.lang && self.abbrevs == other.abbrevs && self.expr == other.expr && self.ty == other.ty
    }
}

impl<T: fmt::Display> fmt::Display for Program<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "#lang {}", self.lang)?;
        for a in &self.abbrevs {
            write!(f, "type {}", a.name)?;
            for p in &a.params {
                match p {
                    Param::Order(n) => write!(f, " %{n}")?,
                    Param::Type(n) => write!(f, " '{n}")?,
                }
            }
            writeln!(f, " = {}", a.body)?;
        }
        writeln!(f, "({} : {})", self.expr, self.ty)
    }
}
