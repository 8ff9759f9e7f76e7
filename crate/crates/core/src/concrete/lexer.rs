use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `'a`
    TyVar(String),
    /// `%a`
    EoVar(String),
    Int(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Backslash,
    BigLambda,
    Bar,
    Arrow,
    Minus,
    Gt,
    Star,
    Plus,
    Eq,
    /// `#lang NAME`
    Lang(String),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::TyVar(s) => write!(f, "`'{s}`"),
            Tok::EoVar(s) => write!(f, "`%{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Lang(s) => write!(f, "`#lang {s}`"),
            Tok::Eof => write!(f, "end of input"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrack => "[",
                    Tok::RBrack => "]",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Colon => ":",
                    Tok::Dot => ".",
                    Tok::Backslash => "\\",
                    Tok::BigLambda => "/\\",
                    Tok::Bar => "|",
                    Tok::Arrow => "->",
                    Tok::Minus => "-",
                    Tok::Gt => ">",
                    Tok::Star => "*",
                    Tok::Plus => "+",
                    Tok::Eq => "=",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, message: msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let take_ident = |start: usize| {
            let mut j = start;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            (chars[start..j].iter().collect::<String>(), j)
        };
        let tok = if c == '#' {
            let (word, j) = take_ident(i + 1);
            if word != "lang" {
                return Err(err(l0, c0, "expected `#lang`".into()));
            }
            let mut k = j;
            while k < chars.len() && chars[k] == ' ' {
                k += 1;
            }
            let (name, end) = take_ident(k);
            if name.is_empty() {
                return Err(err(l0, c0, "expected a language name after `#lang`".into()));
            }
            col += end - i;
            i = end;
            out.push(Spanned { tok: Tok::Lang(name), line: l0, col: c0 });
            continue;
        } else if c == '\'' || c == '%' {
            let (word, j) = take_ident(i + 1);
            if word.is_empty() {
                return Err(err(l0, c0, format!("expected a variable name after `{c}`")));
            }
            col += j - i;
            i = j;
            out.push(Spanned { tok: if c == '\'' { Tok::TyVar(word) } else { Tok::EoVar(word) }, line: l0, col: c0 });
            continue;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let n: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            out.push(Spanned {
                tok: Tok::Int(n.parse().map_err(|_| err(l0, c0, "number too large".into()))?),
                line: l0,
                col: c0,
            });
            continue;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let (word, j) = take_ident(i);
            col += j - i;
            i = j;
            out.push(Spanned { tok: Tok::Ident(word), line: l0, col: c0 });
            continue;
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match two.as_str() {
                "->" => {
                    advance(2, &mut i, &mut col);
                    Tok::Arrow
                }
                "/\\" => {
                    advance(2, &mut i, &mut col);
                    Tok::BigLambda
                }
                _ => {
                    advance(1, &mut i, &mut col);
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        ':' => Tok::Colon,
                        '.' => Tok::Dot,
                        '\\' => Tok::Backslash,
                        '|' => Tok::Bar,
                        '-' => Tok::Minus,
                        '>' => Tok::Gt,
                        '*' => Tok::Star,
                        '+' => Tok::Plus,
                        '=' => Tok::Eq,
                        other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
                    }
                }
            }
        };
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arrow_forms() {
        let toks: Vec<Tok> = lex("1 -[N]> 1 -> 'a").unwrap().into_iter().map(|s| s.tok).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Int(1),
                Tok::Minus,
                Tok::LBrack,
                Tok::Ident("N".into()),
                Tok::RBrack,
                Tok::Gt,
                Tok::Int(1),
                Tok::Arrow,
                Tok::TyVar("a".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn skips_comments_and_tracks_lines() {
        let toks = lex("-- note\n  x").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("x".into()));
        assert_eq!((toks[0].line, toks[0].col), (2, 3));
    }
}
