use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::wf::{self, IllFormed};
use super::{Name, Prefix, Term};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("ill-formed term: {0}")]
    IllFormed(IllFormed),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u128),
    LParen,
    RParen,
    Dot,
    Plus,
    OPlus,
    Bar,
    Quote,
    Slash,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Plus => "`+`".into(),
        Tok::OPlus => "`(+)`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Quote => "`'`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' if bytes[i..].starts_with(b"(+)") => {
                i += 3;
                Tok::OPlus
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'|' => {
                i += 1;
                Tok::Bar
            }
            b'\'' => {
                i += 1;
                Tok::Quote
            }
            b'/' => {
                i += 1;
                Tok::Slash
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::Syntax("integer literal too large".into()),
                })?;
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                });
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Result of parsing below the sum level: a random branch is only
/// meaningful as an operand of `(+)`.
enum Item {
    Term(Term),
    Branch(Rational, Term),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, at: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: at, kind: ParseErrorKind::Syntax(msg.into()) })
    }

    fn ill<T>(&self, at: usize, reason: IllFormed) -> Result<T, ParseError> {
        Err(ParseError { position: at, kind: ParseErrorKind::IllFormed(reason) })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.syntax(
                self.offset(),
                format!("expected {}, found {}", describe(&want), describe(self.peek())),
            )
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => {
                self.syntax(self.offset(), format!("expected `{kw}`, found {}", describe(other)))
            }
        }
    }

    fn channel(&mut self) -> Result<Name, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Ident(s) => {
                let n = Name::new(s);
                if n.is_channel() {
                    Ok(n)
                } else {
                    self.syntax(at, format!("`{n}` is not a channel name"))
                }
            }
            other => self.syntax(at, format!("expected a channel name, found {}", describe(&other))),
        }
    }

    fn var_name(&mut self) -> Result<Name, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Ident(s) => {
                let n = Name::new(s);
                if n.is_var() {
                    Ok(n)
                } else {
                    self.syntax(at, format!("`{n}` is not a process variable"))
                }
            }
            other => {
                self.syntax(at, format!("expected a process variable, found {}", describe(&other)))
            }
        }
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let first_at = self.offset();
        let first = self.par()?;
        match self.peek() {
            Tok::Plus => {
                let mut branches = match first {
                    Item::Term(Term::Choice(bs)) => bs,
                    _ => return self.syntax(first_at, "operand of `+` must be a prefixed term"),
                };
                while *self.peek() == Tok::Plus {
                    self.bump();
                    let at = self.offset();
                    match self.par()? {
                        Item::Term(Term::Choice(bs)) => branches.extend(bs),
                        _ => return self.syntax(at, "operand of `+` must be a prefixed term"),
                    }
                }
                if *self.peek() == Tok::OPlus {
                    return self.syntax(self.offset(), "`+` and `(+)` cannot be mixed without parentheses");
                }
                Ok(Term::Choice(branches))
            }
            Tok::OPlus => {
                let mut branches = match first {
                    Item::Branch(p, t) => alloc::vec![(p, t)],
                    _ => {
                        return self.syntax(first_at, "operand of `(+)` must be a random branch `(p)tau.T`")
                    }
                };
                while *self.peek() == Tok::OPlus {
                    self.bump();
                    let at = self.offset();
                    match self.par()? {
                        Item::Branch(p, t) => branches.push((p, t)),
                        _ => {
                            return self.syntax(at, "operand of `(+)` must be a random branch `(p)tau.T`")
                        }
                    }
                }
                if *self.peek() == Tok::Plus {
                    return self.syntax(self.offset(), "`+` and `(+)` cannot be mixed without parentheses");
                }
                let total: Rational = branches.iter().map(|(p, _)| *p).sum();
                if total != Rational::ONE {
                    return self.ill(first_at, IllFormed::ProbSumNotOne);
                }
                Ok(Term::Random(branches))
            }
            _ => match first {
                Item::Term(t) => Ok(t),
                Item::Branch(..) => self.ill(first_at, IllFormed::SingletonRandomChoice),
            },
        }
    }

    fn par(&mut self) -> Result<Item, ParseError> {
        let first_at = self.offset();
        let first = self.unary()?;
        if *self.peek() != Tok::Bar {
            return Ok(first);
        }
        let mut acc = match first {
            Item::Term(t) => t,
            Item::Branch(..) => return self.syntax(first_at, "a random branch must be an operand of `(+)`"),
        };
        while *self.peek() == Tok::Bar {
            self.bump();
            let at = self.offset();
            match self.unary()? {
                Item::Term(t) => acc = Term::Par(Box::new(acc), Box::new(t)),
                Item::Branch(..) => return self.syntax(at, "a random branch must be an operand of `(+)`"),
            }
        }
        Ok(Item::Term(acc))
    }

    fn unary_term(&mut self) -> Result<Term, ParseError> {
        let at = self.offset();
        match self.unary()? {
            Item::Term(t) => Ok(t),
            Item::Branch(..) => self.syntax(at, "a random branch must be an operand of `(+)`"),
        }
    }

    /// Continuation after an action; a missing `.T` means `.0`.
    fn continuation(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Dot {
            self.bump();
            self.unary_term()
        } else {
            Ok(Term::nil())
        }
    }

    fn unary(&mut self) -> Result<Item, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Item::Term(Term::nil()))
            }
            Tok::Quote => {
                self.bump();
                let a = self.channel()?;
                let k = self.continuation()?;
                Ok(Item::Term(Term::prefixed(Prefix::Output(a), k)))
            }
            Tok::Ident(s) if s == "tau" => {
                self.bump();
                let k = self.continuation()?;
                Ok(Item::Term(Term::prefixed(Prefix::Tau, k)))
            }
            Tok::Ident(s) if s == "mu" => {
                self.bump();
                let x = self.var_name()?;
                self.expect(Tok::Dot)?;
                let body = self.unary_term()?;
                Ok(Item::Term(Term::Fix(x, Box::new(body))))
            }
            Tok::Ident(s) if s == "new" => self.syntax(at, "`new` must appear as `(new a)`"),
            Tok::Ident(s) => {
                let n = Name::new(s);
                self.bump();
                if n.is_var() {
                    Ok(Item::Term(Term::Var(n)))
                } else {
                    let k = self.continuation()?;
                    Ok(Item::Term(Term::prefixed(Prefix::Input(n), k)))
                }
            }
            Tok::LParen => match (self.peek_at(1).clone(), self.peek_at(2).clone()) {
                (Tok::Ident(s), _) if s == "new" => {
                    self.bump();
                    self.bump();
                    let a = self.channel()?;
                    self.expect(Tok::RParen)?;
                    let body = self.unary_term()?;
                    Ok(Item::Term(Term::Restrict(a, Box::new(body))))
                }
                (Tok::Int(_), Tok::Slash) => {
                    self.bump();
                    let p = self.rational()?;
                    self.expect(Tok::RParen)?;
                    if !p.is_proper_probability() {
                        return self.ill(at, IllFormed::ProbOutOfRange);
                    }
                    self.keyword("tau")?;
                    let k = self.continuation()?;
                    Ok(Item::Branch(p, k))
                }
                _ => {
                    self.bump();
                    let t = self.sum()?;
                    self.expect(Tok::RParen)?;
                    Ok(Item::Term(t))
                }
            },
            other => self.syntax(at, format!("expected a term, found {}", describe(&other))),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let at = self.offset();
        let n = match self.bump() {
            Tok::Int(n) => n,
            other => return self.syntax(at, format!("expected an integer, found {}", describe(&other))),
        };
        self.expect(Tok::Slash)?;
        let dat = self.offset();
        let d = match self.bump() {
            Tok::Int(d) => d,
            other => return self.syntax(dat, format!("expected an integer, found {}", describe(&other))),
        };
        let (Ok(n), Ok(d)) = (i128::try_from(n), i128::try_from(d)) else {
            return self.syntax(at, "rational literal too large");
        };
        match Rational::new(n, d) {
            Some(p) => Ok(p),
            None => self.syntax(dat, "zero denominator"),
        }
    }
}

/// Parses a term and checks it is well formed (probability sums and
/// guarded recursion). Open terms are accepted.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.sum()?;
    if *p.peek() != Tok::Eof {
        return p.syntax(p.offset(), format!("unexpected {}", describe(p.peek())));
    }
    wf::validate(&t).map_err(|reason| ParseError { position: 0, kind: ParseErrorKind::IllFormed(reason) })?;
    Ok(t)
}
