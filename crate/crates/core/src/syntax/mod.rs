//! Abstract syntax of CCS extended with random silent choice.
//!
//! Concrete syntax (ASCII):
//!
//! ```text
//! term     := "0" | var | choice | random | par | restrict | fix | "(" term ")"
//! choice   := prefixed ("+" prefixed)*     prefixed := action "." term | action
//! action   := name | "'" name | "tau"
//! random   := rbranch ("(+)" rbranch)+     rbranch  := "(" rational ")" "tau" "." term
//! par      := term "|" term                restrict := "(" "new" name ")" term
//! fix      := "mu" pvar "." term
//! ```
//!
//! Prefixes, restrictions and fixpoints bind tighter than `|`, which binds
//! tighter than `+` and `(+)`. Channels start with a lowercase letter,
//! process variables with an uppercase one.

mod names;
mod parse;
mod print;
mod wf;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rational::Rational;

pub use names::{alpha_normalize, free_channels, free_vars, rename_channel, substitute};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use wf::{validate, IllFormed};

/// Channel or process-variable identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

const KEYWORDS: [&str; 3] = ["tau", "mu", "new"];

impl Name {
    /// Wraps `text` without checking the lexical class.
    pub fn new(text: impl Into<String>) -> Self {
        Name(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_ident(s: &str) -> bool {
        let mut chars = s.chars();
        chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    /// `[a-z][A-Za-z0-9_]*`, excluding the keywords `tau`, `mu`, `new`.
    pub fn is_channel(&self) -> bool {
        Self::is_ident(&self.0)
            && self.0.starts_with(|c: char| c.is_ascii_lowercase())
            && !KEYWORDS.contains(&self.0.as_str())
    }

    /// `[A-Z][A-Za-z0-9_]*`
    pub fn is_var(&self) -> bool {
        Self::is_ident(&self.0) && self.0.starts_with(|c: char| c.is_ascii_uppercase())
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// An action prefix: input `a`, output `'a`, or `tau`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Prefix {
    Input(Name),
    Output(Name),
    Tau,
}

impl Prefix {
    pub fn channel(&self) -> Option<&Name> {
        match self {
            Prefix::Input(a) | Prefix::Output(a) => Some(a),
            Prefix::Tau => None,
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Input(a) => write!(f, "{a}"),
            Prefix::Output(a) => write!(f, "'{a}"),
            Prefix::Tau => f.write_str("tau"),
        }
    }
}

/// A CCS/RCCS term.
///
/// Index sets are ordered lists; duplicate summands are kept.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Name),
    /// Guarded sum `Σ α_i.T_i`; the empty sum is `0`.
    Choice(Vec<(Prefix, Term)>),
    /// Random silent choice `⊕ p_i tau.T_i`.
    Random(Vec<(Rational, Term)>),
    Par(Box<Term>, Box<Term>),
    Restrict(Name, Box<Term>),
    Fix(Name, Box<Term>),
}

impl Term {
    pub fn nil() -> Term {
        Term::Choice(Vec::new())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Name::new(name))
    }

    pub fn prefixed(prefix: Prefix, continuation: Term) -> Term {
        Term::Choice(vec![(prefix, continuation)])
    }

    pub fn input(channel: &str, continuation: Term) -> Term {
        Term::prefixed(Prefix::Input(Name::new(channel)), continuation)
    }

    pub fn output(channel: &str, continuation: Term) -> Term {
        Term::prefixed(Prefix::Output(Name::new(channel)), continuation)
    }

    pub fn tau(continuation: Term) -> Term {
        Term::prefixed(Prefix::Tau, continuation)
    }

    pub fn par(left: Term, right: Term) -> Term {
        Term::Par(Box::new(left), Box::new(right))
    }

    pub fn restrict(channel: &str, body: Term) -> Term {
        Term::Restrict(Name::new(channel), Box::new(body))
    }

    pub fn fix(var: &str, body: Term) -> Term {
        Term::Fix(Name::new(var), Box::new(body))
    }

    /// Sum of two or more guarded terms; panics if an operand is not a `Choice`.
    pub fn sum(operands: impl IntoIterator<Item = Term>) -> Term {
        let mut branches = Vec::new();
        for t in operands {
            match t {
                Term::Choice(bs) => branches.extend(bs),
                other => panic!("operand of a sum must be guarded: {other}"),
            }
        }
        Term::Choice(branches)
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Choice(bs) if bs.is_empty())
    }

    /// True when the term contains no random choice anywhere.
    pub fn is_ccs(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Choice(bs) => bs.iter().all(|(_, t)| t.is_ccs()),
            Term::Random(_) => false,
            Term::Par(l, r) => l.is_ccs() && r.is_ccs(),
            Term::Restrict(_, t) | Term::Fix(_, t) => t.is_ccs(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Term::Var(_) => 0,
            Term::Choice(bs) => bs.iter().map(|(_, t)| t.size()).sum(),
            Term::Random(bs) => bs.iter().map(|(_, t)| t.size()).sum(),
            Term::Par(l, r) => l.size() + r.size(),
            Term::Restrict(_, t) | Term::Fix(_, t) => t.size(),
        }
    }

    pub fn is_closed(&self) -> bool {
        free_vars(self).is_empty()
    }
}

impl core::str::FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
