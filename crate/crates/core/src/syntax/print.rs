use core::fmt::{self, Write};

use super::{Prefix, Term};

// Printing contexts, loosest first.
const SUM: u8 = 0;
const PAR_LEFT: u8 = 1;
const UNARY: u8 = 2;

fn branch(f: &mut fmt::Formatter<'_>, prefix: &Prefix, k: &Term) -> fmt::Result {
    write!(f, "{prefix}.")?;
    write_term(f, k, UNARY)
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, ctx: u8) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Choice(bs) if bs.is_empty() => f.write_char('0'),
        Term::Choice(bs) if bs.len() == 1 => branch(f, &bs[0].0, &bs[0].1),
        Term::Choice(bs) => {
            let paren = ctx > SUM;
            if paren {
                f.write_char('(')?;
            }
            for (i, (p, k)) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                branch(f, p, k)?;
            }
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::Random(bs) => {
            let paren = ctx > SUM;
            if paren {
                f.write_char('(')?;
            }
            for (i, (p, k)) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" (+) ")?;
                }
                write!(f, "({p})tau.")?;
                write_term(f, k, UNARY)?;
            }
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::Par(l, r) => {
            let paren = ctx > PAR_LEFT;
            if paren {
                f.write_char('(')?;
            }
            write_term(f, l, PAR_LEFT)?;
            f.write_str(" | ")?;
            write_term(f, r, UNARY)?;
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::Restrict(a, body) => {
            write!(f, "(new {a})")?;
            write_term(f, body, UNARY)
        }
        Term::Fix(x, body) => {
            write!(f, "mu {x}. ")?;
            write_term(f, body, UNARY)
        }
    }
}

/// Canonical concrete syntax; `parse` inverts it exactly.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, SUM)
    }
}
