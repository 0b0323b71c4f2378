//! Free names, capture-avoiding substitution and alpha-normalization.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::{Name, Prefix, Term};

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free_vars(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free_vars(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Choice(bs) => bs.iter().for_each(|(_, k)| collect_free_vars(k, bound, out)),
        Term::Random(bs) => bs.iter().for_each(|(_, k)| collect_free_vars(k, bound, out)),
        Term::Par(l, r) => {
            collect_free_vars(l, bound, out);
            collect_free_vars(r, bound, out);
        }
        Term::Restrict(_, body) => collect_free_vars(body, bound, out),
        Term::Fix(x, body) => {
            bound.push(x.clone());
            collect_free_vars(body, bound, out);
            bound.pop();
        }
    }
}

pub fn free_channels(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free_channels(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free_channels(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(_) => {}
        Term::Choice(bs) => {
            for (p, k) in bs {
                if let Some(a) = p.channel() {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
                collect_free_channels(k, bound, out);
            }
        }
        Term::Random(bs) => bs.iter().for_each(|(_, k)| collect_free_channels(k, bound, out)),
        Term::Par(l, r) => {
            collect_free_channels(l, bound, out);
            collect_free_channels(r, bound, out);
        }
        Term::Restrict(a, body) => {
            bound.push(a.clone());
            collect_free_channels(body, bound, out);
            bound.pop();
        }
        Term::Fix(_, body) => collect_free_channels(body, bound, out),
    }
}

/// Every identifier occurring anywhere in `t`, bound or free.
fn all_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Choice(bs) => {
            for (p, k) in bs {
                if let Some(a) = p.channel() {
                    out.insert(a.clone());
                }
                all_names(k, out);
            }
        }
        Term::Random(bs) => bs.iter().for_each(|(_, k)| all_names(k, out)),
        Term::Par(l, r) => {
            all_names(l, out);
            all_names(r, out);
        }
        Term::Restrict(x, body) | Term::Fix(x, body) => {
            out.insert(x.clone());
            all_names(body, out);
        }
    }
}

fn fresh(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    (1..)
        .map(|i| Name::new(format!("{base}_{i}")))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

/// Renames free occurrences of channel `from` to `to`. `to` must not occur
/// in `t` at all.
pub fn rename_channel(t: &Term, from: &Name, to: &Name) -> Term {
    let swap = |a: &Name| if a == from { to.clone() } else { a.clone() };
    match t {
        Term::Var(_) => t.clone(),
        Term::Choice(bs) => Term::Choice(
            bs.iter()
                .map(|(p, k)| {
                    let p = match p {
                        Prefix::Input(a) => Prefix::Input(swap(a)),
                        Prefix::Output(a) => Prefix::Output(swap(a)),
                        Prefix::Tau => Prefix::Tau,
                    };
                    (p, rename_channel(k, from, to))
                })
                .collect(),
        ),
        Term::Random(bs) => Term::Random(bs.iter().map(|(p, k)| (*p, rename_channel(k, from, to))).collect()),
        Term::Par(l, r) => Term::par(rename_channel(l, from, to), rename_channel(r, from, to)),
        Term::Restrict(a, _) if a == from => t.clone(),
        Term::Restrict(a, body) => Term::Restrict(a.clone(), Box::new(rename_channel(body, from, to))),
        Term::Fix(x, body) => Term::Fix(x.clone(), Box::new(rename_channel(body, from, to))),
    }
}

/// `t{replacement/var}`, alpha-renaming binders of `t` that would capture a
/// free variable or free channel of `replacement`.
pub fn substitute(t: &Term, var: &Name, replacement: &Term) -> Term {
    let fv = free_vars(replacement);
    let fc = free_channels(replacement);
    subst(t, var, replacement, &fv, &fc)
}

fn subst(t: &Term, var: &Name, r: &Term, fv: &BTreeSet<Name>, fc: &BTreeSet<Name>) -> Term {
    match t {
        Term::Var(x) if x == var => r.clone(),
        Term::Var(_) => t.clone(),
        Term::Choice(bs) => Term::Choice(bs.iter().map(|(p, k)| (p.clone(), subst(k, var, r, fv, fc))).collect()),
        Term::Random(bs) => Term::Random(bs.iter().map(|(p, k)| (*p, subst(k, var, r, fv, fc))).collect()),
        Term::Par(a, b) => Term::par(subst(a, var, r, fv, fc), subst(b, var, r, fv, fc)),
        Term::Restrict(a, body) => {
            if !free_vars(body).contains(var) {
                return t.clone();
            }
            if fc.contains(a) {
                let mut avoid = fc.clone();
                all_names(body, &mut avoid);
                avoid.insert(a.clone());
                let a2 = fresh(a, &avoid);
                let body = rename_channel(body, a, &a2);
                Term::Restrict(a2, Box::new(subst(&body, var, r, fv, fc)))
            } else {
                Term::Restrict(a.clone(), Box::new(subst(body, var, r, fv, fc)))
            }
        }
        Term::Fix(x, _) if x == var => t.clone(),
        Term::Fix(x, body) => {
            if !free_vars(body).contains(var) {
                return t.clone();
            }
            if fv.contains(x) {
                let mut avoid = fv.clone();
                all_names(body, &mut avoid);
                avoid.insert(var.clone());
                let x2 = fresh(x, &avoid);
                let body = subst(body, x, &Term::Var(x2.clone()), &BTreeSet::from([x2.clone()]), &BTreeSet::new());
                Term::Fix(x2, Box::new(subst(&body, var, r, fv, fc)))
            } else {
                Term::Fix(x.clone(), Box::new(subst(body, var, r, fv, fc)))
            }
        }
    }
}

/// Canonical names for a binder nesting level, skipping names that occur
/// free in the whole term.
struct Supply {
    prefix: &'static str,
    taken: BTreeSet<Name>,
    names: Vec<Name>,
    next: usize,
}

impl Supply {
    fn new(prefix: &'static str, taken: BTreeSet<Name>) -> Self {
        Supply { prefix, taken, names: Vec::new(), next: 0 }
    }

    fn at_level(&mut self, level: usize) -> Name {
        while self.names.len() <= level {
            let n = Name::new(format!("{}{}", self.prefix, self.next));
            self.next += 1;
            if !self.taken.contains(&n) {
                self.names.push(n);
            }
        }
        self.names[level].clone()
    }
}

/// Renames every bound variable to `X<k>` and every restricted channel to
/// `c<k>`, where `k` counts enclosing binders of the same sort (indices that
/// would clash with a free name are skipped). Alpha-equivalent terms map to
/// identical ASTs.
pub fn alpha_normalize(t: &Term) -> Term {
    let mut n = Normalizer {
        vars: Supply::new("X", free_vars(t)),
        chans: Supply::new("c", free_channels(t)),
        venv: Vec::new(),
        cenv: Vec::new(),
    };
    n.term(t)
}

struct Normalizer {
    vars: Supply,
    chans: Supply,
    // innermost binding last; its index is the nesting level
    venv: Vec<(Name, Name)>,
    cenv: Vec<(Name, Name)>,
}

fn lookup(env: &[(Name, Name)], x: &Name) -> Name {
    env.iter().rev().find(|(k, _)| k == x).map_or_else(|| x.clone(), |(_, v)| v.clone())
}

impl Normalizer {
    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(x) => Term::Var(lookup(&self.venv, x)),
            Term::Choice(bs) => Term::Choice(
                bs.iter()
                    .map(|(p, k)| {
                        let p = match p {
                            Prefix::Input(a) => Prefix::Input(lookup(&self.cenv, a)),
                            Prefix::Output(a) => Prefix::Output(lookup(&self.cenv, a)),
                            Prefix::Tau => Prefix::Tau,
                        };
                        (p, self.term(k))
                    })
                    .collect(),
            ),
            Term::Random(bs) => Term::Random(bs.iter().map(|(p, k)| (*p, self.term(k))).collect()),
            Term::Par(l, r) => {
                let l = self.term(l);
                let r = self.term(r);
                Term::par(l, r)
            }
            Term::Restrict(a, body) => {
                let fresh = self.chans.at_level(self.cenv.len());
                self.cenv.push((a.clone(), fresh.clone()));
                let body = self.term(body);
                self.cenv.pop();
                Term::Restrict(fresh, Box::new(body))
            }
            Term::Fix(x, body) => {
                let fresh = self.vars.at_level(self.venv.len());
                self.venv.push((x.clone(), fresh.clone()));
                let body = self.term(body);
                self.venv.pop();
                Term::Fix(fresh, Box::new(body))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(free_vars(&Term::var("X")), BTreeSet::from([Name::new("X")]));
        assert!(free_vars(&p("mu X. (tau.a.0 + tau.X)")).is_empty());
        let t = Term::par(Term::var("X"), Term::fix("X", Term::input("a", Term::var("X"))));
        assert_eq!(free_vars(&t), BTreeSet::from([Name::new("X")]));
    }

    #[test]
    fn free_channels_respect_restriction() {
        let t = p("(new b)('b | a.b)");
        assert_eq!(free_channels(&t), BTreeSet::from([Name::new("a")]));
    }

    #[test]
    fn substitute_examples() {
        let x = Name::new("X");
        assert_eq!(substitute(&Term::var("X"), &x, &Term::nil()), Term::nil());

        let omega_a = p("mu X. (tau.a.0 + tau.X)");
        let Term::Fix(_, body) = &omega_a else { unreachable!() };
        let unfolded = substitute(body, &x, &omega_a);
        assert_eq!(unfolded, Term::sum([Term::tau(p("a.0")), Term::tau(omega_a.clone())]));

        let bound = p("mu X. a.X");
        assert_eq!(substitute(&bound, &x, &p("b")), bound);
    }

    #[test]
    fn substitute_avoids_channel_capture() {
        // (new b)(c.X){b.0/X}: the free b of the replacement must stay free
        let t = Term::restrict("b", Term::input("c", Term::var("X")));
        let out = substitute(&t, &Name::new("X"), &p("b"));
        let Term::Restrict(a, body) = &out else { panic!() };
        assert_ne!(a.as_str(), "b");
        assert_eq!(free_channels(&out), BTreeSet::from([Name::new("b"), Name::new("c")]));
        assert_eq!(**body, Term::input("c", p("b")));
    }

    #[test]
    fn substitute_avoids_variable_capture() {
        // (mu Y. a.(X | Y)){Y/X}
        let t = Term::fix("Y", Term::input("a", Term::par(Term::var("X"), Term::var("Y"))));
        let out = substitute(&t, &Name::new("X"), &Term::var("Y"));
        assert_eq!(free_vars(&out), BTreeSet::from([Name::new("Y")]));
        assert_ne!(alpha_normalize(&out), alpha_normalize(&t));
    }

    #[test]
    fn alpha_examples() {
        let t = Term::fix("Y", Term::input("a", Term::var("Y")));
        assert_eq!(alpha_normalize(&t), Term::fix("X0", Term::input("a", Term::var("X0"))));
        let t = p("(new b)'b");
        assert_eq!(alpha_normalize(&t), Term::restrict("c0", Term::output("c0", Term::nil())));
    }

    #[test]
    fn alpha_avoids_free_names() {
        // c0 free: the bound channel must not be renamed onto it
        let t = p("(new b)('b | c0)");
        let n = alpha_normalize(&t);
        assert_eq!(n, p("(new c1)('c1 | c0)"));
        assert_eq!(free_channels(&n), free_channels(&t));
    }

    #[test]
    fn alpha_nested_and_sibling_binders() {
        let t = p("mu Y. a.mu Z. b.(Y | Z)");
        assert_eq!(alpha_normalize(&t), p("mu X0. a.mu X1. b.(X0 | X1)"));
        let t = p("(new x)x | (new y)'y");
        assert_eq!(alpha_normalize(&t), p("(new c0)c0 | (new c0)'c0"));
        // shadowing
        let t = p("(new a)(a | (new a)'a)");
        assert_eq!(alpha_normalize(&t), p("(new c0)(c0 | (new c1)'c1)"));
    }
}
