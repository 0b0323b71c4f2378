//! Structural operational semantics.
//!
//! [`step`] computes the outgoing transitions of a closed term. A random
//! choice fires as one collective silent transition, kept together as a
//! single [`Bundle::Random`] through parallel composition, restriction and
//! recursion. Random branches never synchronize.

mod space;

use alloc::vec::Vec;
use core::fmt;

use crate::rational::Rational;
use crate::syntax::{self, Name, Prefix, Term};

pub use space::{build_joint_space, build_state_space, Lts, LtsError, StateId, StateSpace, DEFAULT_BOUND};

/// A visible action.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Action {
    Input(Name),
    Output(Name),
}

impl Action {
    pub fn channel(&self) -> &Name {
        match self {
            Action::Input(a) | Action::Output(a) => a,
        }
    }

    pub fn complement(&self) -> Action {
        match self {
            Action::Input(a) => Action::Output(a.clone()),
            Action::Output(a) => Action::Input(a.clone()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Input(a) => write!(f, "{a}"),
            Action::Output(a) => write!(f, "'{a}"),
        }
    }
}

/// Transition label. `ProbTau(1)` is never built: see [`Label::prob_tau`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Label {
    Visible(Action),
    Tau,
    ProbTau(Rational),
}

impl Label {
    /// `p tau`, where a probability of one is the ordinary `tau`.
    pub fn prob_tau(p: Rational) -> Label {
        if p == Rational::ONE {
            Label::Tau
        } else {
            Label::ProbTau(p)
        }
    }

    pub fn is_silent(&self) -> bool {
        !matches!(self, Label::Visible(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Visible(a) => write!(f, "{a}"),
            Label::Tau => f.write_str("tau"),
            Label::ProbTau(p) => write!(f, "({p})tau"),
        }
    }
}

impl core::str::FromStr for Label {
    type Err = ();

    /// `a`, `'a` or `tau`.
    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "tau" {
            return Ok(Label::Tau);
        }
        let (out, name) = match s.strip_prefix('\'') {
            Some(rest) => (true, Name::new(rest)),
            None => (false, Name::new(s)),
        };
        if !name.is_channel() {
            return Err(());
        }
        Ok(Label::Visible(if out { Action::Output(name) } else { Action::Input(name) }))
    }
}

/// One firing of a transition rule. `T` is the target type: terms for
/// [`step`], state ids inside a [`StateSpace`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Bundle<T> {
    Visible(Action, T),
    Tau(T),
    /// A collective silent transition. Branches with equal targets stay
    /// separate.
    Random(Vec<(Rational, T)>),
}

impl<T> Bundle<T> {
    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Bundle<U> {
        match self {
            Bundle::Visible(a, t) => Bundle::Visible(a, f(t)),
            Bundle::Tau(t) => Bundle::Tau(f(t)),
            Bundle::Random(bs) => Bundle::Random(bs.into_iter().map(|(p, t)| (p, f(t))).collect()),
        }
    }

    pub fn targets(&self) -> impl Iterator<Item = &T> {
        let (single, many) = match self {
            Bundle::Visible(_, t) | Bundle::Tau(t) => (Some(t), &[][..]),
            Bundle::Random(bs) => (None, &bs[..]),
        };
        single.into_iter().chain(many.iter().map(|(_, t)| t))
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Bundle::Random(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("term has free process variables")]
    OpenTerm,
    #[error("ill-formed term: {0}")]
    IllFormed(#[from] syntax::IllFormed),
    #[error("state space exceeds {0} states")]
    BoundExceeded(usize),
}

/// All transitions of a closed term, in a fixed order: for a parallel
/// composition, communications first, then moves of the left component, then
/// moves of the right one.
pub fn step(t: &Term) -> Result<Vec<Bundle<Term>>, SemanticsError> {
    if !t.is_closed() {
        return Err(SemanticsError::OpenTerm);
    }
    Ok(step_closed(t))
}

pub(crate) fn step_closed(t: &Term) -> Vec<Bundle<Term>> {
    match t {
        Term::Var(_) => Vec::new(),
        Term::Choice(bs) => bs
            .iter()
            .map(|(p, k)| match p {
                Prefix::Input(a) => Bundle::Visible(Action::Input(a.clone()), k.clone()),
                Prefix::Output(a) => Bundle::Visible(Action::Output(a.clone()), k.clone()),
                Prefix::Tau => Bundle::Tau(k.clone()),
            })
            .collect(),
        Term::Random(bs) => alloc::vec![Bundle::Random(bs.clone())],
        Term::Par(l, r) => {
            let left = step_closed(l);
            let right = step_closed(r);
            let mut out = Vec::new();
            for bl in &left {
                let Bundle::Visible(al, tl) = bl else { continue };
                for br in &right {
                    if let Bundle::Visible(ar, tr) = br {
                        if *ar == al.complement() {
                            out.push(Bundle::Tau(Term::par(tl.clone(), tr.clone())));
                        }
                    }
                }
            }
            out.extend(left.into_iter().map(|b| b.map(|tl| Term::par(tl, (**r).clone()))));
            out.extend(right.into_iter().map(|b| b.map(|tr| Term::par((**l).clone(), tr))));
            out
        }
        Term::Restrict(a, body) => step_closed(body)
            .into_iter()
            .filter(|b| !matches!(b, Bundle::Visible(act, _) if act.channel() == a))
            .map(|b| b.map(|t| Term::Restrict(a.clone(), alloc::boxed::Box::new(t))))
            .collect(),
        Term::Fix(x, body) => step_closed(&syntax::substitute(body, x, t)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("visible label in a silent path")]
pub struct VisibleInPath;

/// Probability of a silent transition sequence: the product of the `p` of
/// every `p tau`, with `tau` counting as one.
pub fn seq_probability(path: &[Label]) -> Result<Rational, VisibleInPath> {
    path.iter().try_fold(Rational::ONE, |acc, l| match l {
        Label::Tau => Ok(acc),
        Label::ProbTau(p) => Ok(acc * *p),
        Label::Visible(_) => Err(VisibleInPath),
    })
}
