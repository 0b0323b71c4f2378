use alloc::collections::BTreeSet;

use super::{Name, Term};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IllFormed {
    #[error("random choice probabilities do not sum to 1")]
    ProbSumNotOne,
    #[error("random choice probability outside (0,1)")]
    ProbOutOfRange,
    #[error("process variable {0} is not guarded in its fixpoint")]
    UnguardedVariable(Name),
    #[error("random choice needs at least two branches")]
    SingletonRandomChoice,
}

/// Checks every random choice (two or more branches, each in (0,1),
/// summing to exactly 1) and that every fixpoint variable is guarded.
pub fn validate(t: &Term) -> Result<(), IllFormed> {
    unguarded(t).map(|_| ())
}

/// Free variables of `t` with an occurrence outside any prefix or random
/// branch.
fn unguarded(t: &Term) -> Result<BTreeSet<Name>, IllFormed> {
    match t {
        Term::Var(x) => Ok(BTreeSet::from([x.clone()])),
        Term::Choice(bs) => {
            for (_, k) in bs {
                unguarded(k)?;
            }
            Ok(BTreeSet::new())
        }
        Term::Random(bs) => {
            if bs.len() < 2 {
                return Err(IllFormed::SingletonRandomChoice);
            }
            if bs.iter().any(|(p, _)| !p.is_proper_probability()) {
                return Err(IllFormed::ProbOutOfRange);
            }
            if bs.iter().map(|(p, _)| *p).sum::<Rational>() != Rational::ONE {
                return Err(IllFormed::ProbSumNotOne);
            }
            for (_, k) in bs {
                unguarded(k)?;
            }
            Ok(BTreeSet::new())
        }
        Term::Par(l, r) => {
            let mut s = unguarded(l)?;
            s.extend(unguarded(r)?);
            Ok(s)
        }
        Term::Restrict(_, body) => unguarded(body),
        Term::Fix(x, body) => {
            let mut s = unguarded(body)?;
            if s.remove(x) {
                return Err(IllFormed::UnguardedVariable(x.clone()));
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn guarded_under_prefix_and_random() {
        validate(&Term::fix("X", Term::input("a", Term::var("X")))).unwrap();
        let half = Rational::new(1, 2).unwrap();
        let t = Term::fix("X", Term::Random(vec![(half, Term::var("X")), (half, Term::nil())]));
        validate(&t).unwrap();
    }

    #[test]
    fn unguarded_is_rejected() {
        let t = Term::fix("X", Term::par(Term::var("X"), Term::nil()));
        assert_eq!(validate(&t), Err(IllFormed::UnguardedVariable(Name::new("X"))));
        let t = Term::fix("X", Term::restrict("a", Term::var("X")));
        assert!(validate(&t).is_err());
        // inner binder shadows
        let t = Term::fix("X", Term::input("a", Term::fix("X", Term::input("b", Term::var("X")))));
        validate(&t).unwrap();
    }

    #[test]
    fn random_arity_and_range() {
        let one = Rational::ONE;
        assert_eq!(validate(&Term::Random(vec![(one, Term::nil())])), Err(IllFormed::SingletonRandomChoice));
        let third = Rational::new(1, 3).unwrap();
        let t = Term::Random(vec![(third, Term::nil()), (third, Term::nil())]);
        assert_eq!(validate(&t), Err(IllFormed::ProbSumNotOne));
    }
}
