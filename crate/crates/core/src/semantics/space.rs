use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::{step_closed, Bundle, SemanticsError};
use crate::rational::Rational;
use crate::syntax::{self, Term};

pub type StateId = usize;

pub const DEFAULT_BOUND: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("state {source_state}: bundle target {target} out of range")]
    TargetOutOfRange { source_state: StateId, target: StateId },
    #[error("state {0}: random bundle is not a distribution of two or more proper branches")]
    BadDistribution(StateId),
}

/// A finite probabilistic transition system: per-state lists of bundles.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Lts {
    bundles: Vec<Vec<Bundle<StateId>>>,
}

impl Lts {
    /// Checks that every target exists and every random bundle is a
    /// distribution with two or more branches in (0,1).
    pub fn new(bundles: Vec<Vec<Bundle<StateId>>>) -> Result<Self, LtsError> {
        let n = bundles.len();
        for (s, out) in bundles.iter().enumerate() {
            for b in out {
                if let Some(&t) = b.targets().find(|&&t| t >= n) {
                    return Err(LtsError::TargetOutOfRange { source_state: s, target: t });
                }
                if let Bundle::Random(bs) = b {
                    let ok = bs.len() >= 2
                        && bs.iter().all(|(p, _)| p.is_proper_probability())
                        && bs.iter().map(|(p, _)| *p).sum::<Rational>() == Rational::ONE;
                    if !ok {
                        return Err(LtsError::BadDistribution(s));
                    }
                }
            }
        }
        Ok(Lts { bundles })
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn bundles(&self, s: StateId) -> &[Bundle<StateId>] {
        &self.bundles[s]
    }

    pub fn states(&self) -> core::ops::Range<StateId> {
        0..self.bundles.len()
    }

    pub fn has_random(&self) -> bool {
        self.bundles.iter().flatten().any(Bundle::is_random)
    }

    /// `self` followed by `other`, whose states are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &Lts) -> Lts {
        let off = self.len();
        let mut bundles = self.bundles.clone();
        bundles.extend(other.bundles.iter().map(|out| out.iter().map(|b| b.clone().map(|t| t + off)).collect()));
        Lts { bundles }
    }
}

/// The reachable part of the transition system of one or more closed terms.
///
/// States are alpha-normalized terms, pairwise distinct; `lts` holds exactly
/// the transitions [`super::step`] produces for each of them.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<Term>,
    pub roots: Vec<StateId>,
    pub lts: Lts,
    pub bound: usize,
}

impl StateSpace {
    pub fn root(&self) -> StateId {
        self.roots[0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Id of the state holding `t`, compared up to alpha-equivalence.
    pub fn find(&self, t: &Term) -> Option<StateId> {
        let n = syntax::alpha_normalize(t);
        self.states.iter().position(|s| *s == n)
    }
}

pub fn build_state_space(root: &Term, bound: usize) -> Result<StateSpace, SemanticsError> {
    build_joint_space(core::slice::from_ref(root), bound)
}

/// Breadth-first exploration from several roots over one shared state table.
pub fn build_joint_space(roots: &[Term], bound: usize) -> Result<StateSpace, SemanticsError> {
    for r in roots {
        syntax::validate(r)?;
        if !r.is_closed() {
            return Err(SemanticsError::OpenTerm);
        }
    }
    let mut table: BTreeMap<Term, StateId> = BTreeMap::new();
    let mut states: Vec<Term> = Vec::new();
    let mut queue = VecDeque::new();

    let mut intern = |t: Term, states: &mut Vec<Term>, queue: &mut VecDeque<StateId>| -> Result<StateId, SemanticsError> {
        let t = syntax::alpha_normalize(&t);
        if let Some(&id) = table.get(&t) {
            return Ok(id);
        }
        if states.len() >= bound {
            return Err(SemanticsError::BoundExceeded(bound));
        }
        let id = states.len();
        table.insert(t.clone(), id);
        states.push(t);
        queue.push_back(id);
        Ok(id)
    };

    let mut root_ids = Vec::with_capacity(roots.len());
    for r in roots {
        root_ids.push(intern(r.clone(), &mut states, &mut queue)?);
    }
    let mut bundles: Vec<Vec<Bundle<StateId>>> = Vec::new();
    while let Some(s) = queue.pop_front() {
        let out = step_closed(&states[s].clone());
        let mut ids = Vec::with_capacity(out.len());
        for b in out {
            let mapped = match b {
                Bundle::Visible(a, t) => Bundle::Visible(a, intern(t, &mut states, &mut queue)?),
                Bundle::Tau(t) => Bundle::Tau(intern(t, &mut states, &mut queue)?),
                Bundle::Random(bs) => {
                    let mut v = Vec::with_capacity(bs.len());
                    for (p, t) in bs {
                        v.push((p, intern(t, &mut states, &mut queue)?));
                    }
                    Bundle::Random(v)
                }
            };
            ids.push(mapped);
        }
        // states are dequeued in id order
        debug_assert_eq!(bundles.len(), s);
        bundles.push(ids);
    }
    Ok(StateSpace { states, roots: root_ids, lts: Lts { bundles }, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::step;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn omega_a_has_three_states() {
        let sp = build_state_space(&p("mu X. (tau.a.0 + tau.X)"), 100).unwrap();
        assert_eq!(sp.len(), 3);
        assert!(sp.find(&p("a")).is_some());
        assert!(sp.find(&p("0")).is_some());
    }

    #[test]
    fn omega_half_is_one_state() {
        let sp = build_state_space(&p("mu X. ((1/2)tau.X (+) (1/2)tau.X)"), 100).unwrap();
        assert_eq!(sp.len(), 1);
        let half = Rational::new(1, 2).unwrap();
        assert_eq!(sp.lts.bundles(0), &[Bundle::Random(alloc::vec![(half, 0), (half, 0)])]);
    }

    #[test]
    fn unbounded_growth_is_reported() {
        let err = build_state_space(&p("mu X. a.(X | X)"), 10).unwrap_err();
        assert_eq!(err, SemanticsError::BoundExceeded(10));
    }

    #[test]
    fn space_is_complete() {
        let sp = build_state_space(&p("(new b)(mu X. (b.X + a.X) | mu Y. 'b.Y)"), 100).unwrap();
        for s in sp.lts.states() {
            let want: Vec<_> = step(&sp.states[s])
                .unwrap()
                .into_iter()
                .map(|b| b.map(|t| sp.find(&t).expect("target interned")))
                .collect();
            assert_eq!(sp.lts.bundles(s), &want[..]);
        }
    }

    #[test]
    fn joint_space_shares_states() {
        let sp = build_joint_space(&[p("a"), p("tau.a")], 100).unwrap();
        assert_eq!(sp.roots, alloc::vec![0, 1]);
        assert_eq!(sp.len(), 3);
    }

    #[test]
    fn lts_validation() {
        assert!(Lts::new(alloc::vec![alloc::vec![Bundle::Tau(1)]]).is_err());
        let half = Rational::new(1, 2).unwrap();
        let third = Rational::new(1, 3).unwrap();
        assert!(Lts::new(alloc::vec![alloc::vec![Bundle::Random(alloc::vec![(half, 0), (third, 0)])]]).is_err());
        assert!(Lts::new(alloc::vec![alloc::vec![Bundle::Random(alloc::vec![(half, 0), (half, 0)])]]).is_ok());
    }
}
