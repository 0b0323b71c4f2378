//! Brute-force ground truth for small state spaces.
//!
//! [`is_branching_bisim`] checks the bisimulation clauses and codivergence
//! for one candidate partition directly, over every label, every block and
//! every probability occurring anywhere in the system.
//! [`coarsest_by_enumeration`] runs it over all partitions of the states.
//! [`ccs_refine`] is the classical checker for random-free systems, built
//! on plain `tau`-reachability inside blocks.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::equivalence::{has_divergent_tree, has_ell_transition, has_q_transition, weighted_prob, Partition};
use crate::rational::Rational;
use crate::semantics::{build_joint_space, Action, Bundle, Label, Lts, SemanticsError, StateId};
use crate::syntax::Term;

pub const DEFAULT_ORACLE_BOUND: usize = 8;
pub const HARD_ORACLE_BOUND: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{states} states exceed the oracle bound {bound}")]
    OracleBoundExceeded { states: usize, bound: usize },
    #[error("the CCS checker does not accept random choice")]
    RandomTermInCCSOracle,
    #[error("the join of all passing partitions is not a bisimulation")]
    JoinNotBisimulation,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

fn check_bound(n: usize, bound: usize) -> Result<(), OracleError> {
    if n > bound.min(HARD_ORACLE_BOUND) {
        return Err(OracleError::OracleBoundExceeded { states: n, bound: bound.min(HARD_ORACLE_BOUND) });
    }
    Ok(())
}

/// All partitions of `0..n` as restricted growth strings, in lexicographic
/// order.
pub struct Partitions {
    rgs: Vec<usize>,
    max: Vec<usize>,
    done: bool,
}

impl Partitions {
    pub fn new(n: usize) -> Self {
        Partitions { rgs: alloc::vec![0; n], max: alloc::vec![0; n], done: false }
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let out = Partition::from_labels(self.rgs.iter().copied());
        // max[i] = largest label among rgs[0..i]
        let n = self.rgs.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.max[i] {
                self.rgs[i] += 1;
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.max[j] = self.max[j - 1].max(self.rgs[j - 1]);
                }
                break;
            }
        }
        Some(out)
    }
}

fn visible_actions(lts: &Lts) -> BTreeSet<Action> {
    lts.states()
        .flat_map(|s| lts.bundles(s).iter())
        .filter_map(|b| match b {
            Bundle::Visible(a, _) => Some(a.clone()),
            _ => None,
        })
        .collect()
}

/// Every weighted probability some random bundle realizes under `p`.
fn weighted_probs(lts: &Lts, p: &Partition) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for s in lts.states() {
        for i in 0..lts.bundles(s).len() {
            for c in 0..p.num_blocks() {
                if let Ok(Some(q)) = weighted_prob(lts, p, s, i, c) {
                    out.insert(q);
                }
            }
        }
    }
    out
}

/// All members of every block agree on a predicate.
fn uniform(p: &Partition, mut f: impl FnMut(StateId) -> bool) -> bool {
    p.blocks().iter().all(|b| {
        let first = f(b[0]);
        b[1..].iter().all(|&x| f(x) == first)
    })
}

fn passes(lts: &Lts, p: &Partition, actions: &BTreeSet<Action>) -> bool {
    let nb = p.num_blocks();
    let ells = actions.iter().cloned().map(Label::Visible);
    for l in ells {
        for c in 0..nb {
            if !uniform(p, |x| has_ell_transition(lts, p, x, &l, c).expect("visible label")) {
                return false;
            }
        }
    }
    for c in 0..nb {
        let ok = uniform(p, |x| p.block_of(x) == c || has_ell_transition(lts, p, x, &Label::Tau, c).expect("other block"));
        if !ok {
            return false;
        }
    }
    for q in weighted_probs(lts, p) {
        for c in 0..nb {
            let ok = uniform(p, |x| p.block_of(x) == c || has_q_transition(lts, p, x, q, c).expect("other block"));
            if !ok {
                return false;
            }
        }
    }
    uniform(p, |x| has_divergent_tree(lts, p, x))
}

/// Is `p` a codivergent branching bisimulation on `lts`?
pub fn is_branching_bisim(lts: &Lts, p: &Partition, bound: usize) -> Result<bool, OracleError> {
    check_bound(lts.len(), bound)?;
    Ok(passes(lts, p, &visible_actions(lts)))
}

/// Every partition of the states that passes [`is_branching_bisim`].
pub fn passing_partitions(lts: &Lts, bound: usize) -> Result<Vec<Partition>, OracleError> {
    check_bound(lts.len(), bound)?;
    let actions = visible_actions(lts);
    Ok(Partitions::new(lts.len()).filter(|p| passes(lts, p, &actions)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coarsest {
    pub partition: Partition,
    pub passing_count: usize,
}

/// Join of all passing partitions; fails if the join itself does not pass.
pub fn coarsest_by_enumeration(lts: &Lts, bound: usize) -> Result<Coarsest, OracleError> {
    let all = passing_partitions(lts, bound)?;
    let partition = all.iter().fold(Partition::identity(lts.len()), |acc, p| acc.join(p));
    if !passes(lts, &partition, &visible_actions(lts)) {
        return Err(OracleError::JoinNotBisimulation);
    }
    Ok(Coarsest { partition, passing_count: all.len() })
}

/// States reachable from `s` by `tau` steps inside its block.
fn tau_closure(lts: &Lts, p: &Partition, s: StateId) -> BTreeSet<StateId> {
    let mut seen = BTreeSet::from([s]);
    let mut stack = alloc::vec![s];
    while let Some(x) = stack.pop() {
        for b in lts.bundles(x) {
            if let Bundle::Tau(t) = b {
                if p.same_block(*t, s) && seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
    }
    seen
}

/// Does `s` reach an in-block `tau` cycle by in-block `tau` steps?
fn ccs_divergent(lts: &Lts, p: &Partition, s: StateId) -> bool {
    tau_closure(lts, p, s).into_iter().any(|x| {
        lts.bundles(x).iter().any(|b| matches!(b, Bundle::Tau(t) if p.same_block(*t, s) && tau_closure(lts, p, *t).contains(&x)))
    })
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CcsMove {
    Visible(Action, usize),
    Tau(usize),
}

fn ccs_signature(lts: &Lts, p: &Partition, s: StateId) -> (BTreeSet<CcsMove>, bool) {
    let mut moves = BTreeSet::new();
    for x in tau_closure(lts, p, s) {
        for b in lts.bundles(x) {
            match b {
                Bundle::Visible(a, t) => {
                    moves.insert(CcsMove::Visible(a.clone(), p.block_of(*t)));
                }
                Bundle::Tau(t) if !p.same_block(*t, s) => {
                    moves.insert(CcsMove::Tau(p.block_of(*t)));
                }
                _ => {}
            }
        }
    }
    (moves, ccs_divergent(lts, p, s))
}

/// Coarsest CCS branching bisimulation with codivergence.
pub fn ccs_refine(lts: &Lts) -> Result<Partition, OracleError> {
    if lts.has_random() {
        return Err(OracleError::RandomTermInCCSOracle);
    }
    let mut p = Partition::universal(lts.len());
    loop {
        let next = Partition::from_labels(lts.states().map(|s| (p.block_of(s), ccs_signature(lts, &p, s))));
        if next.num_blocks() == p.num_blocks() {
            return Ok(p);
        }
        p = next;
    }
}

pub fn ccs_equal(t1: &Term, t2: &Term, bound: usize) -> Result<bool, OracleError> {
    if !t1.is_ccs() || !t2.is_ccs() {
        return Err(OracleError::RandomTermInCCSOracle);
    }
    let space = build_joint_space(&[t1.clone(), t2.clone()], bound)?;
    let p = ccs_refine(&space.lts)?;
    Ok(p.same_block(space.roots[0], space.roots[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=6).map(|n| Partitions::new(n).count()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn partitions_are_distinct() {
        let all: BTreeSet<Vec<Vec<StateId>>> = Partitions::new(5).map(|p| p.blocks().to_vec()).collect();
        assert_eq!(all.len(), 52);
    }

    #[test]
    fn nil_alone() {
        let sp = crate::semantics::build_state_space(&Term::nil(), 10).unwrap();
        assert!(is_branching_bisim(&sp.lts, &Partition::identity(1), DEFAULT_ORACLE_BOUND).unwrap());
    }

    #[test]
    fn bound_is_enforced() {
        let lts = Lts::new(alloc::vec![Vec::new(); 9]).unwrap();
        assert_eq!(
            is_branching_bisim(&lts, &Partition::identity(9), DEFAULT_ORACLE_BOUND),
            Err(OracleError::OracleBoundExceeded { states: 9, bound: 8 })
        );
        assert!(matches!(
            passing_partitions(&Lts::new(alloc::vec![Vec::new(); 12]).unwrap(), 100),
            Err(OracleError::OracleBoundExceeded { bound: 11, .. })
        ));
    }

    #[test]
    fn ccs_checker_rejects_random_terms() {
        let t = parse("(1/2)tau.a (+) (1/2)tau.b").unwrap();
        assert_eq!(ccs_equal(&t, &t, 100), Err(OracleError::RandomTermInCCSOracle));
    }

    #[test]
    fn ccs_checker_basics() {
        let omega = parse("mu X. (tau.a.0 + tau.X)").unwrap();
        assert!(ccs_equal(&omega, &omega, 100).unwrap());
        assert!(!ccs_equal(&omega, &parse("a").unwrap(), 100).unwrap());
    }
}
