//! Finite representations of epsilon-trees.
//!
//! A [`WitnessPolicy`] picks, for every state it can reach, whether to stop
//! (the node becomes a leaf) or which class-internal silent bundle to fire.
//! Unrolling a policy gives the (possibly infinite) tree; [`unroll`]
//! materializes its first `k` levels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::equivalence::{analysis, BlockId, Partition};
use crate::rational::Rational;
use crate::semantics::{Bundle, Label, Lts, StateId};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Decision {
    Stop,
    /// Fire the `tau` bundle with this index.
    TakeTau(usize),
    /// Fire the random bundle with this index; every branch becomes a child.
    TakeRandom(usize),
}

/// What the leaves of the tree must be able to do.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Purpose {
    /// Every leaf has an `label` transition into block `target`.
    Ell { label: Label, target: BlockId },
    /// Every leaf has a random bundle with weighted probability `q` into `target`.
    Q { q: Rational, target: BlockId },
    /// No leaves at all.
    Divergence,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessPolicy {
    pub root: StateId,
    pub decide: BTreeMap<StateId, Decision>,
    pub purpose: Purpose,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("state {0} is reachable but has no decision")]
    Undecided(StateId),
    #[error("state {0} leaves the root's block")]
    LeavesBlock(StateId),
    #[error("state {0}: decision does not name a bundle of the right kind")]
    BadBundle(StateId),
    #[error("state {0}: leaf does not meet the purpose")]
    LeafObligation(StateId),
}

impl WitnessPolicy {
    fn children(&self, lts: &Lts, s: StateId) -> Vec<(Rational, StateId)> {
        match self.decide.get(&s) {
            Some(Decision::TakeTau(i)) => match lts.bundles(s).get(*i) {
                Some(Bundle::Tau(t)) => vec![(Rational::ONE, *t)],
                _ => Vec::new(),
            },
            Some(Decision::TakeRandom(i)) => match lts.bundles(s).get(*i) {
                Some(Bundle::Random(bs)) => bs.clone(),
                _ => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    fn is_stop(&self, s: StateId) -> bool {
        matches!(self.decide.get(&s), Some(Decision::Stop))
    }

    /// States reachable from the root by following decisions.
    pub fn reachable(&self, lts: &Lts) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(s) = stack.pop() {
            for (_, t) in self.children(lts, s) {
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Checks that the policy describes an epsilon-tree of the root with
    /// respect to `partition` whose leaves meet the purpose.
    pub fn validate(&self, lts: &Lts, partition: &Partition) -> Result<(), PolicyError> {
        let home = partition.block_of(self.root);
        for s in self.reachable(lts) {
            if partition.block_of(s) != home {
                return Err(PolicyError::LeavesBlock(s));
            }
            match self.decide.get(&s) {
                None => return Err(PolicyError::Undecided(s)),
                Some(Decision::Stop) => {
                    let ok = match &self.purpose {
                        Purpose::Ell { label, target } => lts.bundles(s).iter().any(|b| match (b, label) {
                            (Bundle::Visible(a, t), Label::Visible(l)) => a == l && partition.block_of(*t) == *target,
                            (Bundle::Tau(t), Label::Tau) => partition.block_of(*t) == *target,
                            _ => false,
                        }),
                        Purpose::Q { q, target } => (0..lts.bundles(s).len()).any(|i| {
                            analysis::weighted_prob(lts, partition, s, i, *target).ok().flatten() == Some(*q)
                        }),
                        Purpose::Divergence => false,
                    };
                    if !ok {
                        return Err(PolicyError::LeafObligation(s));
                    }
                }
                Some(Decision::TakeTau(i)) => {
                    if !matches!(lts.bundles(s).get(*i), Some(Bundle::Tau(_))) {
                        return Err(PolicyError::BadBundle(s));
                    }
                }
                Some(Decision::TakeRandom(i)) => {
                    if !matches!(lts.bundles(s).get(*i), Some(Bundle::Random(_))) {
                        return Err(PolicyError::BadBundle(s));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeKind {
    /// A `Stop` decision: a leaf of the epsilon-tree.
    Leaf,
    /// Expanded: its children are in the truncation.
    Inner,
    /// At the truncation depth; the tree continues below it.
    Frontier,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeNode {
    pub state: StateId,
    /// Probability on the edge from the parent; one at the root.
    pub prob: Rational,
    pub depth: usize,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// The nodes of an epsilon-tree of height at most `depth`. Node 0 is the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeTruncation {
    pub nodes: Vec<TreeNode>,
    pub depth: usize,
}

/// Unrolls `policy` to depth `k`. A random decision contributes all of its
/// branches as children, a `tau` decision exactly one.
pub fn unroll(policy: &WitnessPolicy, k: usize, lts: &Lts) -> TreeTruncation {
    let mut nodes = vec![TreeNode {
        state: policy.root,
        prob: Rational::ONE,
        depth: 0,
        kind: NodeKind::Frontier,
        children: Vec::new(),
    }];
    let mut i = 0;
    while i < nodes.len() {
        let (s, d) = (nodes[i].state, nodes[i].depth);
        let kids = policy.children(lts, s);
        if policy.is_stop(s) || kids.is_empty() {
            nodes[i].kind = NodeKind::Leaf;
        } else if d < k {
            nodes[i].kind = NodeKind::Inner;
            for (p, t) in kids {
                let id = nodes.len();
                nodes.push(TreeNode { state: t, prob: p, depth: d + 1, kind: NodeKind::Frontier, children: Vec::new() });
                nodes[i].children.push(id);
            }
        }
        i += 1;
    }
    TreeTruncation { nodes, depth: k }
}

/// Sum over the maximal paths of the truncation of the product of their
/// edge probabilities.
pub fn tree_prob(t: &TreeTruncation) -> Rational {
    fn go(t: &TreeTruncation, i: usize, acc: Rational) -> Rational {
        let n = &t.nodes[i];
        let acc = acc * n.prob;
        if n.children.is_empty() {
            acc
        } else {
            n.children.iter().map(|&c| go(t, c, acc)).sum()
        }
    }
    if t.nodes.is_empty() {
        return Rational::ZERO;
    }
    go(t, 0, Rational::ONE)
}

/// Probability mass of the branches that end in a leaf at depth `<= k`.
pub fn finite_mass(policy: &WitnessPolicy, k: usize, lts: &Lts) -> Rational {
    let mut mass = Rational::ZERO;
    let mut frontier: BTreeMap<StateId, Rational> = BTreeMap::from([(policy.root, Rational::ONE)]);
    for depth in 0..=k {
        let mut next: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, w) in frontier {
            let kids = policy.children(lts, s);
            if policy.is_stop(s) || kids.is_empty() {
                mass = mass + w;
            } else if depth < k {
                for (p, t) in kids {
                    let e = next.entry(t).or_default();
                    *e = *e + w * p;
                }
            }
        }
        frontier = next;
    }
    mass
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Classification {
    /// Finite branches have probability one; `mass` is the finite mass at
    /// the first `depth` with `1 - mass < 2^-m`.
    Regular { depth: usize, mass: Rational },
    /// No finite branch at all.
    Divergent,
    /// Finite mass strictly between zero and one; reported at depth `m`.
    Indeterminate { depth: usize, mass: Rational },
}

/// Exact classification from the policy graph: regular iff a leaf is
/// reachable from every reachable non-leaf, divergent iff no leaf is
/// reachable at all.
pub fn classify(policy: &WitnessPolicy, lts: &Lts, m: u32) -> Classification {
    let reach = policy.reachable(lts);
    let leaves: BTreeSet<StateId> =
        reach.iter().copied().filter(|&s| policy.is_stop(s) || policy.children(lts, s).is_empty()).collect();
    if leaves.is_empty() {
        return Classification::Divergent;
    }
    // states from which some leaf is reachable (backward closure)
    let mut can_stop = leaves.clone();
    loop {
        let before = can_stop.len();
        for &s in &reach {
            if !can_stop.contains(&s) && policy.children(lts, s).iter().any(|(_, t)| can_stop.contains(t)) {
                can_stop.insert(s);
            }
        }
        if can_stop.len() == before {
            break;
        }
    }
    if can_stop.len() == reach.len() {
        let eps = Rational::new(1, 1i128 << m.min(120)).expect("nonzero");
        let mut k = 0;
        loop {
            let mass = finite_mass(policy, k, lts);
            if Rational::ONE - mass < eps {
                return Classification::Regular { depth: k, mass };
            }
            k += 1;
        }
    }
    let depth = m as usize;
    Classification::Indeterminate { depth, mass: finite_mass(policy, depth, lts) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> Rational {
        Rational::new(1, 2).unwrap()
    }

    /// 0: random (1/2 -> 1, 1/2 -> 0); 1: stop
    fn geometric() -> (Lts, WitnessPolicy) {
        let lts = Lts::new(vec![vec![Bundle::Random(vec![(half(), 1), (half(), 0)])], vec![]]).unwrap();
        let policy = WitnessPolicy {
            root: 0,
            decide: BTreeMap::from([(0, Decision::TakeRandom(0)), (1, Decision::Stop)]),
            purpose: Purpose::Divergence,
        };
        (lts, policy)
    }

    #[test]
    fn depth_zero_is_single_node() {
        let (lts, policy) = geometric();
        let t = unroll(&policy, 0, &lts);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(tree_prob(&t), Rational::ONE);
    }

    #[test]
    fn truncations_have_probability_one() {
        let (lts, policy) = geometric();
        for k in 0..8 {
            assert_eq!(tree_prob(&unroll(&policy, k, &lts)), Rational::ONE);
        }
    }

    #[test]
    fn dropped_branch_loses_mass() {
        let (lts, policy) = geometric();
        let mut t = unroll(&policy, 2, &lts);
        let dropped = t.nodes[0].children.pop().unwrap();
        assert_eq!(t.nodes[dropped].prob, half());
        assert!(tree_prob(&t) < Rational::ONE);
    }

    #[test]
    fn geometric_finite_mass() {
        let (lts, policy) = geometric();
        for k in 1..=10u32 {
            assert_eq!(finite_mass(&policy, k as usize, &lts), Rational::ONE - half().pow(k));
        }
        assert_eq!(finite_mass(&policy, 0, &lts), Rational::ZERO);
    }

    #[test]
    fn classification() {
        let (lts, policy) = geometric();
        assert_eq!(
            classify(&policy, &lts, 3),
            Classification::Regular { depth: 4, mass: Rational::new(15, 16).unwrap() }
        );
        let mut looping = policy.clone();
        looping.decide.remove(&1);
        looping.decide.insert(1, Decision::TakeTau(0));
        let lts2 = Lts::new(vec![vec![Bundle::Random(vec![(half(), 1), (half(), 0)])], vec![Bundle::Tau(1)]]).unwrap();
        assert_eq!(classify(&looping, &lts2, 3), Classification::Divergent);
        // 0 -> {1: stop, 2: loop}
        let lts3 = Lts::new(vec![vec![Bundle::Random(vec![(half(), 1), (half(), 2)])], vec![], vec![Bundle::Tau(2)]])
            .unwrap();
        let mixed = WitnessPolicy {
            root: 0,
            decide: BTreeMap::from([(0, Decision::TakeRandom(0)), (1, Decision::Stop), (2, Decision::TakeTau(0))]),
            purpose: Purpose::Divergence,
        };
        assert_eq!(classify(&mixed, &lts3, 5), Classification::Indeterminate { depth: 5, mass: half() });
    }

    #[test]
    fn all_stop_policy() {
        let (lts, mut policy) = geometric();
        policy.decide.insert(0, Decision::Stop);
        assert_eq!(finite_mass(&policy, 0, &lts), Rational::ONE);
    }

    #[test]
    fn validation_catches_bad_policies() {
        let (lts, policy) = geometric();
        let p = Partition::universal(2);
        // divergence purpose with a stop leaf
        assert_eq!(policy.validate(&lts, &p), Err(PolicyError::LeafObligation(1)));
        let split = Partition::identity(2);
        assert_eq!(policy.validate(&lts, &split), Err(PolicyError::LeavesBlock(1)));
        let mut undecided = policy.clone();
        undecided.decide.remove(&1);
        assert_eq!(undecided.validate(&lts, &p), Err(PolicyError::Undecided(1)));
        let mut wrong = policy;
        wrong.decide.insert(0, Decision::TakeTau(0));
        assert_eq!(wrong.validate(&lts, &p), Err(PolicyError::BadBundle(0)));
    }
}
