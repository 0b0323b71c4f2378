//! Epsilon-tree questions for a fixed partition.
//!
//! An epsilon-tree of `s` stays inside `s`'s block: a `tau` step has one
//! child, a random firing has all its branches as children. Deciding whether
//! such a tree can have probability-one finite branches with every leaf in
//! a set `good` is qualitative almost-sure reachability in the finite MDP of
//! class-internal moves; a leafless tree exists iff some closed set of
//! states can fire class-internal moves forever.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{BlockId, Partition};
use crate::rational::Rational;
use crate::semantics::{Bundle, Label, Lts, StateId};
use crate::witness::{Decision, Purpose, WitnessPolicy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("a tau transition into the state's own block is not an observable move")]
    PreconditionViolated,
    #[error("target block is the state's own block")]
    SameBlock,
    #[error("bundle {0} is not a random bundle")]
    NotRandom(usize),
    #[error("label must be a visible action or tau")]
    ProbabilisticLabel,
}

/// Indices of the bundles of `s` usable inside an epsilon-tree rooted in
/// its block: `tau` bundles staying in the block, and random bundles all of
/// whose branches stay in the block.
pub fn internal_moves(lts: &Lts, p: &Partition, s: StateId) -> Vec<usize> {
    let home = p.block_of(s);
    lts.bundles(s)
        .iter()
        .enumerate()
        .filter(|(_, b)| match b {
            Bundle::Tau(t) => p.block_of(*t) == home,
            Bundle::Random(bs) => bs.iter().all(|(_, t)| p.block_of(*t) == home),
            Bundle::Visible(..) => false,
        })
        .map(|(i, _)| i)
        .collect()
}

fn decision(b: &Bundle<StateId>, i: usize) -> Decision {
    match b {
        Bundle::Random(_) => Decision::TakeRandom(i),
        _ => Decision::TakeTau(i),
    }
}

/// Solution of an almost-sure reachability game inside one block.
pub(crate) struct Region {
    pub winning: BTreeSet<StateId>,
    /// Chosen internal move for winning states outside `good`.
    pub choice: BTreeMap<StateId, usize>,
    pub good: BTreeSet<StateId>,
}

/// Greatest fixpoint over a least fixpoint: start from the whole block;
/// keep the states that can reach `good` with positive probability using
/// moves that never leave the candidate set; repeat until stable.
pub(crate) fn reach_region(lts: &Lts, p: &Partition, block: BlockId, good: &BTreeSet<StateId>) -> Region {
    let members = p.block(block);
    let moves: Vec<(StateId, Vec<usize>)> = members.iter().map(|&x| (x, internal_moves(lts, p, x))).collect();
    let good: BTreeSet<StateId> = good.iter().copied().filter(|&g| p.block_of(g) == block).collect();
    let mut candidates: BTreeSet<StateId> = members.iter().copied().collect();
    loop {
        let mut attr: BTreeSet<StateId> = good.intersection(&candidates).copied().collect();
        let mut choice = BTreeMap::new();
        let mut changed = true;
        while changed {
            changed = false;
            for (x, ms) in &moves {
                if !candidates.contains(x) || attr.contains(x) {
                    continue;
                }
                let found = ms.iter().copied().find(|&m| {
                    let b = &lts.bundles(*x)[m];
                    b.targets().all(|t| candidates.contains(t)) && b.targets().any(|t| attr.contains(t))
                });
                if let Some(m) = found {
                    attr.insert(*x);
                    choice.insert(*x, m);
                    changed = true;
                }
            }
        }
        if attr == candidates {
            return Region { winning: attr, choice, good };
        }
        candidates = attr;
    }
}

impl Region {
    /// Positional policy from `root`, restricted to the states it reaches.
    pub(crate) fn policy(&self, lts: &Lts, root: StateId, purpose: Purpose) -> WitnessPolicy {
        let mut decide = BTreeMap::new();
        let mut stack = alloc::vec![root];
        while let Some(x) = stack.pop() {
            if decide.contains_key(&x) {
                continue;
            }
            if self.good.contains(&x) {
                decide.insert(x, Decision::Stop);
                continue;
            }
            let m = self.choice[&x];
            let b = &lts.bundles(x)[m];
            decide.insert(x, decision(b, m));
            stack.extend(b.targets().copied());
        }
        WitnessPolicy { root, decide, purpose }
    }
}

/// Is there a regular epsilon-tree of `s` all of whose leaves are in `good`?
/// On success returns the tree as a positional policy (with purpose
/// [`Purpose::Divergence`] as a placeholder; callers set the real one).
pub fn as_reach(lts: &Lts, p: &Partition, s: StateId, good: &BTreeSet<StateId>) -> Option<WitnessPolicy> {
    let region = reach_region(lts, p, p.block_of(s), good);
    region.winning.contains(&s).then(|| region.policy(lts, s, Purpose::Divergence))
}

pub(crate) fn ell_good(lts: &Lts, p: &Partition, block: BlockId, label: &Label, target: BlockId) -> BTreeSet<StateId> {
    p.block(block)
        .iter()
        .copied()
        .filter(|&x| {
            lts.bundles(x).iter().any(|b| match (b, label) {
                (Bundle::Visible(a, t), Label::Visible(l)) => a == l && p.block_of(*t) == target,
                (Bundle::Tau(t), Label::Tau) => p.block_of(*t) == target,
                _ => false,
            })
        })
        .collect()
}

fn check_ell(p: &Partition, s: StateId, label: &Label, target: BlockId) -> Result<(), AnalysisError> {
    match label {
        Label::ProbTau(_) => Err(AnalysisError::ProbabilisticLabel),
        Label::Tau if target == p.block_of(s) => Err(AnalysisError::PreconditionViolated),
        _ => Ok(()),
    }
}

/// Witness for an `label`-transition from `s` into block `target`.
pub fn ell_witness(
    lts: &Lts,
    p: &Partition,
    s: StateId,
    label: &Label,
    target: BlockId,
) -> Result<Option<WitnessPolicy>, AnalysisError> {
    check_ell(p, s, label, target)?;
    let good = ell_good(lts, p, p.block_of(s), label, target);
    Ok(as_reach(lts, p, s, &good).map(|mut w| {
        w.purpose = Purpose::Ell { label: label.clone(), target };
        w
    }))
}

pub fn has_ell_transition(
    lts: &Lts,
    p: &Partition,
    s: StateId,
    label: &Label,
    target: BlockId,
) -> Result<bool, AnalysisError> {
    ell_witness(lts, p, s, label, target).map(|w| w.is_some())
}

/// Mass of random bundle `bundle` of `s` going into `target`, divided by the
/// mass leaving `s`'s block. `None` when no branch reaches `target` or no
/// branch leaves the block.
pub fn weighted_prob(
    lts: &Lts,
    p: &Partition,
    s: StateId,
    bundle: usize,
    target: BlockId,
) -> Result<Option<Rational>, AnalysisError> {
    let home = p.block_of(s);
    if target == home {
        return Err(AnalysisError::SameBlock);
    }
    let Some(Bundle::Random(bs)) = lts.bundles(s).get(bundle) else {
        return Err(AnalysisError::NotRandom(bundle));
    };
    let into: Rational = bs.iter().filter(|(_, t)| p.block_of(*t) == target).map(|(q, _)| *q).sum();
    let stay: Rational = bs.iter().filter(|(_, t)| p.block_of(*t) == home).map(|(q, _)| *q).sum();
    let leave = Rational::ONE - stay;
    if into.is_zero() || leave.is_zero() {
        return Ok(None);
    }
    Ok(Some(into / leave))
}

pub(crate) fn q_good(lts: &Lts, p: &Partition, block: BlockId, q: Rational, target: BlockId) -> BTreeSet<StateId> {
    p.block(block)
        .iter()
        .copied()
        .filter(|&x| {
            (0..lts.bundles(x).len()).any(|i| matches!(weighted_prob(lts, p, x, i, target), Ok(Some(w)) if w == q))
        })
        .collect()
}

/// Witness for a `q`-transition from `s` into block `target`: every leaf
/// fires one random bundle whose weighted probability into `target` is `q`.
pub fn q_witness(
    lts: &Lts,
    p: &Partition,
    s: StateId,
    q: Rational,
    target: BlockId,
) -> Result<Option<WitnessPolicy>, AnalysisError> {
    if target == p.block_of(s) {
        return Err(AnalysisError::SameBlock);
    }
    let good = q_good(lts, p, p.block_of(s), q, target);
    Ok(as_reach(lts, p, s, &good).map(|mut w| {
        w.purpose = Purpose::Q { q, target };
        w
    }))
}

pub fn has_q_transition(lts: &Lts, p: &Partition, s: StateId, q: Rational, target: BlockId) -> Result<bool, AnalysisError> {
    q_witness(lts, p, s, q, target).map(|w| w.is_some())
}

/// Greatest set of block members that can keep firing internal moves whose
/// targets all stay in the set, with the move chosen for each.
pub(crate) fn divergent_region(lts: &Lts, p: &Partition, block: BlockId) -> BTreeMap<StateId, usize> {
    let members = p.block(block);
    let moves: Vec<(StateId, Vec<usize>)> = members.iter().map(|&x| (x, internal_moves(lts, p, x))).collect();
    let mut alive: BTreeSet<StateId> = members.iter().copied().collect();
    loop {
        let mut choice = BTreeMap::new();
        for (x, ms) in &moves {
            if !alive.contains(x) {
                continue;
            }
            if let Some(&m) = ms.iter().find(|&&m| lts.bundles(*x)[m].targets().all(|t| alive.contains(t))) {
                choice.insert(*x, m);
            }
        }
        if choice.len() == alive.len() {
            return choice;
        }
        alive = choice.keys().copied().collect();
    }
}

/// A leafless epsilon-tree of `s`, if one exists.
pub fn divergence_witness(lts: &Lts, p: &Partition, s: StateId) -> Option<WitnessPolicy> {
    let choice = divergent_region(lts, p, p.block_of(s));
    if !choice.contains_key(&s) {
        return None;
    }
    let mut decide = BTreeMap::new();
    let mut stack = alloc::vec![s];
    while let Some(x) = stack.pop() {
        if decide.contains_key(&x) {
            continue;
        }
        let m = choice[&x];
        let b = &lts.bundles(x)[m];
        decide.insert(x, decision(b, m));
        stack.extend(b.targets().copied());
    }
    Some(WitnessPolicy { root: s, decide, purpose: Purpose::Divergence })
}

pub fn has_divergent_tree(lts: &Lts, p: &Partition, s: StateId) -> bool {
    divergent_region(lts, p, p.block_of(s)).contains_key(&s)
}
