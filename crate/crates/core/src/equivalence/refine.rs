use alloc::vec::Vec;

use super::signature::{block_signatures, Signature, SignatureItem};
use super::Partition;
use crate::semantics::{build_joint_space, Lts, SemanticsError, StateId, StateSpace};
use crate::syntax::Term;

/// Partitions produced by each round of refinement, starting from the
/// universal one. The last entry is stable.
#[derive(Clone, Debug)]
pub struct Trace {
    pub rounds: Vec<Partition>,
}

impl Trace {
    pub fn result(&self) -> &Partition {
        self.rounds.last().expect("at least one round")
    }

    /// Number of signature rounds computed.
    pub fn iterations(&self) -> usize {
        self.rounds.len()
    }
}

fn signatures(lts: &Lts, p: &Partition) -> Vec<Signature> {
    let mut sigs: Vec<Option<Signature>> = alloc::vec![None; lts.len()];
    for b in 0..p.num_blocks() {
        for (x, sig) in block_signatures(lts, p, b) {
            sigs[x] = Some(sig);
        }
    }
    sigs.into_iter().map(|s| s.expect("every state is in a block")).collect()
}

/// One refinement round: split every block by signature.
pub fn split(lts: &Lts, p: &Partition) -> Partition {
    let sigs = signatures(lts, p);
    Partition::from_labels(sigs.into_iter().enumerate().map(|(s, sig)| (p.block_of(s), sig)))
}

pub fn refine_traced(lts: &Lts) -> Trace {
    let mut rounds = alloc::vec![Partition::universal(lts.len())];
    loop {
        let cur = rounds.last().expect("nonempty");
        let next = split(lts, cur);
        if next.num_blocks() == cur.num_blocks() {
            return Trace { rounds };
        }
        rounds.push(next);
    }
}

/// The coarsest codivergent branching bisimulation on `lts`.
pub fn refine(lts: &Lts) -> Partition {
    refine_traced(lts).result().clone()
}

/// Why two states ended in different blocks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Evidence {
    /// Signature entry held by exactly one of the two states.
    pub item: SignatureItem,
    /// Which of the two compared states holds it (0 or 1).
    pub holder: usize,
    /// Partition under which the signatures differ; block ids in `item`
    /// refer to it.
    pub partition: Partition,
    pub round: usize,
}

/// First signature entry separating `s` and `t`, at the round where they split.
pub fn distinguish(lts: &Lts, trace: &Trace, s: StateId, t: StateId) -> Option<Evidence> {
    let round = trace.rounds.iter().position(|p| !p.same_block(s, t))?.checked_sub(1)?;
    let p = &trace.rounds[round];
    let sigs = block_signatures(lts, p, p.block_of(s));
    let sig = |x: StateId| sigs.iter().find(|(y, _)| *y == x).map(|(_, g)| g).expect("same block");
    let (a, b) = (sig(s), sig(t));
    let only = |x: &Signature, y: &Signature| x.items().into_iter().find(|i| !y.contains(i));
    let (item, holder) = match (only(a, b), only(b, a)) {
        (Some(i), Some(j)) if j < i => (j, 1),
        (Some(i), _) => (i, 0),
        (None, Some(j)) => (j, 1),
        (None, None) => unreachable!("states split with equal signatures"),
    };
    Some(Evidence { item, holder, partition: p.clone(), round })
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub equal: bool,
    pub partition: Partition,
    pub iterations: usize,
    pub evidence: Option<Evidence>,
    pub space: StateSpace,
}

/// Decides equality of two closed terms over their joint state space.
pub fn check_equal(t1: &Term, t2: &Term, bound: usize) -> Result<Verdict, SemanticsError> {
    let space = build_joint_space(&[t1.clone(), t2.clone()], bound)?;
    let trace = refine_traced(&space.lts);
    let (r1, r2) = (space.roots[0], space.roots[1]);
    let partition = trace.result().clone();
    let equal = partition.same_block(r1, r2);
    let evidence = if equal { None } else { distinguish(&space.lts, &trace, r1, r2) };
    Ok(Verdict { equal, partition, iterations: trace.iterations(), evidence, space })
}

/// Equality of state `s` of `a` and state `t` of `b`.
pub fn lts_equal(a: &Lts, s: StateId, b: &Lts, t: StateId) -> bool {
    let joint = a.disjoint_union(b);
    refine(&joint).same_block(s, a.len() + t)
}
