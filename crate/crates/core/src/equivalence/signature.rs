use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use super::analysis::{divergent_region, ell_good, q_good, reach_region, weighted_prob};
use super::{BlockId, Partition};
use crate::rational::Rational;
use crate::semantics::{Action, Bundle, Label, Lts, StateId};

/// The observable moves of a state with respect to a partition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Signature {
    pub visible: BTreeSet<(Action, BlockId)>,
    /// `tau`-transitions into blocks other than the state's own.
    pub taujumps: BTreeSet<BlockId>,
    /// `q`-transitions into blocks other than the state's own.
    pub qjumps: BTreeSet<(Rational, BlockId)>,
    pub divergent: bool,
}

/// One entry of a [`Signature`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SignatureItem {
    Visible(Action, BlockId),
    Tau(BlockId),
    Q(Rational, BlockId),
    Divergent,
}

impl fmt::Display for SignatureItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureItem::Visible(a, c) => write!(f, "{a} into block {c}"),
            SignatureItem::Tau(c) => write!(f, "tau into block {c}"),
            SignatureItem::Q(q, c) => write!(f, "probability {q} into block {c}"),
            SignatureItem::Divergent => f.write_str("divergent epsilon-tree"),
        }
    }
}

impl Signature {
    pub fn items(&self) -> Vec<SignatureItem> {
        let mut out: Vec<SignatureItem> =
            self.visible.iter().map(|(a, c)| SignatureItem::Visible(a.clone(), *c)).collect();
        out.extend(self.taujumps.iter().map(|&c| SignatureItem::Tau(c)));
        out.extend(self.qjumps.iter().map(|&(q, c)| SignatureItem::Q(q, c)));
        if self.divergent {
            out.push(SignatureItem::Divergent);
        }
        out
    }

    pub fn contains(&self, item: &SignatureItem) -> bool {
        match item {
            SignatureItem::Visible(a, c) => self.visible.contains(&(a.clone(), *c)),
            SignatureItem::Tau(c) => self.taujumps.contains(c),
            SignatureItem::Q(q, c) => self.qjumps.contains(&(*q, *c)),
            SignatureItem::Divergent => self.divergent,
        }
    }
}

/// Signatures of every member of `block`, in member order.
///
/// Candidate moves are collected from the members' own bundles; each
/// candidate needs one reachability fixpoint for the whole block.
pub fn block_signatures(lts: &Lts, p: &Partition, block: BlockId) -> Vec<(StateId, Signature)> {
    let members = p.block(block);
    let mut visible: BTreeSet<(Action, BlockId)> = BTreeSet::new();
    let mut taus: BTreeSet<BlockId> = BTreeSet::new();
    let mut qs: BTreeSet<(Rational, BlockId)> = BTreeSet::new();
    for &x in members {
        for (i, b) in lts.bundles(x).iter().enumerate() {
            match b {
                Bundle::Visible(a, t) => {
                    visible.insert((a.clone(), p.block_of(*t)));
                }
                Bundle::Tau(t) if p.block_of(*t) != block => {
                    taus.insert(p.block_of(*t));
                }
                Bundle::Tau(_) => {}
                Bundle::Random(bs) => {
                    let targets: BTreeSet<BlockId> =
                        bs.iter().map(|(_, t)| p.block_of(*t)).filter(|&c| c != block).collect();
                    for c in targets {
                        if let Ok(Some(q)) = weighted_prob(lts, p, x, i, c) {
                            qs.insert((q, c));
                        }
                    }
                }
            }
        }
    }

    let mut sigs: BTreeMap<StateId, Signature> = members.iter().map(|&x| (x, Signature::default())).collect();
    for (a, c) in visible {
        let good = ell_good(lts, p, block, &Label::Visible(a.clone()), c);
        for x in reach_region(lts, p, block, &good).winning {
            sigs.get_mut(&x).expect("member").visible.insert((a.clone(), c));
        }
    }
    for c in taus {
        let good = ell_good(lts, p, block, &Label::Tau, c);
        for x in reach_region(lts, p, block, &good).winning {
            sigs.get_mut(&x).expect("member").taujumps.insert(c);
        }
    }
    for (q, c) in qs {
        let good = q_good(lts, p, block, q, c);
        for x in reach_region(lts, p, block, &good).winning {
            sigs.get_mut(&x).expect("member").qjumps.insert((q, c));
        }
    }
    for x in divergent_region(lts, p, block).into_keys() {
        sigs.get_mut(&x).expect("member").divergent = true;
    }
    members.iter().map(|&x| (x, sigs.remove(&x).expect("member"))).collect()
}

pub fn signature(lts: &Lts, p: &Partition, s: StateId) -> Signature {
    block_signatures(lts, p, p.block_of(s))
        .into_iter()
        .find(|(x, _)| *x == s)
        .map(|(_, sig)| sig)
        .expect("state is a member of its block")
}
