use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::analysis::divergent_region;
use super::Partition;
use crate::semantics::{Bundle, Lts, StateId};

/// The transition system with one state per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub lts: Lts,
    /// Least member of each block.
    pub representatives: Vec<StateId>,
}

/// Collapses every block of `p` to one state.
///
/// A block gets the union of its members' bundles redirected to blocks,
/// minus `tau` steps inside the block and random bundles that never leave
/// it; a divergent block gets a `tau` self-loop instead.
pub fn quotient(lts: &Lts, p: &Partition) -> Quotient {
    let mut bundles = Vec::with_capacity(p.num_blocks());
    for (b, members) in p.blocks().iter().enumerate() {
        let mut out: BTreeSet<Bundle<StateId>> = BTreeSet::new();
        for &x in members {
            for bundle in lts.bundles(x) {
                let mapped = bundle.clone().map(|t| p.block_of(t));
                let inert = match &mapped {
                    Bundle::Tau(t) => *t == b,
                    Bundle::Random(bs) => bs.iter().all(|(_, t)| *t == b),
                    Bundle::Visible(..) => false,
                };
                if !inert {
                    out.insert(mapped);
                }
            }
        }
        if divergent_region(lts, p, b).contains_key(&members[0]) {
            out.insert(Bundle::Tau(b));
        }
        bundles.push(out.into_iter().collect());
    }
    let lts = Lts::new(bundles).expect("redirected bundles stay valid");
    Quotient { lts, representatives: p.blocks().iter().map(|m| m[0]).collect() }
}
