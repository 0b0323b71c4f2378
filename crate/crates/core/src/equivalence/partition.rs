use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::semantics::StateId;

pub type BlockId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("state {0} is missing or listed twice")]
    NotAPartition(StateId),
    #[error("empty block")]
    EmptyBlock,
}

/// An equivalence relation on `0..n` as disjoint, covering blocks.
///
/// Blocks are numbered by their least member and each block is sorted, so
/// equal relations have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Partition {
    block_of: Vec<BlockId>,
    blocks: Vec<Vec<StateId>>,
}

impl Partition {
    /// Builds from any labelling of states; labels only need to agree on
    /// which states share a block.
    pub fn from_labels<K: Ord>(labels: impl IntoIterator<Item = K>) -> Partition {
        let mut index: BTreeMap<K, BlockId> = BTreeMap::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut block_of = Vec::new();
        for (s, k) in labels.into_iter().enumerate() {
            let next = blocks.len();
            let b = *index.entry(k).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(s);
            block_of.push(b);
        }
        Partition { block_of, blocks }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<StateId>]) -> Result<Partition, PartitionError> {
        let mut label = alloc::vec![None; n];
        for (i, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(PartitionError::EmptyBlock);
            }
            for &s in b {
                match label.get_mut(s) {
                    Some(slot @ None) => *slot = Some(i),
                    _ => return Err(PartitionError::NotAPartition(s)),
                }
            }
        }
        let labels = label
            .into_iter()
            .enumerate()
            .map(|(s, l)| l.ok_or(PartitionError::NotAPartition(s)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Partition::from_labels(labels))
    }

    /// One block holding every state.
    pub fn universal(n: usize) -> Partition {
        Partition::from_labels(core::iter::repeat_n(0u8, n))
    }

    /// Singleton blocks.
    pub fn identity(n: usize) -> Partition {
        Partition::from_labels(0..n)
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, s: StateId) -> BlockId {
        self.block_of[s]
    }

    pub fn block(&self, b: BlockId) -> &[StateId] {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        self.block_of[s] == self.block_of[t]
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|&s| coarser.same_block(s, b[0])))
    }

    /// Equivalence closure of the union of both relations.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.num_states();
        assert_eq!(n, other.num_states(), "partitions over different state sets");
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            for b in &p.blocks {
                for &s in &b[1..] {
                    let (r1, r2) = (find(&mut parent, b[0]), find(&mut parent, s));
                    if r1 != r2 {
                        parent[r1.max(r2)] = r1.min(r2);
                    }
                }
            }
        }
        Partition::from_labels((0..n).map(|s| find(&mut parent, s)))
    }
}
