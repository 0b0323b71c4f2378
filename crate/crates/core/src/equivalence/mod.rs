//! Codivergent branching bisimilarity on finite transition systems.
//!
//! For a fixed partition every question about epsilon-trees reduces to a
//! qualitative fixpoint inside one block (see [`analysis`]). [`refine`]
//! starts from the universal partition and splits blocks by [`Signature`]
//! until nothing changes.

pub mod analysis;
mod partition;
mod quotient;
mod refine;
mod signature;

pub use analysis::{
    as_reach, divergence_witness, ell_witness, has_divergent_tree, has_ell_transition, has_q_transition,
    internal_moves, q_witness, weighted_prob, AnalysisError,
};
pub use partition::{BlockId, Partition, PartitionError};
pub use quotient::{quotient, Quotient};
pub use refine::{check_equal, distinguish, lts_equal, refine, refine_traced, split, Evidence, Trace, Verdict};
pub use signature::{block_signatures, signature, Signature, SignatureItem};
