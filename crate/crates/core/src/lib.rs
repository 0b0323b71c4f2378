//! Randomized CCS: terms, operational semantics and codivergent branching
//! bisimilarity with exact rational probabilities.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod equivalence;
pub mod oracle;
pub mod rational;
pub mod semantics;
pub mod syntax;
pub mod witness;

pub use rational::Rational;
