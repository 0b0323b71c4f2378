//! File formats, random generation and the command-line front end for
//! `rccs-core`.

pub mod cli;
pub mod congruence;
pub mod export;
pub mod gen;
