//! Simulation of interactive learning with class-conditional queries.
//!
//! A class-conditional query names a label and a set of drawn examples; the
//! oracle answers with one example from the set carrying that label, or
//! reports that none exists. This crate provides finite hypothesis spaces,
//! instrumented oracles, learners built on such queries, reductions to plain
//! label requests, complexity measures, and an experiment harness.

pub mod agnostic;
pub mod bounded;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod measures;
pub mod oracle;
pub mod reductions;
pub mod seed;
pub mod splitting;

pub use error::{Error, Failure, Result};
