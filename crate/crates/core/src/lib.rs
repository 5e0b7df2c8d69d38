//! Query-budgeted planted clique experiments: a lazily realized edge oracle,
//! exact maximum-clique search, detection and recovery algorithms with exact
//! query accounting, the marked-set pair-query game, and a Monte Carlo
//! harness for phase-diagram sweeps.

pub mod detector;
pub mod error;
pub mod fmt;
pub mod harness;
pub mod oracle;
pub mod recoverer;
pub mod seed;
pub mod solver;
pub mod variant;

pub use error::{Error, Result};
