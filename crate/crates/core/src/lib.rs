//! Constraint-based causal discovery for stationary time series with
//! hidden confounders.
//!
//! The learner ([`discovery::ts_icd`]) works on a window of `w + 1`
//! time-stamps, tests one representative per homology class of node pairs,
//! and grows conditioning sets along PDS-paths as in iterative causal
//! discovery. The crate also carries everything needed to evaluate it:
//! random SVAR models, exact ground-truth PAGs, CI tests and scores.

pub mod benchmark;
pub mod ci;
pub mod discovery;
mod error;
pub mod graph;
pub mod icd;
pub mod metrics;
pub mod separation;
pub mod svar;

pub use error::{Error, Result};

pub use ci::{CiRecord, CiTest, Dataset, Series};
pub use discovery::{ts_icd, DiscoveryConfig, OrderingPolicy, OrientSchedule, RunReport};
pub use graph::{Dag, DynamicPag, Edge, EdgeMark, Mag, MixedGraph, TimedNode};
pub use svar::SvarModel;
