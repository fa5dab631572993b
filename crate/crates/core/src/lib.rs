//! Mine git histories to check developer beliefs about defect proneness.
//!
//! The pipeline has three stages that hand off through plain files:
//!
//! 1. **extract**: walk a repository's first-parent history with
//!    `git log --numstat` and cache it as JSON Lines ([`gitlog`], [`corpus`]).
//! 2. **analyze**: label bug-fixing commits, fold commits into per-file
//!    histories, compute the defect count and the eight belief metrics, and
//!    correlate them per project ([`labeler`], [`metrics`], [`stats`],
//!    [`analysis`]).
//! 3. **report**: write CSV/JSON tables, per-belief boxplots and the
//!    agreement-vs-evidence discrepancy table ([`report`]).
//!
//! [`synth`] generates synthetic extracts with planted correlations and hosts
//! brute-force oracles used by the test suites.

pub mod analysis;
pub mod belief;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod gitlog;
pub mod labeler;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod synth;

pub use belief::BeliefId;
pub use gitlog::{CommitRecord, FileChange};
pub use labeler::{FileCategory, KeywordSet};
