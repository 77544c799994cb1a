//! Streaming classification with a dynamically diversified ensemble of
//! Hoeffding trees.
//!
//! The active members of the ensemble are periodically re-selected from a
//! reserve pool by a maximal-marginal-relevance criterion that trades
//! windowed accuracy against pairwise similarity of the members' oracle
//! outputs. The trade-off weight `lambda` moves with the trend of the
//! ensemble's prequential accuracy, and an ADWIN detector on the ensemble's
//! correctness stream triggers the creation of fresh members.
//!
//! Module map:
//!
//! * [`stream`]: instances, schemas, synthetic generators, drift composition
//!   and CSV ingestion.
//! * [`tree`]: the incremental Hoeffding tree used for every member.
//! * [`adwin`]: adaptive-windowing change detector.
//! * [`diversity`]: oracle vectors and pairwise diversity/similarity measures.
//! * [`selection`]: pool pruning, error-profile clustering and MMR selection.
//! * [`ensemble`]: the per-sample predict/train/detect/select loop.
//! * [`eval`]: prequential evaluation, experiment configuration, result
//!   files and Friedman/Nemenyi rank statistics.

pub mod adwin;
pub mod diversity;
pub mod ensemble;
mod error;
pub mod eval;
pub mod selection;
pub mod stream;
pub mod tree;

pub use error::{Error, Result};
