//! Approximate query processing for group-by aggregates from conditionally
//! generated samples.
//!
//! Instead of scanning the base table at query time, the engine trains a
//! conditional WGAN on the table (group labels, optionally group + histogram
//! bucket labels) and answers `SELECT A, AGGR(B) ... GROUP BY A` queries by
//! generating stratified samples from the model. A one-pass catalog of
//! per-group and per-(bucket, group) statistics drives the sample-size
//! allocation and the SUM/COUNT scale-up.
//!
//! Pipeline: [`data`] ingests or synthesizes a table, [`catalog`] computes
//! the statistics and histogram, [`neural`] trains the model, [`cgen`] wraps
//! it as a sample generator, [`alloc`] + [`sampler`] produce stratified
//! samples, [`query`] parses and executes queries, and [`eval`] measures
//! accuracy and runs the benchmark harness.

pub mod alloc;
pub mod catalog;
pub mod cgen;
pub mod data;
pub mod eval;
pub mod model;
pub mod neural;
pub mod query;
pub mod sampler;

pub(crate) mod rng;
pub(crate) mod stat;

pub use data::{GaussSpec, Schema, Table};
pub use neural::Matrix;
