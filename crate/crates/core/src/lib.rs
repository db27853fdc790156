//! Decoupled edge-centric gather-apply-scatter engine.
//!
//! Graphs are split into vertex intervals owned by (worker, channel) processing
//! elements. Each iteration runs five stages per interval (process edges, partition
//! updates, apply updates, export frontier, import frontier) as a dependency DAG that
//! can execute either asynchronously or with bulk-synchronous barriers. A
//! discrete-event cost model turns the recorded task volumes into virtual time.

pub mod algorithms;
pub mod checksum;
pub mod engine;
pub mod error;
pub mod graph;
pub mod partitioner;
pub mod perf;

pub use error::{Error, ErrorClass, Result};
