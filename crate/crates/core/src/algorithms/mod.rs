//! Algorithm kernels for the edge-centric model and the single-threaded reference
//! executor used as the correctness oracle.

mod kernels;
mod reference;

pub use kernels::{kernel_by_name, kernel_hits, kernel_pagerank, kernel_spmv, kernel_spmv_with, Hits, PageRank, Spmv};
pub use reference::reference_execute;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::checksum::Fnv1a;
use crate::error::{Error, Result};

/// What a kernel sees of the source endpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceVertex {
    pub prop: f64,
    pub out_degree: u32,
}

/// One gather over the edge set: read property slot `input` at sources, write slot
/// `output` at destinations. `transpose` gathers over reversed edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpec {
    pub input: usize,
    pub output: usize,
    pub transpose: bool,
}

pub const SINGLE_PHASE: [PhaseSpec; 1] = [PhaseSpec { input: 0, output: 0, transpose: false }];

pub trait AlgorithmKernel: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Number of per-vertex property vectors (1, or 2 for hub/authority).
    fn num_slots(&self) -> usize {
        1
    }

    /// Gathers executed, in order, by one iteration.
    fn phases(&self) -> &[PhaseSpec] {
        &SINGLE_PHASE
    }

    /// Initial contents of every property slot.
    fn init(&self, num_vertices: usize) -> Result<Vec<Vec<f64>>>;

    /// Starting value of a destination accumulator.
    fn identity(&self) -> f64 {
        0.0
    }

    fn process_edge(&self, weight: f64, src: SourceVertex) -> f64;

    /// Must be associative and commutative over the updates it receives.
    fn apply(&self, acc: f64, update: f64) -> f64;

    fn finalize(&self, acc: f64, num_vertices: usize) -> f64;

    /// Whether each phase's output is divided by its global L2 norm.
    fn normalizes(&self) -> bool {
        false
    }

    fn is_active(&self, old: f64, new: f64, epsilon: f64) -> bool {
        (new - old).abs() > epsilon
    }
}

pub type SharedKernel = Arc<dyn AlgorithmKernel>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceMode {
    FixedIterations,
    FrontierEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub max_iterations: usize,
    pub epsilon: f64,
    pub mode: ConvergenceMode,
}

impl ConvergenceSpec {
    pub fn fixed(iterations: usize) -> Self {
        ConvergenceSpec { max_iterations: iterations, epsilon: 1e-6, mode: ConvergenceMode::FixedIterations }
    }

    pub fn until_converged(max_iterations: usize, epsilon: f64) -> Self {
        ConvergenceSpec { max_iterations, epsilon, mode: ConvergenceMode::FrontierEmpty }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon {} must be a finite non-negative number", self.epsilon)));
        }
        Ok(())
    }
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec::fixed(16)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexState {
    /// Primary property: rank, product vector, or authority score.
    pub prop: Vec<f64>,
    /// Hub scores for two-vector kernels.
    pub secondary: Option<Vec<f64>>,
    /// Accumulators of the last gather, before finalization.
    pub temp_prop: Vec<f64>,
    /// Vertices whose property moved by more than epsilon in the last iteration.
    pub active: Vec<bool>,
    pub iterations: usize,
}

impl VertexState {
    pub(crate) fn from_slots(mut slots: Vec<Vec<f64>>, temp_prop: Vec<f64>, active: Vec<bool>, iterations: usize) -> Self {
        let secondary = if slots.len() > 1 { Some(slots.remove(1)) } else { None };
        let prop = slots.swap_remove(0);
        VertexState { prop, secondary, temp_prop, active, iterations }
    }

    /// 64-bit FNV-1a over the little-endian bytes of `prop`, then `secondary`, in
    /// ascending vertex id.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv1a::new();
        for v in &self.prop {
            h.write(&v.to_le_bytes());
        }
        if let Some(sec) = &self.secondary {
            for v in sec {
                h.write(&v.to_le_bytes());
            }
        }
        h.finish()
    }
}

/// Euclidean norm accumulated in ascending index order.
pub fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|x| x * x).sum::<f64>().sqrt()
}
