use std::sync::Arc;

use super::{AlgorithmKernel, PhaseSpec, SharedKernel, SourceVertex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRank {
    damping: f64,
}

impl PageRank {
    pub fn damping(&self) -> f64 {
        self.damping
    }
}

pub fn kernel_pagerank(damping: f64) -> Result<PageRank> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::Config(format!("damping {damping} must lie in (0, 1)")));
    }
    Ok(PageRank { damping })
}

impl AlgorithmKernel for PageRank {
    fn name(&self) -> &'static str {
        "pr"
    }

    fn init(&self, num_vertices: usize) -> Result<Vec<Vec<f64>>> {
        Ok(vec![vec![1.0 / num_vertices as f64; num_vertices]])
    }

    fn process_edge(&self, _weight: f64, src: SourceVertex) -> f64 {
        src.prop / src.out_degree as f64
    }

    fn apply(&self, acc: f64, update: f64) -> f64 {
        acc + update
    }

    fn finalize(&self, acc: f64, num_vertices: usize) -> f64 {
        (1.0 - self.damping) / num_vertices as f64 + self.damping * acc
    }
}

/// One `y = A^T x` product per iteration; iterating feeds `y` back as `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spmv {
    input: Option<Arc<Vec<f64>>>,
}

/// SpMV with an all-ones input vector.
pub fn kernel_spmv() -> Spmv {
    Spmv { input: None }
}

pub fn kernel_spmv_with(x: Vec<f64>) -> Spmv {
    Spmv { input: Some(Arc::new(x)) }
}

impl AlgorithmKernel for Spmv {
    fn name(&self) -> &'static str {
        "spmv"
    }

    fn init(&self, num_vertices: usize) -> Result<Vec<Vec<f64>>> {
        match &self.input {
            None => Ok(vec![vec![1.0; num_vertices]]),
            Some(x) if x.len() == num_vertices => {
                if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("input vector entry {i} is not finite")));
                }
                Ok(vec![x.as_ref().clone()])
            }
            Some(x) => Err(Error::Config(format!(
                "input vector has {} entries but the graph has {num_vertices} vertices",
                x.len()
            ))),
        }
    }

    fn process_edge(&self, weight: f64, src: SourceVertex) -> f64 {
        weight * src.prop
    }

    fn apply(&self, acc: f64, update: f64) -> f64 {
        acc + update
    }

    fn finalize(&self, acc: f64, _num_vertices: usize) -> f64 {
        acc
    }
}

pub const AUTHORITY: usize = 0;
pub const HUB: usize = 1;

const HITS_PHASES: [PhaseSpec; 2] = [
    PhaseSpec { input: HUB, output: AUTHORITY, transpose: false },
    PhaseSpec { input: AUTHORITY, output: HUB, transpose: true },
];

/// Hub/authority scores: authority gathers hubs over forward edges, then hub
/// gathers authorities over reversed edges; each vector is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Hits;

pub fn kernel_hits() -> Hits {
    Hits
}

impl AlgorithmKernel for Hits {
    fn name(&self) -> &'static str {
        "hits"
    }

    fn num_slots(&self) -> usize {
        2
    }

    fn phases(&self) -> &[PhaseSpec] {
        &HITS_PHASES
    }

    fn init(&self, num_vertices: usize) -> Result<Vec<Vec<f64>>> {
        Ok(vec![vec![1.0; num_vertices]; 2])
    }

    fn process_edge(&self, _weight: f64, src: SourceVertex) -> f64 {
        src.prop
    }

    fn apply(&self, acc: f64, update: f64) -> f64 {
        acc + update
    }

    fn finalize(&self, acc: f64, _num_vertices: usize) -> f64 {
        acc
    }

    fn normalizes(&self) -> bool {
        true
    }
}

/// Resolves `pr`, `spmv` or `hits`.
pub fn kernel_by_name(name: &str, damping: f64, spmv_input: Option<Vec<f64>>) -> Result<SharedKernel> {
    match name {
        "pr" => Ok(Arc::new(kernel_pagerank(damping)?)),
        "spmv" => Ok(Arc::new(match spmv_input {
            Some(x) => kernel_spmv_with(x),
            None => kernel_spmv(),
        })),
        "hits" => Ok(Arc::new(kernel_hits())),
        other => Err(Error::Config(format!("unknown algorithm {other:?}; expected pr, spmv or hits"))),
    }
}
