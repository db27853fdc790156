use serde::Serialize;

use crate::algorithms::AlgorithmKernel;
use crate::engine::{run_pipeline, PipelineConfig, PreparedGraph};
use crate::error::{Error, Result};
use crate::graph::{ClusterLayout, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub workers: usize,
    pub mteps: f64,
    /// `mteps / (workers * mteps at one worker)`.
    pub efficiency: f64,
}

/// One simulated run per worker count with `channels` channels each. The one-worker
/// baseline is always run, whether or not it is listed.
pub fn scaling_report(
    graph: &Graph,
    kernel: &dyn AlgorithmKernel,
    cfg: &PipelineConfig,
    channels: usize,
    workers: &[usize],
) -> Result<Vec<ScalingRow>> {
    if workers.is_empty() {
        return Err(Error::Config("worker list is empty".into()));
    }
    let transpose = kernel.phases().iter().any(|p| p.transpose);
    let measure = |w: usize| -> Result<f64> {
        let layout = ClusterLayout::new(graph.num_vertices(), w, channels)?;
        let prepared = PreparedGraph::new(graph, layout, transpose);
        Ok(run_pipeline(&prepared, kernel, cfg)?.metrics.mteps)
    };
    let base = measure(1)?;
    workers
        .iter()
        .map(|&w| {
            let m = if w == 1 { base } else { measure(w)? };
            let efficiency = if base > 0.0 { m / (w as f64 * base) } else { 0.0 };
            Ok(ScalingRow { workers: w, mteps: m, efficiency })
        })
        .collect()
}
