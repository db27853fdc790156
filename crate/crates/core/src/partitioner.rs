//! Multi-pass bounded-buffer partitioning of vertex updates by destination.
//!
//! Each pass splits every run's destination range into `fanout` equal sub-ranges and
//! streams the updates through a small staging buffer, one block per child. A full
//! block is flushed to the child's backing stream, so the buffer never holds more
//! than `buffer_capacity` updates. Passes repeat breadth-first until every run spans
//! at most `target_range` destination ids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexInterval};

/// A `(value, dst)` pair produced by processing one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexUpdate {
    pub value: f64,
    pub dst: VertexId,
}

impl VertexUpdate {
    pub fn new(value: f64, dst: VertexId) -> Self {
        VertexUpdate { value, dst }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionerConfig {
    /// Buckets per pass.
    pub fanout: usize,
    /// Updates the fast buffer can hold at once.
    pub buffer_capacity: usize,
    /// Widest destination range allowed in a final run.
    pub target_range: usize,
}

impl Default for PartitionerConfig {
    fn default() -> Self {
        PartitionerConfig { fanout: 16, buffer_capacity: 4096, target_range: 4096 }
    }
}

impl PartitionerConfig {
    pub fn new(fanout: usize, buffer_capacity: usize, target_range: usize) -> Result<Self> {
        let cfg = PartitionerConfig { fanout, buffer_capacity, target_range };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fanout < 2 {
            return Err(Error::Config(format!("partitioner fanout {} must be >= 2", self.fanout)));
        }
        if self.buffer_capacity < self.fanout {
            return Err(Error::Config(format!(
                "partitioner buffer {} must hold at least one update per bucket ({})",
                self.buffer_capacity, self.fanout
            )));
        }
        if self.target_range == 0 {
            return Err(Error::Config("partitioner target range must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketRun {
    pub dst_lo: VertexId,
    pub dst_hi: VertexId,
    pub updates: Vec<VertexUpdate>,
    pub level: usize,
}

impl BucketRun {
    pub fn new(dst_lo: VertexId, dst_hi: VertexId, updates: Vec<VertexUpdate>) -> Self {
        BucketRun { dst_lo, dst_hi, updates, level: 0 }
    }

    pub fn width(&self) -> usize {
        (self.dst_hi - self.dst_lo) as usize
    }
}

/// Traffic of one pass over all runs of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PassStats {
    pub level: usize,
    /// Updates read, which equals updates written.
    pub updates: u64,
    /// Staging blocks written back to the backing store.
    pub flushes: u64,
}

impl PassStats {
    /// Bytes read plus bytes written.
    pub fn bytes(&self, record_bytes: u64) -> u64 {
        2 * self.updates * record_bytes
    }
}

/// Instrumented model of the on-chip staging buffer.
#[derive(Debug, Clone, Default)]
pub struct FastBuffer {
    occupancy: usize,
    peak: usize,
    flushes: u64,
}

impl FastBuffer {
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    pub fn flushes(&self) -> u64 {
        self.flushes
    }

    fn stage(&mut self) {
        self.occupancy += 1;
        self.peak = self.peak.max(self.occupancy);
    }

    fn drain(&mut self, n: usize) {
        self.occupancy -= n;
        self.flushes += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    pub runs: Vec<BucketRun>,
    pub passes: Vec<PassStats>,
    pub peak_occupancy: usize,
}

impl PartitionOutcome {
    pub fn num_passes(&self) -> usize {
        self.passes.len()
    }

    pub fn total_updates(&self) -> usize {
        self.runs.iter().map(|r| r.updates.len()).sum()
    }
}

/// `ceil(log_F(ceil(R / T)))`, or 0 when the range already fits.
pub fn plan_passes(range: usize, cfg: &PartitionerConfig) -> usize {
    let buckets = range.div_ceil(cfg.target_range);
    let mut passes = 0;
    let mut reach = 1usize;
    while reach < buckets {
        reach = reach.saturating_mul(cfg.fanout);
        passes += 1;
    }
    passes
}

fn split(run: BucketRun, fanout: usize, block: usize, buf: &mut FastBuffer) -> Vec<BucketRun> {
    let width = run.width().div_ceil(fanout).max(1);
    let hi = run.dst_hi as usize;
    let lo = run.dst_lo as usize;
    let mut children: Vec<BucketRun> = (0..fanout)
        .map(|j| BucketRun {
            dst_lo: (lo + j * width).min(hi) as VertexId,
            dst_hi: (lo + (j + 1) * width).min(hi) as VertexId,
            updates: Vec::new(),
            level: run.level + 1,
        })
        .collect();
    let mut staged: Vec<Vec<VertexUpdate>> = (0..fanout).map(|_| Vec::with_capacity(block)).collect();
    for u in run.updates {
        debug_assert!(u.dst >= run.dst_lo && u.dst < run.dst_hi, "update outside run range");
        let j = (u.dst as usize - lo) / width;
        staged[j].push(u);
        buf.stage();
        if staged[j].len() == block {
            buf.drain(block);
            children[j].updates.append(&mut staged[j]);
        }
    }
    for (child, rest) in children.iter_mut().zip(staged.iter_mut()) {
        if !rest.is_empty() {
            buf.drain(rest.len());
            child.updates.append(rest);
        }
    }
    children
}

/// One stable `F`-way split of `run`. Always returns exactly `F` children; when the
/// run is narrower than `F` the trailing children are zero-width.
pub fn partition_pass(run: BucketRun, cfg: &PartitionerConfig) -> Vec<BucketRun> {
    let mut buf = FastBuffer::default();
    partition_pass_with(run, cfg, &mut buf)
}

pub fn partition_pass_with(run: BucketRun, cfg: &PartitionerConfig, buf: &mut FastBuffer) -> Vec<BucketRun> {
    split(run, cfg.fanout, cfg.buffer_capacity / cfg.fanout, buf)
}

/// Runs `plan_passes` levels of `partition_pass` breadth-first and returns the
/// non-empty-range runs of the last level in ascending destination order.
pub fn recursive_partition(
    updates: Vec<VertexUpdate>,
    dst_interval: VertexInterval,
    cfg: &PartitionerConfig,
) -> PartitionOutcome {
    let planned = plan_passes(dst_interval.len(), cfg);
    let mut buf = FastBuffer::default();
    let mut level = vec![BucketRun::new(dst_interval.lo, dst_interval.hi, updates)];
    let mut passes = Vec::with_capacity(planned);
    for pass in 0..planned {
        let updates: usize = level.iter().map(|r| r.updates.len()).sum();
        let flushes_before = buf.flushes();
        let mut next = Vec::with_capacity(level.len() * cfg.fanout);
        for run in level {
            next.extend(
                partition_pass_with(run, cfg, &mut buf)
                    .into_iter()
                    .filter(|c| c.dst_lo < c.dst_hi),
            );
        }
        passes.push(PassStats {
            level: pass,
            updates: updates as u64,
            flushes: buf.flushes() - flushes_before,
        });
        level = next;
    }
    PartitionOutcome { runs: level, passes, peak_occupancy: buf.peak() }
}

/// Single-pass baseline: `ceil(R / T)` buckets filled in one sweep, each with a
/// staging block of `max(1, B / buckets)` updates.
pub fn bucket_partition(
    updates: Vec<VertexUpdate>,
    dst_interval: VertexInterval,
    cfg: &PartitionerConfig,
) -> PartitionOutcome {
    let buckets = dst_interval.len().div_ceil(cfg.target_range);
    let run = BucketRun::new(dst_interval.lo, dst_interval.hi, updates);
    if buckets <= 1 {
        return PartitionOutcome { runs: vec![run], passes: Vec::new(), peak_occupancy: 0 };
    }
    let n = run.updates.len() as u64;
    let mut buf = FastBuffer::default();
    let block = (cfg.buffer_capacity / buckets).max(1);
    let runs: Vec<BucketRun> =
        split(run, buckets, block, &mut buf).into_iter().filter(|c| c.dst_lo < c.dst_hi).collect();
    PartitionOutcome {
        runs,
        passes: vec![PassStats { level: 0, updates: n, flushes: buf.flushes() }],
        peak_occupancy: buf.peak(),
    }
}
