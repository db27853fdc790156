use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitioner::PassStats;

/// Bandwidth and latency parameters of the simulated cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Bytes per second of one HBM channel.
    pub hbm_channel_bw: f64,
    /// Bytes per second in each direction of a worker's PCIe link.
    pub pcie_bw_per_worker: f64,
    /// Fixed per-task latency in seconds.
    pub task_latency: f64,
    pub update_record_bytes: u64,
    pub property_record_bytes: u64,
    pub edge_record_bytes: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            hbm_channel_bw: 460e9 / 32.0,
            pcie_bw_per_worker: 17e9,
            task_latency: 2e-6,
            update_record_bytes: 12,
            property_record_bytes: 12,
            edge_record_bytes: 16,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        for (name, bw) in [("hbm_channel_bw", self.hbm_channel_bw), ("pcie_bw_per_worker", self.pcie_bw_per_worker)] {
            if !(bw > 0.0 && bw.is_finite()) {
                return Err(Error::Config(format!("{name} must be a positive finite number, got {bw}")));
            }
        }
        if !(self.task_latency >= 0.0 && self.task_latency.is_finite()) {
            return Err(Error::Config(format!("task_latency must be finite and >= 0, got {}", self.task_latency)));
        }
        Ok(())
    }

    /// Parses a TOML document; absent keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cost: CostModel = toml::from_str(text).map_err(|e| Error::Config(format!("cost model: {e}")))?;
        cost.validate()?;
        Ok(cost)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        CostModel::from_toml_str(&text)
    }

    /// Same model with every bandwidth multiplied by `factor`.
    pub fn with_bandwidth_scaled(&self, factor: f64) -> Self {
        CostModel {
            hbm_channel_bw: self.hbm_channel_bw * factor,
            pcie_bw_per_worker: self.pcie_bw_per_worker * factor,
            ..*self
        }
    }

    pub fn bandwidth(&self, lane: Lane) -> f64 {
        match lane {
            Lane::Hbm { .. } => self.hbm_channel_bw,
            Lane::PcieEgress { .. } | Lane::PcieIngress { .. } => self.pcie_bw_per_worker,
        }
    }

    /// Bytes a processing task moves on one channel: edge reads, update writes and
    /// the read+write traffic of every partitioning pass.
    pub fn process_bytes(&self, edges: u64, updates: u64, passes: &[PassStats]) -> u64 {
        edges * self.edge_record_bytes
            + updates * self.update_record_bytes
            + passes.iter().map(|p| p.bytes(self.update_record_bytes)).sum::<u64>()
    }

    /// Bytes an apply task moves: update reads plus a read and a write of each property.
    pub fn apply_bytes(&self, updates: u64, vertices: u64) -> u64 {
        updates * self.update_record_bytes + 2 * vertices * self.property_record_bytes
    }

    pub fn frontier_bytes(&self, entries: u64) -> u64 {
        entries * self.property_record_bytes
    }
}

/// An exclusive bandwidth resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lane {
    Hbm { worker: usize, channel: usize },
    PcieEgress { worker: usize },
    PcieIngress { worker: usize },
}

impl fmt::Display for Lane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lane::Hbm { worker, channel } => write!(f, "hbm/w{worker}/c{channel}"),
            Lane::PcieEgress { worker } => write!(f, "pcie-out/w{worker}"),
            Lane::PcieIngress { worker } => write!(f, "pcie-in/w{worker}"),
        }
    }
}

/// Resources a task holds for its whole duration and the bytes it moves on each.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum TaskLoad {
    /// Local bookkeeping: no lane, zero duration.
    #[default]
    Free,
    Lanes(Vec<(Lane, u64)>),
}

impl TaskLoad {
    pub fn single(lane: Lane, bytes: u64) -> Self {
        TaskLoad::Lanes(vec![(lane, bytes)])
    }

    pub fn lanes(&self) -> impl Iterator<Item = Lane> + '_ {
        let slice: &[(Lane, u64)] = match self {
            TaskLoad::Free => &[],
            TaskLoad::Lanes(v) => v,
        };
        slice.iter().map(|(l, _)| *l)
    }

    pub fn total_bytes(&self) -> u64 {
        match self {
            TaskLoad::Free => 0,
            TaskLoad::Lanes(v) => v.iter().map(|(_, b)| b).sum(),
        }
    }
}

/// `latency + bytes / bandwidth`; a task spanning several lanes streams them in
/// parallel and is as long as its busiest lane.
pub fn cost_of(load: &TaskLoad, cost: &CostModel) -> f64 {
    match load {
        TaskLoad::Free => 0.0,
        TaskLoad::Lanes(lanes) => {
            let transfer = lanes.iter().map(|&(lane, bytes)| bytes as f64 / cost.bandwidth(lane)).fold(0.0, f64::max);
            cost.task_latency + transfer
        }
    }
}
