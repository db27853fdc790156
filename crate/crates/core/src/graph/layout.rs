use serde::Serialize;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Contiguous half-open range of global vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct VertexInterval {
    pub id: usize,
    pub lo: VertexId,
    pub hi: VertexId,
}

impl VertexInterval {
    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.lo <= v && v < self.hi
    }
}

/// A processing element: one worker-channel pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PeId {
    pub worker: usize,
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayout {
    num_vertices: usize,
    num_workers: usize,
    channels_per_worker: usize,
    interval_range: usize,
    intervals: Vec<VertexInterval>,
    owners: Vec<PeId>,
}

impl ClusterLayout {
    /// Splits `[0, num_vertices)` into intervals of `ceil(V / (W*C))` ids and deals
    /// them out across the whole cluster first: interval k goes to worker `k mod W`,
    /// channel `(k div W) mod C`.
    pub fn new(num_vertices: usize, workers: usize, channels: usize) -> Result<Self> {
        if workers == 0 || channels == 0 {
            return Err(Error::InvalidLayout(format!(
                "workers ({workers}) and channels ({channels}) must both be at least 1"
            )));
        }
        if num_vertices == 0 || num_vertices > VertexId::MAX as usize + 1 {
            return Err(Error::InvalidLayout(format!("unsupported vertex count {num_vertices}")));
        }
        let pes = workers
            .checked_mul(channels)
            .ok_or_else(|| Error::InvalidLayout("processing element count overflows".into()))?;
        if num_vertices < pes {
            return Err(Error::TooManyPes { pes, vertices: num_vertices });
        }
        let interval_range = num_vertices.div_ceil(pes);
        let count = num_vertices.div_ceil(interval_range);
        let mut intervals = Vec::with_capacity(count);
        let mut owners = Vec::with_capacity(count);
        for k in 0..count {
            let lo = k * interval_range;
            let hi = (lo + interval_range).min(num_vertices);
            intervals.push(VertexInterval { id: k, lo: lo as VertexId, hi: hi as VertexId });
            owners.push(PeId { worker: k % workers, channel: (k / workers) % channels });
        }
        Ok(ClusterLayout {
            num_vertices,
            num_workers: workers,
            channels_per_worker: channels,
            interval_range,
            intervals,
            owners,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    pub fn channels_per_worker(&self) -> usize {
        self.channels_per_worker
    }

    pub fn num_pes(&self) -> usize {
        self.num_workers * self.channels_per_worker
    }

    pub fn interval_range(&self) -> usize {
        self.interval_range
    }

    pub fn intervals(&self) -> &[VertexInterval] {
        &self.intervals
    }

    pub fn num_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, id: usize) -> VertexInterval {
        self.intervals[id]
    }

    pub fn interval_of(&self, v: VertexId) -> usize {
        v as usize / self.interval_range
    }

    pub fn owner(&self, interval: usize) -> PeId {
        self.owners[interval]
    }

    /// Intervals whose destination partition lives on `worker`, ascending.
    pub fn owned_by(&self, worker: usize) -> impl Iterator<Item = usize> + '_ {
        (worker..self.intervals.len()).step_by(self.num_workers)
    }
}

pub fn build_layout(g: &Graph, workers: usize, channels: usize) -> Result<ClusterLayout> {
    ClusterLayout::new(g.num_vertices(), workers, channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_vertices_on_four_pes() {
        let l = ClusterLayout::new(16, 2, 2).unwrap();
        assert_eq!(l.interval_range(), 4);
        let owners: Vec<_> = (0..4).map(|k| l.owner(k)).collect();
        assert_eq!(
            owners,
            vec![
                PeId { worker: 0, channel: 0 },
                PeId { worker: 1, channel: 0 },
                PeId { worker: 0, channel: 1 },
                PeId { worker: 1, channel: 1 },
            ]
        );
        assert_eq!(l.owned_by(1).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn ceiling_remainder() {
        let l = ClusterLayout::new(10, 2, 2).unwrap();
        assert_eq!(l.interval_range(), 3);
        assert_eq!(l.intervals().last().unwrap().len(), 1);
        assert_eq!(l.interval_of(9), 3);
    }

    #[test]
    fn rejects_degenerate_layouts() {
        assert!(matches!(ClusterLayout::new(3, 2, 2), Err(Error::TooManyPes { pes: 4, vertices: 3 })));
        assert!(ClusterLayout::new(8, 0, 1).is_err());
        assert!(ClusterLayout::new(8, 1, 0).is_err());
    }
}
