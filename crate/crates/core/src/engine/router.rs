use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexId;

pub const DEFAULT_ROUTER_CAPACITY: usize = 1024;

/// Changed properties of one interval, sent from its owner to one remote worker.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierMessage {
    pub src_worker: usize,
    pub dst_worker: usize,
    pub interval: usize,
    pub iteration: usize,
    /// `(global id, value)` pairs; shared between the copies of one broadcast.
    pub payload: Arc<Vec<(VertexId, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum DeliveryEvent {
    Egress { worker: usize, bytes: u64 },
    HostBuffer { bytes: u64 },
    Ingress { worker: usize, bytes: u64 },
    ReadyForImport { worker: usize, interval: usize, iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MessageStats {
    pub count: u64,
    pub bytes: u64,
}

/// Host-side staging buffer between workers. Each destination worker has a
/// bounded queue of undelivered messages keyed by `(interval, iteration)`.
#[derive(Debug)]
pub struct HostRouter {
    workers: usize,
    capacity: usize,
    record_bytes: u64,
    queues: Vec<HashMap<(usize, usize), FrontierMessage>>,
    reserved: Vec<usize>,
    stats: MessageStats,
}

impl HostRouter {
    pub fn new(workers: usize, capacity: usize, record_bytes: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("router capacity must be at least one message".into()));
        }
        Ok(HostRouter {
            workers,
            capacity,
            record_bytes,
            queues: vec![HashMap::new(); workers],
            reserved: vec![0; workers],
            stats: MessageStats::default(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn stats(&self) -> MessageStats {
        self.stats
    }

    pub fn depth(&self, worker: usize) -> usize {
        self.queues[worker].len()
    }

    fn room(&self, worker: usize) -> usize {
        self.capacity - self.queues[worker].len() - self.reserved[worker]
    }

    /// Reserves one slot on every remote queue for a broadcast from `src`. Returns
    /// false, reserving nothing, if any queue is full.
    pub fn try_reserve_broadcast(&mut self, src: usize) -> bool {
        if (0..self.workers).any(|w| w != src && self.room(w) == 0) {
            return false;
        }
        for w in (0..self.workers).filter(|&w| w != src) {
            self.reserved[w] += 1;
        }
        true
    }

    /// Queues one message. Uses a reservation on the destination if one is held.
    pub fn route(&mut self, msg: FrontierMessage) -> Result<Vec<DeliveryEvent>> {
        self.deliver(msg, true)
    }

    fn deliver(&mut self, msg: FrontierMessage, retain: bool) -> Result<Vec<DeliveryEvent>> {
        let dst = msg.dst_worker;
        if dst >= self.workers || msg.src_worker >= self.workers {
            return Err(Error::UnknownWorker { worker: dst.max(msg.src_worker), workers: self.workers });
        }
        if self.reserved[dst] > 0 {
            self.reserved[dst] -= 1;
        } else if retain && self.room(dst) == 0 {
            return Err(Error::RouterOverflow { worker: dst, capacity: self.capacity });
        }
        let bytes = msg.payload.len() as u64 * self.record_bytes;
        let events = vec![
            DeliveryEvent::Egress { worker: msg.src_worker, bytes },
            DeliveryEvent::HostBuffer { bytes },
            DeliveryEvent::Ingress { worker: dst, bytes },
            DeliveryEvent::ReadyForImport { worker: dst, interval: msg.interval, iteration: msg.iteration },
        ];
        self.stats.count += 1;
        self.stats.bytes += bytes;
        if retain {
            let prev = self.queues[dst].insert((msg.interval, msg.iteration), msg);
            debug_assert!(prev.is_none(), "duplicate frontier message");
        }
        Ok(events)
    }

    /// Sends `payload` from `src` to every other worker.
    pub fn broadcast(
        &mut self,
        src: usize,
        interval: usize,
        iteration: usize,
        payload: Arc<Vec<(VertexId, f64)>>,
    ) -> Result<Vec<DeliveryEvent>> {
        self.fan_out(src, interval, iteration, payload, true)
    }

    /// Like [`HostRouter::broadcast`], for a frontier no import will ever read:
    /// traffic is accounted but nothing is queued, so no room is needed.
    pub fn broadcast_terminal(
        &mut self,
        src: usize,
        interval: usize,
        iteration: usize,
        payload: Arc<Vec<(VertexId, f64)>>,
    ) -> Result<Vec<DeliveryEvent>> {
        self.fan_out(src, interval, iteration, payload, false)
    }

    fn fan_out(
        &mut self,
        src: usize,
        interval: usize,
        iteration: usize,
        payload: Arc<Vec<(VertexId, f64)>>,
        retain: bool,
    ) -> Result<Vec<DeliveryEvent>> {
        let mut events = Vec::new();
        for dst in (0..self.workers).filter(|&w| w != src) {
            let msg = FrontierMessage { src_worker: src, dst_worker: dst, interval, iteration, payload: Arc::clone(&payload) };
            events.extend(self.deliver(msg, retain)?);
        }
        Ok(events)
    }

    /// Removes the message for `(interval, iteration)` addressed to `worker`.
    pub fn take(&mut self, worker: usize, interval: usize, iteration: usize) -> Option<FrontierMessage> {
        self.queues[worker].remove(&(interval, iteration))
    }
}

/// Routes one message through `router`.
pub fn route_frontier(msg: FrontierMessage, router: &mut HostRouter) -> Result<Vec<DeliveryEvent>> {
    router.route(msg)
}
