use std::collections::BTreeMap;

use serde::Serialize;

use super::cost::TaskLoad;
use super::sim::{lane_timelines, stage_busy, Schedule};
use crate::engine::{DependencyDag, MessageStats, ScheduleMode, Stage};
use crate::partitioner::PassStats;

/// Partitioner traffic of one pass level, summed over all processing tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PassVolume {
    pub level: usize,
    pub updates: u64,
    /// Bytes read plus bytes written.
    pub bytes: u64,
    pub flushes: u64,
}

/// Summary of one simulated run. Every field is a deterministic function of the
/// inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub algorithm: String,
    pub mode: ScheduleMode,
    pub workers: usize,
    pub channels: usize,
    pub iterations: usize,
    pub edges_traversed: u64,
    pub virtual_seconds: f64,
    pub mteps: f64,
    /// Per stage, busy time summed over workers.
    pub stage_busy: BTreeMap<String, f64>,
    /// Per lane, busy time divided by `virtual_seconds`.
    pub channel_util: BTreeMap<String, f64>,
    pub messages: MessageStats,
    pub partitioner: Vec<PassVolume>,
    /// FNV-1a 64 of the final properties, as `0x` and 16 hex digits.
    pub result_checksum: String,
}

pub fn mteps(edges: u64, seconds: f64) -> f64 {
    if seconds > 0.0 {
        edges as f64 / seconds / 1e6
    } else {
        0.0
    }
}

pub fn format_checksum(sum: u64) -> String {
    format!("{sum:#018x}")
}

/// Adds per-level pass statistics into `into`.
pub fn merge_passes(into: &mut Vec<PassStats>, passes: &[PassStats]) {
    for p in passes {
        match into.get_mut(p.level) {
            Some(acc) => {
                acc.updates += p.updates;
                acc.flushes += p.flushes;
            }
            None => into.push(*p),
        }
    }
}

pub(crate) struct MetricsInput<'a> {
    pub algorithm: &'a str,
    pub mode: ScheduleMode,
    pub workers: usize,
    pub channels: usize,
    pub iterations: usize,
    pub edges_traversed: u64,
    pub messages: MessageStats,
    pub passes: &'a [PassStats],
    pub update_record_bytes: u64,
    pub checksum: u64,
}

pub(crate) fn collect_metrics(
    input: MetricsInput<'_>,
    dag: &DependencyDag,
    loads: &[TaskLoad],
    schedule: &Schedule,
) -> RunMetrics {
    let seconds = schedule.makespan;
    let stage_busy = stage_busy(dag, schedule)
        .into_iter()
        .map(|(s, t): (Stage, f64)| (s.label().to_string(), t))
        .collect();
    let channel_util = lane_timelines(loads, schedule)
        .into_iter()
        .map(|(lane, spans)| {
            let busy: f64 = spans.iter().map(|(s, e)| e - s).sum();
            (lane.to_string(), if seconds > 0.0 { busy / seconds } else { 0.0 })
        })
        .collect();
    RunMetrics {
        algorithm: input.algorithm.to_string(),
        mode: input.mode,
        workers: input.workers,
        channels: input.channels,
        iterations: input.iterations,
        edges_traversed: input.edges_traversed,
        virtual_seconds: seconds,
        mteps: mteps(input.edges_traversed, seconds),
        stage_busy,
        channel_util,
        messages: input.messages,
        partitioner: input
            .passes
            .iter()
            .map(|p| PassVolume {
                level: p.level,
                updates: p.updates,
                bytes: p.bytes(input.update_record_bytes),
                flushes: p.flushes,
            })
            .collect(),
        result_checksum: format_checksum(input.checksum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_format() {
        assert_eq!(format_checksum(0xab), "0x00000000000000ab");
        assert_eq!(format_checksum(u64::MAX), "0xffffffffffffffff");
    }

    #[test]
    fn mteps_of_empty_run() {
        assert_eq!(mteps(0, 0.0), 0.0);
        assert_eq!(mteps(2_000_000, 0.5), 4.0);
    }
}
