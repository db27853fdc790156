use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::Serialize;

use super::cost::{cost_of, CostModel, Lane, TaskLoad};
use crate::engine::{DependencyDag, Stage, TaskId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduledTask {
    pub start: f64,
    pub end: f64,
}

impl ScheduledTask {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Virtual-time placement of every task of a DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Indexed by task id.
    pub entries: Vec<ScheduledTask>,
    pub makespan: f64,
    /// Sum of task durations.
    pub total_work: f64,
}

impl Schedule {
    pub fn entry(&self, id: TaskId) -> ScheduledTask {
        self.entries[id.index()]
    }
}

type ReadyKey = ((usize, usize, usize, usize), TaskId);

/// Greedy list scheduling in virtual time. A task starts as soon as all its
/// predecessors have ended and every lane it needs is idle; when several tasks
/// compete, the one with the smallest `(iteration, worker, interval, stage)` wins.
pub fn simulate_schedule(dag: &DependencyDag, loads: &[TaskLoad], cost: &CostModel) -> Result<Schedule> {
    if loads.len() != dag.len() {
        return Err(Error::Config(format!("{} task loads supplied for a DAG of {} tasks", loads.len(), dag.len())));
    }
    let mut lane_ids: HashMap<Lane, usize> = HashMap::new();
    let task_lanes: Vec<Vec<usize>> = loads
        .iter()
        .map(|l| {
            l.lanes()
                .map(|lane| {
                    let next = lane_ids.len();
                    *lane_ids.entry(lane).or_insert(next)
                })
                .collect()
        })
        .collect();
    let durations: Vec<f64> = loads.iter().map(|l| cost_of(l, cost)).collect();
    let mut busy = vec![false; lane_ids.len()];
    let mut indeg: Vec<usize> = dag.tasks().iter().map(|t| dag.preds(t.id).len()).collect();
    let mut ready: BTreeSet<ReadyKey> =
        dag.tasks().iter().filter(|t| indeg[t.id.index()] == 0).map(|t| (t.priority(), t.id)).collect();
    let mut running: BinaryHeap<Reverse<(u64, TaskId)>> = BinaryHeap::new();
    let mut entries = vec![ScheduledTask { start: f64::NAN, end: f64::NAN }; dag.len()];
    let mut now = 0.0f64;
    let mut done = 0usize;

    let mut complete = |id: TaskId, busy: &mut [bool], ready: &mut BTreeSet<ReadyKey>, done: &mut usize| {
        for &l in &task_lanes[id.index()] {
            busy[l] = false;
        }
        *done += 1;
        for &s in dag.succs(id) {
            indeg[s.index()] -= 1;
            if indeg[s.index()] == 0 {
                ready.insert((dag.task(s).priority(), s));
            }
        }
    };

    loop {
        let mut rescan = true;
        while rescan {
            rescan = false;
            let mut started = Vec::new();
            for &key in &ready {
                let lanes = &task_lanes[key.1.index()];
                if lanes.iter().all(|&l| !busy[l]) {
                    lanes.iter().for_each(|&l| busy[l] = true);
                    started.push(key);
                }
            }
            for key in started {
                ready.remove(&key);
                let id = key.1;
                let end = now + durations[id.index()];
                entries[id.index()] = ScheduledTask { start: now, end };
                if durations[id.index()] == 0.0 {
                    complete(id, &mut busy, &mut ready, &mut done);
                    rescan = true;
                } else {
                    running.push(Reverse((end.to_bits(), id)));
                }
            }
        }
        let Some(&Reverse((bits, _))) = running.peek() else { break };
        now = f64::from_bits(bits);
        while let Some(&Reverse((b, id))) = running.peek() {
            if b != bits {
                break;
            }
            running.pop();
            complete(id, &mut busy, &mut ready, &mut done);
        }
    }
    if done != dag.len() {
        return Err(Error::CyclicDag);
    }
    let makespan = entries.iter().map(|e| e.end).fold(0.0, f64::max);
    Ok(Schedule { entries, makespan, total_work: durations.iter().sum() })
}

/// Busy intervals of every lane, sorted by start time.
pub fn lane_timelines(loads: &[TaskLoad], schedule: &Schedule) -> BTreeMap<Lane, Vec<(f64, f64)>> {
    let mut lanes: BTreeMap<Lane, Vec<(f64, f64)>> = BTreeMap::new();
    for (load, e) in loads.iter().zip(&schedule.entries) {
        for lane in load.lanes() {
            lanes.entry(lane).or_default().push((e.start, e.end));
        }
    }
    for spans in lanes.values_mut() {
        spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    lanes
}

/// Length of the union of half-open spans.
pub fn union_length(spans: &mut [(f64, f64)]) -> f64 {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &(s, e) in spans.iter() {
        current = match current {
            Some((cs, ce)) if s <= ce => Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                Some((s, e))
            }
            None => Some((s, e)),
        };
    }
    if let Some((cs, ce)) = current {
        total += ce - cs;
    }
    total
}

/// Per stage, the sum over workers of the time at least one task of that stage was
/// running on the worker.
pub fn stage_busy(dag: &DependencyDag, schedule: &Schedule) -> BTreeMap<Stage, f64> {
    let mut spans: BTreeMap<(Stage, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for t in dag.tasks() {
        let e = schedule.entry(t.id);
        if Stage::WORK_STAGES.contains(&t.stage) && e.end > e.start {
            spans.entry((t.stage, t.worker)).or_default().push((e.start, e.end));
        }
    }
    let mut out = BTreeMap::new();
    for ((stage, _), mut s) in spans {
        *out.entry(stage).or_insert(0.0) += union_length(&mut s);
    }
    out
}
