use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ClusterLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    /// Merge a remote (or local) frontier into the worker's source-property replica.
    ImportFrontier,
    /// Stream one source interval's edges on every owned partition and partition
    /// the resulting updates.
    ProcessPartition,
    ApplyUpdates,
    ExportFrontier,
    /// Host-side global reduction (vector norm) over one step's exports.
    Reduce,
    /// Bulk-synchronous barrier between stage families.
    Barrier,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::ImportFrontier => "IF",
            Stage::ProcessPartition => "PE+PU",
            Stage::ApplyUpdates => "AU",
            Stage::ExportFrontier => "EF",
            Stage::Reduce => "REDUCE",
            Stage::Barrier => "BARRIER",
        }
    }

    /// Position of the stage within an iteration, used for tie-breaking.
    pub fn order(self) -> usize {
        match self {
            Stage::ImportFrontier => 0,
            Stage::ProcessPartition => 1,
            Stage::ApplyUpdates => 2,
            Stage::ExportFrontier => 3,
            Stage::Reduce => 4,
            Stage::Barrier => 5,
        }
    }

    pub const WORK_STAGES: [Stage; 4] =
        [Stage::ImportFrontier, Stage::ProcessPartition, Stage::ApplyUpdates, Stage::ExportFrontier];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Sync,
    Async,
}

impl ScheduleMode {
    pub fn label(self) -> &'static str {
        match self {
            ScheduleMode::Sync => "sync",
            ScheduleMode::Async => "async",
        }
    }
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TaskId(pub u32);

impl TaskId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identity of a task independent of its id: `(stage, worker, interval, step)`.
/// Barrier tasks use `interval` for the stage family they close; reductions use 0
/// for both worker and interval.
pub type TaskKey = (Stage, usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageTask {
    pub id: TaskId,
    pub stage: Stage,
    pub worker: usize,
    pub interval: usize,
    /// Gather step. Equals the iteration for single-phase kernels; two-phase
    /// kernels run two steps per iteration.
    pub iteration: usize,
}

impl StageTask {
    pub fn key(&self) -> TaskKey {
        (self.stage, self.worker, self.interval, self.iteration)
    }

    /// Deterministic priority: iteration, worker, interval, stage.
    pub fn priority(&self) -> (usize, usize, usize, usize) {
        (self.iteration, self.worker, self.interval, self.stage.order())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagOptions {
    pub mode: ScheduleMode,
    pub steps: usize,
    /// Every import of step k+1 waits for every export of step k (global norm).
    pub global_reduction: bool,
}

#[derive(Debug, Clone)]
pub struct DependencyDag {
    mode: ScheduleMode,
    steps: usize,
    tasks: Vec<StageTask>,
    preds: Vec<Vec<TaskId>>,
    succs: Vec<Vec<TaskId>>,
    index: HashMap<TaskKey, TaskId>,
}

struct Builder {
    tasks: Vec<StageTask>,
    index: HashMap<TaskKey, TaskId>,
    edges: Vec<(TaskId, TaskId)>,
}

impl Builder {
    fn add(&mut self, stage: Stage, worker: usize, interval: usize, iteration: usize) -> TaskId {
        let id = TaskId(self.tasks.len() as u32);
        self.tasks.push(StageTask { id, stage, worker, interval, iteration });
        self.index.insert((stage, worker, interval, iteration), id);
        id
    }

    fn get(&self, key: TaskKey) -> TaskId {
        self.index[&key]
    }

    fn edge(&mut self, from: TaskId, to: TaskId) {
        self.edges.push((from, to));
    }
}

/// Stage dependencies for `iterations` single-phase steps.
pub fn build_dag(layout: &ClusterLayout, iterations: usize, mode: ScheduleMode) -> DependencyDag {
    build_dag_with(layout, &DagOptions { mode, steps: iterations, global_reduction: false })
}

pub fn build_dag_with(layout: &ClusterLayout, opts: &DagOptions) -> DependencyDag {
    let w_count = layout.num_workers();
    let n = layout.num_intervals();
    let sync = opts.mode == ScheduleMode::Sync;
    let mut b = Builder { tasks: Vec::new(), index: HashMap::new(), edges: Vec::new() };
    let owned: Vec<Vec<usize>> = (0..w_count).map(|w| layout.owned_by(w).collect()).collect();
    for k in 0..opts.steps {
        let first = b.tasks.len();
        for w in 0..w_count {
            for i in 0..n {
                b.add(Stage::ImportFrontier, w, i, k);
            }
        }
        for w in 0..w_count {
            for i in 0..n {
                b.add(Stage::ProcessPartition, w, i, k);
            }
        }
        for (w, parts) in owned.iter().enumerate() {
            for &p in parts {
                b.add(Stage::ApplyUpdates, w, p, k);
            }
        }
        for (w, parts) in owned.iter().enumerate() {
            for &p in parts {
                b.add(Stage::ExportFrontier, w, p, k);
            }
        }
        let work: Vec<StageTask> = b.tasks[first..].to_vec();
        if opts.global_reduction {
            b.add(Stage::Reduce, 0, 0, k);
        }
        if sync {
            for s in Stage::WORK_STAGES {
                b.add(Stage::Barrier, 0, s.order(), k);
            }
        }

        for (w, parts) in owned.iter().enumerate() {
            for i in 0..n {
                let import = b.get((Stage::ImportFrontier, w, i, k));
                let process = b.get((Stage::ProcessPartition, w, i, k));
                if k > 0 {
                    let owner = layout.owner(i).worker;
                    b.edge(b.get((Stage::ExportFrontier, owner, i, k - 1)), import);
                    b.edge(b.get((Stage::ProcessPartition, w, i, k - 1)), import);
                    if opts.global_reduction {
                        b.edge(b.get((Stage::Reduce, 0, 0, k - 1)), import);
                    }
                }
                b.edge(import, process);
                for &p in parts {
                    b.edge(process, b.get((Stage::ApplyUpdates, w, p, k)));
                }
            }
            for &p in &owned[w] {
                b.edge(b.get((Stage::ApplyUpdates, w, p, k)), b.get((Stage::ExportFrontier, w, p, k)));
                if opts.global_reduction {
                    b.edge(b.get((Stage::ExportFrontier, w, p, k)), b.get((Stage::Reduce, 0, 0, k)));
                }
            }
        }

        if sync {
            let mut previous: Option<TaskId> = if k > 0 {
                Some(b.get((Stage::Barrier, 0, Stage::ExportFrontier.order(), k - 1)))
            } else {
                None
            };
            for s in Stage::WORK_STAGES {
                let barrier = b.get((Stage::Barrier, 0, s.order(), k));
                for t in work.iter().filter(|t| t.stage == s).map(|t| t.id) {
                    if let Some(prev) = previous {
                        b.edge(prev, t);
                    }
                    b.edge(t, barrier);
                }
                if let Some(prev) = previous {
                    b.edge(prev, barrier);
                }
                previous = Some(barrier);
            }
        }
    }
    DependencyDag::assemble(opts.mode, opts.steps, b.tasks, b.index, b.edges)
}

impl DependencyDag {
    fn assemble(
        mode: ScheduleMode,
        steps: usize,
        tasks: Vec<StageTask>,
        index: HashMap<TaskKey, TaskId>,
        edges: Vec<(TaskId, TaskId)>,
    ) -> Self {
        let mut preds = vec![Vec::new(); tasks.len()];
        let mut succs = vec![Vec::new(); tasks.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for (a, b) in edges {
            if seen.insert((a, b)) {
                succs[a.index()].push(b);
                preds[b.index()].push(a);
            }
        }
        DependencyDag { mode, steps, tasks, preds, succs, index }
    }

    /// Builds a DAG from explicit parts. Intended for tests and tools; the result is
    /// not checked for cycles.
    pub fn from_parts(mode: ScheduleMode, tasks: Vec<StageTask>, edges: Vec<(TaskId, TaskId)>) -> Self {
        let index = tasks.iter().map(|t| (t.key(), t.id)).collect();
        let steps = tasks.iter().map(|t| t.iteration + 1).max().unwrap_or(0);
        DependencyDag::assemble(mode, steps, tasks, index, edges)
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[StageTask] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> &StageTask {
        &self.tasks[id.index()]
    }

    pub fn preds(&self, id: TaskId) -> &[TaskId] {
        &self.preds[id.index()]
    }

    pub fn succs(&self, id: TaskId) -> &[TaskId] {
        &self.succs[id.index()]
    }

    pub fn find(&self, key: TaskKey) -> Option<TaskId> {
        self.index.get(&key).copied()
    }

    pub fn num_edges(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    /// Edges as pairs of task keys, comparable across DAGs.
    pub fn edge_keys(&self) -> HashSet<(TaskKey, TaskKey)> {
        self.tasks
            .iter()
            .flat_map(|t| self.succs(t.id).iter().map(move |s| (t.key(), self.task(*s).key())))
            .collect()
    }

    /// Kahn's algorithm; fails on a cycle.
    pub fn topological_order(&self) -> Result<Vec<TaskId>> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: VecDeque<TaskId> =
            self.tasks.iter().filter(|t| indeg[t.id.index()] == 0).map(|t| t.id).collect();
        let mut order = Vec::with_capacity(self.tasks.len());
        while let Some(id) = queue.pop_front() {
            order.push(id);
            for &s in self.succs(id) {
                indeg[s.index()] -= 1;
                if indeg[s.index()] == 0 {
                    queue.push_back(s);
                }
            }
        }
        if order.len() == self.tasks.len() {
            Ok(order)
        } else {
            Err(Error::CyclicDag)
        }
    }

    /// Whether a directed path leads from `from` to `to`.
    pub fn reaches(&self, from: TaskId, to: TaskId) -> bool {
        let mut seen = vec![false; self.tasks.len()];
        let mut stack = vec![from];
        while let Some(id) = stack.pop() {
            if id == to {
                return true;
            }
            for &s in self.succs(id) {
                if !seen[s.index()] {
                    seen[s.index()] = true;
                    stack.push(s);
                }
            }
        }
        false
    }
}
