//! Functional execution of a stage DAG.
//!
//! Task semantics live in [`Context::execute`]; the [`Coordinator`] releases tasks
//! whose predecessors have completed, either one at a time in priority order or to
//! one executor thread per (worker, stage module).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex, RwLock};
use std::thread;

use serde::Serialize;

use super::dag::{DependencyDag, Stage, StageTask, TaskId};
use super::router::{DeliveryEvent, HostRouter};
use super::state::{IntervalState, StateTable};
use super::PreparedGraph;
use crate::algorithms::{l2_norm, AlgorithmKernel, ConvergenceMode, ConvergenceSpec, PhaseSpec, SourceVertex, VertexState};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::partitioner::{recursive_partition, BucketRun, PartitionerConfig, PassStats, VertexUpdate};
use crate::perf::{CostModel, Lane, TaskLoad};

/// What one task did: the resources it occupied and the work it performed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskOutput {
    pub load: TaskLoad,
    pub edges: u64,
    pub updates: u64,
    pub passes: Vec<PassStats>,
    /// Vertices that moved by more than epsilon (apply and reduce tasks).
    pub active: u64,
    pub deliveries: Vec<DeliveryEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ExecEvent {
    Dispatched { task: TaskId },
    Completed { task: TaskId },
    /// A frontier message reached `worker` and is waiting for import.
    Delivered { worker: usize, interval: usize, iteration: usize },
    /// Skipped because the run converged before its step.
    Cancelled { task: TaskId },
}

#[derive(Debug, Clone)]
pub struct ExecReport {
    /// Indexed by task id; `None` for tasks that never ran.
    pub outputs: Vec<Option<TaskOutput>>,
    pub log: Vec<ExecEvent>,
    pub states: StateTable,
    pub executed_steps: usize,
}

struct Owned {
    props: Vec<Vec<f64>>,
    acc: Vec<f64>,
    changed: Vec<bool>,
    active: Vec<bool>,
}

struct WorkerState {
    /// Source-property replica, `[slot][interval]`.
    replicas: Vec<Vec<RwLock<Vec<f64>>>>,
    /// Destination partitions owned by this worker, indexed by interval id.
    owned: Vec<Option<Mutex<Owned>>>,
    /// Partitioned updates keyed by `(dst interval, src interval, step)`.
    buffers: Mutex<HashMap<(usize, usize, usize), Vec<BucketRun>>>,
}

struct Host {
    router: HostRouter,
    /// Raw exported values per slot, used for global norms.
    mirror: Vec<Vec<f64>>,
    norms: Vec<f64>,
    slot_norm: Vec<Option<f64>>,
    normalized: Vec<Vec<f64>>,
    active: Vec<bool>,
}

pub(crate) struct Context<'a> {
    prepared: &'a PreparedGraph,
    kernel: &'a dyn AlgorithmKernel,
    conv: ConvergenceSpec,
    partitioner: PartitionerConfig,
    cost: CostModel,
    phases: Vec<PhaseSpec>,
    workers: Vec<WorkerState>,
    host: Mutex<Host>,
    /// Last step whose frontier is imported by nobody; lowered on convergence.
    terminal_step: AtomicUsize,
}

fn poisoned<T, R>(_: T) -> R {
    panic!("executor state lock poisoned by a panicking task")
}

impl<'a> Context<'a> {
    pub(crate) fn new(
        prepared: &'a PreparedGraph,
        kernel: &'a dyn AlgorithmKernel,
        conv: ConvergenceSpec,
        partitioner: PartitionerConfig,
        cost: CostModel,
        router_capacity: usize,
        steps: usize,
    ) -> Result<Self> {
        let layout = prepared.layout();
        let n_vertices = layout.num_vertices();
        let init = kernel.init(n_vertices)?;
        if init.len() != kernel.num_slots() || init.iter().any(|s| s.len() != n_vertices) {
            return Err(Error::Config(format!("kernel {} produced a malformed initial state", kernel.name())));
        }
        let slice = |slot: &[f64], iv: usize| {
            let r = layout.interval(iv);
            slot[r.lo as usize..r.hi as usize].to_vec()
        };
        let workers = (0..layout.num_workers())
            .map(|w| WorkerState {
                replicas: init
                    .iter()
                    .map(|slot| (0..layout.num_intervals()).map(|i| RwLock::new(slice(slot, i))).collect())
                    .collect(),
                owned: (0..layout.num_intervals())
                    .map(|i| {
                        (layout.owner(i).worker == w).then(|| {
                            let len = layout.interval(i).len();
                            Mutex::new(Owned {
                                props: init.iter().map(|slot| slice(slot, i)).collect(),
                                acc: vec![kernel.identity(); len],
                                changed: vec![true; len],
                                active: vec![true; len],
                            })
                        })
                    })
                    .collect(),
                buffers: Mutex::new(HashMap::new()),
            })
            .collect();
        let host = Host {
            router: HostRouter::new(layout.num_workers(), router_capacity, cost.property_record_bytes)?,
            mirror: if kernel.normalizes() { init.clone() } else { Vec::new() },
            norms: vec![f64::NAN; steps],
            slot_norm: vec![None; kernel.num_slots()],
            normalized: if kernel.normalizes() { init } else { Vec::new() },
            active: vec![true; n_vertices],
        };
        Ok(Context {
            prepared,
            kernel,
            conv,
            partitioner,
            cost,
            phases: kernel.phases().to_vec(),
            workers,
            host: Mutex::new(host),
            terminal_step: AtomicUsize::new(steps.saturating_sub(1)),
        })
    }

    fn phase(&self, step: usize) -> PhaseSpec {
        self.phases[step % self.phases.len()]
    }

    fn iteration_number(&self, step: usize) -> usize {
        step / self.phases.len() + 1
    }

    fn is_last_phase(&self, step: usize) -> bool {
        (step + 1).is_multiple_of(self.phases.len())
    }

    fn is_terminal(&self, step: usize) -> bool {
        step >= self.terminal_step.load(Ordering::SeqCst)
    }

    fn exports_everything(&self) -> bool {
        self.conv.mode == ConvergenceMode::FixedIterations || self.kernel.normalizes()
    }

    pub(crate) fn execute(&self, t: &StageTask) -> Result<TaskOutput> {
        match t.stage {
            Stage::ImportFrontier => self.import(t),
            Stage::ProcessPartition => self.process(t),
            Stage::ApplyUpdates => self.apply(t),
            Stage::ExportFrontier => self.export(t),
            Stage::Reduce => self.reduce(t.iteration),
            Stage::Barrier => Ok(TaskOutput::default()),
        }
    }

    fn import(&self, t: &StageTask) -> Result<TaskOutput> {
        if t.iteration == 0 {
            return Ok(TaskOutput::default());
        }
        let layout = self.prepared.layout();
        let iv = layout.interval(t.interval);
        let slot = self.phase(t.iteration - 1).output;
        let ws = &self.workers[t.worker];
        let norm = if self.kernel.normalizes() {
            Some(self.host.lock().unwrap_or_else(poisoned).norms[t.iteration - 1])
        } else {
            None
        };
        let scale = |x: f64| norm.map_or(x, |n| x / n);
        if layout.owner(t.interval).worker == t.worker {
            let owned = ws.owned[t.interval].as_ref().expect("owner holds its partition").lock().unwrap_or_else(poisoned);
            let mut replica = ws.replicas[slot][t.interval].write().unwrap_or_else(poisoned);
            for (r, &x) in replica.iter_mut().zip(&owned.props[slot]) {
                *r = scale(x);
            }
            return Ok(TaskOutput::default());
        }
        let msg = self
            .host
            .lock()
            .unwrap_or_else(poisoned)
            .router
            .take(t.worker, t.interval, t.iteration - 1)
            .expect("import released before its frontier was delivered");
        let mut replica = ws.replicas[slot][t.interval].write().unwrap_or_else(poisoned);
        for &(v, x) in msg.payload.iter() {
            debug_assert!(iv.contains(v), "payload id outside its interval");
            replica[(v - iv.lo) as usize] = scale(x);
        }
        let bytes = self.cost.frontier_bytes(msg.payload.len() as u64);
        Ok(TaskOutput { load: TaskLoad::single(Lane::PcieIngress { worker: t.worker }, bytes), ..Default::default() })
    }

    fn process(&self, t: &StageTask) -> Result<TaskOutput> {
        let layout = self.prepared.layout();
        let phase = self.phase(t.iteration);
        let set = self.prepared.edge_set(phase.transpose);
        let iv = layout.interval(t.interval);
        let ws = &self.workers[t.worker];
        let mut lane_bytes = vec![0u64; layout.channels_per_worker()];
        let mut out = TaskOutput::default();
        let mut produced = Vec::new();
        {
            let replica = ws.replicas[phase.input][t.interval].read().unwrap_or_else(poisoned);
            for p in layout.owned_by(t.worker) {
                let part = &set.partitions[p];
                let block = part.block(t.interval);
                let mut updates = Vec::with_capacity(block.num_edges());
                let (offsets, dsts, weights) = (block.offsets(), block.dsts(), block.weights());
                for (r, &src) in block.rows().iter().enumerate() {
                    let sv = SourceVertex {
                        prop: replica[(src - iv.lo) as usize],
                        out_degree: set.out_degree[src as usize],
                    };
                    for j in offsets[r]..offsets[r + 1] {
                        updates.push(VertexUpdate::new(self.kernel.process_edge(weights[j], sv), dsts[j]));
                    }
                }
                let n = updates.len() as u64;
                let parted = recursive_partition(updates, part.dst_interval, &self.partitioner);
                lane_bytes[part.owner.channel] += self.cost.process_bytes(n, n, &parted.passes);
                out.edges += n;
                out.updates += n;
                for s in &parted.passes {
                    match out.passes.get_mut(s.level) {
                        Some(acc) => {
                            acc.updates += s.updates;
                            acc.flushes += s.flushes;
                        }
                        None => out.passes.push(*s),
                    }
                }
                produced.push(((p, t.interval, t.iteration), parted.runs));
            }
        }
        ws.buffers.lock().unwrap_or_else(poisoned).extend(produced);
        out.load = TaskLoad::Lanes(
            lane_bytes
                .into_iter()
                .enumerate()
                .map(|(c, b)| (Lane::Hbm { worker: t.worker, channel: c }, b))
                .collect(),
        );
        Ok(out)
    }

    fn apply(&self, t: &StageTask) -> Result<TaskOutput> {
        let layout = self.prepared.layout();
        let phase = self.phase(t.iteration);
        let iv = layout.interval(t.interval);
        let ws = &self.workers[t.worker];
        let runs: Vec<Vec<BucketRun>> = {
            let mut buffers = ws.buffers.lock().unwrap_or_else(poisoned);
            (0..layout.num_intervals())
                .map(|i| buffers.remove(&(t.interval, i, t.iteration)).unwrap_or_default())
                .collect()
        };
        let mut acc = vec![self.kernel.identity(); iv.len()];
        let mut updates = 0u64;
        for run in runs.iter().flatten() {
            updates += run.updates.len() as u64;
            for u in &run.updates {
                let d = (u.dst - iv.lo) as usize;
                acc[d] = self.kernel.apply(acc[d], u.value);
            }
        }
        let n = layout.num_vertices();
        let mut next = Vec::with_capacity(acc.len());
        for (d, &a) in acc.iter().enumerate() {
            let value = self.kernel.finalize(a, n);
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    iteration: self.iteration_number(t.iteration),
                    vertex: iv.lo + d as VertexId,
                });
            }
            next.push(value);
        }
        let mut owned = ws.owned[t.interval].as_ref().expect("apply runs on the owner").lock().unwrap_or_else(poisoned);
        let owned = &mut *owned;
        let mut active = 0u64;
        if !self.kernel.normalizes() {
            if t.iteration.is_multiple_of(self.phases.len()) {
                owned.active.iter_mut().for_each(|a| *a = false);
            }
            for (d, (&old, &new)) in owned.props[phase.output].iter().zip(&next).enumerate() {
                let moved = self.kernel.is_active(old, new, self.conv.epsilon);
                owned.active[d] |= moved;
                active += moved as u64;
                owned.changed[d] = old != new;
            }
        }
        owned.props[phase.output] = next;
        owned.acc = acc;
        let bytes = self.cost.apply_bytes(updates, iv.len() as u64);
        let channel = layout.owner(t.interval).channel;
        Ok(TaskOutput {
            load: TaskLoad::single(Lane::Hbm { worker: t.worker, channel }, bytes),
            updates,
            active,
            ..Default::default()
        })
    }

    fn export(&self, t: &StageTask) -> Result<TaskOutput> {
        let layout = self.prepared.layout();
        let slot = self.phase(t.iteration).output;
        let iv = layout.interval(t.interval);
        let ws = &self.workers[t.worker];
        let (payload, raw) = {
            let owned = ws.owned[t.interval].as_ref().expect("export runs on the owner").lock().unwrap_or_else(poisoned);
            let values = &owned.props[slot];
            let payload: Vec<(VertexId, f64)> = if self.exports_everything() {
                values.iter().enumerate().map(|(d, &x)| (iv.lo + d as VertexId, x)).collect()
            } else {
                values
                    .iter()
                    .zip(&owned.changed)
                    .enumerate()
                    .filter(|(_, (_, &c))| c)
                    .map(|(d, (&x, _))| (iv.lo + d as VertexId, x))
                    .collect()
            };
            let raw = self.kernel.normalizes().then(|| values.clone());
            (payload, raw)
        };
        let entries = payload.len() as u64;
        let deliveries = {
            let mut host = self.host.lock().unwrap_or_else(poisoned);
            if let Some(raw) = raw {
                host.mirror[slot][iv.lo as usize..iv.hi as usize].copy_from_slice(&raw);
            }
            if self.is_terminal(t.iteration) {
                host.router.broadcast_terminal(t.worker, t.interval, t.iteration, Arc::new(payload))?
            } else {
                host.router.broadcast(t.worker, t.interval, t.iteration, Arc::new(payload))?
            }
        };
        let remotes = layout.num_workers() as u64 - 1;
        let bytes = self.cost.frontier_bytes(entries) * remotes;
        Ok(TaskOutput {
            load: TaskLoad::single(Lane::PcieEgress { worker: t.worker }, bytes),
            deliveries,
            ..Default::default()
        })
    }

    fn reduce(&self, step: usize) -> Result<TaskOutput> {
        let slot = self.phase(step).output;
        let mut host = self.host.lock().unwrap_or_else(poisoned);
        let host = &mut *host;
        let norm = l2_norm(&host.mirror[slot]);
        if norm == 0.0 {
            return Err(Error::ZeroNorm { iteration: self.iteration_number(step) });
        }
        if step.is_multiple_of(self.phases.len()) {
            host.active.iter_mut().for_each(|a| *a = false);
        }
        let mut active = 0u64;
        for (v, &raw) in host.mirror[slot].iter().enumerate() {
            let new = raw / norm;
            let moved = self.kernel.is_active(host.normalized[slot][v], new, self.conv.epsilon);
            host.active[v] |= moved;
            active += moved as u64;
            host.normalized[slot][v] = new;
        }
        host.norms[step] = norm;
        host.slot_norm[slot] = Some(norm);
        Ok(TaskOutput { active, ..Default::default() })
    }

    /// Final properties gathered from the destination owners in ascending id order.
    pub(crate) fn assemble(&self, executed_steps: usize) -> VertexState {
        let layout = self.prepared.layout();
        let n = layout.num_vertices();
        let host = self.host.lock().unwrap_or_else(poisoned);
        let mut slots = vec![vec![0.0; n]; self.kernel.num_slots()];
        let mut temp = vec![0.0; n];
        let mut active = vec![false; n];
        for iv in layout.intervals() {
            let (lo, hi) = (iv.lo as usize, iv.hi as usize);
            let owner = layout.owner(iv.id).worker;
            let owned = self.workers[owner].owned[iv.id].as_ref().expect("every interval has an owner").lock().unwrap_or_else(poisoned);
            for (s, slot) in slots.iter_mut().enumerate() {
                match host.slot_norm[s] {
                    Some(norm) => {
                        for (dst, &x) in slot[lo..hi].iter_mut().zip(&owned.props[s]) {
                            *dst = x / norm;
                        }
                    }
                    None => slot[lo..hi].copy_from_slice(&owned.props[s]),
                }
            }
            temp[lo..hi].copy_from_slice(&owned.acc);
            if self.kernel.normalizes() {
                active[lo..hi].copy_from_slice(&host.active[lo..hi]);
            } else {
                active[lo..hi].copy_from_slice(&owned.active);
            }
        }
        VertexState::from_slots(slots, temp, active, executed_steps / self.phases.len())
    }
}

trait Runner {
    fn has_room(&self, in_flight: usize) -> bool;
    fn submit(&mut self, task: &StageTask);
    fn wait(&mut self) -> (TaskId, Result<TaskOutput>);
}

struct InlineRunner<'c, 'a> {
    ctx: &'c Context<'a>,
    done: VecDeque<(TaskId, Result<TaskOutput>)>,
}

impl Runner for InlineRunner<'_, '_> {
    fn has_room(&self, in_flight: usize) -> bool {
        in_flight == 0
    }

    fn submit(&mut self, task: &StageTask) {
        let result = self.ctx.execute(task);
        self.done.push_back((task.id, result));
    }

    fn wait(&mut self) -> (TaskId, Result<TaskOutput>) {
        self.done.pop_front().expect("a task is in flight")
    }
}

struct ThreadedRunner {
    senders: HashMap<(usize, Stage), mpsc::Sender<TaskId>>,
    done: mpsc::Receiver<(TaskId, Result<TaskOutput>)>,
}

impl Runner for ThreadedRunner {
    fn has_room(&self, _in_flight: usize) -> bool {
        true
    }

    fn submit(&mut self, task: &StageTask) {
        self.senders[&(task.worker, task.stage)].send(task.id).expect("executor thread alive");
    }

    fn wait(&mut self) -> (TaskId, Result<TaskOutput>) {
        self.done.recv().expect("executor threads alive while tasks are in flight")
    }
}

type ReadyKey = Reverse<((usize, usize, usize, usize), TaskId)>;

struct Coordinator<'c, 'a> {
    ctx: &'c Context<'a>,
    dag: &'c DependencyDag,
    indeg: Vec<usize>,
    ready: BinaryHeap<ReadyKey>,
    blocked: Vec<TaskId>,
    outputs: Vec<Option<TaskOutput>>,
    log: Vec<ExecEvent>,
    states: StateTable,
    in_flight: usize,
    stop_after: Option<usize>,
    applies_per_step: usize,
    applies_done: Vec<usize>,
    step_active: Vec<u64>,
    error: Option<Error>,
}

impl<'c, 'a> Coordinator<'c, 'a> {
    fn new(ctx: &'c Context<'a>, dag: &'c DependencyDag) -> Self {
        let indeg: Vec<usize> = dag.tasks().iter().map(|t| dag.preds(t.id).len()).collect();
        let applies_per_step = dag.tasks().iter().filter(|t| t.stage == Stage::ApplyUpdates && t.iteration == 0).count();
        let mut c = Coordinator {
            ctx,
            dag,
            indeg,
            ready: BinaryHeap::new(),
            blocked: Vec::new(),
            outputs: vec![None; dag.len()],
            log: Vec::new(),
            states: StateTable::default(),
            in_flight: 0,
            stop_after: None,
            applies_per_step,
            applies_done: vec![0; dag.steps()],
            step_active: vec![0; dag.steps()],
            error: None,
        };
        for t in dag.tasks() {
            if c.indeg[t.id.index()] == 0 {
                c.make_ready(t.id);
            }
        }
        c
    }

    fn make_ready(&mut self, id: TaskId) {
        let t = *self.dag.task(id);
        if t.stage == Stage::ImportFrontier && t.iteration > 0 {
            self.states.advance(t.worker, t.interval, t.iteration - 1, IntervalState::ReadyForImport);
        }
        self.ready.push(Reverse((t.priority(), id)));
    }

    fn next_dispatchable(&mut self) -> Option<TaskId> {
        while let Some(Reverse((_, id))) = self.ready.pop() {
            let t = self.dag.task(id);
            if self.stop_after.is_some_and(|s| t.iteration > s) {
                self.log.push(ExecEvent::Cancelled { task: id });
                continue;
            }
            if t.stage == Stage::ExportFrontier && !self.ctx.is_terminal(t.iteration) {
                let mut host = self.ctx.host.lock().unwrap_or_else(poisoned);
                if !host.router.try_reserve_broadcast(t.worker) {
                    self.blocked.push(id);
                    continue;
                }
            }
            return Some(id);
        }
        None
    }

    fn run(mut self, runner: &mut dyn Runner) -> Result<ExecReport> {
        loop {
            while self.error.is_none() && runner.has_room(self.in_flight) {
                let Some(id) = self.next_dispatchable() else { break };
                let task = *self.dag.task(id);
                self.log.push(ExecEvent::Dispatched { task: id });
                if matches!(task.stage, Stage::Reduce | Stage::Barrier) {
                    let result = self.ctx.execute(&task);
                    self.finish(id, result);
                } else {
                    self.in_flight += 1;
                    runner.submit(&task);
                }
            }
            if self.in_flight == 0 {
                break;
            }
            let (id, result) = runner.wait();
            self.in_flight -= 1;
            self.finish(id, result);
        }
        if let Some(e) = self.error {
            return Err(e);
        }
        if let Some(&id) = self.blocked.first() {
            let capacity = self.ctx.host.lock().unwrap_or_else(poisoned).router.capacity();
            return Err(Error::RouterOverflow { worker: self.dag.task(id).worker, capacity });
        }
        let executed_steps = self.stop_after.map_or(self.dag.steps(), |s| s + 1);
        if self.stop_after.is_none() && self.outputs.iter().any(Option::is_none) {
            return Err(Error::CyclicDag);
        }
        if executed_steps > 0 {
            let last = executed_steps - 1;
            let layout = self.ctx.prepared.layout();
            for w in 0..layout.num_workers() {
                for i in 0..layout.num_intervals() {
                    if self.states.get(w, i, last) != IntervalState::Done {
                        self.states.advance(w, i, last, IntervalState::Done);
                    }
                }
            }
        }
        Ok(ExecReport { outputs: self.outputs, log: self.log, states: self.states, executed_steps })
    }

    fn finish(&mut self, id: TaskId, result: Result<TaskOutput>) {
        let out = match result {
            Ok(out) => out,
            Err(e) => {
                self.error.get_or_insert(e);
                return;
            }
        };
        let t = *self.dag.task(id);
        self.log.push(ExecEvent::Completed { task: id });
        for d in &out.deliveries {
            if let DeliveryEvent::ReadyForImport { worker, interval, iteration } = *d {
                self.log.push(ExecEvent::Delivered { worker, interval, iteration });
            }
        }
        let (w, i, k) = (t.worker, t.interval, t.iteration);
        match t.stage {
            Stage::ImportFrontier => {
                self.states.advance(w, i, k, IntervalState::ReadyForProcess);
                if k > 0 {
                    self.states.advance(w, i, k - 1, IntervalState::Imported);
                    self.states.advance(w, i, k - 1, IntervalState::Done);
                }
                self.ready.extend(self.blocked.drain(..).map(|b| Reverse((self.dag.task(b).priority(), b))));
            }
            Stage::ProcessPartition => self.states.advance(w, i, k, IntervalState::Processed),
            Stage::ApplyUpdates => {
                self.states.advance(w, i, k, IntervalState::ReadyForExport);
                if !self.ctx.kernel.normalizes() {
                    self.step_active[k] += out.active;
                    self.applies_done[k] += 1;
                    if self.applies_done[k] == self.applies_per_step {
                        self.end_of_step(k);
                    }
                }
            }
            Stage::ExportFrontier => self.states.advance(w, i, k, IntervalState::Exported),
            Stage::Reduce => {
                self.step_active[k] += out.active;
                self.end_of_step(k);
            }
            Stage::Barrier => {}
        }
        self.outputs[id.index()] = Some(out);
        for &s in self.dag.succs(id) {
            self.indeg[s.index()] -= 1;
            if self.indeg[s.index()] == 0 {
                self.make_ready(s);
            }
        }
    }

    fn end_of_step(&mut self, step: usize) {
        if self.ctx.conv.mode != ConvergenceMode::FrontierEmpty || !self.ctx.is_last_phase(step) {
            return;
        }
        let first = step + 1 - self.ctx.phases.len();
        if self.step_active[first..=step].iter().all(|&a| a == 0) && self.stop_after.is_none() {
            self.stop_after = Some(step);
            self.ctx.terminal_step.store(step, Ordering::SeqCst);
        }
    }
}

/// Executes `dag` against `ctx`, serially in priority order or with one thread per
/// (worker, stage module).
pub(crate) fn run_dag(ctx: &Context<'_>, dag: &DependencyDag, threaded: bool) -> Result<ExecReport> {
    let coordinator = Coordinator::new(ctx, dag);
    if !threaded {
        return coordinator.run(&mut InlineRunner { ctx, done: VecDeque::new() });
    }
    thread::scope(|scope| {
        let (done_tx, done_rx) = mpsc::channel();
        let mut senders = HashMap::new();
        for w in 0..ctx.prepared.layout().num_workers() {
            for stage in Stage::WORK_STAGES {
                let (tx, rx) = mpsc::channel::<TaskId>();
                senders.insert((w, stage), tx);
                let done_tx = done_tx.clone();
                scope.spawn(move || {
                    for id in rx {
                        let result = ctx.execute(dag.task(id));
                        if done_tx.send((id, result)).is_err() {
                            break;
                        }
                    }
                });
            }
        }
        drop(done_tx);
        let mut runner = ThreadedRunner { senders, done: done_rx };
        coordinator.run(&mut runner)
    })
}
