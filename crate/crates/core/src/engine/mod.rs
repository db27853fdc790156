//! The decoupled pipeline: stage DAG, host frontier router, interval state table and
//! the executor that runs the DAG functionally before its recorded loads are
//! scheduled in virtual time.

mod dag;
mod exec;
mod router;
mod state;

pub use dag::{build_dag, build_dag_with, DagOptions, DependencyDag, ScheduleMode, Stage, StageTask, TaskId, TaskKey};
pub use exec::{ExecEvent, ExecReport, TaskOutput};
pub use router::{route_frontier, DeliveryEvent, FrontierMessage, HostRouter, MessageStats, DEFAULT_ROUTER_CAPACITY};
pub use state::{IntervalState, StateTable, StateTransition};

use log::debug;

use crate::algorithms::{AlgorithmKernel, ConvergenceSpec, VertexState};
use crate::error::{Error, Result};
use crate::graph::{partition_graph, ClusterLayout, CsrPartition, Graph};
use crate::partitioner::{PartitionerConfig, PassStats};
use crate::perf::{collect_metrics, merge_passes, simulate_schedule, CostModel, MetricsInput, RunMetrics, Schedule, TaskLoad};

/// Partitioned edges of one orientation with the out-degrees of its sources.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    pub(crate) partitions: Vec<CsrPartition>,
    pub(crate) out_degree: Vec<u32>,
}

impl EdgeSet {
    fn build(g: &Graph, layout: &ClusterLayout) -> Self {
        EdgeSet { partitions: partition_graph(g, layout), out_degree: g.out_degrees() }
    }

    pub fn partitions(&self) -> &[CsrPartition] {
        &self.partitions
    }

    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degree
    }
}

/// A graph laid out on a cluster: forward partitions and, for kernels that gather
/// over reversed edges, transposed partitions.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    layout: ClusterLayout,
    forward: EdgeSet,
    transpose: Option<EdgeSet>,
    num_edges: usize,
}

impl PreparedGraph {
    /// # Panics
    /// If `layout` was built for a different vertex count.
    pub fn new(g: &Graph, layout: ClusterLayout, with_transpose: bool) -> Self {
        let forward = EdgeSet::build(g, &layout);
        let transpose = with_transpose.then(|| EdgeSet::build(&g.transpose(), &layout));
        PreparedGraph { layout, forward, transpose, num_edges: g.num_edges() }
    }

    /// Lays out `g` with whatever orientations `kernel` needs.
    pub fn for_kernel(g: &Graph, workers: usize, channels: usize, kernel: &dyn AlgorithmKernel) -> Result<Self> {
        let layout = ClusterLayout::new(g.num_vertices(), workers, channels)?;
        Ok(PreparedGraph::new(g, layout, kernel.phases().iter().any(|p| p.transpose)))
    }

    pub fn layout(&self) -> &ClusterLayout {
        &self.layout
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn partitions(&self) -> &[CsrPartition] {
        &self.forward.partitions
    }

    pub fn has_transpose(&self) -> bool {
        self.transpose.is_some()
    }

    pub(crate) fn edge_set(&self, transpose: bool) -> &EdgeSet {
        if transpose {
            self.transpose.as_ref().expect("transpose partitions checked before execution")
        } else {
            &self.forward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    /// One task at a time in `(iteration, worker, interval, stage)` priority order;
    /// event logs are reproducible.
    #[default]
    Deterministic,
    /// One thread per (worker, stage module), fed by a coordinator.
    Threaded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub mode: ScheduleMode,
    pub convergence: ConvergenceSpec,
    pub partitioner: PartitionerConfig,
    pub cost: CostModel,
    pub router_capacity: usize,
    pub executor: Executor,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: ScheduleMode::Async,
            convergence: ConvergenceSpec::default(),
            partitioner: PartitionerConfig::default(),
            cost: CostModel::default(),
            router_capacity: DEFAULT_ROUTER_CAPACITY,
            executor: Executor::Deterministic,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.convergence.validate()?;
        self.partitioner.validate()?;
        self.cost.validate()?;
        if self.router_capacity == 0 {
            return Err(Error::Config("router capacity must be at least one message".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub state: VertexState,
    pub metrics: RunMetrics,
    /// DAG of the executed steps, as simulated.
    pub dag: DependencyDag,
    /// Indexed by task id of `dag`.
    pub loads: Vec<TaskLoad>,
    pub schedule: Schedule,
    /// The DAG the executor ran, including steps cancelled by convergence.
    pub exec_dag: DependencyDag,
    pub exec: ExecReport,
}

fn loads_for(dag: &DependencyDag, exec_dag: &DependencyDag, exec: &ExecReport) -> Vec<TaskLoad> {
    dag.tasks()
        .iter()
        .map(|t| {
            exec_dag
                .find(t.key())
                .and_then(|id| exec.outputs[id.index()].as_ref())
                .map(|o| o.load.clone())
                .unwrap_or_default()
        })
        .collect()
}

/// Executes `kernel` on the prepared graph, then schedules the recorded task loads
/// in virtual time.
///
/// In async mode the bulk-synchronous schedule of the same loads is also computed;
/// it satisfies every async dependency, so when the greedy async schedule is longer
/// the synchronous placement is reported instead.
pub fn run_pipeline(prepared: &PreparedGraph, kernel: &dyn AlgorithmKernel, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    if kernel.phases().iter().any(|p| p.transpose) && !prepared.has_transpose() {
        return Err(Error::Config(format!("kernel {} needs transposed partitions", kernel.name())));
    }
    let layout = prepared.layout();
    let phases = kernel.phases().len();
    let steps = cfg.convergence.max_iterations * phases;
    let opts = DagOptions { mode: cfg.mode, steps, global_reduction: kernel.normalizes() };
    let exec_dag = build_dag_with(layout, &opts);
    let ctx = exec::Context::new(prepared, kernel, cfg.convergence, cfg.partitioner, cfg.cost, cfg.router_capacity, steps)?;
    let report = exec::run_dag(&ctx, &exec_dag, cfg.executor == Executor::Threaded)?;
    let state = ctx.assemble(report.executed_steps);
    drop(ctx);

    let executed = report.executed_steps;
    let dag = if executed == steps { exec_dag.clone() } else { build_dag_with(layout, &DagOptions { steps: executed, ..opts }) };
    let loads = loads_for(&dag, &exec_dag, &report);
    let mut schedule = simulate_schedule(&dag, &loads, &cfg.cost)?;
    if cfg.mode == ScheduleMode::Async {
        let sync_dag = build_dag_with(layout, &DagOptions { mode: ScheduleMode::Sync, ..opts }.with_steps(executed));
        let sync_loads = loads_for(&sync_dag, &exec_dag, &report);
        let sync = simulate_schedule(&sync_dag, &sync_loads, &cfg.cost)?;
        if sync.makespan < schedule.makespan {
            debug!("greedy async schedule {:.6e}s exceeds sync {:.6e}s; using sync placement", schedule.makespan, sync.makespan);
            let entries = dag
                .tasks()
                .iter()
                .map(|t| sync.entry(sync_dag.find(t.key()).expect("sync DAG contains every async task")))
                .collect();
            schedule = Schedule { entries, makespan: sync.makespan, total_work: schedule.total_work };
        }
    }

    let mut edges = 0u64;
    let mut passes: Vec<PassStats> = Vec::new();
    let mut messages = MessageStats::default();
    for t in dag.tasks() {
        let Some(out) = exec_dag.find(t.key()).and_then(|id| report.outputs[id.index()].as_ref()) else { continue };
        edges += out.edges;
        merge_passes(&mut passes, &out.passes);
        for d in &out.deliveries {
            if let DeliveryEvent::Egress { bytes, .. } = *d {
                messages.count += 1;
                messages.bytes += bytes;
            }
        }
    }
    let metrics = collect_metrics(
        MetricsInput {
            algorithm: kernel.name(),
            mode: cfg.mode,
            workers: layout.num_workers(),
            channels: layout.channels_per_worker(),
            iterations: executed / phases,
            edges_traversed: edges,
            messages,
            passes: &passes,
            update_record_bytes: cfg.cost.update_record_bytes,
            checksum: state.checksum(),
        },
        &dag,
        &loads,
        &schedule,
    );
    Ok(PipelineRun { state, metrics, dag, loads, schedule, exec_dag, exec: report })
}

impl DagOptions {
    fn with_steps(self, steps: usize) -> Self {
        DagOptions { steps, ..self }
    }
}
