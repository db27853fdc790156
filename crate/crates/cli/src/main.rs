//! `gasflow`: generate graphs, run the simulated pipeline, compare modes and
//! worker counts.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gasflow::algorithms::{kernel_by_name, ConvergenceSpec, SharedKernel};
use gasflow::engine::{run_pipeline, Executor, PipelineConfig, PipelineRun, PreparedGraph, ScheduleMode};
use gasflow::graph::{generate_rmat, load_edge_list, read_vector, write_binary_graph, EdgeListFormat, Graph, RmatParams};
use gasflow::perf::CostModel;
use gasflow::{Error, ErrorClass};
use log::info;
use serde_json::json;

#[derive(Parser)]
#[command(name = "gasflow", version, about = "Decoupled gather-apply-scatter engine with a virtual-time cost model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an RMAT graph in the SWG1 binary format.
    Generate(GenerateArgs),
    /// Run one configuration and print its metrics as JSON.
    Run(RunArgs),
    /// Run a cross product of modes and worker counts and print CSV.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=30))]
    scale: u32,
    #[arg(long, default_value_t = 16)]
    edge_factor: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Keep generator vertex ids instead of relabelling them.
    #[arg(long)]
    no_scramble: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Pr,
    Spmv,
    Hits,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Pr => "pr",
            Algo::Spmv => "spmv",
            Algo::Hits => "hits",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sync,
    Async,
}

impl From<Mode> for ScheduleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sync => ScheduleMode::Sync,
            Mode::Async => ScheduleMode::Async,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Edge list: SWG1 binary or whitespace-separated text.
    #[arg(long, conflicts_with = "rmat_scale", required_unless_present = "rmat_scale")]
    graph: Option<PathBuf>,
    /// Generate an RMAT graph in memory instead of reading one.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=30))]
    rmat_scale: Option<u32>,
    #[arg(long, default_value_t = 16)]
    edge_factor: usize,
    /// RMAT seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    channels: usize,
    #[arg(long, default_value_t = 16)]
    iters: usize,
    /// Stop early once no vertex moves by more than this.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    /// SWV1 input vector for spmv; all ones when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// TOML file overriding cost-model fields.
    #[arg(long)]
    cost_model: Option<PathBuf>,
    #[arg(long, default_value_t = gasflow::engine::DEFAULT_ROUTER_CAPACITY)]
    router_capacity: usize,
    /// Run stage executors on threads instead of the deterministic serial order.
    #[arg(long)]
    threaded: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Mode::Async)]
    mode: Mode,
    /// Metrics destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-task schedule as JSON lines.
    #[arg(long)]
    event_log: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated worker counts.
    #[arg(long, value_parser = worker_count, value_delimiter = ',', default_value = "1,2,4,8")]
    workers: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sync,async")]
    modes: Vec<Mode>,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn worker_count(s: &str) -> Result<usize, String> {
    match s.trim().parse() {
        Ok(0) => Err("worker counts must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(format!("{s:?}: {e}")),
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 2,
        ErrorClass::Data => 3,
        ErrorClass::Runtime => 4,
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn sink(path: Option<&Path>) -> gasflow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_generate(args: &GenerateArgs) -> gasflow::Result<()> {
    let mut params = RmatParams::new(args.scale, args.edge_factor, args.seed);
    params.scramble = !args.no_scramble;
    let g = generate_rmat(&params)?;
    write_binary_graph(&args.output, &g)?;
    println!("{}", json!({ "vertices": g.num_vertices(), "edges": g.num_edges(), "seed": args.seed }));
    Ok(())
}

struct Setup {
    graph: Graph,
    label: String,
    kernel: SharedKernel,
    base: PipelineConfig,
}

fn setup(c: &Common) -> gasflow::Result<Setup> {
    let (graph, label) = match (&c.graph, c.rmat_scale) {
        (Some(path), _) => {
            let mut head = Vec::with_capacity(4);
            File::open(path).and_then(|f| f.take(4).read_to_end(&mut head)).map_err(io_err(path))?;
            (load_edge_list(path, EdgeListFormat::sniff(&head))?, path.display().to_string())
        }
        (None, Some(scale)) => (
            generate_rmat(&RmatParams::new(scale, c.edge_factor, c.seed))?,
            format!("rmat-{scale}-{}-{}", c.edge_factor, c.seed),
        ),
        (None, None) => return Err(Error::Config("no graph source".into())),
    };
    let input = c.input.as_ref().map(read_vector).transpose()?;
    let kernel = kernel_by_name(c.algo.name(), c.damping, input)?;
    let cost = match &c.cost_model {
        Some(p) => CostModel::load(p)?,
        None => CostModel::default(),
    };
    let convergence = match c.epsilon {
        Some(eps) => ConvergenceSpec::until_converged(c.iters, eps),
        None => ConvergenceSpec::fixed(c.iters),
    };
    let base = PipelineConfig {
        convergence,
        cost,
        router_capacity: c.router_capacity,
        executor: if c.threaded { Executor::Threaded } else { Executor::Deterministic },
        ..PipelineConfig::default()
    };
    base.validate()?;
    info!("loaded {label}: {} vertices, {} edges", graph.num_vertices(), graph.num_edges());
    Ok(Setup { graph, label, kernel, base })
}

fn prepare(s: &Setup, workers: usize, channels: usize) -> gasflow::Result<PreparedGraph> {
    PreparedGraph::for_kernel(&s.graph, workers, channels, s.kernel.as_ref())
}

fn write_event_log(path: &Path, run: &PipelineRun) -> gasflow::Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for t in run.dag.tasks() {
        let e = run.schedule.entry(t.id);
        let line = json!({
            "task": t.id.index(),
            "stage": t.stage.label(),
            "worker": t.worker,
            "interval": t.interval,
            "step": t.iteration,
            "start": e.start,
            "end": e.end,
            "bytes": run.loads[t.id.index()].total_bytes(),
        });
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn cmd_run(args: &RunArgs) -> gasflow::Result<()> {
    let t0 = Instant::now();
    let s = setup(&args.common)?;
    let prepared = prepare(&s, args.workers, args.common.channels)?;
    let setup_seconds = t0.elapsed().as_secs_f64();
    let cfg = PipelineConfig { mode: args.mode.into(), ..s.base };
    let run = run_pipeline(&prepared, s.kernel.as_ref(), &cfg)?;
    info!("{} finished in {:.6e} virtual seconds", s.label, run.metrics.virtual_seconds);
    if let Some(path) = &args.event_log {
        write_event_log(path, &run)?;
    }
    let mut doc = serde_json::to_value(&run.metrics).expect("metrics serialize");
    doc["setup_seconds"] = json!(setup_seconds);
    let path = args.output.as_deref();
    let mut out = sink(path)?;
    let fail = |e| io_err(path.unwrap_or(Path::new("<stdout>")))(e);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| fail(e.into()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(fail)
}

struct Row {
    mode: Mode,
    workers: usize,
    iterations: usize,
    seconds: f64,
    mteps: f64,
    checksum: String,
}

fn cmd_compare(args: &CompareArgs) -> gasflow::Result<()> {
    let c = &args.common;
    let s = setup(c)?;
    let mut workers = args.workers.clone();
    if !workers.contains(&1) {
        workers.push(1);
    }
    let mut modes = args.modes.clone();
    if !modes.contains(&Mode::Sync) {
        modes.push(Mode::Sync);
    }
    let mut rows = Vec::new();
    for &w in &workers {
        let prepared = prepare(&s, w, c.channels)?;
        for &mode in &modes {
            let cfg = PipelineConfig { mode: mode.into(), ..s.base };
            let m = run_pipeline(&prepared, s.kernel.as_ref(), &cfg)?.metrics;
            info!("W={w} {} {:.1} MTEPS", ScheduleMode::from(mode), m.mteps);
            rows.push(Row {
                mode,
                workers: w,
                iterations: m.iterations,
                seconds: m.virtual_seconds,
                mteps: m.mteps,
                checksum: m.result_checksum,
            });
        }
    }
    let find = |mode: Mode, w: usize| rows.iter().find(|r| r.mode == mode && r.workers == w).expect("row was run");

    let path = args.output.as_deref();
    let fail = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path.unwrap_or(Path::new("<stdout>")))(io),
        other => Error::Config(format!("csv: {other:?}")),
    };
    let mut out = csv::Writer::from_writer(sink(path)?);
    out.write_record([
        "algorithm",
        "graph",
        "vertices",
        "edges",
        "mode",
        "workers",
        "channels",
        "iterations",
        "virtual_seconds",
        "mteps",
        "efficiency",
        "speedup_vs_sync",
        "result_checksum",
    ])
    .map_err(fail)?;
    for &w in &args.workers {
        for &mode in &args.modes {
            let r = find(mode, w);
            let base = find(mode, 1).mteps;
            let sync = find(Mode::Sync, w).mteps;
            let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
            out.write_record([
                c.algo.name().to_string(),
                s.label.clone(),
                s.graph.num_vertices().to_string(),
                s.graph.num_edges().to_string(),
                ScheduleMode::from(mode).to_string(),
                w.to_string(),
                c.channels.to_string(),
                r.iterations.to_string(),
                format!("{:e}", r.seconds),
                format!("{:.6}", r.mteps),
                format!("{:.6}", ratio(r.mteps, w as f64 * base)),
                format!("{:.6}", ratio(r.mteps, sync)),
                r.checksum.clone(),
            ])
            .map_err(fail)?;
        }
    }
    out.flush().map_err(|e| fail(e.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SWIFT_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            let obj = json!({
                "error": {
                    "kind": e.kind(),
                    "class": format!("{class:?}").to_lowercase(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{obj}");
            ExitCode::from(exit_code(class))
        }
    }
}
