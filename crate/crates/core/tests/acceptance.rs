//! End-to-end acceptance criteria. Each test writes one `PASS`/`FAIL` line to
//! stderr (uncaptured) and then asserts the same verdict.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use gasflow::algorithms::{
    kernel_hits, kernel_pagerank, kernel_spmv_with, reference_execute, AlgorithmKernel, ConvergenceSpec, VertexState,
};
use gasflow::engine::{run_pipeline, Executor, PipelineConfig, PipelineRun, PreparedGraph, ScheduleMode};
use gasflow::graph::{generate_rmat, partition_graph, ClusterLayout, Edge, Graph, RmatParams, VertexInterval};
use gasflow::partitioner::{recursive_partition, PartitionerConfig, VertexUpdate};
use gasflow::perf::{lane_timelines, scaling_report, CostModel};
use gasflow::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHANNELS: usize = 16;

fn verdict(id: u32, pass: bool, started: Instant, limit: Duration, detail: &str) {
    let elapsed = started.elapsed();
    let pass = pass && elapsed < limit;
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("{tag} criterion {id}: {detail} [{:.1}s, limit {}s]\n", elapsed.as_secs_f64(), limit.as_secs());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "{}", line.trim_end());
}

fn rmat18() -> &'static Graph {
    static G: OnceLock<Graph> = OnceLock::new();
    G.get_or_init(|| generate_rmat(&RmatParams::new(18, 16, 1)).unwrap())
}

fn pipeline(g: &Graph, k: &dyn AlgorithmKernel, w: usize, c: usize, cfg: &PipelineConfig) -> gasflow::Result<PipelineRun> {
    let prepared = PreparedGraph::for_kernel(g, w, c, k)?;
    run_pipeline(&prepared, k, cfg)
}

fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x - y).abs() <= tol * y.abs())
}

fn states_close(a: &VertexState, b: &VertexState, tol: f64) -> bool {
    within(&a.prop, &b.prop, tol)
        && match (&a.secondary, &b.secondary) {
            (Some(x), Some(y)) => within(x, y, tol),
            (None, None) => true,
            _ => false,
        }
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut graphs = crafted();
    for scale in 10..=12 {
        graphs.push(("rmat", generate_rmat(&RmatParams::new(scale, 16, scale as u64)).unwrap()));
    }
    graphs.push(("matrix64", random_matrix(64, 400, 11)));

    let (mut runs, mut exact, mut skipped) = (0, 0, 0);
    let mut failures = Vec::new();
    for (name, g) in &graphs {
        let kernels: Vec<(Box<dyn AlgorithmKernel>, usize)> = vec![
            (Box::new(kernel_pagerank(0.85).unwrap()), 16),
            (Box::new(kernel_spmv_with(random_vector(g.num_vertices(), 99))), 1),
            (Box::new(kernel_hits()), 16),
        ];
        for (k, iters) in &kernels {
            let conv = ConvergenceSpec::fixed(*iters);
            let reference = reference_execute(g, k.as_ref(), &conv).unwrap();
            for w in [1, 2, 4] {
                for c in [1, 2, 4] {
                    if g.num_vertices() < w * c {
                        skipped += 2;
                        continue;
                    }
                    for mode in [ScheduleMode::Sync, ScheduleMode::Async] {
                        let cfg = PipelineConfig { mode, convergence: conv, ..PipelineConfig::default() };
                        let run = pipeline(g, k.as_ref(), w, c, &cfg).unwrap();
                        runs += 1;
                        if run.state.prop == reference.prop && run.state.secondary == reference.secondary {
                            exact += 1;
                        } else if !states_close(&run.state, &reference, 1e-9) {
                            failures.push(format!("{name}/{}/w{w}c{c}/{mode}", k.name()));
                        }
                    }
                }
            }
        }
    }
    verdict(
        1,
        failures.is_empty(),
        started,
        Duration::from_secs(120),
        &format!(
            "{runs} pipeline runs within 1e-9 of the reference ({exact} bit-identical), {skipped} layouts with more PEs than vertices skipped, failures {failures:?}"
        ),
    );
}

/// One randomized (graph, kernel, layout, convergence) configuration.
fn random_config(rng: &mut ChaCha8Rng) -> (Graph, Box<dyn AlgorithmKernel>, usize, usize, ConvergenceSpec) {
    let g = match rng.random_range(0..3) {
        0 => random_matrix(rng.random_range(16..400), rng.random_range(1..3000), rng.random()),
        1 => generate_rmat(&RmatParams::new(rng.random_range(5..11), rng.random_range(1..17), rng.random())).unwrap(),
        _ => random_regular_out(rng.random_range(16..400), rng.random_range(1..9), rng.random()),
    };
    let n = g.num_vertices();
    let k: Box<dyn AlgorithmKernel> = match rng.random_range(0..3) {
        0 => Box::new(kernel_pagerank(rng.random_range(0.5..0.95)).unwrap()),
        1 => Box::new(kernel_spmv_with(random_vector(n, rng.random()))),
        _ => Box::new(kernel_hits()),
    };
    let w = rng.random_range(1..5);
    let c = rng.random_range(1..5);
    let iters = rng.random_range(1..9);
    let conv = if rng.random_bool(0.3) { ConvergenceSpec::until_converged(iters, 1e-4) } else { ConvergenceSpec::fixed(iters) };
    (g, k, w, c, conv)
}

fn paired(g: &Graph, k: &dyn AlgorithmKernel, w: usize, c: usize, conv: ConvergenceSpec) -> (PipelineRun, PipelineRun) {
    let run = |mode| {
        let cfg = PipelineConfig { mode, convergence: conv, router_capacity: 1 << 16, ..PipelineConfig::default() };
        pipeline(g, k, w, c, &cfg).unwrap()
    };
    (run(ScheduleMode::Async), run(ScheduleMode::Sync))
}

#[test]
fn criterion_2_mode_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    for i in 0..50 {
        let (g, k, w, c, conv) = random_config(&mut rng);
        let (a, s) = paired(&g, k.as_ref(), w, c, conv);
        if a.metrics.result_checksum != s.metrics.result_checksum {
            mismatches.push(format!("#{i} {} V={} w{w}c{c}", k.name(), g.num_vertices()));
        }
    }
    verdict(
        2,
        mismatches.is_empty(),
        started,
        Duration::from_secs(300),
        &format!("50 randomized configurations, checksum mismatches {mismatches:?}"),
    );
}

#[test]
fn criterion_3_async_speedup_band() {
    let started = Instant::now();
    let g = rmat18();
    let pr = kernel_pagerank(0.85).unwrap();
    let (a, s) = paired(g, &pr, 4, CHANNELS, ConvergenceSpec::fixed(16));
    let ratio = a.metrics.mteps / s.metrics.mteps;
    let in_band = (1.5..=3.5).contains(&ratio);

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut pairs = 1;
    let mut violations = Vec::new();
    if a.schedule.makespan > s.schedule.makespan {
        violations.push("rmat18".to_string());
    }
    for i in 0..50 {
        let (g, k, w, c, conv) = random_config(&mut rng);
        let (a, s) = paired(&g, k.as_ref(), w, c, conv);
        pairs += 1;
        if a.schedule.makespan > s.schedule.makespan {
            violations.push(format!("random #{i}"));
        }
    }
    for (name, g) in crafted() {
        for (w, c) in [(1, 1), (2, 1), (2, 2)].into_iter().filter(|&(w, c)| g.num_vertices() >= w * c) {
            let (a, s) = paired(&g, &pr, w, c, ConvergenceSpec::fixed(4));
            pairs += 1;
            if a.schedule.makespan > s.schedule.makespan {
                violations.push(format!("{name} w{w}c{c}"));
            }
        }
    }
    verdict(
        3,
        in_band && violations.is_empty(),
        started,
        Duration::from_secs(600),
        &format!(
            "RMAT-18 PR W=4 C={CHANNELS}: async {:.1} MTEPS / sync {:.1} MTEPS = {ratio:.3} (band [1.5, 3.5]); async > sync in {} of {pairs} paired runs",
            a.metrics.mteps,
            s.metrics.mteps,
            violations.len()
        ),
    );
}

#[test]
fn criterion_4_worker_scaling() {
    let started = Instant::now();
    let pr = kernel_pagerank(0.85).unwrap();
    let rows = scaling_report(rmat18(), &pr, &PipelineConfig::default(), CHANNELS, &[1, 2, 4, 8]).unwrap();
    let pass = rows.iter().filter(|r| r.workers > 1).all(|r| r.efficiency >= 0.75);
    let table: Vec<String> = rows.iter().map(|r| format!("W={} {:.1} MTEPS eff {:.3}", r.workers, r.mteps, r.efficiency)).collect();
    verdict(
        4,
        pass,
        started,
        Duration::from_secs(900),
        &format!("RMAT-18 PR C={CHANNELS}, efficiency >= 0.75 required: {}", table.join(", ")),
    );
}

#[test]
fn criterion_5_partitioner_laws() {
    let started = Instant::now();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut check = |input: Vec<VertexUpdate>, iv: VertexInterval, cfg: &PartitionerConfig| {
        let out = recursive_partition(input.clone(), iv, cfg);
        let result = if out.total_updates() != input.len() {
            Err("lost updates".to_string())
        } else {
            check_partition(&input, iv, cfg, &out)
        };
        if let Err(e) = result {
            if failures.len() < 5 {
                failures.push(format!("{cfg:?} {iv:?} n={}: {e}", input.len()));
            }
        }
    };

    // Every destination sequence of length <= 8 over a 5-id interval.
    let iv = VertexInterval { id: 0, lo: 3, hi: 8 };
    for (f, b, t) in [(2, 2, 1), (3, 3, 2), (2, 4, 1), (4, 4, 3)] {
        let cfg = PartitionerConfig::new(f, b, t).unwrap();
        for len in 0..=8u32 {
            for code in 0..5usize.pow(len) {
                let mut rest = code;
                let input = (0..len)
                    .map(|i| {
                        let d = (rest % 5) as u32;
                        rest /= 5;
                        VertexUpdate::new(i as f64, iv.lo + d)
                    })
                    .collect();
                check(input, iv, &cfg);
                checked += 1;
            }
        }
    }
    let exhaustive = checked;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let f = rng.random_range(2..17);
        let cfg = PartitionerConfig::new(f, f + rng.random_range(0..128), rng.random_range(1..512)).unwrap();
        let lo = rng.random_range(0..1000);
        let iv = VertexInterval { id: 0, lo, hi: lo + rng.random_range(1..20_000) };
        let input = (0..rng.random_range(0..600)).map(|_| VertexUpdate::new(rng.random(), rng.random_range(iv.lo..iv.hi))).collect();
        check(input, iv, &cfg);
        checked += 1;
    }
    verdict(
        5,
        failures.is_empty(),
        started,
        Duration::from_secs(60),
        &format!("{exhaustive} exhaustive and {} randomized inputs, failures {failures:?}", checked - exhaustive),
    );
}

#[test]
fn criterion_6_layout_laws() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut built, mut rejected) = (0, 0);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let v = rng.random_range(1..20_000usize);
        let w = rng.random_range(1..9);
        let c = rng.random_range(1..17);
        let layout = match ClusterLayout::new(v, w, c) {
            Ok(l) => l,
            Err(Error::TooManyPes { .. }) if v < w * c => {
                rejected += 1;
                continue;
            }
            Err(e) => panic!("unexpected layout error {e}"),
        };
        built += 1;
        let mut ok = layout.interval_range() == v.div_ceil(w * c);
        let mut next = 0u32;
        for (k, iv) in layout.intervals().iter().enumerate() {
            let pe = layout.owner(k);
            ok &= iv.lo == next && iv.lo < iv.hi && iv.len() <= layout.interval_range();
            ok &= pe.worker == k % w && pe.channel == (k / w) % c;
            next = iv.hi;
        }
        ok &= next as usize == v;

        let edges: Vec<Edge> = (0..rng.random_range(0..2000))
            .map(|_| Edge::new(rng.random_range(0..v as u32), rng.random_range(0..v as u32), rng.random()))
            .collect();
        let g = Graph::new(v, edges.clone()).unwrap();
        let parts = partition_graph(&g, &layout);
        let mut placed: Vec<(u32, u32, u64)> = Vec::new();
        for p in &parts {
            for e in p.edges() {
                ok &= p.dst_interval.contains(e.dst);
                placed.push((e.src, e.dst, e.weight.to_bits()));
            }
        }
        let mut original: Vec<(u32, u32, u64)> = edges.iter().map(|e| (e.src, e.dst, e.weight.to_bits())).collect();
        placed.sort_unstable();
        original.sort_unstable();
        ok &= placed == original;
        if !ok {
            failures.push(format!("#{case} V={v} W={w} C={c}"));
        }
    }
    verdict(
        6,
        failures.is_empty(),
        started,
        Duration::from_secs(60),
        &format!("{built} layouts checked, {rejected} with V < W*C rejected as expected, failures {failures:?}"),
    );
}

#[test]
fn criterion_7_simulator_laws() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut lanes_checked = 0;
    for i in 0..10 {
        let (g, k, w, c, conv) = random_config(&mut rng);
        let (a, s) = paired(&g, k.as_ref(), w, c, conv);
        for run in [&a, &s] {
            for (lane, mut spans) in lane_timelines(&run.loads, &run.schedule) {
                lanes_checked += 1;
                spans.sort_by(|x, y| x.0.total_cmp(&y.0));
                if spans.windows(2).any(|p| p[1].0 < p[0].1) {
                    failures.push(format!("#{i} overlap on {lane}"));
                }
            }
        }
        if a.schedule.total_work != s.schedule.total_work {
            failures.push(format!("#{i} total work {} vs {}", a.schedule.total_work, s.schedule.total_work));
        }

        let base = CostModel::default();
        let with_cost = |cost: CostModel| {
            let cfg = PipelineConfig { convergence: conv, cost, router_capacity: 1 << 16, ..PipelineConfig::default() };
            pipeline(&g, k.as_ref(), w, c, &cfg).unwrap()
        };
        let mid = with_cost(base).schedule.makespan;
        let fast = with_cost(base.with_bandwidth_scaled(2.0)).schedule.makespan;
        let slow = with_cost(base.with_bandwidth_scaled(0.5)).schedule.makespan;
        if fast > mid || slow < mid {
            failures.push(format!("#{i} bandwidth: x2 {fast:e}, x1 {mid:e}, x0.5 {slow:e}"));
        }

        for executor in [Executor::Deterministic, Executor::Threaded] {
            let cfg = PipelineConfig { convergence: conv, executor, router_capacity: 1 << 16, ..PipelineConfig::default() };
            let again = pipeline(&g, k.as_ref(), w, c, &cfg).unwrap();
            if again.metrics != a.metrics || again.schedule.entries != a.schedule.entries {
                failures.push(format!("#{i} repeat run differs ({executor:?})"));
            }
        }
    }
    verdict(
        7,
        failures.is_empty(),
        started,
        Duration::from_secs(120),
        &format!("10 configurations, {lanes_checked} lane timelines, paired x2/x0.5 bandwidth runs, repeat runs; failures {failures:?}"),
    );
}

#[test]
fn criterion_8_pagerank_sanity() {
    let started = Instant::now();
    let pr = kernel_pagerank(0.85).unwrap();
    let mut graphs: Vec<(String, Graph)> = crafted()
        .into_iter()
        .filter(|(_, g)| g.out_degrees().iter().all(|&d| d > 0))
        .map(|(n, g)| (n.to_string(), g))
        .collect();
    for seed in 0..4 {
        graphs.push((format!("regular-{seed}"), random_regular_out(500 + 300 * seed as usize, 1 + seed as usize * 3, seed)));
    }
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for (_, g) in &graphs {
        for (w, c) in [(1, 1), (2, 1), (2, 2)].into_iter().filter(|&(w, c)| g.num_vertices() >= w * c) {
            for mode in [ScheduleMode::Sync, ScheduleMode::Async] {
                let cfg = PipelineConfig { mode, ..PipelineConfig::default() };
                let run = pipeline(g, &pr, w, c, &cfg).unwrap();
                worst = worst.max((run.state.prop.iter().sum::<f64>() - 1.0).abs());
                runs += 1;
            }
        }
    }
    let two = graph(2, &[(0, 1), (1, 0)]);
    let mut halves = true;
    for conv in [ConvergenceSpec::fixed(16), ConvergenceSpec::until_converged(100, 0.0)] {
        for w in [1, 2] {
            for mode in [ScheduleMode::Sync, ScheduleMode::Async] {
                let cfg = PipelineConfig { mode, convergence: conv, ..PipelineConfig::default() };
                halves &= pipeline(&two, &pr, w, 1, &cfg).unwrap().state.prop == [0.5, 0.5];
            }
        }
    }
    verdict(
        8,
        worst <= 1e-9 && halves,
        started,
        Duration::from_secs(60),
        &format!(
            "{runs} runs on {} graphs without dangling vertices, max |sum - 1| = {worst:.2e}; two-cycle exactly 0.5/0.5: {halves}",
            graphs.len()
        ),
    );
}
