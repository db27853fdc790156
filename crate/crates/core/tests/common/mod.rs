#![allow(dead_code)]

use gasflow::graph::{Edge, Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn graph(n: usize, pairs: &[(u32, u32)]) -> Graph {
    Graph::from_pairs(n, pairs).unwrap()
}

/// Small hand-made graphs, none larger than 16 vertices.
pub fn crafted() -> Vec<(&'static str, Graph)> {
    let ring16: Vec<(u32, u32)> = (0..16).map(|v| (v, (v + 1) % 16)).collect();
    let tree15: Vec<(u32, u32)> = (1..15).map(|v| ((v - 1) / 2, v)).collect();
    let mut complete5 = Vec::new();
    for u in 0..5 {
        for v in 0..5 {
            if u != v {
                complete5.push((u, v));
            }
        }
    }
    vec![
        ("two-cycle", graph(2, &[(0, 1), (1, 0)])),
        ("chain4", graph(4, &[(0, 1), (1, 2), (2, 3)])),
        ("star-in", graph(9, &(1..9).map(|l| (l, 0)).collect::<Vec<_>>())),
        ("star-out", graph(9, &(1..9).map(|l| (0, l)).collect::<Vec<_>>())),
        ("complete5", graph(5, &complete5)),
        ("ring16", graph(16, &ring16)),
        ("tree15", graph(15, &tree15)),
        ("self-loops", graph(6, &[(0, 0), (1, 1), (1, 2), (2, 0), (3, 3), (5, 4), (4, 5)])),
        ("multi-edges", graph(7, &[(0, 1), (0, 1), (0, 1), (1, 2), (2, 0), (6, 3), (6, 3), (3, 6)])),
        ("isolated", graph(12, &[(0, 11), (11, 0), (5, 7), (7, 5), (7, 0)])),
        (
            "weighted",
            Graph::new(
                8,
                vec![
                    Edge::new(0, 1, 0.5),
                    Edge::new(1, 2, -2.0),
                    Edge::new(2, 7, 3.25),
                    Edge::new(7, 0, 1.5),
                    Edge::new(3, 4, 0.125),
                    Edge::new(4, 3, 8.0),
                ],
            )
            .unwrap(),
        ),
    ]
}

/// Uniform random sparse matrix as a weighted edge list.
pub fn random_matrix(n: usize, nnz: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..nnz)
        .map(|_| {
            Edge::new(
                rng.random_range(0..n as VertexId),
                rng.random_range(0..n as VertexId),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    Graph::new(n, edges).unwrap()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Every vertex gets `degree` out-edges to uniformly random destinations.
pub fn random_regular_out(n: usize, degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n * degree);
    for u in 0..n as u32 {
        for _ in 0..degree {
            pairs.push((u, rng.random_range(0..n as u32)));
        }
    }
    Graph::from_pairs(n, &pairs).unwrap()
}

fn dense(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.src as usize][e.dst as usize] += e.weight;
    }
    a
}

/// `y[v] = sum_u A[u][v] x[u]`.
pub fn dense_spmv(g: &Graph, x: &[f64]) -> Vec<f64> {
    let a = dense(g);
    let n = g.num_vertices();
    (0..n).map(|v| (0..n).map(|u| a[u][v] * x[u]).sum()).collect()
}

/// Power iteration on the column-stochastic link matrix, dangling mass dropped.
pub fn dense_pagerank(g: &Graph, damping: f64, iterations: usize) -> Vec<f64> {
    let n = g.num_vertices();
    let mut count = vec![vec![0.0; n]; n];
    let mut out = vec![0.0; n];
    for e in g.edges() {
        count[e.src as usize][e.dst as usize] += 1.0;
        out[e.src as usize] += 1.0;
    }
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        r = (0..n)
            .map(|v| {
                let gathered: f64 = (0..n).filter(|&u| out[u] > 0.0).map(|u| count[u][v] / out[u] * r[u]).sum();
                (1.0 - damping) / n as f64 + damping * gathered
            })
            .collect();
    }
    r
}

/// Returns `(authority, hub)` after `iterations` rounds of `a = A^T h / |.|`,
/// `h = A a / |.|` with unit weights.
pub fn dense_hits(g: &Graph, iterations: usize) -> (Vec<f64>, Vec<f64>) {
    let n = g.num_vertices();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.src as usize][e.dst as usize] += 1.0;
    }
    let normalize = |x: Vec<f64>| {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.into_iter().map(|v| v / norm).collect::<Vec<_>>()
    };
    let mut hub = vec![1.0; n];
    let mut auth = vec![1.0; n];
    for _ in 0..iterations {
        auth = normalize((0..n).map(|v| (0..n).map(|u| a[u][v] * hub[u]).sum()).collect());
        hub = normalize((0..n).map(|u| (0..n).map(|v| a[u][v] * auth[v]).sum()).collect());
    }
    (auth, hub)
}

/// Largest `|a - b| / max(1, |b|)`.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

use gasflow::algorithms::{AlgorithmKernel, ConvergenceSpec};
use gasflow::engine::{run_pipeline, PipelineConfig, PipelineRun, PreparedGraph, ScheduleMode};

pub fn run(g: &Graph, kernel: &dyn AlgorithmKernel, workers: usize, channels: usize, mode: ScheduleMode, conv: ConvergenceSpec) -> PipelineRun {
    let prepared = PreparedGraph::for_kernel(g, workers, channels, kernel).unwrap();
    let cfg = PipelineConfig { mode, convergence: conv, ..PipelineConfig::default() };
    run_pipeline(&prepared, kernel, &cfg).unwrap()
}

use gasflow::graph::VertexInterval;
use gasflow::partitioner::{PartitionOutcome, PartitionerConfig, VertexUpdate};

/// `ceil(log_F(ceil(R / T)))` by repeated ceiling division.
pub fn expected_passes(range: usize, fanout: usize, target: usize) -> usize {
    let mut buckets = range.div_ceil(target);
    let mut p = 0;
    while buckets > 1 {
        buckets = buckets.div_ceil(fanout);
        p += 1;
    }
    p
}

/// Checks an outcome against a stable sort of the input by final bucket.
pub fn check_partition(input: &[VertexUpdate], iv: VertexInterval, cfg: &PartitionerConfig, out: &PartitionOutcome) -> Result<(), String> {
    let planned = expected_passes(iv.len(), cfg.fanout, cfg.target_range);
    if out.num_passes() != planned {
        return Err(format!("{} passes, planned {planned}", out.num_passes()));
    }
    if out.peak_occupancy > cfg.buffer_capacity {
        return Err(format!("buffer peak {} > {}", out.peak_occupancy, cfg.buffer_capacity));
    }
    let mut cursor = iv.lo;
    for r in &out.runs {
        if r.dst_lo != cursor || r.dst_hi <= r.dst_lo {
            return Err(format!("runs do not tile the interval at {cursor}"));
        }
        if planned > 0 && r.width() > cfg.target_range {
            return Err(format!("run width {} > {}", r.width(), cfg.target_range));
        }
        cursor = r.dst_hi;
    }
    if cursor != iv.hi {
        return Err("runs stop short of the interval".into());
    }
    let bucket = |d: u32| out.runs.partition_point(|r| r.dst_hi <= d);
    let mut expected = input.to_vec();
    expected.sort_by_key(|u| bucket(u.dst));
    let flat: Vec<VertexUpdate> = out.runs.iter().flat_map(|r| r.updates.iter().copied()).collect();
    if flat != expected {
        return Err("flattened output differs from the stable-sort oracle".into());
    }
    Ok(())
}

