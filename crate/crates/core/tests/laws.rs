mod common;

use common::*;
use gasflow::algorithms::{kernel_hits, kernel_pagerank, kernel_spmv_with, AlgorithmKernel, ConvergenceSpec};
use gasflow::engine::ScheduleMode::{Async, Sync};
use gasflow::graph::{partition_graph, ClusterLayout, Edge, Graph, VertexInterval};
use gasflow::partitioner::{recursive_partition, PartitionerConfig, VertexUpdate};
use proptest::prelude::*;

fn updates_strategy() -> impl Strategy<Value = (u32, u32, Vec<(f64, u32)>)> {
    (0u32..50, 1u32..3000).prop_flat_map(|(lo, width)| {
        (Just(lo), Just(width), prop::collection::vec((-1e3f64..1e3, 0..width), 0..400))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn partitioner_laws((lo, width, raw) in updates_strategy(), f in 2usize..9, extra in 0usize..64, t in 1usize..300) {
        let cfg = PartitionerConfig::new(f, f + extra, t).unwrap();
        let iv = VertexInterval { id: 0, lo, hi: lo + width };
        let input: Vec<VertexUpdate> = raw.iter().map(|&(v, d)| VertexUpdate::new(v, lo + d)).collect();
        let out = recursive_partition(input.clone(), iv, &cfg);
        prop_assert_eq!(out.total_updates(), input.len());
        if let Err(e) = check_partition(&input, iv, &cfg, &out) {
            return Err(TestCaseError::fail(e));
        }
        for (level, p) in out.passes.iter().enumerate() {
            prop_assert_eq!(p.level, level);
            prop_assert_eq!(p.updates as usize, input.len());
        }
    }

    #[test]
    fn layout_laws(v in 1usize..5000, w in 1usize..9, c in 1usize..9, pairs in prop::collection::vec((0u32..5000, 0u32..5000), 0..200)) {
        prop_assume!(v >= w * c);
        let layout = ClusterLayout::new(v, w, c).unwrap();
        prop_assert_eq!(layout.interval_range(), v.div_ceil(w * c));
        let mut next = 0;
        for (k, iv) in layout.intervals().iter().enumerate() {
            prop_assert_eq!(iv.id, k);
            prop_assert_eq!(iv.lo as usize, next);
            prop_assert!(iv.lo < iv.hi && iv.len() <= layout.interval_range());
            let pe = layout.owner(k);
            prop_assert_eq!((pe.worker, pe.channel), (k % w, (k / w) % c));
            next = iv.hi as usize;
        }
        prop_assert_eq!(next, v);
        let edges: Vec<Edge> = pairs.iter().map(|&(s, d)| Edge::new(s % v as u32, d % v as u32, 1.0)).collect();
        let g = Graph::new(v, edges.clone()).unwrap();
        let parts = partition_graph(&g, &layout);
        let mut flat: Vec<(u32, u32)> = parts.iter().flat_map(|p| p.edges().map(|e| (e.src, e.dst))).collect();
        let mut original: Vec<(u32, u32)> = edges.iter().map(|e| (e.src, e.dst)).collect();
        for p in &parts {
            for e in p.edges() {
                prop_assert!(p.dst_interval.contains(e.dst));
            }
        }
        flat.sort();
        original.sort();
        prop_assert_eq!(flat, original);
    }
}

fn kernels(n: usize, seed: u64) -> Vec<Box<dyn AlgorithmKernel>> {
    vec![
        Box::new(kernel_pagerank(0.85).unwrap()),
        Box::new(kernel_spmv_with(random_vector(n, seed))),
        Box::new(kernel_hits()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sync_and_async_agree(n in 8usize..120, nnz in 1usize..600, seed in 0u64..10_000, w in 1usize..5, c in 1usize..4, iters in 1usize..5) {
        prop_assume!(n >= w * c);
        let g = random_matrix(n, nnz, seed);
        for k in kernels(n, seed) {
            let a = run(&g, k.as_ref(), w, c, Async, ConvergenceSpec::fixed(iters));
            let s = run(&g, k.as_ref(), w, c, Sync, ConvergenceSpec::fixed(iters));
            prop_assert_eq!(&a.state, &s.state);
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let g = random_matrix(256, 3000, 77);
    for k in kernels(256, 77) {
        let base = run(&g, k.as_ref(), 1, 1, Async, ConvergenceSpec::fixed(6));
        for w in [2, 4, 8] {
            assert_eq!(run(&g, k.as_ref(), w, 1, Async, ConvergenceSpec::fixed(6)).state, base.state, "{} w{w}", k.name());
        }
    }
}
