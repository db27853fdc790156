use super::{l2_norm, AlgorithmKernel, ConvergenceMode, ConvergenceSpec, SourceVertex, VertexState};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

struct EdgeSet {
    edges: Vec<Edge>,
    out_degree: Vec<u32>,
}

impl EdgeSet {
    fn new(g: &Graph) -> Self {
        let mut edges = g.edges().to_vec();
        edges.sort_by_key(|e| (e.src, e.dst));
        EdgeSet { out_degree: g.out_degrees(), edges }
    }
}

/// Straight-line single-threaded execution of the gather/apply loop: every edge in
/// ascending `(src, dst)` order feeds its destination accumulator, then each vertex
/// is finalized.
pub fn reference_execute(g: &Graph, kernel: &dyn AlgorithmKernel, conv: &ConvergenceSpec) -> Result<VertexState> {
    conv.validate()?;
    let n = g.num_vertices();
    let forward = EdgeSet::new(g);
    let reverse = kernel.phases().iter().any(|p| p.transpose).then(|| EdgeSet::new(&g.transpose()));
    let mut slots = kernel.init(n)?;
    let mut acc = vec![kernel.identity(); n];
    let mut active = vec![true; n];
    let mut iterations = 0;
    while iterations < conv.max_iterations {
        iterations += 1;
        active.iter_mut().for_each(|a| *a = false);
        for phase in kernel.phases() {
            let set = if phase.transpose { reverse.as_ref().expect("built above") } else { &forward };
            acc.iter_mut().for_each(|a| *a = kernel.identity());
            let input = &slots[phase.input];
            for e in &set.edges {
                let src = SourceVertex { prop: input[e.src as usize], out_degree: set.out_degree[e.src as usize] };
                let d = e.dst as usize;
                acc[d] = kernel.apply(acc[d], kernel.process_edge(e.weight, src));
            }
            let mut next = Vec::with_capacity(n);
            for (v, &a) in acc.iter().enumerate() {
                let value = kernel.finalize(a, n);
                if !value.is_finite() {
                    return Err(Error::NonFinite { iteration: iterations, vertex: v as u32 });
                }
                next.push(value);
            }
            if kernel.normalizes() {
                let norm = l2_norm(&next);
                if norm == 0.0 {
                    return Err(Error::ZeroNorm { iteration: iterations });
                }
                next.iter_mut().for_each(|x| *x /= norm);
            }
            for (v, (&old, &new)) in slots[phase.output].iter().zip(&next).enumerate() {
                active[v] |= kernel.is_active(old, new, conv.epsilon);
            }
            slots[phase.output] = next;
        }
        if conv.mode == ConvergenceMode::FrontierEmpty && !active.iter().any(|&a| a) {
            break;
        }
    }
    Ok(VertexState::from_slots(slots, acc, active, iterations))
}
