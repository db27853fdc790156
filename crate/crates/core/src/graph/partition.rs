use super::{ClusterLayout, Edge, Graph, PeId, VertexId, VertexInterval};

/// Edges of one (src interval, dst partition) pair in doubly-compressed sparse row
/// form: only source rows that actually have edges are listed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeBlock {
    src_interval: usize,
    rows: Vec<VertexId>,
    offsets: Vec<usize>,
    dsts: Vec<VertexId>,
    weights: Vec<f64>,
}

impl EdgeBlock {
    fn new(src_interval: usize) -> Self {
        EdgeBlock { src_interval, offsets: vec![0], ..Default::default() }
    }

    /// Appends an edge; callers must supply edges sorted by source.
    fn push(&mut self, e: &Edge) {
        if self.rows.last() != Some(&e.src) {
            debug_assert!(self.rows.last().is_none_or(|&r| r < e.src));
            self.rows.push(e.src);
            self.offsets.push(self.dsts.len());
        }
        self.dsts.push(e.dst);
        self.weights.push(e.weight);
        *self.offsets.last_mut().expect("offsets start with 0") = self.dsts.len();
    }

    pub fn src_interval(&self) -> usize {
        self.src_interval
    }

    pub fn num_edges(&self) -> usize {
        self.dsts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dsts.is_empty()
    }

    /// Distinct source vertices with at least one edge, ascending.
    pub fn rows(&self) -> &[VertexId] {
        &self.rows
    }

    /// `offsets[r]..offsets[r + 1]` indexes the edges of `rows()[r]`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dsts(&self) -> &[VertexId] {
        &self.dsts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edges in stored order: by source, then destination, ties in input order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.rows.iter().enumerate().flat_map(move |(r, &src)| {
            (self.offsets[r]..self.offsets[r + 1])
                .map(move |j| Edge::new(src, self.dsts[j], self.weights[j]))
        })
    }
}

/// All edges whose destination falls in one interval, bucketed by source interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrPartition {
    pub owner: PeId,
    pub dst_interval: VertexInterval,
    blocks: Vec<EdgeBlock>,
}

impl CsrPartition {
    /// Block for `src_interval`; one block exists for every interval of the layout.
    pub fn block(&self, src_interval: usize) -> &EdgeBlock {
        &self.blocks[src_interval]
    }

    pub fn blocks(&self) -> &[EdgeBlock] {
        &self.blocks
    }

    pub fn num_edges(&self) -> usize {
        self.blocks.iter().map(EdgeBlock::num_edges).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.blocks.iter().flat_map(EdgeBlock::edges)
    }
}

/// Assigns each edge to the partition owning its destination interval. The result
/// is indexed by interval id.
pub fn partition_graph(g: &Graph, layout: &ClusterLayout) -> Vec<CsrPartition> {
    assert_eq!(g.num_vertices(), layout.num_vertices(), "layout was built for another graph");
    let edges = g.edges();
    let mut order: Vec<u32> = (0..edges.len() as u32).collect();
    order.sort_by_key(|&i| {
        let e = &edges[i as usize];
        (layout.interval_of(e.dst), e.src, e.dst)
    });
    let n = layout.num_intervals();
    let mut parts: Vec<CsrPartition> = layout
        .intervals()
        .iter()
        .map(|&iv| CsrPartition {
            owner: layout.owner(iv.id),
            dst_interval: iv,
            blocks: (0..n).map(EdgeBlock::new).collect(),
        })
        .collect();
    for i in order {
        let e = &edges[i as usize];
        let p = layout.interval_of(e.dst);
        let s = layout.interval_of(e.src);
        parts[p].blocks[s].push(e);
    }
    parts
}
