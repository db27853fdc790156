//! Edge-list graphs, ingestion, synthetic generation and the static cluster layout.

mod io;
mod layout;
mod partition;
mod rmat;

pub use io::{
    load_edge_list, parse_text_edge_list, read_binary_graph, read_vector, write_binary_graph,
    write_vector, EdgeListFormat,
};
pub use layout::{build_layout, ClusterLayout, PeId, VertexInterval};
pub use partition::{partition_graph, CsrPartition, EdgeBlock};
pub use rmat::{generate_rmat, RmatParams};

use crate::error::{Error, Result};

/// Global vertex identifier. Never renumbered anywhere in the engine.
pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: VertexId, dst: VertexId, weight: f64) -> Self {
        Edge { src, dst, weight }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl Graph {
    /// Builds a directed graph, checking that every endpoint is below `num_vertices`
    /// and every weight is finite.
    pub fn new(num_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph must have at least one vertex".into()));
        }
        if num_vertices > VertexId::MAX as usize + 1 {
            return Err(Error::InvalidGraph(format!(
                "{num_vertices} vertices exceed the 32-bit id space"
            )));
        }
        for (idx, e) in edges.iter().enumerate() {
            if e.src as usize >= num_vertices || e.dst as usize >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx} ({} -> {}) has an endpoint >= {num_vertices}",
                    e.src, e.dst
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!("edge {idx} has a non-finite weight")));
            }
        }
        Ok(Graph { num_vertices, edges, directed: true })
    }

    /// Convenience constructor for unit-weight edges.
    pub fn from_pairs(num_vertices: usize, pairs: &[(VertexId, VertexId)]) -> Result<Self> {
        let edges = pairs.iter().map(|&(s, d)| Edge::new(s, d, 1.0)).collect();
        Graph::new(num_vertices, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Reverses every edge, keeping edge order and weights.
    pub fn transpose(&self) -> Graph {
        Graph {
            num_vertices: self.num_vertices,
            edges: self.edges.iter().map(|e| Edge::new(e.dst, e.src, e.weight)).collect(),
            directed: self.directed,
        }
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.num_vertices];
        for e in &self.edges {
            deg[e.src as usize] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.num_vertices];
        for e in &self.edges {
            deg[e.dst as usize] += 1;
        }
        deg
    }
}
