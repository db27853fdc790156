use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph, VertexId};
use crate::error::{Error, Result};

pub const MAX_RMAT_SCALE: u32 = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct RmatParams {
    pub scale: u32,
    pub edge_factor: usize,
    /// Quadrant probabilities (a, b, c, d).
    pub probs: [f64; 4],
    pub seed: u64,
    /// Relabel vertices with a seeded random permutation after generation.
    pub scramble: bool,
}

impl RmatParams {
    pub fn new(scale: u32, edge_factor: usize, seed: u64) -> Self {
        RmatParams { scale, edge_factor, probs: [0.57, 0.19, 0.19, 0.05], seed, scramble: true }
    }

    pub fn with_probs(mut self, probs: [f64; 4]) -> Self {
        self.probs = probs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale > MAX_RMAT_SCALE {
            return Err(Error::InvalidRmat(format!(
                "scale {} exceeds the maximum of {MAX_RMAT_SCALE}",
                self.scale
            )));
        }
        if self.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidRmat("probabilities must be finite and non-negative".into()));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRmat(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Recursive-matrix generator. Produces exactly `edge_factor * 2^scale` unit-weight
/// edges; duplicates and self-loops are kept.
pub fn generate_rmat(params: &RmatParams) -> Result<Graph> {
    params.validate()?;
    let n = 1usize << params.scale;
    let m = params.edge_factor * n;
    let [a, b, c, _] = params.probs;
    let ab = a + b;
    let abc = ab + c;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (mut src, mut dst) = (0u64, 0u64);
        for level in 0..params.scale {
            let r: f64 = rng.random();
            let (s, d) = if r < a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            src |= s << level;
            dst |= d << level;
        }
        edges.push(Edge::new(src as VertexId, dst as VertexId, 1.0));
    }
    if params.scramble {
        let mut perm: Vec<VertexId> = (0..n as u64).map(|v| v as VertexId).collect();
        perm.shuffle(&mut rng);
        for e in &mut edges {
            e.src = perm[e.src as usize];
            e.dst = perm[e.dst as usize];
        }
    }
    Graph::new(n, edges)
}
