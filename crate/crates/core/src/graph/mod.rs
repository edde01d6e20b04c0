//! Decremental directed graph with stable edge ids and a replayable deletion log.

mod io;
mod reduce;

pub use io::{parse_graph, parse_script, write_graph, write_script, ScriptOp};
pub use reduce::{reduce_weight_range, ScaleReduction};

use std::collections::HashMap;
use thiserror::Error;

/// Dense edge identifier assigned at load time.
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("endpoint {vertex} out of range for n = {n}")]
    EndpointOutOfRange { vertex: usize, n: usize },
    #[error("edge ({from}, {to}) has non-positive weight")]
    NonPositiveWeight { from: usize, to: usize },
    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is already deleted")]
    AlreadyDeleted(EdgeId),
    #[error("scale {0} is not a power of two")]
    ScaleNotPowerOfTwo(u64),
    #[error("epsilon {0} outside (0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecrementalGraph {
    n: usize,
    edges: Vec<Edge>,
    alive: Vec<bool>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    alive_count: usize,
    deletion_log: Vec<EdgeId>,
}

impl DecrementalGraph {
    /// Builds a graph, dropping self-loops and collapsing parallel edges to
    /// their minimum weight. Surviving edges keep input order.
    pub fn load(n: usize, input: &[(usize, usize, u64)]) -> Result<Self, GraphError> {
        let mut edges: Vec<Edge> = Vec::with_capacity(input.len());
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        for &(u, v, w) in input {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::EndpointOutOfRange { vertex: x, n });
                }
            }
            if w == 0 {
                return Err(GraphError::NonPositiveWeight { from: u, to: v });
            }
            if u == v {
                continue;
            }
            match slot.get(&(u, v)) {
                Some(&i) => edges[i].weight = edges[i].weight.min(w),
                None => {
                    slot.insert((u, v), edges.len());
                    edges.push(Edge { from: u, to: v, weight: w });
                }
            }
        }
        Ok(Self::from_edges(n, edges))
    }

    /// Unweighted convenience loader.
    pub fn load_unweighted(n: usize, input: &[(usize, usize)]) -> Result<Self, GraphError> {
        let weighted: Vec<_> = input.iter().map(|&(u, v)| (u, v, 1)).collect();
        Self::load(n, &weighted)
    }

    fn from_edges(n: usize, edges: Vec<Edge>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            out_adj[e.from].push(id);
            in_adj[e.to].push(id);
        }
        let m = edges.len();
        DecrementalGraph {
            n,
            edges,
            alive: vec![true; m],
            out_adj,
            in_adj,
            alive_count: m,
            deletion_log: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges ever loaded (dead ones included).
    pub fn edge_capacity(&self) -> usize {
        self.edges.len()
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn is_alive(&self, e: EdgeId) -> bool {
        self.alive.get(e).copied().unwrap_or(false)
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1)
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).max().unwrap_or(1)
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), GraphError> {
        match self.alive.get(e) {
            None => Err(GraphError::UnknownEdge(e)),
            Some(false) => Err(GraphError::AlreadyDeleted(e)),
            Some(true) => {
                self.alive[e] = false;
                self.alive_count -= 1;
                self.deletion_log.push(e);
                Ok(())
            }
        }
    }

    pub fn deletion_log(&self) -> &[EdgeId] {
        &self.deletion_log
    }

    /// Live outgoing edge ids of `v`.
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = EdgeId> + '_ {
        self.out_adj[v].iter().copied().filter(move |&e| self.alive[e])
    }

    /// Live ingoing edge ids of `v`.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = EdgeId> + '_ {
        self.in_adj[v].iter().copied().filter(move |&e| self.alive[e])
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_edges(v).count()
    }

    /// Live edge ids in increasing order.
    pub fn alive_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.alive[e])
    }

    /// Live edge from `u` to `v`, if any (at most one after collapsing).
    pub fn find_edge(&self, u: usize, v: usize) -> Option<EdgeId> {
        self.out_edges(u).find(|&e| self.edges[e].to == v)
    }

    /// The graph as originally loaded, before any deletion.
    pub fn pristine(&self) -> DecrementalGraph {
        Self::from_edges(self.n, self.edges.clone())
    }

    /// Replays `log` on a pristine copy.
    pub fn replay(&self, log: &[EdgeId]) -> Result<DecrementalGraph, GraphError> {
        let mut g = self.pristine();
        for &e in log {
            g.delete_edge(e)?;
        }
        Ok(g)
    }

    /// Subgraph on the same vertex set keeping the live edges accepted by
    /// `keep`. Returns the new graph and, per original edge id, its new id.
    pub fn filtered(
        &self,
        mut keep: impl FnMut(EdgeId, &Edge) -> Option<u64>,
    ) -> (DecrementalGraph, Vec<Option<EdgeId>>) {
        let mut map = vec![None; self.edges.len()];
        let mut edges = Vec::new();
        for e in self.alive_edges() {
            let edge = self.edges[e];
            if let Some(w) = keep(e, &edge) {
                map[e] = Some(edges.len());
                edges.push(Edge { weight: w, ..edge });
            }
        }
        (Self::from_edges(self.n, edges), map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_rules() {
        let g = DecrementalGraph::load(2, &[(0, 1, 1)]).unwrap();
        assert_eq!(g.alive_count(), 1);
        assert_eq!(g.edge(0).weight, 1);
        let g = DecrementalGraph::load(1, &[(0, 0, 5)]).unwrap();
        assert_eq!(g.alive_count(), 0);
        let g = DecrementalGraph::load(2, &[(0, 1, 3), (0, 1, 2)]).unwrap();
        assert_eq!(g.alive_count(), 1);
        assert_eq!(g.edge(0).weight, 2);
    }

    #[test]
    fn load_errors() {
        assert_eq!(
            DecrementalGraph::load(2, &[(0, 2, 1)]),
            Err(GraphError::EndpointOutOfRange { vertex: 2, n: 2 })
        );
        assert!(matches!(
            DecrementalGraph::load(2, &[(0, 1, 0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn delete_semantics() {
        let mut g = DecrementalGraph::load_unweighted(2, &[(0, 1)]).unwrap();
        g.delete_edge(0).unwrap();
        assert_eq!(g.out_degree(0), 0);
        assert_eq!(g.delete_edge(0), Err(GraphError::AlreadyDeleted(0)));
        assert_eq!(g.delete_edge(7), Err(GraphError::UnknownEdge(7)));
    }

    proptest! {
        #[test]
        fn alive_count_tracks_log(n in 2usize..12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..60), seed in any::<u64>()) {
            let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
            let mut g = DecrementalGraph::load_unweighted(n, &edges).unwrap();
            let m = g.alive_count();
            let mut order: Vec<_> = g.alive_edges().collect();
            let mut s = seed;
            for i in (1..order.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (s >> 33) as usize % (i + 1));
            }
            let k = order.len() / 2;
            for &e in &order[..k] {
                g.delete_edge(e).unwrap();
            }
            prop_assert_eq!(g.alive_count(), m - k);
            prop_assert_eq!(g.deletion_log().len(), k);
            let replayed = g.replay(g.deletion_log()).unwrap();
            prop_assert_eq!(&replayed, &g);
        }
    }
}
