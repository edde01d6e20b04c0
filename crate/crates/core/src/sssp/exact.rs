//! Classic ES tree for one scale: the fallback when a scale's parameters
//! leave nothing to decompose.

use super::flex::without_source_in_edges;
use super::SsspError;
use crate::estree::{Direction, EsStructure};
use crate::graph::{DecrementalGraph, EdgeId};
use crate::subgraph::Subgraph;

#[derive(Debug, Clone)]
pub struct ExactScale {
    source: usize,
    scale: u64,
    g: DecrementalGraph,
    es: EsStructure,
}

impl ExactScale {
    /// Exact distances from `source` up to `2·scale − 1`.
    pub fn new(g: &DecrementalGraph, source: usize, scale: u64) -> Result<Self, SsspError> {
        let gs = without_source_in_edges(g, source)?;
        let mut es = EsStructure::build(&Subgraph::whole(&gs), source, (2 * scale).saturating_sub(1))?;
        es.track_changes(Direction::Out);
        Ok(ExactScale { source, scale, g: gs, es })
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn tree(&self) -> &EsStructure {
        &self.es
    }

    /// Deletes `e`; returns the vertices whose distance rose.
    pub fn delete(&mut self, e: EdgeId) -> Result<Vec<usize>, SsspError> {
        if e >= self.g.edge_capacity() {
            return Err(SsspError::Graph(crate::graph::GraphError::UnknownEdge(e)));
        }
        if !self.g.is_alive(e) {
            return Ok(Vec::new());
        }
        self.g.delete_edge(e)?;
        self.es.remove_edge(e);
        Ok(self.es.take_changed(Direction::Out))
    }

    pub fn query(&self, u: usize) -> Option<u64> {
        self.es.level(Direction::Out, u)
    }

    pub fn report_path(&self, u: usize) -> Option<Vec<usize>> {
        self.es.tree_path(Direction::Out, u)
    }

    pub fn source(&self) -> usize {
        self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_bfs_within_the_range() {
        let mut g = DecrementalGraph::load_unweighted(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 3), (4, 0)]).unwrap();
        let mut s = ExactScale::new(&g, 0, 2).unwrap();
        assert_eq!(s.query(3), Some(1));
        assert_eq!(s.query(4), Some(2));
        let e = g.find_edge(0, 3).unwrap();
        g.delete_edge(e).unwrap();
        let changed = s.delete(e).unwrap();
        assert_eq!(changed, vec![3, 4]);
        assert_eq!(s.query(3), Some(3));
        assert_eq!(s.query(4), None);
        assert_eq!(s.report_path(3), Some(vec![0, 1, 2, 3]));
    }
}
