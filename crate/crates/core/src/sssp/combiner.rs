//! All distance scales of one source, combined by taking the minimum.

use super::exact::ExactScale;
use super::flex::FlexScale;
use super::params::{select_parameters, select_weighted, ParamSet, Preset, Variant};
use super::sparse::SparseScale;
use super::SsspError;
use crate::graph::{DecrementalGraph, EdgeId};
use crate::pq::IndexedMinHeap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// The structure answering one scale.
#[derive(Debug, Clone)]
pub enum ScaleStructure {
    Flex(Box<FlexScale>),
    Sparse(Box<SparseScale>),
    Exact(ExactScale),
}

impl ScaleStructure {
    pub fn query(&self, u: usize) -> Option<u64> {
        match self {
            ScaleStructure::Flex(s) => s.query(u),
            ScaleStructure::Sparse(s) => s.query(u),
            ScaleStructure::Exact(s) => s.query(u),
        }
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<Vec<usize>, SsspError> {
        match self {
            ScaleStructure::Flex(s) => s.delete(e),
            ScaleStructure::Sparse(s) => s.delete(e),
            ScaleStructure::Exact(s) => s.delete(e),
        }
    }

    pub fn report_path(&mut self, u: usize) -> Result<Option<Vec<usize>>, SsspError> {
        match self {
            ScaleStructure::Flex(s) => s.report_path(u),
            ScaleStructure::Sparse(s) => s.report_path(u),
            ScaleStructure::Exact(s) => Ok(s.report_path(u)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScaleStructure::Flex(s) => s.params().variant.name(),
            ScaleStructure::Sparse(_) => "sparse",
            ScaleStructure::Exact(_) => "exact",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scale {
    pub params: ParamSet,
    pub structure: ScaleStructure,
}

/// Work done by all scales so far.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorCounters {
    pub scales: u64,
    pub exact_scales: u64,
    pub deletions: u64,
    pub splits: u64,
    pub threshold_rounds: u64,
    pub relevels: u64,
    pub stalled_rounds: u64,
    pub super_inserts: u64,
    pub super_deletes: u64,
    pub local_trees: u64,
    /// Arc scans of the trees over the multigraphs (global and local).
    pub tree_scans: u64,
    /// Edge scans of classic ES trees, inside decompositions and in exact scales.
    pub es_scans: u64,
    pub repartitions: u64,
    pub multigraph_work: u64,
    pub heap_ops: u64,
}

#[derive(Debug, Clone)]
pub struct CombinedEstimator {
    source: usize,
    variant: Variant,
    epsilon: f64,
    scales: Vec<Scale>,
    best: Vec<IndexedMinHeap<u64>>,
    deletions: u64,
}

/// Largest finite distance in `g`: `(n − 1)·max weight`.
pub fn distance_cap(g: &DecrementalGraph) -> u64 {
    (g.n().saturating_sub(1) as u64).saturating_mul(g.max_weight().max(1))
}

impl CombinedEstimator {
    /// Scales `1, 2, 4, …` up to the largest finite distance.
    pub fn new(
        g: &DecrementalGraph,
        source: usize,
        variant: Variant,
        preset: Preset,
        epsilon: f64,
        c_param: f64,
        seed: u64,
    ) -> Result<Self, SsspError> {
        Self::with_cap(g, source, variant, preset, epsilon, c_param, seed, distance_cap(g), |p| p)
    }

    /// Scales up to `cap`, with `adjust` applied to every parameter set.
    #[allow(clippy::too_many_arguments)]
    pub fn with_cap(
        g: &DecrementalGraph,
        source: usize,
        variant: Variant,
        preset: Preset,
        epsilon: f64,
        c_param: f64,
        seed: u64,
        cap: u64,
        adjust: impl Fn(ParamSet) -> ParamSet,
    ) -> Result<Self, SsspError> {
        if source >= g.n() {
            return Err(SsspError::Source(source));
        }
        let n = g.n();
        let m = g.alive_count();
        let weighted = !g.is_unweighted();
        let mut scales = Vec::new();
        let mut d = 1u64;
        loop {
            let chosen = if weighted {
                select_weighted(variant, preset, n, m, epsilon, d, c_param)
            } else {
                select_parameters(variant, preset, n, m, epsilon, d, c_param)
            };
            let params = adjust(chosen);
            let scale_seed = seed.wrapping_add(d.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let structure = if params.fallback {
                ScaleStructure::Exact(ExactScale::new(g, source, d)?)
            } else {
                match params.variant {
                    Variant::Sparse => ScaleStructure::Sparse(Box::new(SparseScale::new(g, source, &params, scale_seed)?)),
                    Variant::Exact => ScaleStructure::Exact(ExactScale::new(g, source, d)?),
                    _ => ScaleStructure::Flex(Box::new(FlexScale::new(g, source, &params, scale_seed)?)),
                }
            };
            scales.push(Scale { params, structure });
            if d >= cap.max(1) || d > u64::MAX / 4 {
                break;
            }
            d *= 2;
        }
        let mut best: Vec<IndexedMinHeap<u64>> = (0..n).map(|_| IndexedMinHeap::with_capacity(scales.len())).collect();
        for (i, s) in scales.iter().enumerate() {
            for (u, heap) in best.iter_mut().enumerate() {
                if let Some(q) = s.structure.query(u) {
                    heap.set(i, q);
                }
            }
        }
        Ok(CombinedEstimator { source, variant, epsilon, scales, best, deletions: 0 })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    /// Deletes `e` from every scale; returns the vertices whose estimate at
    /// some scale changed.
    pub fn delete(&mut self, e: EdgeId) -> Result<Vec<usize>, SsspError> {
        self.deletions += 1;
        let mut touched = BTreeSet::new();
        for (i, s) in self.scales.iter_mut().enumerate() {
            for u in s.structure.delete(e)? {
                match s.structure.query(u) {
                    Some(q) => self.best[u].set(i, q),
                    None => {
                        self.best[u].remove(i);
                    }
                }
                touched.insert(u);
            }
        }
        Ok(touched.into_iter().collect())
    }

    /// Minimum over scales; `None` means unreachable.
    pub fn query(&self, u: usize) -> Option<u64> {
        if u == self.source {
            return Some(0);
        }
        self.best.get(u)?.peek_min().map(|(_, q)| q)
    }

    /// Index of the scale giving the current estimate of `u`.
    pub fn best_scale(&self, u: usize) -> Option<usize> {
        self.best.get(u)?.peek_min().map(|(i, _)| i)
    }

    /// Walk from the source to `u` through the scale giving its estimate.
    pub fn report_path(&mut self, u: usize) -> Result<Option<Vec<usize>>, SsspError> {
        if u == self.source {
            return Ok(Some(vec![u]));
        }
        let Some(i) = self.best_scale(u) else { return Ok(None) };
        self.scales[i].structure.report_path(u)
    }

    pub fn counters(&self) -> EstimatorCounters {
        let mut c = EstimatorCounters { scales: self.scales.len() as u64, deletions: self.deletions, ..Default::default() };
        for s in &self.scales {
            match &s.structure {
                ScaleStructure::Flex(f) => {
                    let fc = f.counters();
                    c.splits += fc.splits;
                    c.threshold_rounds += fc.threshold_rounds;
                    c.relevels += fc.relevels;
                    c.stalled_rounds += fc.stalled_rounds;
                    c.tree_scans += f.tree().counters().scans;
                    c.es_scans += f.decomposition().es_scans();
                    c.repartitions += f.decomposition().counters().repartitions;
                    c.multigraph_work += f.multigraph().work();
                }
                ScaleStructure::Sparse(sp) => {
                    let sc = sp.counters();
                    c.splits += sc.splits;
                    c.super_inserts += sc.super_inserts;
                    c.super_deletes += sc.super_deletes;
                    c.local_trees += sc.local_trees;
                    c.tree_scans += sp.tree().counters().scans + sc.local_scans;
                    c.es_scans += sp.decomposition().es_scans();
                    c.repartitions += sp.decomposition().counters().repartitions;
                    c.multigraph_work += sp.multigraph().work();
                }
                ScaleStructure::Exact(x) => {
                    c.exact_scales += 1;
                    c.es_scans += x.tree().total_scans();
                }
            }
        }
        c.heap_ops = self.best.iter().map(|h| h.ops()).sum();
        c
    }
}
