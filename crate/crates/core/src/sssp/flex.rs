//! One distance scale over a contracted multigraph whose arcs carry levels
//! derived from the topological order (the adaptive and dense variants).

use super::order::{order_sets, TopOrder};
use super::params::{eta_base, geometric_level, ParamSet, Variant};
use super::walk::{route_in_piece, SetWalk};
use super::SsspError;
use crate::approx_es::{ApproxEsTree, Everything, RoundingScheme};
use crate::decomp::{Decomposition, PieceId, Refinement};
use crate::graph::{DecrementalGraph, EdgeId};
use crate::multigraph::{ArcKey, Multigraph, VertexId};
use serde::{Deserialize, Serialize};
use rustc_hash::FxHashMap as HashMap;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlexCounters {
    pub deletions: u64,
    pub splits: u64,
    /// Heavy lists processed.
    pub threshold_rounds: u64,
    /// Arcs examined while processing heavy lists.
    pub threshold_scanned: u64,
    /// Of those, arcs whose level rose.
    pub threshold_raised: u64,
    /// Underlying edges moved to a higher level.
    pub relevels: u64,
    /// Heavy lists left in place because no arc could rise.
    pub stalled_rounds: u64,
    pub path_steps: u64,
}

/// Weight, arc count and forward mass of a reported tree path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathProfile {
    pub weight: u64,
    pub arcs: u64,
    /// `Σ r(C₁, C₂) / τ` over the arcs.
    pub mass_over_tau: f64,
}

#[derive(Debug, Clone)]
pub struct FlexScale {
    params: ParamSet,
    source: usize,
    weighted: bool,
    base: f64,
    k: usize,
    g: DecrementalGraph,
    dec: Decomposition,
    mg: Multigraph,
    es: ApproxEsTree,
    order: TopOrder,
    mid_of_piece: HashMap<PieceId, VertexId>,
    piece_of_mid: HashMap<VertexId, PieceId>,
    floor: Vec<usize>,
    counters: FlexCounters,
}

/// `g` without the edges entering `source`; edge ids are unchanged.
pub(crate) fn without_source_in_edges(g: &DecrementalGraph, source: usize) -> Result<DecrementalGraph, SsspError> {
    if source >= g.n() {
        return Err(SsspError::Source(source));
    }
    let mut gs = g.clone();
    let into: Vec<EdgeId> = gs.in_edges(source).collect();
    for e in into {
        gs.delete_edge(e)?;
    }
    Ok(gs)
}

impl FlexScale {
    pub fn new(g: &DecrementalGraph, source: usize, params: &ParamSet, seed: u64) -> Result<Self, SsspError> {
        let config = params.decomposition_config().ok_or(SsspError::Fallback(params.scale))?;
        let gs = without_source_in_edges(g, source)?;
        let weighted = !gs.is_unweighted();
        let mut light = gs.clone();
        if weighted {
            let heavy: Vec<EdgeId> = light.alive_edges().filter(|&e| light.edge(e).weight > params.omega).collect();
            for e in heavy {
                light.delete_edge(e)?;
            }
        }
        let dec = Decomposition::new(light, config, seed)?;
        let sets: Vec<(usize, Vec<usize>)> = dec.piece_ids().map(|p| (p, dec.piece(p).to_vec())).collect();
        let seq = order_sets(&dec, &sets);
        let mut mid_of_piece = HashMap::default();
        let mut piece_of_mid = HashMap::default();
        let mut partition = Vec::with_capacity(seq.len());
        for (mid, &pid) in seq.iter().enumerate() {
            mid_of_piece.insert(pid, mid);
            piece_of_mid.insert(mid, pid);
            partition.push(dec.piece(pid).to_vec());
        }
        let order = TopOrder::new(partition.iter().enumerate().map(|(mid, p)| (mid, p.len() as u64)))?;
        let eps = params.epsilon;
        let base = if weighted { 1.0 + eps } else { 2.0 };
        let tau = params.tau;
        let floor: Vec<usize> = (0..gs.edge_capacity())
            .map(|e| if weighted { geometric_level(eps, gs.edge(e).weight) } else { 0 })
            .collect();
        let k = eta_base(gs.n() as u64, tau, base).max(floor.iter().copied().max().unwrap_or(0));
        let mut vertex_mid = vec![0usize; gs.n()];
        for (mid, p) in partition.iter().enumerate() {
            for &v in p {
                vertex_mid[v] = mid;
            }
        }
        let level = |e: EdgeId| {
            let ed = gs.edge(e);
            let r = order.between(vertex_mid[ed.from], vertex_mid[ed.to]);
            eta_base(r, tau, base).max(floor[e]).min(k)
        };
        let deltas: Vec<usize> = (0..=k).map(|i| (base.powi(i as i32 + 2) * tau).floor() as usize).collect();
        let mg = Multigraph::new(&gs, &partition, level, k, deltas)?;
        let scheme = if weighted { RoundingScheme::geometric(eps, k) } else { RoundingScheme::doubling(k) };
        let threshold = (2.0 * params.scale as f64 * (1.0 + eps)).floor() as u64;
        let es = ApproxEsTree::build(&mg, mg.vertex_of(source), threshold, scheme)?;
        let mut s = FlexScale {
            params: params.clone(),
            source,
            weighted,
            base,
            k,
            g: gs,
            dec,
            mg,
            es,
            order,
            mid_of_piece,
            piece_of_mid,
            floor,
            counters: FlexCounters::default(),
        };
        s.threshold_loop()?;
        s.es.update_distances(&s.mg, &Everything);
        Ok(s)
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    /// Highest arc level.
    pub fn max_level(&self) -> usize {
        self.k
    }

    /// The graph this scale sees (edges into the source removed).
    pub fn graph(&self) -> &DecrementalGraph {
        &self.g
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn multigraph(&self) -> &Multigraph {
        &self.mg
    }

    pub fn tree(&self) -> &ApproxEsTree {
        &self.es
    }

    /// Keep per-arc scan counts on the tree from now on.
    pub fn record_scans(&mut self) {
        self.es.record_scans(true);
    }

    pub fn order(&self) -> &TopOrder {
        &self.order
    }

    pub fn counters(&self) -> &FlexCounters {
        &self.counters
    }

    /// The contracted sets as vertex lists, in list order.
    pub fn ordered_sets(&self) -> Vec<Vec<usize>> {
        self.order.keys().map(|mid| self.mg.members(mid).map(|m| m.iter().copied().collect()).unwrap_or_default()).collect()
    }

    /// Level `η(r)` (or the weight floor, if higher) for an edge right now.
    pub fn target_level(&self, e: EdgeId) -> usize {
        let ed = self.g.edge(e);
        let r = self.order.between(self.mg.vertex_of(ed.from), self.mg.vertex_of(ed.to));
        eta_base(r, self.params.tau, self.base).max(self.floor[e]).min(self.k)
    }

    /// Deletes `e`; returns the vertices whose estimate changed.
    pub fn delete(&mut self, e: EdgeId) -> Result<Vec<usize>, SsspError> {
        if e >= self.g.edge_capacity() {
            return Err(SsspError::Graph(crate::graph::GraphError::UnknownEdge(e)));
        }
        if !self.g.is_alive(e) {
            return Ok(Vec::new());
        }
        self.counters.deletions += 1;
        self.g.delete_edge(e)?;
        let event = if self.dec.graph().is_alive(e) { self.dec.delete(e)? } else { Default::default() };
        let cs = self.mg.delete(e)?;
        self.es.apply(&self.mg, &cs, &Everything);
        if let Some(r) = event.refinement {
            self.split(&r)?;
        }
        self.threshold_loop()?;
        let changed = self.es.update_distances(&self.mg, &Everything);
        let mut out = Vec::new();
        for (mid, _) in changed {
            out.extend(self.mg.members(mid)?.iter().copied());
        }
        Ok(out)
    }

    fn split(&mut self, r: &Refinement) -> Result<(), SsspError> {
        let old = self.mid_of_piece[&r.old];
        let (fresh, _) = r.pieces.split_at(r.pieces.len() - 1);
        let parts: Vec<Vec<usize>> = fresh.iter().map(|&p| self.dec.piece(p).to_vec()).collect();
        let outcome = self.mg.split(old, &parts)?;
        for (&pid, &mid) in fresh.iter().zip(&outcome.created) {
            self.mid_of_piece.insert(pid, mid);
            self.piece_of_mid.insert(mid, pid);
        }
        self.es.apply_split(&self.mg, old, &outcome.created, &outcome.changes, &Everything);
        let sets: Vec<(usize, Vec<usize>)> =
            r.pieces.iter().map(|&p| (self.mid_of_piece[&p], self.dec.piece(p).to_vec())).collect();
        let seq = order_sets(&self.dec, &sets);
        let parts: Vec<(usize, u64)> = seq.iter().map(|&mid| (mid, self.mg.size(mid) as u64)).collect();
        self.order.replace(old, &parts)?;
        self.counters.splits += 1;
        Ok(())
    }

    /// Raises arc levels while some vertex has too many arcs on one level:
    /// lowest level first, in-lists before out-lists, smallest vertex first.
    fn threshold_loop(&mut self) -> Result<(), SsspError> {
        loop {
            let mut pick = None;
            for lv in 0..=self.k {
                if let Some(v) = self.mg.heavy_in(lv).next() {
                    pick = Some((lv, true, v));
                    break;
                }
                if let Some(v) = self.mg.heavy_out(lv).next() {
                    pick = Some((lv, false, v));
                    break;
                }
            }
            let Some((lv, incoming, v)) = pick else { return Ok(()) };
            self.counters.threshold_rounds += 1;
            let keys: Vec<ArcKey> =
                if incoming { self.mg.e_in(v, lv).collect() } else { self.mg.e_out(v, lv).collect() };
            self.counters.threshold_scanned += keys.len() as u64;
            let mut raised = 0;
            for key in keys {
                let ArcKey::Rep(a, b) = key else { continue };
                let eta = eta_base(self.order.between(a, b), self.params.tau, self.base).min(self.k);
                let edges: Vec<(usize, EdgeId)> = self.mg.pair_edges(a, b).collect();
                let mut any = false;
                for (cur, e) in edges {
                    let want = eta.max(self.floor[e]).min(self.k);
                    if want > cur {
                        let cs = self.mg.increase(e, want)?;
                        self.es.apply(&self.mg, &cs, &Everything);
                        self.counters.relevels += 1;
                        any = true;
                    }
                }
                raised += any as u64;
            }
            self.counters.threshold_raised += raised;
            if raised == 0 {
                self.counters.stalled_rounds += 1;
                return Ok(());
            }
        }
    }

    /// `d(C(u)) + additive`, `None` beyond the threshold; 0 at the source.
    pub fn query(&self, u: usize) -> Option<u64> {
        if u == self.source {
            return Some(0);
        }
        self.es.distance(self.mg.vertex_of(u)).map(|d| d + self.params.additive())
    }

    /// A walk from the source to `u` in the current graph of length at most
    /// the estimate. Not offered on the adaptive variant.
    pub fn report_path(&mut self, u: usize) -> Result<Option<Vec<usize>>, SsspError> {
        if self.params.variant == Variant::Adaptive {
            return Err(SsspError::PathNotOffered(Variant::Adaptive));
        }
        if u == self.source {
            return Ok(Some(vec![u]));
        }
        let Some(arcs) = self.es.path(&self.mg, self.mg.vertex_of(u)) else { return Ok(None) };
        let mut walk = SetWalk::start(self.mg.vertex_of(self.source));
        for arc in &arcs {
            let (_, e) = self.mg.pair_edges(arc.from, arc.to).next().ok_or(SsspError::Inconsistent("arc without edges"))?;
            walk.push(self.mg.edge_ends(e), arc.to);
        }
        walk.simplify();
        let dec = &self.dec;
        let path = walk.expand(self.source, u, |a, b| route_in_piece(dec, a, b));
        if let Some(p) = &path {
            self.counters.path_steps += p.len() as u64;
        }
        Ok(path)
    }

    /// Weight, arc count and forward mass of the tree path to `u`.
    pub fn path_profile(&self, u: usize) -> Option<PathProfile> {
        let x = self.mg.vertex_of(u);
        let arcs = self.es.path(&self.mg, x)?;
        let mass: u64 = arcs.iter().map(|a| self.order.between(a.from, a.to)).sum();
        Some(PathProfile {
            weight: self.es.estimate(x),
            arcs: arcs.len() as u64,
            mass_over_tau: mass as f64 / self.params.tau,
        })
    }

    pub fn piece_of_vertex(&self, mid: VertexId) -> Option<PieceId> {
        self.piece_of_mid.get(&mid).copied()
    }
}
