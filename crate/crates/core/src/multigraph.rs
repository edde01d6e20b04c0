//! Contracted multigraph over a decremental digraph.
//!
//! Vertices of the multigraph are disjoint sets of graph vertices. Each
//! ordered pair of distinct sets with at least one live edge between them
//! has a representative arc whose level is the minimum level among those
//! edges. Super-edges are extra arcs with their own levels that live next to
//! representatives in the per-level in/out lists.

use crate::graph::{DecrementalGraph, EdgeId};
use std::collections::{BTreeMap, BTreeSet};
use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

/// Id of a multigraph vertex. Ids are never reused.
pub type VertexId = usize;
/// Handle of a super-edge.
pub type SuperId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultigraphError {
    #[error("malformed partition: {0}")]
    Partition(String),
    #[error("edge {0} is not registered")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is already deleted")]
    AlreadyDeleted(EdgeId),
    #[error("level must increase: current {current}, requested {requested}")]
    LevelNotIncreasing { current: usize, requested: usize },
    #[error("level {level} exceeds maximum level {max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("vertex id {0} does not exist")]
    StaleVertex(VertexId),
    #[error("part of size {part} exceeds half of {whole}")]
    Balance { part: usize, whole: usize },
    #[error("vertex {vertex} is not in the set being split or appears twice")]
    NotSubset { vertex: usize },
    #[error("split would leave the remainder empty")]
    EmptyRemainder,
    #[error("super-edge {0} does not exist")]
    DanglingSuper(SuperId),
}

/// Identity of an arc of the multigraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcKey {
    /// Representative of all edges from the first set to the second.
    Rep(VertexId, VertexId),
    Super(SuperId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub key: ArcKey,
    pub from: VertexId,
    pub to: VertexId,
    pub level: usize,
}

/// Arcs that disappeared (with their old level) and appeared (with their
/// new level). A level change lists the arc in both.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub old: Vec<Arc>,
    pub new: Vec<Arc>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.old.is_empty() && self.new.is_empty()
    }
}

/// Result of a split: ids of the new sets, in the order supplied, and the
/// arc changes.
#[derive(Debug, Clone, Default)]
pub struct SplitOutcome {
    pub created: Vec<VertexId>,
    pub changes: ChangeSet,
}

#[derive(Debug, Clone, Default)]
struct Node {
    members: BTreeSet<usize>,
    ins: BTreeMap<usize, BTreeSet<ArcKey>>,
    outs: BTreeMap<usize, BTreeSet<ArcKey>>,
}

#[derive(Debug, Clone)]
struct SuperArc {
    from: VertexId,
    to: VertexId,
    level: usize,
}

/// Journal of arc states touched by one operation, for computing the net
/// change set.
#[derive(Default)]
struct Journal {
    before: HashMap<ArcKey, Option<Arc>>,
}

#[derive(Debug, Clone)]
pub struct Multigraph {
    max_level: usize,
    deltas: Option<Vec<usize>>,
    ends: Vec<(usize, usize)>,
    levels: Vec<usize>,
    alive: Vec<bool>,
    registered: Vec<bool>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    vertex_of: Vec<VertexId>,
    nodes: Vec<Node>,
    pairs: BTreeMap<(VertexId, VertexId), BTreeSet<(usize, EdgeId)>>,
    supers: HashMap<SuperId, SuperArc>,
    next_super: SuperId,
    heavy_in: Vec<BTreeSet<VertexId>>,
    heavy_out: Vec<BTreeSet<VertexId>>,
    work: u64,
    m0: usize,
}

impl Multigraph {
    /// Multigraph of the live edges of `g` contracted along `partition`,
    /// with per-level degree thresholds. `level` assigns each edge its
    /// initial level in `0..=max_level`.
    pub fn new(
        g: &DecrementalGraph,
        partition: &[Vec<usize>],
        level: impl Fn(EdgeId) -> usize,
        max_level: usize,
        deltas: Vec<usize>,
    ) -> Result<Self, MultigraphError> {
        if deltas.len() != max_level + 1 {
            return Err(MultigraphError::Partition(format!(
                "expected {} thresholds, got {}",
                max_level + 1,
                deltas.len()
            )));
        }
        Self::build(g, partition, level, max_level, Some(deltas))
    }

    /// Same as [`Multigraph::new`] with thresholds disabled; the heavy lists
    /// stay empty.
    pub fn without_thresholds(
        g: &DecrementalGraph,
        partition: &[Vec<usize>],
        level: impl Fn(EdgeId) -> usize,
        max_level: usize,
    ) -> Result<Self, MultigraphError> {
        Self::build(g, partition, level, max_level, None)
    }

    fn build(
        g: &DecrementalGraph,
        partition: &[Vec<usize>],
        level: impl Fn(EdgeId) -> usize,
        max_level: usize,
        deltas: Option<Vec<usize>>,
    ) -> Result<Self, MultigraphError> {
        let n = g.n();
        let mut vertex_of = vec![usize::MAX; n];
        let mut nodes = Vec::with_capacity(partition.len());
        for (id, part) in partition.iter().enumerate() {
            if part.is_empty() {
                return Err(MultigraphError::Partition(format!("set {id} is empty")));
            }
            for &v in part {
                if v >= n {
                    return Err(MultigraphError::Partition(format!("vertex {v} out of range")));
                }
                if vertex_of[v] != usize::MAX {
                    return Err(MultigraphError::Partition(format!("vertex {v} in two sets")));
                }
                vertex_of[v] = id;
            }
            nodes.push(Node { members: part.iter().copied().collect(), ..Node::default() });
        }
        if let Some(v) = vertex_of.iter().position(|&x| x == usize::MAX) {
            return Err(MultigraphError::Partition(format!("vertex {v} not covered")));
        }
        let cap = g.edge_capacity();
        let mut mg = Multigraph {
            max_level,
            heavy_in: vec![BTreeSet::new(); if deltas.is_some() { max_level + 1 } else { 0 }],
            heavy_out: vec![BTreeSet::new(); if deltas.is_some() { max_level + 1 } else { 0 }],
            deltas,
            ends: vec![(0, 0); cap],
            levels: vec![0; cap],
            alive: vec![false; cap],
            registered: vec![false; cap],
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            vertex_of,
            nodes,
            pairs: BTreeMap::new(),
            supers: HashMap::default(),
            next_super: 0,
            work: 0,
            m0: g.alive_count(),
        };
        let mut journal = Journal::default();
        for e in g.alive_edges() {
            let lv = level(e);
            if lv > max_level {
                return Err(MultigraphError::LevelOutOfRange { level: lv, max: max_level });
            }
            let ed = g.edge(e);
            mg.ends[e] = (ed.from, ed.to);
            mg.levels[e] = lv;
            mg.alive[e] = true;
            mg.registered[e] = true;
            mg.out_adj[ed.from].push(e);
            mg.in_adj[ed.to].push(e);
            mg.attach(e, &mut journal);
        }
        Ok(mg)
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        0..self.nodes.len()
    }

    pub fn threshold(&self, level: usize) -> Option<usize> {
        self.deltas.as_ref().map(|d| d[level])
    }

    /// Multigraph vertex containing graph vertex `v`.
    pub fn vertex_of(&self, v: usize) -> VertexId {
        self.vertex_of[v]
    }

    pub fn members(&self, id: VertexId) -> Result<&BTreeSet<usize>, MultigraphError> {
        self.nodes.get(id).map(|n| &n.members).ok_or(MultigraphError::StaleVertex(id))
    }

    pub fn size(&self, id: VertexId) -> usize {
        self.nodes[id].members.len()
    }

    pub fn level(&self, e: EdgeId) -> Result<usize, MultigraphError> {
        self.check_edge(e)?;
        Ok(self.levels[e])
    }

    pub fn is_alive(&self, e: EdgeId) -> bool {
        self.alive.get(e).copied().unwrap_or(false)
    }

    pub fn edge_ends(&self, e: EdgeId) -> (usize, usize) {
        self.ends[e]
    }

    /// Current state of an arc, if it exists.
    pub fn arc(&self, key: ArcKey) -> Option<Arc> {
        match key {
            ArcKey::Rep(a, b) => {
                if a == b {
                    return None;
                }
                let first = self.pairs.get(&(a, b))?.first()?;
                Some(Arc { key, from: a, to: b, level: first.0 })
            }
            ArcKey::Super(id) => {
                let s = self.supers.get(&id)?;
                Some(Arc { key, from: s.from, to: s.to, level: s.level })
            }
        }
    }

    /// Live underlying edges from set `a` to set `b`, lowest level first.
    pub fn pair_edges(&self, a: VertexId, b: VertexId) -> impl Iterator<Item = (usize, EdgeId)> + '_ {
        self.pairs.get(&(a, b)).into_iter().flat_map(|s| s.iter().copied())
    }

    /// Arcs of level `level` entering `id`.
    pub fn e_in(&self, id: VertexId, level: usize) -> impl Iterator<Item = ArcKey> + '_ {
        self.nodes[id].ins.get(&level).into_iter().flat_map(|s| s.iter().copied())
    }

    /// Arcs of level `level` leaving `id`.
    pub fn e_out(&self, id: VertexId, level: usize) -> impl Iterator<Item = ArcKey> + '_ {
        self.nodes[id].outs.get(&level).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn e_in_len(&self, id: VertexId, level: usize) -> usize {
        self.nodes[id].ins.get(&level).map_or(0, |s| s.len())
    }

    pub fn e_out_len(&self, id: VertexId, level: usize) -> usize {
        self.nodes[id].outs.get(&level).map_or(0, |s| s.len())
    }

    /// Levels with a nonempty in-list at `id`, ascending.
    pub fn in_levels(&self, id: VertexId) -> impl Iterator<Item = usize> + '_ {
        self.nodes[id].ins.keys().copied()
    }

    /// Levels with a nonempty out-list at `id`, ascending.
    pub fn out_levels(&self, id: VertexId) -> impl Iterator<Item = usize> + '_ {
        self.nodes[id].outs.keys().copied()
    }

    /// Every arc entering `id`, any level.
    pub fn arcs_in(&self, id: VertexId) -> impl Iterator<Item = ArcKey> + '_ {
        self.nodes[id].ins.values().flat_map(|s| s.iter().copied())
    }

    /// Every arc leaving `id`, any level.
    pub fn arcs_out(&self, id: VertexId) -> impl Iterator<Item = ArcKey> + '_ {
        self.nodes[id].outs.values().flat_map(|s| s.iter().copied())
    }

    /// Vertices with more than the level threshold of in-arcs at `level`.
    pub fn heavy_in(&self, level: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.heavy_in.get(level).into_iter().flat_map(|s| s.iter().copied())
    }

    /// Vertices with more than the level threshold of out-arcs at `level`.
    pub fn heavy_out(&self, level: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.heavy_out.get(level).into_iter().flat_map(|s| s.iter().copied())
    }

    /// Every representative arc, in key order.
    pub fn representatives(&self) -> impl Iterator<Item = Arc> + '_ {
        self.pairs.iter().filter(|((a, b), _)| a != b).filter_map(|(&(a, b), set)| {
            set.first().map(|&(lv, _)| Arc { key: ArcKey::Rep(a, b), from: a, to: b, level: lv })
        })
    }

    /// Every super-edge, in id order.
    pub fn super_arcs(&self) -> Vec<Arc> {
        let mut out: Vec<Arc> = self
            .supers
            .iter()
            .map(|(&id, s)| Arc { key: ArcKey::Super(id), from: s.from, to: s.to, level: s.level })
            .collect();
        out.sort();
        out
    }

    /// Elementary steps performed so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    /// `work / (k·m·lg n + m·lg²n + n)` for the initial `m` and `n`.
    pub fn work_ratio(&self) -> f64 {
        let n = self.vertex_of.len().max(2) as f64;
        let m = self.m0.max(1) as f64;
        let k = (self.max_level + 1) as f64;
        let lg = n.log2();
        self.work as f64 / (k * m * lg + m * lg * lg + n)
    }

    fn check_edge(&self, e: EdgeId) -> Result<(), MultigraphError> {
        if !self.registered.get(e).copied().unwrap_or(false) {
            return Err(MultigraphError::UnknownEdge(e));
        }
        Ok(())
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<ChangeSet, MultigraphError> {
        self.check_edge(e)?;
        if !self.alive[e] {
            return Err(MultigraphError::AlreadyDeleted(e));
        }
        let mut journal = Journal::default();
        self.detach(e, &mut journal);
        self.alive[e] = false;
        Ok(self.finish(journal))
    }

    pub fn increase(&mut self, e: EdgeId, level: usize) -> Result<ChangeSet, MultigraphError> {
        self.check_edge(e)?;
        if !self.alive[e] {
            return Err(MultigraphError::AlreadyDeleted(e));
        }
        self.check_raise(self.levels[e], level)?;
        let mut journal = Journal::default();
        self.detach(e, &mut journal);
        self.levels[e] = level;
        self.attach(e, &mut journal);
        Ok(self.finish(journal))
    }

    fn check_raise(&self, current: usize, level: usize) -> Result<(), MultigraphError> {
        if level <= current {
            return Err(MultigraphError::LevelNotIncreasing { current, requested: level });
        }
        if level > self.max_level {
            return Err(MultigraphError::LevelOutOfRange { level, max: self.max_level });
        }
        Ok(())
    }

    /// Splits `id` into `parts` plus the remainder, which keeps `id`. Each
    /// part gets a fresh id and holds at most half of the set.
    pub fn split(&mut self, id: VertexId, parts: &[Vec<usize>]) -> Result<SplitOutcome, MultigraphError> {
        let whole = self.members(id)?.len();
        let mut seen = BTreeSet::new();
        for part in parts {
            if part.is_empty() || 2 * part.len() > whole {
                return Err(MultigraphError::Balance { part: part.len(), whole });
            }
            for &v in part {
                if v >= self.vertex_of.len() || self.vertex_of[v] != id || !seen.insert(v) {
                    return Err(MultigraphError::NotSubset { vertex: v });
                }
            }
        }
        if seen.len() == whole {
            return Err(MultigraphError::EmptyRemainder);
        }
        let mut incident: BTreeSet<EdgeId> = BTreeSet::new();
        for &v in &seen {
            for &e in self.out_adj[v].iter().chain(&self.in_adj[v]) {
                if self.alive[e] {
                    incident.insert(e);
                }
            }
        }
        let mut journal = Journal::default();
        for &e in &incident {
            self.detach(e, &mut journal);
        }
        let mut created = Vec::with_capacity(parts.len());
        for part in parts {
            let new_id = self.nodes.len();
            for &v in part {
                self.nodes[id].members.remove(&v);
                self.vertex_of[v] = new_id;
                self.work += 1;
            }
            self.nodes.push(Node { members: part.iter().copied().collect(), ..Node::default() });
            created.push(new_id);
        }
        for &e in &incident {
            self.attach(e, &mut journal);
        }
        Ok(SplitOutcome { created, changes: self.finish(journal) })
    }

    /// Adds a super-edge between two current vertices.
    pub fn s_insert(&mut self, from: VertexId, to: VertexId, level: usize) -> Result<(SuperId, ChangeSet), MultigraphError> {
        for x in [from, to] {
            if x >= self.nodes.len() {
                return Err(MultigraphError::StaleVertex(x));
            }
        }
        if level > self.max_level {
            return Err(MultigraphError::LevelOutOfRange { level, max: self.max_level });
        }
        let id = self.next_super;
        self.next_super += 1;
        let mut journal = Journal::default();
        self.note(ArcKey::Super(id), &mut journal);
        self.supers.insert(id, SuperArc { from, to, level });
        self.list_insert(ArcKey::Super(id), from, to, level);
        Ok((id, self.finish(journal)))
    }

    pub fn s_delete(&mut self, id: SuperId) -> Result<ChangeSet, MultigraphError> {
        let s = self.supers.get(&id).cloned().ok_or(MultigraphError::DanglingSuper(id))?;
        let mut journal = Journal::default();
        self.note(ArcKey::Super(id), &mut journal);
        self.list_remove(ArcKey::Super(id), s.from, s.to, s.level);
        self.supers.remove(&id);
        Ok(self.finish(journal))
    }

    pub fn s_increase(&mut self, id: SuperId, level: usize) -> Result<ChangeSet, MultigraphError> {
        let s = self.supers.get(&id).cloned().ok_or(MultigraphError::DanglingSuper(id))?;
        self.check_raise(s.level, level)?;
        let mut journal = Journal::default();
        self.note(ArcKey::Super(id), &mut journal);
        self.list_remove(ArcKey::Super(id), s.from, s.to, s.level);
        self.list_insert(ArcKey::Super(id), s.from, s.to, level);
        self.supers.get_mut(&id).unwrap().level = level;
        Ok(self.finish(journal))
    }

    /// Super-edges with an endpoint at `id`.
    pub fn supers_at(&self, id: VertexId) -> Vec<SuperId> {
        let mut out: Vec<SuperId> = self
            .arcs_in(id)
            .chain(self.arcs_out(id))
            .filter_map(|k| match k {
                ArcKey::Super(s) => Some(s),
                ArcKey::Rep(..) => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn note(&self, key: ArcKey, journal: &mut Journal) {
        if !journal.before.contains_key(&key) {
            journal.before.insert(key, self.arc(key));
        }
    }

    fn finish(&self, journal: Journal) -> ChangeSet {
        let mut cs = ChangeSet::default();
        for (key, before) in journal.before {
            let after = self.arc(key);
            if before != after {
                cs.old.extend(before);
                cs.new.extend(after);
            }
        }
        cs.old.sort();
        cs.new.sort();
        cs
    }

    /// Puts live edge `e` into its pair set under the current vertex map.
    fn attach(&mut self, e: EdgeId, journal: &mut Journal) {
        let (u, v) = self.ends[e];
        let (a, b) = (self.vertex_of[u], self.vertex_of[v]);
        let lv = self.levels[e];
        self.work += 1;
        if a == b {
            self.pairs.entry((a, b)).or_default().insert((lv, e));
            return;
        }
        let key = ArcKey::Rep(a, b);
        self.note(key, journal);
        let set = self.pairs.entry((a, b)).or_default();
        let prev = set.first().map(|p| p.0);
        set.insert((lv, e));
        match prev {
            None => self.list_insert(key, a, b, lv),
            Some(p) if lv < p => {
                self.list_remove(key, a, b, p);
                self.list_insert(key, a, b, lv);
            }
            Some(_) => {}
        }
    }

    /// Removes live edge `e` from its pair set.
    fn detach(&mut self, e: EdgeId, journal: &mut Journal) {
        let (u, v) = self.ends[e];
        let (a, b) = (self.vertex_of[u], self.vertex_of[v]);
        let lv = self.levels[e];
        self.work += 1;
        let key = ArcKey::Rep(a, b);
        if a != b {
            self.note(key, journal);
        }
        let set = self.pairs.get_mut(&(a, b)).expect("edge has a pair");
        let prev = set.first().map(|p| p.0).unwrap();
        set.remove(&(lv, e));
        let next = set.first().map(|p| p.0);
        if set.is_empty() {
            self.pairs.remove(&(a, b));
        }
        if a == b || next == Some(prev) {
            return;
        }
        self.list_remove(key, a, b, prev);
        if let Some(nl) = next {
            self.list_insert(key, a, b, nl);
        }
    }

    fn list_insert(&mut self, key: ArcKey, a: VertexId, b: VertexId, lv: usize) {
        self.work += 1;
        self.nodes[a].outs.entry(lv).or_default().insert(key);
        self.nodes[b].ins.entry(lv).or_default().insert(key);
        self.refresh_heavy(a, b, lv);
    }

    fn list_remove(&mut self, key: ArcKey, a: VertexId, b: VertexId, lv: usize) {
        self.work += 1;
        for (node, out) in [(a, true), (b, false)] {
            let lists = if out { &mut self.nodes[node].outs } else { &mut self.nodes[node].ins };
            if let Some(s) = lists.get_mut(&lv) {
                s.remove(&key);
                if s.is_empty() {
                    lists.remove(&lv);
                }
            }
        }
        self.refresh_heavy(a, b, lv);
    }

    fn refresh_heavy(&mut self, a: VertexId, b: VertexId, lv: usize) {
        let Some(deltas) = &self.deltas else { return };
        let limit = deltas[lv];
        if self.e_out_len(a, lv) > limit {
            self.heavy_out[lv].insert(a);
        } else {
            self.heavy_out[lv].remove(&a);
        }
        if self.e_in_len(b, lv) > limit {
            self.heavy_in[lv].insert(b);
        } else {
            self.heavy_in[lv].remove(&b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force picture of a multigraph computed from live edges.
    #[derive(Debug, PartialEq, Eq)]
    struct Picture {
        arcs: BTreeMap<ArcKey, (VertexId, VertexId, usize)>,
        ins: BTreeMap<(VertexId, usize), BTreeSet<ArcKey>>,
        outs: BTreeMap<(VertexId, usize), BTreeSet<ArcKey>>,
        heavy_in: BTreeSet<(usize, VertexId)>,
        heavy_out: BTreeSet<(usize, VertexId)>,
    }

    fn rebuild(mg: &Multigraph, live: &[(usize, usize, usize)], supers: &BTreeMap<SuperId, (VertexId, VertexId, usize)>) -> Picture {
        let mut arcs = BTreeMap::new();
        for &(u, v, lv) in live {
            let (a, b) = (mg.vertex_of(u), mg.vertex_of(v));
            if a == b {
                continue;
            }
            let entry = arcs.entry(ArcKey::Rep(a, b)).or_insert((a, b, lv));
            entry.2 = entry.2.min(lv);
        }
        for (&id, &(a, b, lv)) in supers {
            arcs.insert(ArcKey::Super(id), (a, b, lv));
        }
        let mut ins: BTreeMap<(VertexId, usize), BTreeSet<ArcKey>> = BTreeMap::new();
        let mut outs: BTreeMap<(VertexId, usize), BTreeSet<ArcKey>> = BTreeMap::new();
        for (&k, &(a, b, lv)) in &arcs {
            outs.entry((a, lv)).or_default().insert(k);
            ins.entry((b, lv)).or_default().insert(k);
        }
        let mut heavy_in = BTreeSet::new();
        let mut heavy_out = BTreeSet::new();
        if mg.threshold(0).is_some() {
            for (&(x, lv), s) in &ins {
                if s.len() > mg.threshold(lv).unwrap() {
                    heavy_in.insert((lv, x));
                }
            }
            for (&(x, lv), s) in &outs {
                if s.len() > mg.threshold(lv).unwrap() {
                    heavy_out.insert((lv, x));
                }
            }
        }
        Picture { arcs, ins, outs, heavy_in, heavy_out }
    }

    fn picture(mg: &Multigraph) -> Picture {
        let mut arcs = BTreeMap::new();
        for a in mg.representatives().chain(mg.super_arcs()) {
            arcs.insert(a.key, (a.from, a.to, a.level));
        }
        let mut ins = BTreeMap::new();
        let mut outs = BTreeMap::new();
        let mut heavy_in = BTreeSet::new();
        let mut heavy_out = BTreeSet::new();
        for x in mg.vertex_ids() {
            for lv in mg.in_levels(x).collect::<Vec<_>>() {
                ins.insert((x, lv), mg.e_in(x, lv).collect());
            }
            for lv in mg.out_levels(x).collect::<Vec<_>>() {
                outs.insert((x, lv), mg.e_out(x, lv).collect());
            }
        }
        for lv in 0..=mg.max_level() {
            heavy_in.extend(mg.heavy_in(lv).map(|x| (lv, x)));
            heavy_out.extend(mg.heavy_out(lv).map(|x| (lv, x)));
        }
        Picture { arcs, ins, outs, heavy_in, heavy_out }
    }

    fn singletons(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|v| vec![v]).collect()
    }

    #[test]
    fn single_edge_representative() {
        let g = DecrementalGraph::load_unweighted(2, &[(0, 1)]).unwrap();
        let mg = Multigraph::new(&g, &singletons(2), |_| 3, 4, vec![0; 5]).unwrap();
        assert_eq!(mg.arc(ArcKey::Rep(0, 1)).unwrap().level, 3);
        assert_eq!(mg.e_out_len(0, 3), 1);
        assert_eq!(mg.heavy_out(3).collect::<Vec<_>>(), vec![0]);
        let mg = Multigraph::new(&g, &[vec![0, 1]], |_| 3, 4, vec![0; 5]).unwrap();
        assert_eq!(mg.representatives().count(), 0);
    }

    #[test]
    fn malformed_partitions() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1)]).unwrap();
        assert!(Multigraph::without_thresholds(&g, &[vec![0, 1]], |_| 0, 0).is_err());
        assert!(Multigraph::without_thresholds(&g, &[vec![0, 1], vec![1, 2]], |_| 0, 0).is_err());
        assert!(Multigraph::without_thresholds(&g, &[vec![0, 1, 2], vec![]], |_| 0, 0).is_err());
        assert!(Multigraph::new(&g, &singletons(3), |_| 0, 1, vec![0]).is_err());
    }

    fn parallel() -> (DecrementalGraph, Multigraph) {
        // 0 -> 2 and 1 -> 2 with {0, 1} contracted
        let g = DecrementalGraph::load_unweighted(3, &[(0, 2), (1, 2)]).unwrap();
        let mg = Multigraph::without_thresholds(&g, &[vec![0, 1], vec![2]], |e| [2, 5][e], 6).unwrap();
        (g, mg)
    }

    #[test]
    fn delete_recomputes_minimum() {
        let (_, mut mg) = parallel();
        let cs = mg.delete(0).unwrap();
        let rep = |lv| Arc { key: ArcKey::Rep(0, 1), from: 0, to: 1, level: lv };
        assert_eq!(cs.old, vec![rep(2)]);
        assert_eq!(cs.new, vec![rep(5)]);
        let cs = mg.delete(1).unwrap();
        assert_eq!(cs.old, vec![rep(5)]);
        assert!(cs.new.is_empty());
        assert_eq!(mg.delete(1), Err(MultigraphError::AlreadyDeleted(1)));
        assert_eq!(mg.delete(9), Err(MultigraphError::UnknownEdge(9)));
    }

    #[test]
    fn increase_rules() {
        let (_, mut mg) = parallel();
        assert!(mg.increase(1, 6).unwrap().is_empty());
        assert_eq!(mg.level(1), Ok(6));
        let cs = mg.increase(0, 4).unwrap();
        assert_eq!(cs.old[0].level, 2);
        assert_eq!(cs.new[0].level, 4);
        assert_eq!(mg.e_out_len(0, 2), 0);
        assert_eq!(mg.e_in(1, 4).collect::<Vec<_>>(), vec![ArcKey::Rep(0, 1)]);
        assert!(matches!(mg.increase(0, 4), Err(MultigraphError::LevelNotIncreasing { .. })));
        assert!(matches!(mg.increase(0, 7), Err(MultigraphError::LevelOutOfRange { .. })));
    }

    #[test]
    fn split_exposes_internal_edge() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let mut mg = Multigraph::without_thresholds(&g, &[vec![0, 1], vec![2]], |_| 0, 0).unwrap();
        let (sid, _) = mg.s_insert(1, 0, 0).unwrap();
        let out = mg.split(0, &[vec![1]]).unwrap();
        assert_eq!(out.created, vec![2]);
        assert_eq!(mg.vertex_of(1), 2);
        assert_eq!(mg.vertex_of(0), 0);
        let keys: Vec<_> = out.changes.new.iter().map(|a| a.key).collect();
        assert_eq!(keys, vec![ArcKey::Rep(0, 2), ArcKey::Rep(2, 1)]);
        assert_eq!(out.changes.old.iter().map(|a| a.key).collect::<Vec<_>>(), vec![ArcKey::Rep(0, 1)]);
        // the super-edge still ends at the remainder
        assert_eq!(mg.arc(ArcKey::Super(sid)).unwrap().to, 0);
        assert!(mg.split(1, &[vec![2]]).is_err());
        assert_eq!(mg.members(7), Err(MultigraphError::StaleVertex(7)));
    }

    #[test]
    fn split_errors_and_quiet_split() {
        let g = DecrementalGraph::load_unweighted(4, &[]).unwrap();
        let mut mg = Multigraph::without_thresholds(&g, &[vec![0, 1, 2, 3]], |_| 0, 0).unwrap();
        assert!(matches!(mg.split(0, &[vec![0, 1, 2]]), Err(MultigraphError::Balance { .. })));
        assert!(matches!(mg.split(0, &[vec![0], vec![0]]), Err(MultigraphError::NotSubset { .. })));
        assert_eq!(mg.split(0, &[vec![0, 1], vec![2, 3]]).unwrap_err(), MultigraphError::EmptyRemainder);
        let out = mg.split(0, &[vec![3]]).unwrap();
        assert!(out.changes.is_empty());
    }

    #[test]
    fn super_edge_roundtrip() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1)]).unwrap();
        let mut mg = Multigraph::without_thresholds(&g, &singletons(3), |_| 1, 3).unwrap();
        let before = picture(&mg);
        let (id, cs) = mg.s_insert(0, 2, 2).unwrap();
        assert_eq!(cs.new.len(), 1);
        assert_eq!(mg.e_out_len(0, 2), 1);
        let cs = mg.s_increase(id, 3).unwrap();
        assert_eq!((cs.old[0].level, cs.new[0].level), (2, 3));
        mg.s_delete(id).unwrap();
        assert_eq!(picture(&mg), before);
        assert_eq!(mg.s_delete(id), Err(MultigraphError::DanglingSuper(id)));
    }

    /// Random operation fuzz: after every operation the structure equals a
    /// brute-force rebuild and change sets replay onto a mirror.
    fn fuzz(seed: u64, ops: usize, thresholds: bool) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..14);
        let max_level = rng.gen_range(0..5);
        let edges: Vec<(usize, usize)> = (0..rng.gen_range(0..n * 4)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let g = DecrementalGraph::load_unweighted(n, &edges).unwrap();
        // random initial partition
        let label: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n.div_ceil(2))).collect();
        let mut parts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            parts.entry(label[v]).or_default().push(v);
        }
        let partition: Vec<Vec<usize>> = parts.into_values().collect();
        let init: Vec<usize> = (0..g.edge_capacity()).map(|_| rng.gen_range(0..=max_level)).collect();
        let mut mg = if thresholds {
            let deltas = (0..=max_level).map(|_| rng.gen_range(0..3)).collect();
            Multigraph::new(&g, &partition, |e| init[e], max_level, deltas).unwrap()
        } else {
            Multigraph::without_thresholds(&g, &partition, |e| init[e], max_level).unwrap()
        };
        let mut levels = init.clone();
        let mut alive = vec![true; g.edge_capacity()];
        let mut supers: BTreeMap<SuperId, (VertexId, VertexId, usize)> = BTreeMap::new();
        let mut mirror: BTreeMap<ArcKey, Arc> = mg.representatives().map(|a| (a.key, a)).collect();
        for _ in 0..ops {
            let live: Vec<EdgeId> = (0..alive.len()).filter(|&e| alive[e]).collect();
            let cs = match rng.gen_range(0..6) {
                0 if !live.is_empty() => {
                    let e = live[rng.gen_range(0..live.len())];
                    alive[e] = false;
                    mg.delete(e).unwrap()
                }
                1 if !live.is_empty() => {
                    let e = live[rng.gen_range(0..live.len())];
                    if levels[e] == max_level {
                        continue;
                    }
                    let to = rng.gen_range(levels[e] + 1..=max_level);
                    levels[e] = to;
                    mg.increase(e, to).unwrap()
                }
                2 => {
                    let x = rng.gen_range(0..mg.vertex_count());
                    let members: Vec<usize> = mg.members(x).unwrap().iter().copied().collect();
                    if members.len() < 2 {
                        continue;
                    }
                    let mut shuffled = members.clone();
                    shuffled.shuffle(&mut rng);
                    let half = members.len() / 2;
                    let mut pieces = Vec::new();
                    let mut taken = 0;
                    while taken < members.len() - 1 && rng.gen_bool(0.6) {
                        let size = rng.gen_range(1..=half.min(members.len() - 1 - taken));
                        pieces.push(shuffled[taken..taken + size].to_vec());
                        taken += size;
                    }
                    if pieces.is_empty() {
                        pieces.push(vec![shuffled[0]]);
                    }
                    let out = mg.split(x, &pieces).unwrap();
                    for (p, &id) in pieces.iter().zip(&out.created) {
                        assert!(p.iter().all(|&v| mg.vertex_of(v) == id));
                    }
                    out.changes
                }
                3 => {
                    let k = mg.vertex_count();
                    let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
                    let lv = rng.gen_range(0..=max_level);
                    let (id, cs) = mg.s_insert(a, b, lv).unwrap();
                    supers.insert(id, (a, b, lv));
                    cs
                }
                4 if !supers.is_empty() => {
                    let id = *supers.keys().nth(rng.gen_range(0..supers.len())).unwrap();
                    supers.remove(&id);
                    mg.s_delete(id).unwrap()
                }
                5 if !supers.is_empty() => {
                    let id = *supers.keys().nth(rng.gen_range(0..supers.len())).unwrap();
                    let s = supers.get_mut(&id).unwrap();
                    if s.2 == max_level {
                        continue;
                    }
                    s.2 += 1;
                    mg.s_increase(id, s.2).unwrap()
                }
                _ => continue,
            };
            for a in &cs.old {
                assert_eq!(mirror.remove(&a.key), Some(*a), "old arc not in mirror");
            }
            for a in &cs.new {
                assert!(mirror.insert(a.key, *a).is_none(), "new arc already present");
            }
            let live: Vec<(usize, usize, usize)> =
                (0..alive.len()).filter(|&e| alive[e]).map(|e| (mg.edge_ends(e).0, mg.edge_ends(e).1, levels[e])).collect();
            let expected = rebuild(&mg, &live, &supers);
            assert_eq!(picture(&mg), expected);
            let mirrored: BTreeMap<ArcKey, (VertexId, VertexId, usize)> =
                mirror.iter().map(|(&k, a)| (k, (a.from, a.to, a.level))).collect();
            assert_eq!(mirrored, expected.arcs);
        }
        mg.work()
    }

    #[test]
    fn fuzz_against_rebuild() {
        for seed in 0..60 {
            fuzz(seed, 150, seed % 2 == 0);
        }
    }
}
