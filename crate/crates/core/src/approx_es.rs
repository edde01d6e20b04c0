//! Approximate shortest-path tree over a [`Multigraph`] with level-driven
//! rounded edge weights.
//!
//! An arc at level `i` leaving a vertex at distance `x` weighs
//! `ceil_i(x) - x`, where `ceil_i(x)` is the least multiple of
//! `1 + high(i) - low(i)` that is at least `x + low(i)`. Estimates grow one
//! unit at a time, and an arc is rescanned only when its tail's rounded
//! value moves. That happens once every period, not on every increase.

use crate::multigraph::{Arc, ArcKey, ChangeSet, Multigraph, VertexId};
use crate::pq::IndexedMinHeap;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::cmp::Reverse;
use thiserror::Error;

/// Estimate of a vertex removed from the tree.
pub const UNREACHED: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxEsError {
    #[error("level {level}: need 1 <= low <= high, got low {low}, high {high}")]
    Scheme { level: usize, low: u64, high: u64 },
    #[error("source {0} is not a multigraph vertex")]
    Source(VertexId),
}

/// Per-level weight bounds `low(i) <= high(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingScheme {
    low: Vec<u64>,
    high: Vec<u64>,
}

impl RoundingScheme {
    pub fn new(low: Vec<u64>, high: Vec<u64>) -> Result<Self, ApproxEsError> {
        assert_eq!(low.len(), high.len(), "one bound pair per level");
        for (level, (&l, &h)) in low.iter().zip(&high).enumerate() {
            if l == 0 || l > h {
                return Err(ApproxEsError::Scheme { level, low: l, high: h });
            }
        }
        Ok(RoundingScheme { low, high })
    }

    /// `low = 1`, `high = 2^i` for levels `0..=max_level`.
    pub fn doubling(max_level: usize) -> Self {
        let high = (0..=max_level).map(|i| 1u64 << i.min(62)).collect();
        RoundingScheme { low: vec![1; max_level + 1], high }
    }

    /// Every arc weighs exactly 1.
    pub fn unit(max_level: usize) -> Self {
        RoundingScheme { low: vec![1; max_level + 1], high: vec![1; max_level + 1] }
    }

    /// `low = floor((1+eps)^i)`, `high = floor((1+eps)^(i+1))`.
    pub fn geometric(eps: f64, max_level: usize) -> Self {
        let p = |i: usize| ((1.0 + eps).powi(i as i32)).floor().max(1.0) as u64;
        RoundingScheme {
            low: (0..=max_level).map(p).collect(),
            high: (0..=max_level).map(|i| p(i + 1)).collect(),
        }
    }

    pub fn max_level(&self) -> usize {
        self.low.len() - 1
    }

    pub fn low(&self, level: usize) -> u64 {
        self.low[level]
    }

    pub fn high(&self, level: usize) -> u64 {
        self.high[level]
    }

    /// Distance between consecutive rounded values at `level`.
    pub fn period(&self, level: usize) -> u64 {
        1 + self.high[level] - self.low[level]
    }

    /// Least multiple of the period that is at least `x + low(level)`.
    pub fn ceil(&self, x: u64, level: usize) -> u64 {
        let q = self.period(level);
        (x + self.low[level]).div_ceil(q) * q
    }

    /// Weight realised by a level-`level` arc leaving distance `x`.
    pub fn weight(&self, x: u64, level: usize) -> u64 {
        self.ceil(x, level) - x
    }
}

/// What happens to a vertex whose estimate passes the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beyond {
    /// The estimate stays at threshold + 1.
    Freeze,
    /// The estimate becomes [`UNREACHED`] and the vertex leaves the tree.
    Evict,
}

/// Restricts a tree to a subgraph. Arcs are tested when they appear and
/// vertices when they leave the queue.
pub trait Window {
    fn vertex(&self, _v: VertexId) -> bool {
        true
    }
    fn arc(&self, _arc: &Arc) -> bool {
        true
    }
}

/// The whole multigraph.
pub struct Everything;

impl Window for Everything {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EsCounters {
    pub extractions: u64,
    pub increments: u64,
    pub repoints: u64,
    pub evictions: u64,
    pub scans: u64,
}

#[derive(Debug, Clone)]
pub struct ApproxEsTree {
    source: VertexId,
    threshold: u64,
    scheme: RoundingScheme,
    beyond: Beyond,
    dist: Vec<u64>,
    pset: Vec<BTreeSet<ArcKey>>,
    admitted: HashSet<ArcKey>,
    queue: IndexedMinHeap<u64>,
    scans: HashMap<(ArcKey, usize), u64>,
    record: bool,
    counters: EsCounters,
    changed: BTreeSet<VertexId>,
}

impl ApproxEsTree {
    /// Tree over the whole multigraph; estimates past `threshold` freeze.
    pub fn build(mg: &Multigraph, source: VertexId, threshold: u64, scheme: RoundingScheme) -> Result<Self, ApproxEsError> {
        Self::build_windowed(mg, source, threshold, scheme, Beyond::Freeze, &Everything)
    }

    pub fn build_windowed(
        mg: &Multigraph,
        source: VertexId,
        threshold: u64,
        scheme: RoundingScheme,
        beyond: Beyond,
        window: &dyn Window,
    ) -> Result<Self, ApproxEsError> {
        if source >= mg.vertex_count() {
            return Err(ApproxEsError::Source(source));
        }
        let k = mg.vertex_count();
        let mut tree = ApproxEsTree {
            source,
            threshold,
            scheme,
            beyond,
            dist: vec![UNREACHED; k],
            pset: vec![BTreeSet::new(); k],
            admitted: HashSet::default(),
            queue: IndexedMinHeap::with_capacity(k),
            scans: HashMap::default(),
            record: false,
            counters: EsCounters::default(),
            changed: BTreeSet::new(),
        };
        for x in mg.vertex_ids() {
            for key in mg.arcs_out(x) {
                if window.arc(&mg.arc(key).unwrap()) {
                    tree.admitted.insert(key);
                }
            }
        }
        // Dijkstra where an arc's weight is fixed when its tail settles.
        let mut heap: IndexedMinHeap<u64> = IndexedMinHeap::with_capacity(k);
        let mut done = vec![false; k];
        heap.set(source, 0);
        while let Some((u, du)) = heap.pop_min() {
            done[u] = true;
            if u != source && (du > threshold || !window.vertex(u)) {
                continue;
            }
            tree.dist[u] = du;
            for key in mg.arcs_out(u) {
                if !tree.admitted.contains(&key) {
                    continue;
                }
                let arc = mg.arc(key).unwrap();
                let cand = tree.scheme.ceil(du, arc.level);
                if !done[arc.to] && heap.key(arc.to).is_none_or(|c| cand < c) {
                    heap.set(arc.to, cand);
                }
            }
        }
        if beyond == Beyond::Freeze {
            for d in tree.dist.iter_mut() {
                if *d == UNREACHED {
                    *d = threshold + 1;
                }
            }
        }
        let admitted: Vec<ArcKey> = tree.admitted.iter().copied().collect();
        for key in admitted {
            let arc = mg.arc(key).unwrap();
            if tree.tight(&arc) {
                tree.pset[arc.to].insert(key);
            }
        }
        Ok(tree)
    }

    fn tight(&self, arc: &Arc) -> bool {
        let du = self.dist[arc.from];
        du != UNREACHED && self.scheme.ceil(du, arc.level) == self.dist[arc.to]
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn scheme(&self) -> &RoundingScheme {
        &self.scheme
    }

    /// Raw estimate: threshold + 1 when frozen, [`UNREACHED`] when evicted.
    pub fn estimate(&self, v: VertexId) -> u64 {
        self.dist.get(v).copied().unwrap_or(UNREACHED)
    }

    /// Estimate if within the threshold.
    pub fn distance(&self, v: VertexId) -> Option<u64> {
        let d = self.estimate(v);
        (d <= self.threshold).then_some(d)
    }

    /// Arcs `(u, v)` with `ceil(d(u)) = d(v)`.
    pub fn tight_set(&self, v: VertexId) -> &BTreeSet<ArcKey> {
        &self.pset[v]
    }

    /// Tree arc into `v`: the smallest tight arc.
    pub fn parent(&self, v: VertexId) -> Option<ArcKey> {
        if v == self.source || self.distance(v).is_none() {
            return None;
        }
        self.pset[v].first().copied()
    }

    /// Tree arcs from the source to `v`.
    pub fn path(&self, mg: &Multigraph, v: VertexId) -> Option<Vec<Arc>> {
        self.distance(v)?;
        let mut arcs = Vec::new();
        let mut x = v;
        while x != self.source {
            let arc = mg.arc(self.parent(x)?)?;
            arcs.push(arc);
            x = arc.from;
        }
        arcs.reverse();
        Some(arcs)
    }

    pub fn is_admitted(&self, key: ArcKey) -> bool {
        self.admitted.contains(&key)
    }

    /// Arcs currently inside the window, in no particular order.
    pub fn admitted(&self) -> impl Iterator<Item = ArcKey> + '_ {
        self.admitted.iter().copied()
    }

    pub fn counters(&self) -> &EsCounters {
        &self.counters
    }

    /// Starts or stops keeping [`scan_counts`](Self::scan_counts).
    pub fn record_scans(&mut self, on: bool) {
        self.record = on;
    }

    /// Scans per `(arc, level at scan time)`, while recording is on.
    pub fn scan_counts(&self) -> &HashMap<(ArcKey, usize), u64> {
        &self.scans
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn grow(&mut self, k: usize) {
        if self.dist.len() < k {
            self.dist.resize(k, UNREACHED);
            self.pset.resize(k, BTreeSet::new());
        }
    }

    fn enqueue(&mut self, v: VertexId) {
        if v != self.source {
            self.queue.set(v, self.dist[v]);
        }
    }

    /// Queues `v` so its window membership is rechecked.
    pub fn touch(&mut self, v: VertexId) {
        self.enqueue(v);
    }

    /// Applies a change set from the multigraph to the tight sets.
    pub fn apply(&mut self, mg: &Multigraph, changes: &ChangeSet, window: &dyn Window) {
        self.grow(mg.vertex_count());
        let mut hit = BTreeSet::new();
        for arc in &changes.old {
            if self.admitted.remove(&arc.key) && self.pset[arc.to].remove(&arc.key) {
                hit.insert(arc.to);
            }
        }
        for arc in &changes.new {
            if window.arc(arc) {
                self.admitted.insert(arc.key);
                if self.tight(arc) && self.pset[arc.to].insert(arc.key) {
                    hit.insert(arc.to);
                }
            }
        }
        for v in hit {
            self.enqueue(v);
        }
    }

    /// Split of `parent` into itself plus `created`: the new vertices start
    /// at the parent's estimate and everything involved is queued.
    pub fn apply_split(&mut self, mg: &Multigraph, parent: VertexId, created: &[VertexId], changes: &ChangeSet, window: &dyn Window) {
        debug_assert_ne!(parent, self.source, "the source is never split");
        self.grow(mg.vertex_count());
        let d = self.dist[parent];
        for &w in created {
            self.dist[w] = d;
            self.pset[w].clear();
            self.changed.insert(w);
        }
        self.apply(mg, changes, window);
        for &w in created.iter().chain([parent].iter()) {
            self.enqueue(w);
        }
    }

    fn scan(&mut self, key: ArcKey, level: usize) {
        self.counters.scans += 1;
        if self.record {
            *self.scans.entry((key, level)).or_insert(0) += 1;
        }
    }

    fn evict(&mut self, mg: &Multigraph, v: VertexId) {
        self.counters.evictions += 1;
        self.dist[v] = UNREACHED;
        self.pset[v].clear();
        self.changed.insert(v);
        let outs: Vec<ArcKey> = mg.arcs_out(v).collect();
        for key in outs {
            let to = mg.arc(key).unwrap().to;
            if self.pset[to].remove(&key) {
                self.enqueue(to);
            }
        }
    }

    /// Processes the queue. Returns the vertices whose estimate changed since
    /// the previous call, with their new estimates.
    pub fn update_distances(&mut self, mg: &Multigraph, window: &dyn Window) -> Vec<(VertexId, u64)> {
        self.grow(mg.vertex_count());
        while let Some((v, _)) = self.queue.pop_min() {
            self.counters.extractions += 1;
            let d = self.dist[v];
            if d == UNREACHED {
                continue;
            }
            if self.beyond == Beyond::Evict && (d > self.threshold || !window.vertex(v)) {
                self.evict(mg, v);
                continue;
            }
            if d > self.threshold {
                continue;
            }
            if !self.pset[v].is_empty() {
                self.counters.repoints += 1;
                continue;
            }
            let nd = d + 1;
            self.dist[v] = nd;
            self.counters.increments += 1;
            self.changed.insert(v);
            let out_levels: Vec<usize> = mg.out_levels(v).collect();
            for lv in out_levels {
                let rounded = self.scheme.ceil(nd, lv);
                if self.scheme.ceil(d, lv) == rounded {
                    continue;
                }
                let keys: Vec<ArcKey> = mg.e_out(v, lv).collect();
                for key in keys {
                    self.scan(key, lv);
                    if !self.admitted.contains(&key) {
                        continue;
                    }
                    let w = arc_at(mg, key, lv).to;
                    let member = rounded == self.dist[w];
                    let changed = if member { self.pset[w].insert(key) } else { self.pset[w].remove(&key) };
                    if changed {
                        self.enqueue(w);
                    }
                }
            }
            let in_levels: Vec<usize> = mg.in_levels(v).collect();
            for lv in in_levels {
                if nd % self.scheme.period(lv) != 0 {
                    continue;
                }
                let keys: Vec<ArcKey> = mg.e_in(v, lv).collect();
                for key in keys {
                    self.scan(key, lv);
                    if self.admitted.contains(&key) && self.tight(&arc_at(mg, key, lv)) {
                        self.pset[v].insert(key);
                    }
                }
            }
            self.enqueue(v);
        }
        let changed = std::mem::take(&mut self.changed);
        changed.into_iter().map(|v| (v, self.dist[v])).collect()
    }
}

/// The arc behind `key`, known to sit at `level`; representatives need no lookup.
fn arc_at(mg: &Multigraph, key: ArcKey, level: usize) -> Arc {
    match key {
        ArcKey::Rep(a, b) => Arc { key, from: a, to: b, level },
        ArcKey::Super(_) => mg.arc(key).expect("listed arcs exist"),
    }
}

/// Reference distances under the rounded weights: Dijkstra on a binary heap
/// over the arcs accepted by `keep`, truncated at `threshold`.
pub fn reference_distances(
    mg: &Multigraph,
    source: VertexId,
    threshold: u64,
    scheme: &RoundingScheme,
    keep: impl Fn(&Arc) -> bool,
) -> BTreeMap<VertexId, u64> {
    let mut best: BTreeMap<VertexId, u64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((du, u))) = heap.pop() {
        if best.contains_key(&u) || du > threshold {
            continue;
        }
        best.insert(u, du);
        for key in mg.arcs_out(u) {
            let arc = mg.arc(key).unwrap();
            if keep(&arc) && !best.contains_key(&arc.to) {
                heap.push(Reverse((scheme.ceil(du, arc.level), arc.to)));
            }
        }
    }
    best
}
