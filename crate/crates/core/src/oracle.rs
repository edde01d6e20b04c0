//! Ground truth for testing: exact distances, SCC and diameter checks, the
//! ordering invariant, deletion policies and the trial driver.

use crate::cli::{generate_graph, GraphSpec};
use crate::decomp::{Decomposition, Mode};
use crate::graph::{DecrementalGraph, EdgeId};
use crate::sssp::{CombinedEstimator, EstimatorCounters, Preset, ScaleStructure, SsspError, Variant, WeightedEstimator};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

/// Version tag written into every report.
pub const REPORT_SCHEMA: &str = "dsssp.trial.v1";

// ---------------------------------------------------------------------------
// Exact distances

/// Dijkstra on a binary heap over the live edges.
pub fn dijkstra(g: &DecrementalGraph, s: usize) -> Vec<Option<u64>> {
    truncated_dijkstra(g, s, u64::MAX)
}

/// Dijkstra keeping only distances `≤ limit`.
pub fn truncated_dijkstra(g: &DecrementalGraph, s: usize, limit: u64) -> Vec<Option<u64>> {
    let mut dist = vec![None; g.n()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].is_some() || d > limit {
            continue;
        }
        dist[u] = Some(d);
        for e in g.out_edges(u) {
            let ed = g.edge(e);
            if dist[ed.to].is_none() {
                heap.push(Reverse((d + ed.weight, ed.to)));
            }
        }
    }
    dist
}

/// Bellman-Ford over the edge array; an implementation sharing nothing with
/// [`dijkstra`] for cross-checks.
pub fn bellman_ford(g: &DecrementalGraph, s: usize) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; g.n()];
    dist[s] = Some(0);
    let edges: Vec<(usize, usize, u64)> = (0..g.edge_capacity())
        .filter(|&e| g.is_alive(e))
        .map(|e| (g.edge(e).from, g.edge(e).to, g.edge(e).weight))
        .collect();
    for _ in 0..g.n() {
        let mut moved = false;
        for &(u, v, w) in &edges {
            if let Some(du) = dist[u] {
                if dist[v].is_none_or(|dv| du + w < dv) {
                    dist[v] = Some(du + w);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    dist
}

/// Breadth-first distances, ignoring weights.
pub fn bfs(g: &DecrementalGraph, s: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for e in g.out_edges(u) {
            let v = g.edge(e).to;
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// A private copy of the graph that follows the same deletions as the
/// structure under test.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    g: DecrementalGraph,
    source: usize,
}

impl ExactOracle {
    pub fn new(g: &DecrementalGraph, source: usize) -> Self {
        ExactOracle { g: g.clone(), source }
    }

    pub fn graph(&self) -> &DecrementalGraph {
        &self.g
    }

    pub fn delete(&mut self, e: EdgeId) {
        let _ = self.g.delete_edge(e);
    }

    pub fn distances(&self) -> Vec<Option<u64>> {
        dijkstra(&self.g, self.source)
    }

    pub fn distance(&self, u: usize) -> Option<u64> {
        self.distances()[u]
    }
}

// ---------------------------------------------------------------------------
// SCCs and diameters

/// Kosaraju's algorithm; returns a component id per vertex, numbered in
/// topological order of the condensation.
pub fn kosaraju(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![Vec::new(); n];
    let mut inn = vec![Vec::new(); n];
    for &(u, v) in edges {
        out[u].push(v);
        inn[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for r in 0..n {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut stack = vec![(r, 0usize)];
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < out[v].len() {
                let w = out[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                finish.push(v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for &r in finish.iter().rev() {
        if comp[r] != usize::MAX {
            continue;
        }
        comp[r] = next;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            for &w in &inn[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Diameter of a vertex set under the edges accepted by `keep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter {
    /// `None` when the set is not strongly connected.
    pub value: Option<u64>,
    /// Only some sources were tried (sets above [`DIAMETER_CAP`]).
    pub sampled: bool,
}

/// Sets larger than this are measured from a sample of sources.
pub const DIAMETER_CAP: usize = 200;

pub fn diameter(g: &DecrementalGraph, members: &[usize], keep: impl Fn(EdgeId) -> bool) -> Diameter {
    let index: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = members.len();
    let sampled = k > DIAMETER_CAP;
    let step = if sampled { k.div_ceil(DIAMETER_CAP) } else { 1 };
    let mut worst = 0;
    for src in (0..k).step_by(step) {
        let mut dist = vec![u64::MAX; k];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, i))) = heap.pop() {
            if dist[i] != u64::MAX {
                continue;
            }
            dist[i] = d;
            for e in g.out_edges(members[i]) {
                let ed = g.edge(e);
                if let Some(&j) = index.get(&ed.to) {
                    if keep(e) && dist[j] == u64::MAX {
                        heap.push(Reverse((d + ed.weight, j)));
                    }
                }
            }
        }
        for &d in &dist {
            if d == u64::MAX {
                return Diameter { value: None, sampled };
            }
            worst = worst.max(d);
        }
    }
    Diameter { value: Some(worst), sampled }
}

/// Summary of a passing decomposition check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompCheck {
    pub pieces: usize,
    pub max_diameter: u64,
    pub diameter_sum: u64,
    pub sampled: bool,
}

/// Every piece is an SCC of `G ∖ E(S)` with diameter within the bound of the
/// level governing it; for hierarchical decompositions the diameters also sum
/// to at most twice the top bound.
pub fn check_decomposition(dec: &Decomposition) -> Result<DecompCheck, String> {
    let g = dec.graph();
    let n = dec.n();
    let edges: Vec<(usize, usize)> =
        g.alive_edges().filter(|&e| dec.in_final_graph(e)).map(|e| (g.edge(e).from, g.edge(e).to)).collect();
    let comp = kosaraju(n, &edges);
    let mut size_of: HashMap<usize, usize> = HashMap::new();
    for &c in &comp {
        *size_of.entry(c).or_default() += 1;
    }
    let mut report = DecompCheck::default();
    for id in dec.piece_ids() {
        let piece = dec.piece(id);
        let c = comp[piece[0]];
        if piece.iter().any(|&v| comp[v] != c) || size_of[&c] != piece.len() {
            return Err(format!("piece {id} is not an SCC of the final graph"));
        }
        let d = diameter(g, piece, |e| dec.in_final_graph(e));
        let value = d.value.ok_or_else(|| format!("piece {id} not strongly connected"))?;
        let bound = dec.level_bound(dec.owner_level(id));
        if piece.len() > 1 && value > bound {
            return Err(format!("piece {id} has diameter {value} > {bound}"));
        }
        report.pieces += 1;
        report.max_diameter = report.max_diameter.max(value);
        report.diameter_sum += value;
        report.sampled |= d.sampled;
    }
    let top = match dec.config().mode {
        Mode::Adaptive { d2, .. } => d2,
        Mode::Oblivious { d } => d,
    };
    // The sum bound needs the hierarchical construction.
    if dec.config().hierarchical && report.diameter_sum > 2 * top {
        return Err(format!("diameter sum {} > 2·{top}", report.diameter_sum));
    }
    Ok(report)
}

/// Split balance: every new piece but the last holds at most half the old one.
pub fn check_split_balance(old_size: usize, new_sizes: &[usize]) -> Result<(), String> {
    let total: usize = new_sizes.iter().sum();
    if total != old_size {
        return Err(format!("split sizes sum to {total}, expected {old_size}"));
    }
    for (i, &s) in new_sizes.iter().enumerate().take(new_sizes.len().saturating_sub(1)) {
        if 2 * s > old_size {
            return Err(format!("part {i} has {s} of {old_size} vertices"));
        }
    }
    Ok(())
}

/// The ordering invariant over the sets `sets` (in list order):
/// (1) every live edge of the top level graph goes forward or stays inside a
/// set; (2) for every level `i`, the sets meeting an SCC of `G_i` lie inside
/// it and are consecutive. SCCs are recomputed here from scratch.
pub fn check_invariant1(dec: &Decomposition, sets: &[Vec<usize>]) -> Result<(), String> {
    let g = dec.graph();
    let n = dec.n();
    let mut pos = vec![usize::MAX; n];
    for (i, set) in sets.iter().enumerate() {
        for &v in set {
            if v >= n || pos[v] != usize::MAX {
                return Err(format!("vertex {v} listed twice or out of range"));
            }
            pos[v] = i;
        }
    }
    if let Some(v) = pos.iter().position(|&p| p == usize::MAX) {
        return Err(format!("vertex {v} in no set"));
    }
    let top = dec.top_level();
    for e in g.alive_edges() {
        let ed = g.edge(e);
        if dec.in_level_graph(e, top) && pos[ed.from] > pos[ed.to] {
            return Err(format!("edge {e} ({} -> {}) goes backward at level {top}", ed.from, ed.to));
        }
    }
    for level in 0..=top {
        let edges: Vec<(usize, usize)> =
            g.alive_edges().filter(|&e| dec.in_level_graph(e, level)).map(|e| (g.edge(e).from, g.edge(e).to)).collect();
        let comp = kosaraju(n, &edges);
        let mut span: HashMap<usize, (usize, usize, usize)> = HashMap::new();
        for (i, set) in sets.iter().enumerate() {
            let c = comp[set[0]];
            if set.iter().any(|&v| comp[v] != c) {
                return Err(format!("set {i} straddles two SCCs of level {level}"));
            }
            let entry = span.entry(c).or_insert((i, i, 0));
            entry.0 = entry.0.min(i);
            entry.1 = entry.1.max(i);
            entry.2 += 1;
        }
        for (c, (lo, hi, count)) in span {
            if hi - lo + 1 != count {
                return Err(format!("level {level} SCC {c} covers sets {lo}..={hi} but only {count} of them"));
            }
        }
    }
    Ok(())
}

/// Checks that `path` is a live walk from `s` to `u` and returns its length.
pub fn check_path(g: &DecrementalGraph, s: usize, u: usize, path: &[usize]) -> Result<u64, String> {
    if path.first() != Some(&s) || path.last() != Some(&u) {
        return Err(format!("path does not run from {s} to {u}"));
    }
    let mut len = 0;
    for w in path.windows(2) {
        let e = g.find_edge(w[0], w[1]).ok_or_else(|| format!("no live edge {} -> {}", w[0], w[1]))?;
        len += g.edge(e).weight;
    }
    Ok(len)
}

// ---------------------------------------------------------------------------
// Deletion policies

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Uniform random order fixed before the first deletion.
    ObliviousRandom,
    /// A given script.
    ObliviousScripted,
    /// Deletes the edge into the closest vertex it has been told about.
    AdaptiveGreedy,
    /// Attacks the vertex whose answers changed most often.
    RootHunter,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ObliviousRandom => "oblivious-random",
            PolicyKind::ObliviousScripted => "oblivious-scripted",
            PolicyKind::AdaptiveGreedy => "adaptive-greedy",
            PolicyKind::RootHunter => "root-hunter",
        }
    }

    /// Whether the policy reads answers.
    pub fn is_adaptive(self) -> bool {
        matches!(self, PolicyKind::AdaptiveGreedy | PolicyKind::RootHunter)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionLog {
    pub queries: u64,
    pub answers: u64,
    pub deletions: Vec<EdgeId>,
}

/// Chooses deletions. Sees the graph and, if adaptive, the answers to its
/// queries; never the structure.
#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    rng: ChaCha8Rng,
    script: Vec<EdgeId>,
    cursor: usize,
    last: Vec<Option<u64>>,
    churn: Vec<u64>,
    log: InteractionLog,
}

impl Policy {
    pub fn new(kind: PolicyKind, g: &DecrementalGraph, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xad7e_5a41_0000_0001);
        let script = match kind {
            PolicyKind::ObliviousRandom => {
                let mut s: Vec<EdgeId> = g.alive_edges().collect();
                s.shuffle(&mut rng);
                s
            }
            _ => Vec::new(),
        };
        Policy { kind, rng, script, cursor: 0, last: Vec::new(), churn: vec![0; g.n()], log: InteractionLog::default() }
    }

    pub fn scripted(script: Vec<EdgeId>, n: usize) -> Self {
        Policy {
            kind: PolicyKind::ObliviousScripted,
            rng: ChaCha8Rng::seed_from_u64(0),
            script,
            cursor: 0,
            last: Vec::new(),
            churn: vec![0; n],
            log: InteractionLog::default(),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn log(&self) -> &InteractionLog {
        &self.log
    }

    /// Answers to a round of queries; oblivious policies ignore them.
    pub fn observe(&mut self, answers: &[Option<u64>]) {
        self.log.queries += answers.len() as u64;
        if !self.kind.is_adaptive() {
            return;
        }
        self.log.answers += answers.len() as u64;
        if self.last.len() == answers.len() {
            for (v, (a, b)) in self.last.iter().zip(answers).enumerate() {
                if a != b {
                    self.churn[v] += 1;
                }
            }
        }
        self.last = answers.to_vec();
    }

    /// Next edge to delete, `None` when the policy is done.
    pub fn next(&mut self, g: &DecrementalGraph) -> Option<EdgeId> {
        let e = match self.kind {
            PolicyKind::ObliviousRandom | PolicyKind::ObliviousScripted => loop {
                let e = *self.script.get(self.cursor)?;
                self.cursor += 1;
                if g.is_alive(e) {
                    break Some(e);
                }
            },
            PolicyKind::AdaptiveGreedy => self.greedy(g),
            PolicyKind::RootHunter => self.hunt(g),
        }?;
        self.log.deletions.push(e);
        Some(e)
    }

    fn random_alive(&mut self, g: &DecrementalGraph) -> Option<EdgeId> {
        let alive: Vec<EdgeId> = g.alive_edges().collect();
        alive.choose(&mut self.rng).copied()
    }

    /// Among edges leaving an answered vertex into a farther one, the edge
    /// whose head has the smallest answer.
    fn greedy(&mut self, g: &DecrementalGraph) -> Option<EdgeId> {
        let mut best: Vec<EdgeId> = Vec::new();
        let mut key = (u64::MAX, u64::MAX);
        for e in g.alive_edges() {
            let ed = g.edge(e);
            let (Some(Some(du)), Some(Some(dv))) = (self.last.get(ed.from), self.last.get(ed.to)) else { continue };
            if dv <= du {
                continue;
            }
            let k = (*dv, *du);
            if k < key {
                key = k;
                best.clear();
            }
            if k == key {
                best.push(e);
            }
        }
        match best.choose(&mut self.rng) {
            Some(&e) => Some(e),
            None => self.random_alive(g),
        }
    }

    /// An edge at the vertex with the most observed answer changes.
    fn hunt(&mut self, g: &DecrementalGraph) -> Option<EdgeId> {
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.sort_by_key(|&v| (Reverse(self.churn[v]), v));
        for v in order {
            let incident: Vec<EdgeId> = g.out_edges(v).chain(g.in_edges(v)).collect();
            if let Some(&e) = incident.choose(&mut self.rng) {
                // Spread attention once a vertex has been hit.
                self.churn[v] /= 2;
                return Some(e);
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Trials

/// A deliberate bug, for checking that the harness notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Queries drop the additive rounding slack.
    DropAdditive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub graph: GraphSpec,
    pub source: usize,
    pub variant: Variant,
    pub preset: Preset,
    pub epsilon: f64,
    pub c_param: f64,
    pub policy: PolicyKind,
    /// Deletions to perform; `None` deletes every edge.
    pub steps: Option<usize>,
    /// Query every vertex after this many deletions.
    pub query_every: usize,
    pub check_paths: bool,
    /// Check decompositions and the ordering invariant after every deletion.
    pub check_invariants: bool,
    #[serde(default)]
    pub fault: Option<Fault>,
}

impl TrialConfig {
    pub fn new(graph: GraphSpec, variant: Variant, epsilon: f64) -> Self {
        TrialConfig {
            graph,
            source: 0,
            variant,
            preset: Preset::Conservative,
            epsilon,
            c_param: 1.0,
            policy: PolicyKind::ObliviousRandom,
            steps: None,
            query_every: 5,
            check_paths: true,
            check_invariants: false,
            fault: None,
        }
    }

    /// First 16 hex digits of the SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Multiplicative bound on bracketed and combined estimates.
    pub fn ratio_bound(&self) -> f64 {
        let eps = self.epsilon;
        let base = match self.variant {
            Variant::Sparse if self.graph.max_weight <= 1 => (1.0 + 2.0 * eps).powi(2),
            Variant::Exact => 1.0,
            _ => 1.0 + eps,
        };
        if self.graph.max_weight > 1 {
            base * (1.0 + eps).powi(2)
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    LowerBound,
    UpperBound,
    ScaleUpperBound,
    Path,
    Potential,
    Invariant,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub kind: ViolationKind,
    pub vertex: Option<usize>,
    pub scale: Option<u64>,
    pub estimate: Option<f64>,
    pub exact: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub lower: u64,
    pub upper: u64,
    pub scale_upper: u64,
    pub path: u64,
    pub potential: u64,
    pub invariant: u64,
    pub error: u64,
}

impl ViolationCounts {
    pub fn total(&self) -> u64 {
        self.lower + self.upper + self.scale_upper + self.path + self.potential + self.invariant + self.error
    }
}

/// Outcome of one trial. Deterministic in (config, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub schema: String,
    pub seed: u64,
    pub config_hash: String,
    pub variant: Variant,
    pub policy: PolicyKind,
    pub n: usize,
    pub m: usize,
    pub steps: usize,
    pub checkpoints: u64,
    pub queries: u64,
    pub bracketed_checks: u64,
    pub path_checks: u64,
    pub worst_ratio: f64,
    pub worst_scale_ratio: f64,
    pub violations: ViolationCounts,
    /// The first few violations in full.
    pub details: Vec<Violation>,
    pub counters: EstimatorCounters,
    pub interaction: InteractionLog,
}

impl TrialReport {
    pub fn ok(&self) -> bool {
        self.violations.total() == 0
    }
}

const DETAIL_CAP: usize = 20;

enum Estimator {
    Plain(Box<CombinedEstimator>),
    Weighted(Box<WeightedEstimator>),
}

impl Estimator {
    fn query(&self, u: usize) -> Option<f64> {
        match self {
            Estimator::Plain(e) => e.query(u).map(|q| q as f64),
            Estimator::Weighted(e) => e.query(u),
        }
    }

    fn delete(&mut self, e: EdgeId) -> Result<(), SsspError> {
        match self {
            Estimator::Plain(x) => x.delete(e).map(|_| ()),
            Estimator::Weighted(x) => x.delete(e),
        }
    }

    fn report_path(&mut self, u: usize) -> Result<Option<Vec<usize>>, SsspError> {
        match self {
            Estimator::Plain(e) => e.report_path(u),
            Estimator::Weighted(e) => e.report_path(u),
        }
    }

    fn counters(&self) -> EstimatorCounters {
        match self {
            Estimator::Plain(e) => e.counters(),
            Estimator::Weighted(e) => {
                let mut total = EstimatorCounters::default();
                for lv in e.levels() {
                    let c = lv.estimator.counters();
                    total.scales += c.scales;
                    total.exact_scales += c.exact_scales;
                    total.deletions = total.deletions.max(c.deletions);
                    total.splits += c.splits;
                    total.threshold_rounds += c.threshold_rounds;
                    total.relevels += c.relevels;
                    total.stalled_rounds += c.stalled_rounds;
                    total.super_inserts += c.super_inserts;
                    total.super_deletes += c.super_deletes;
                    total.local_trees += c.local_trees;
                    total.tree_scans += c.tree_scans;
                    total.es_scans += c.es_scans;
                    total.repartitions += c.repartitions;
                    total.multigraph_work += c.multigraph_work;
                    total.heap_ops += c.heap_ops;
                }
                total
            }
        }
    }
}

struct Recorder {
    counts: ViolationCounts,
    details: Vec<Violation>,
}

impl Recorder {
    fn add(&mut self, v: Violation) {
        let c = &mut self.counts;
        match v.kind {
            ViolationKind::LowerBound => c.lower += 1,
            ViolationKind::UpperBound => c.upper += 1,
            ViolationKind::ScaleUpperBound => c.scale_upper += 1,
            ViolationKind::Path => c.path += 1,
            ViolationKind::Potential => c.potential += 1,
            ViolationKind::Invariant => c.invariant += 1,
            ViolationKind::Error => c.error += 1,
        }
        if self.details.len() < DETAIL_CAP {
            self.details.push(v);
        }
    }

    fn at(&mut self, step: usize, kind: ViolationKind, detail: String) {
        self.add(Violation { step, kind, vertex: None, scale: None, estimate: None, exact: None, detail });
    }
}

/// Runs one trial: generates the graph, drives the policy, and checks every
/// answer against the exact oracle.
pub fn run_trial(cfg: &TrialConfig, seed: u64) -> TrialReport {
    let g = generate_graph(&cfg.graph, seed);
    run_trial_on(cfg, &g, seed, None)
}

/// [`run_trial`] on a given graph, optionally with a fixed deletion script.
pub fn run_trial_on(cfg: &TrialConfig, g: &DecrementalGraph, seed: u64, script: Option<Vec<EdgeId>>) -> TrialReport {
    let mut rec = Recorder { counts: ViolationCounts::default(), details: Vec::new() };
    let n = g.n();
    let source = cfg.source.min(n.saturating_sub(1));
    let mut report = TrialReport {
        schema: REPORT_SCHEMA.to_string(),
        seed,
        config_hash: cfg.hash(),
        variant: cfg.variant,
        policy: cfg.policy,
        n,
        m: g.alive_count(),
        steps: 0,
        checkpoints: 0,
        queries: 0,
        bracketed_checks: 0,
        path_checks: 0,
        worst_ratio: 1.0,
        worst_scale_ratio: 1.0,
        violations: ViolationCounts::default(),
        details: Vec::new(),
        counters: EstimatorCounters::default(),
        interaction: InteractionLog::default(),
    };
    let drop_additive = cfg.fault == Some(Fault::DropAdditive);
    let built = if g.is_unweighted() {
        CombinedEstimator::with_cap(
            g,
            source,
            cfg.variant,
            cfg.preset,
            cfg.epsilon,
            cfg.c_param,
            seed,
            crate::sssp::distance_cap(g),
            |p| if drop_additive { p.without_additive() } else { p },
        )
        .map(|e| Estimator::Plain(Box::new(e)))
    } else {
        WeightedEstimator::new(g, source, cfg.variant, cfg.preset, cfg.epsilon, cfg.c_param, seed)
            .map(|e| Estimator::Weighted(Box::new(e)))
    };
    let mut est = match built {
        Ok(e) => e,
        Err(err) => {
            rec.at(0, ViolationKind::Error, err.to_string());
            report.violations = rec.counts;
            report.details = rec.details;
            return report;
        }
    };
    let mut oracle = ExactOracle::new(g, source);
    let mut policy = match script {
        Some(s) => Policy::scripted(s, n),
        None => Policy::new(cfg.policy, g, seed),
    };
    let limit = cfg.steps.unwrap_or(usize::MAX);
    let every = cfg.query_every.max(1);
    checkpoint(cfg, &mut est, &oracle, &mut policy, &mut rec, &mut report, 0);
    while report.steps < limit {
        let Some(e) = policy.next(oracle.graph()) else { break };
        report.steps += 1;
        oracle.delete(e);
        if let Err(err) = est.delete(e) {
            rec.at(report.steps, ViolationKind::Error, err.to_string());
            break;
        }
        if cfg.check_invariants {
            check_structures(&est, &mut rec, report.steps);
        }
        if report.steps % every == 0 {
            let step = report.steps;
            checkpoint(cfg, &mut est, &oracle, &mut policy, &mut rec, &mut report, step);
        }
    }
    if report.steps % every != 0 {
        let step = report.steps;
        checkpoint(cfg, &mut est, &oracle, &mut policy, &mut rec, &mut report, step);
    }
    report.counters = est.counters();
    report.interaction = policy.log().clone();
    report.violations = rec.counts;
    report.details = rec.details;
    report
}

fn check_structures(est: &Estimator, rec: &mut Recorder, step: usize) {
    let Estimator::Plain(e) = est else { return };
    for s in e.scales() {
        let (dec, sets) = match &s.structure {
            ScaleStructure::Flex(f) => (f.decomposition(), f.ordered_sets()),
            ScaleStructure::Sparse(sp) => (sp.decomposition(), sp.ordered_sets()),
            ScaleStructure::Exact(_) => continue,
        };
        if let Err(msg) = check_decomposition(dec) {
            rec.at(step, ViolationKind::Invariant, format!("scale {}: {msg}", s.params.scale));
        }
        if let Err(msg) = check_invariant1(dec, &sets) {
            rec.at(step, ViolationKind::Invariant, format!("scale {}: {msg}", s.params.scale));
        }
    }
}

fn checkpoint(
    cfg: &TrialConfig,
    est: &mut Estimator,
    oracle: &ExactOracle,
    policy: &mut Policy,
    rec: &mut Recorder,
    report: &mut TrialReport,
    step: usize,
) {
    let exact = oracle.distances();
    let g = oracle.graph();
    let answers: Vec<Option<f64>> = (0..g.n()).map(|u| est.query(u)).collect();
    report.checkpoints += 1;
    report.queries += answers.len() as u64;
    policy.observe(&answers.iter().map(|a| a.map(|x| x.ceil() as u64)).collect::<Vec<_>>());
    let bound = cfg.ratio_bound();
    for (u, (&d, &q)) in exact.iter().zip(&answers).enumerate() {
        let base = Violation { step, kind: ViolationKind::LowerBound, vertex: Some(u), scale: None, estimate: q, exact: d, detail: String::new() };
        match (d, q) {
            (None, None) => {}
            (None, Some(_)) => rec.add(Violation { detail: "estimate for an unreachable vertex".into(), ..base }),
            (Some(_), None) => rec.add(Violation { kind: ViolationKind::UpperBound, detail: "reachable vertex reported unreachable".into(), ..base }),
            (Some(d), Some(q)) => {
                if q + 1e-9 < d as f64 {
                    rec.add(Violation { detail: "estimate below the distance".into(), ..base });
                } else if d > 0 {
                    let ratio = q / d as f64;
                    report.worst_ratio = report.worst_ratio.max(ratio);
                    if ratio > bound + 1e-9 {
                        rec.add(Violation { kind: ViolationKind::UpperBound, detail: format!("ratio {ratio:.4} > {bound:.4}"), ..base });
                    }
                }
            }
        }
    }
    if let Estimator::Plain(e) = est {
        for s in e.scales() {
            let scale = s.params.scale;
            for (u, d) in exact.iter().enumerate() {
                let Some(d) = *d else { continue };
                if d < scale || d >= 2 * scale {
                    continue;
                }
                report.bracketed_checks += 1;
                let q = s.structure.query(u);
                let ratio = q.map_or(f64::INFINITY, |q| q as f64 / d as f64);
                report.worst_scale_ratio = report.worst_scale_ratio.max(ratio);
                if ratio > bound + 1e-9 {
                    rec.add(Violation {
                        step,
                        kind: ViolationKind::ScaleUpperBound,
                        vertex: Some(u),
                        scale: Some(scale),
                        estimate: q.map(|x| x as f64),
                        exact: Some(d),
                        detail: format!("{} scale ratio {ratio:.4} > {bound:.4}", s.structure.kind()),
                    });
                }
            }
            if let ScaleStructure::Flex(f) = &s.structure {
                for u in 0..g.n() {
                    let Some(p) = f.path_profile(u) else { continue };
                    let slack = p.weight as f64 - p.arcs as f64;
                    if slack > p.arcs as f64 + p.mass_over_tau + 1e-9 {
                        rec.add(Violation {
                            step,
                            kind: ViolationKind::Potential,
                            vertex: Some(u),
                            scale: Some(scale),
                            estimate: Some(p.weight as f64),
                            exact: None,
                            detail: format!("weight {} over {} arcs with mass/τ {:.3}", p.weight, p.arcs, p.mass_over_tau),
                        });
                    }
                }
            }
        }
    }
    if cfg.check_paths && cfg.variant != Variant::Adaptive {
        for (u, q) in answers.iter().enumerate() {
            let Some(q) = *q else { continue };
            report.path_checks += 1;
            let outcome = match est.report_path(u) {
                Ok(Some(p)) => check_path(g, oracle.source, u, &p).and_then(|len| {
                    if len as f64 > q + 1e-6 {
                        Err(format!("path length {len} exceeds estimate {q}"))
                    } else {
                        Ok(())
                    }
                }),
                Ok(None) => Err("no path for a finite estimate".into()),
                Err(err) => Err(err.to_string()),
            };
            if let Err(detail) = outcome {
                rec.add(Violation { step, kind: ViolationKind::Path, vertex: Some(u), scale: None, estimate: Some(q), exact: exact[u], detail });
            }
        }
    }
}

/// Trials for seeds `first..first + count`, in parallel, in seed order.
pub fn run_trials(cfg: &TrialConfig, first: u64, count: u64) -> Vec<TrialReport> {
    (first..first + count).into_par_iter().map(|seed| run_trial(cfg, seed)).collect()
}

/// One JSON object per line.
pub fn to_jsonl(reports: &[TrialReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push('\n');
    }
    out
}

/// Median of a non-empty list.
pub fn median(values: &mut [u64]) -> f64 {
    values.sort_unstable();
    let k = values.len();
    if k == 0 {
        return 0.0;
    }
    if k % 2 == 1 {
        values[k / 2] as f64
    } else {
        (values[k / 2 - 1] + values[k / 2]) as f64 / 2.0
    }
}

/// Oblivious policies must not depend on answers: feeding garbage answers
/// leaves their choices unchanged.
pub fn oblivious_ignores_answers(kind: PolicyKind, g: &DecrementalGraph, seed: u64, steps: usize) -> bool {
    let mut a = Policy::new(kind, g, seed);
    let mut b = Policy::new(kind, g, seed);
    let mut ga = g.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..steps {
        let noise: Vec<Option<u64>> = (0..g.n()).map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(0..100))).collect();
        b.observe(&noise);
        let (x, y) = (a.next(&ga), b.next(&ga));
        if x != y {
            return false;
        }
        let Some(e) = x else { break };
        ga.delete_edge(e).unwrap();
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Family;

    fn path(n: usize) -> DecrementalGraph {
        DecrementalGraph::load_unweighted(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    fn cycle(n: usize) -> DecrementalGraph {
        DecrementalGraph::load_unweighted(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn fixtures_give_textbook_distances() {
        assert_eq!(dijkstra(&path(4), 0), vec![Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(dijkstra(&path(4), 2), vec![None, None, Some(0), Some(1)]);
        let star = DecrementalGraph::load_unweighted(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(bfs(&star, 0), vec![Some(0), Some(1), Some(1), Some(1), Some(1)]);
        let w = DecrementalGraph::load(3, &[(0, 1, 5), (1, 2, 1), (0, 2, 9)]).unwrap();
        assert_eq!(dijkstra(&w, 0), vec![Some(0), Some(5), Some(6)]);
        assert_eq!(truncated_dijkstra(&w, 0, 5), vec![Some(0), Some(5), None]);
    }

    #[test]
    fn implementations_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let n = rng.gen_range(2..25);
            let m = rng.gen_range(0..4 * n);
            let weighted = rng.gen_bool(0.5);
            let edges: Vec<(usize, usize, u64)> = (0..m)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), if weighted { rng.gen_range(1..9) } else { 1 }))
                .collect();
            let g = DecrementalGraph::load(n, &edges).unwrap();
            let s = rng.gen_range(0..n);
            let d = dijkstra(&g, s);
            assert_eq!(d, bellman_ford(&g, s));
            if !weighted {
                assert_eq!(d, bfs(&g, s));
            }
        }
    }

    #[test]
    fn kosaraju_on_fixtures() {
        let comp = kosaraju(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[2], comp[3]);
        assert!(comp[0] < comp[2]);
        let c = kosaraju(5, &(0..5).map(|i| (i, (i + 1) % 5)).collect::<Vec<_>>());
        assert!(c.iter().all(|&x| x == c[0]));
    }

    #[test]
    fn diameter_on_fixtures() {
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(diameter(&cycle(6), &all, |_| true).value, Some(5));
        assert_eq!(diameter(&path(6), &all, |_| true).value, None);
        // Two triangles sharing vertex 0.
        let g = DecrementalGraph::load_unweighted(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(diameter(&g, &all[..5], |_| true).value, Some(4));
        assert_eq!(diameter(&g, &[0, 1, 2], |_| true).value, Some(2));
    }

    #[test]
    fn split_balance_rule() {
        assert!(check_split_balance(10, &[5, 3, 2]).is_ok());
        assert!(check_split_balance(10, &[2, 8]).is_ok());
        assert!(check_split_balance(10, &[6, 4]).is_err());
        assert!(check_split_balance(10, &[2, 2]).is_err());
    }

    #[test]
    fn invariant_checker_rejects_bad_orders() {
        use crate::decomp::DecompConfig;
        // Two 2-cycles joined by a forward edge.
        let g = DecrementalGraph::load_unweighted(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let dec = Decomposition::new(g, DecompConfig::oblivious(64).hierarchical(), 0).unwrap();
        let sets: Vec<Vec<usize>> = dec.piece_ids().map(|p| dec.piece(p).to_vec()).collect();
        let mut sorted = sets.clone();
        sorted.sort_by_key(|s| *s.iter().min().unwrap());
        assert!(check_invariant1(&dec, &sorted).is_ok());
        sorted.reverse();
        assert!(check_invariant1(&dec, &sorted).unwrap_err().contains("backward"));
        assert!(check_invariant1(&dec, &sorted[..1]).is_err());
    }

    #[test]
    fn path_checker() {
        let g = path(4);
        assert_eq!(check_path(&g, 0, 3, &[0, 1, 2, 3]), Ok(3));
        assert!(check_path(&g, 0, 3, &[0, 2, 3]).is_err());
        assert!(check_path(&g, 0, 3, &[0, 1, 2]).is_err());
    }

    #[test]
    fn oblivious_policies_do_not_read_answers() {
        let g = generate_graph(&GraphSpec { family: Family::ErdosRenyi, n: 30, m: 90, max_weight: 1 }, 3);
        assert!(oblivious_ignores_answers(PolicyKind::ObliviousRandom, &g, 4, 90));
        assert!(!oblivious_ignores_answers(PolicyKind::AdaptiveGreedy, &g, 4, 90));
    }

    #[test]
    fn reports_replay_identically() {
        let spec = GraphSpec { family: Family::Layered, n: 40, m: 120, max_weight: 1 };
        for variant in [Variant::Dense, Variant::Sparse, Variant::Adaptive] {
            let mut cfg = TrialConfig::new(spec.clone(), variant, 0.5);
            cfg.policy = PolicyKind::RootHunter;
            let a = serde_json::to_string(&run_trial(&cfg, 11)).unwrap();
            let b = serde_json::to_string(&run_trial(&cfg, 11)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn exact_variant_has_ratio_one() {
        let spec = GraphSpec { family: Family::SccGadgets, n: 40, m: 150, max_weight: 1 };
        let r = run_trial(&TrialConfig::new(spec, Variant::Exact, 0.5), 2);
        assert!(r.ok(), "{:?}", r.details);
        assert_eq!(r.worst_ratio, 1.0);
        assert!(r.path_checks > 0);
    }

    #[test]
    fn dropped_additive_is_caught() {
        let spec = GraphSpec { family: Family::Layered, n: 80, m: 300, max_weight: 1 };
        let mut cfg = TrialConfig::new(spec, Variant::Dense, 1.0);
        let clean = run_trial(&cfg, 5);
        assert!(clean.ok(), "{:?}", clean.details);
        cfg.fault = Some(Fault::DropAdditive);
        let broken = (0..3).map(|s| run_trial(&cfg, s)).filter(|r| r.violations.lower > 0).count();
        assert_eq!(broken, 3);
    }
}
