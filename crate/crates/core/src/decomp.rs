//! Decremental low-diameter decomposition: a growing separator set `S` and
//! the SCCs of `G ∖ E(S)` ("pieces"), kept at bounded diameter under edge
//! deletions.
//!
//! Two maintenance modes share one engine. The adaptive mode repairs a piece
//! only when many vertices fall out of its ES trees and then repartitions from
//! a fresh random root, so the output never leaks the current root. The
//! oblivious mode peels far vertices with [`wfast_separator`] as soon as they
//! leave the trees. Either mode can run flat (one structure for the whole
//! graph) or hierarchically, where a piece of size in `(n/2^{i+1}, n/2^i]` is
//! governed by a structure with thresholds scaled by `2^{-i}`.

use crate::estree::{Direction, EsStructure};
use crate::graph::{DecrementalGraph, EdgeId, GraphError};
use crate::separators::{lg, wfast_separator, wpartition_plus, wthin_layer};
use crate::subgraph::Subgraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PieceId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("need 0 < d1 < d2, got d1 = {d1}, d2 = {d2}")]
    Order { d1: u64, d2: u64 },
    #[error("d2 - d1 = {span} is below 2·ω·lg n = {need:.3}")]
    Floor { span: u64, need: f64 },
    #[error("{value} is not divisible by ω = {omega}")]
    Divisibility { value: u64, omega: u64 },
    #[error("distance parameter must be positive")]
    Zero,
    #[error("edge weight {weight} exceeds ω = {omega}")]
    WeightRange { weight: u64, omega: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Repair by random-root repartitioning; safe against adaptive deletions.
    Adaptive { d1: u64, d2: u64 },
    /// Peel far vertices eagerly; assumes deletions independent of the randomness.
    Oblivious { d: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompConfig {
    pub mode: Mode,
    /// Band width; every edge weight must be at most `omega`.
    pub omega: u64,
    pub hierarchical: bool,
}

impl DecompConfig {
    pub fn adaptive(d1: u64, d2: u64) -> Self {
        DecompConfig { mode: Mode::Adaptive { d1, d2 }, omega: 1, hierarchical: false }
    }

    pub fn oblivious(d: u64) -> Self {
        DecompConfig { mode: Mode::Oblivious { d }, omega: 1, hierarchical: false }
    }

    pub fn hierarchical(self) -> Self {
        DecompConfig { hierarchical: true, ..self }
    }

    pub fn weighted(self, omega: u64) -> Self {
        DecompConfig { omega, ..self }
    }

    /// Diameter bound every piece obeys.
    pub fn diameter_bound(&self) -> u64 {
        match self.mode {
            Mode::Adaptive { d2, .. } => d2,
            Mode::Oblivious { d } => d,
        }
    }
}

/// Work counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompCounters {
    pub partition_calls: u64,
    pub separator_calls: u64,
    pub thin_layer_calls: u64,
    pub fast_separator_calls: u64,
    pub fast_separator_fallbacks: u64,
    /// ES structures destroyed and their component repartitioned.
    pub repartitions: u64,
    pub es_builds: u64,
    pub scc_recomputations: u64,
    pub reach_checks: u64,
    pub dissolved_vertices: u64,
    pub touched: u64,
    /// Scans performed by ES structures already destroyed.
    pub retired_es_scans: u64,
}

/// `V'` replaced by `W_1..W_p`; `pieces` ends with `W_p`, which keeps `old`'s id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub old: PieceId,
    pub old_size: usize,
    pub pieces: Vec<PieceId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompEvent {
    /// New separator vertices with their level.
    pub separator: Vec<(usize, usize)>,
    pub refinement: Option<Refinement>,
}

impl DecompEvent {
    pub fn is_empty(&self) -> bool {
        self.separator.is_empty() && self.refinement.is_none()
    }
}

#[derive(Debug, Clone)]
struct Piece {
    vertices: Vec<usize>,
    /// Level of the structure governing this piece.
    owner: usize,
    es: Option<EsStructure>,
    alive: bool,
}

type Tagged = (Vec<usize>, Option<EsStructure>);

#[derive(Debug, Clone, Copy)]
struct Unit {
    /// d1 (adaptive) or d (oblivious) at this level.
    low: u64,
    /// d2 (adaptive) or d (oblivious) at this level.
    high: u64,
    es_threshold: u64,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    g: DecrementalGraph,
    config: DecompConfig,
    rng: ChaCha8Rng,
    sep_level: Vec<Option<usize>>,
    separator_by_level: Vec<Vec<usize>>,
    piece_of: Vec<PieceId>,
    pieces: Vec<Piece>,
    top: usize,
    root_log: Vec<usize>,
    counters: DecompCounters,
    pending: Vec<(usize, usize)>,
    stamp: Vec<u64>,
    epoch: u64,
}

fn ceil_lg(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

impl Decomposition {
    /// Builds the decomposition on its own copy of `g`.
    pub fn new(g: DecrementalGraph, config: DecompConfig, seed: u64) -> Result<Self, DecompError> {
        let n = g.n();
        let omega = config.omega;
        if omega == 0 {
            return Err(DecompError::Zero);
        }
        let w = g.alive_edges().map(|e| g.edge(e).weight).max().unwrap_or(1);
        if w > omega {
            return Err(DecompError::WeightRange { weight: w, omega });
        }
        let top = match config.mode {
            Mode::Adaptive { d1, d2 } => {
                if d1 == 0 || d1 >= d2 {
                    return Err(DecompError::Order { d1, d2 });
                }
                for value in [d1, d2] {
                    if value % omega != 0 {
                        return Err(DecompError::Divisibility { value, omega });
                    }
                }
                let need = 2.0 * omega as f64 * lg(n.max(1));
                if ((d2 - d1) as f64) < need {
                    return Err(DecompError::Floor { span: d2 - d1, need });
                }
                ceil_lg(d1)
            }
            Mode::Oblivious { d } => {
                if d == 0 {
                    return Err(DecompError::Zero);
                }
                if d % omega != 0 {
                    return Err(DecompError::Divisibility { value: d, omega });
                }
                ceil_lg(d)
            }
        };
        let mut dec = Decomposition {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sep_level: vec![None; n],
            separator_by_level: vec![Vec::new(); top + 1],
            piece_of: vec![usize::MAX; n],
            pieces: Vec::new(),
            top,
            root_log: Vec::new(),
            counters: DecompCounters::default(),
            pending: Vec::new(),
            stamp: vec![0; n],
            epoch: 0,
            g,
        };
        let whole = Subgraph::whole(&dec.g);
        let mut finals = Vec::new();
        for comp in whole.sccs() {
            let verts: Vec<usize> = comp.iter().map(|&l| whole.global(l)).collect();
            dec.settle(None, vec![(verts, None)], &mut finals);
        }
        for (verts, owner, es) in finals {
            dec.add_piece(verts, owner, es);
        }
        dec.pending.clear();
        Ok(dec)
    }

    pub fn config(&self) -> &DecompConfig {
        &self.config
    }

    pub fn graph(&self) -> &DecrementalGraph {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    /// Highest hierarchy level (`⌈lg d1⌉` or `⌈lg d⌉`); 0 when flat.
    pub fn top_level(&self) -> usize {
        if self.config.hierarchical {
            self.top
        } else {
            0
        }
    }

    pub fn separator_level(&self, v: usize) -> Option<usize> {
        self.sep_level[v]
    }

    pub fn in_separator(&self, v: usize) -> bool {
        self.sep_level[v].is_some()
    }

    pub fn separator_size(&self) -> usize {
        self.separator_by_level.iter().map(Vec::len).sum()
    }

    /// `S_0, S_1, …` in insertion order.
    pub fn separator_levels(&self) -> &[Vec<usize>] {
        &self.separator_by_level
    }

    pub fn piece_of(&self, v: usize) -> PieceId {
        self.piece_of[v]
    }

    pub fn piece(&self, id: PieceId) -> &[usize] {
        &self.pieces[id].vertices
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.iter().filter(|p| p.alive).count()
    }

    /// Live piece ids in increasing order.
    pub fn piece_ids(&self) -> impl Iterator<Item = PieceId> + '_ {
        (0..self.pieces.len()).filter(move |&i| self.pieces[i].alive)
    }

    /// Level of the structure governing the piece.
    pub fn owner_level(&self, id: PieceId) -> usize {
        self.pieces[id].owner
    }

    /// Diameter bound guaranteed for pieces governed at `level`.
    pub fn level_bound(&self, level: usize) -> u64 {
        self.unit(level).high
    }

    pub fn piece_root(&self, id: PieceId) -> Option<usize> {
        self.pieces[id].es.as_ref().map(EsStructure::root)
    }

    pub fn piece_es(&self, id: PieceId) -> Option<&EsStructure> {
        self.pieces[id].es.as_ref()
    }

    /// Tree path inside the piece of `v`: root→v (out) or v→root (in).
    pub fn tree_path(&self, dir: Direction, v: usize) -> Option<Vec<usize>> {
        let p = &self.pieces[self.piece_of[v]];
        match &p.es {
            Some(es) => es.tree_path(dir, v),
            None if p.vertices.len() == 1 => Some(vec![v]),
            None => None,
        }
    }

    /// Every random root drawn so far, in order.
    pub fn root_log(&self) -> &[usize] {
        &self.root_log
    }

    pub fn counters(&self) -> &DecompCounters {
        &self.counters
    }

    /// Scans of all ES structures, live and retired.
    pub fn es_scans(&self) -> u64 {
        let live: u64 = self.pieces.iter().filter_map(|p| p.es.as_ref()).map(EsStructure::total_scans).sum();
        live + self.counters.retired_es_scans
    }

    /// Whether `e` is a live edge of `G_level = G ∖ ∪_{j ≤ level} E(S_j)`.
    pub fn in_level_graph(&self, e: EdgeId, level: usize) -> bool {
        if !self.g.is_alive(e) {
            return false;
        }
        let ed = self.g.edge(e);
        [ed.from, ed.to].iter().all(|&x| self.sep_level[x].is_none_or(|l| l > level))
    }

    /// Whether `e` is a live edge of `G ∖ E(S)`.
    pub fn in_final_graph(&self, e: EdgeId) -> bool {
        self.g.is_alive(e) && !self.in_separator(self.g.edge(e).from) && !self.in_separator(self.g.edge(e).to)
    }

    fn level_of_size(&self, size: usize) -> usize {
        let n = self.g.n();
        let mut i = 0;
        while size << (i + 1) <= n {
            i += 1;
        }
        i
    }

    fn unit(&self, level: usize) -> Unit {
        let w = self.config.omega;
        let scale = |x: u64| (x >> level.min(63)) / w * w;
        match self.config.mode {
            Mode::Adaptive { d1, d2 } => {
                let low = scale(d1);
                Unit { low, high: scale(d2), es_threshold: low / 2 }
            }
            Mode::Oblivious { d } => {
                let dd = scale(d);
                Unit { low: dd, high: dd, es_threshold: dd / 2 }
            }
        }
    }

    fn align(&self, x: u64) -> u64 {
        x / self.config.omega * self.config.omega
    }

    fn unit_viable(&self, u: Unit, size: usize) -> bool {
        let w = self.config.omega as f64;
        match self.config.mode {
            Mode::Adaptive { .. } => u.low >= 1 && u.high > u.low && (u.high - u.low) as f64 >= 2.0 * w * lg(size),
            Mode::Oblivious { .. } => u.low >= 1 && u.low as f64 >= 4.0 * w * lg(size),
        }
    }

    fn add_sep(&mut self, v: usize, level: usize) {
        if self.sep_level[v].is_none() {
            self.sep_level[v] = Some(level);
            self.separator_by_level[level].push(v);
            self.pending.push((v, level));
        }
    }

    fn add_piece(&mut self, vertices: Vec<usize>, owner: usize, es: Option<EsStructure>) -> PieceId {
        let id = self.pieces.len();
        for &v in &vertices {
            self.piece_of[v] = id;
        }
        self.pieces.push(Piece { vertices, owner, es, alive: true });
        id
    }

    /// `G ∖ E(S)` induced on `verts`.
    fn view(&self, verts: &[usize]) -> Subgraph {
        Subgraph::induced(&self.g, verts, |e| self.in_final_graph(e))
    }

    fn retire(&mut self, es: Option<EsStructure>) {
        if let Some(es) = es {
            self.counters.retired_es_scans += es.total_scans();
        }
    }

    /// Routes generated components: separator singletons and pieces of the
    /// originating level are final; pieces of a deeper level get their own
    /// structure; pieces at or beyond the top level dissolve into `S_top`.
    fn settle(&mut self, origin: Option<usize>, items: Vec<Tagged>, finals: &mut Vec<(Vec<usize>, usize, Option<EsStructure>)>) {
        let mut work: Vec<(Option<usize>, Tagged)> = items.into_iter().map(|t| (origin, t)).collect();
        while let Some((origin, (verts, es))) = work.pop() {
            if verts.len() == 1 {
                if let Some(l) = self.sep_level[verts[0]] {
                    self.retire(es);
                    finals.push((verts, l, None));
                    continue;
                }
            }
            let level = if self.config.hierarchical { self.level_of_size(verts.len()) } else { 0 };
            if self.config.hierarchical && level >= self.top {
                self.retire(es);
                self.dissolve(&verts, self.top, finals);
                continue;
            }
            if origin.is_some_and(|o| o >= level) {
                finals.push((verts, origin.unwrap(), es));
                continue;
            }
            self.retire(es);
            let unit = self.unit(level);
            if !self.unit_viable(unit, verts.len()) {
                self.dissolve(&verts, level, finals);
                continue;
            }
            let parts = self.partition_plus(&verts, unit.low, level);
            work.extend(parts.into_iter().map(|t| (Some(level), t)));
        }
    }

    fn dissolve(&mut self, verts: &[usize], level: usize, finals: &mut Vec<(Vec<usize>, usize, Option<EsStructure>)>) {
        for &v in verts {
            if self.sep_level[v].is_none() {
                self.counters.dissolved_vertices += 1;
                self.add_sep(v, level);
            }
            finals.push((vec![v], self.sep_level[v].unwrap(), None));
        }
    }

    /// Partition+ of `verts` with distance `d` on behalf of the structure at `level`.
    fn partition_plus(&mut self, verts: &[usize], d: u64, level: usize) -> Vec<Tagged> {
        let unit = self.unit(level);
        let view = self.view(verts);
        self.counters.partition_calls += 1;
        let d = self.align(d);
        let res = wpartition_plus(&view, d, self.config.omega, unit.es_threshold, &mut self.rng)
            .expect("weights and divisibility checked at construction");
        self.counters.separator_calls += res.separator_calls;
        self.counters.touched += res.touched_cost;
        for &s in &res.separator {
            self.add_sep(s, level);
        }
        let mut seeds: Vec<Option<EsStructure>> = vec![None; res.sccs.len()];
        for (i, es) in res.es_seeds {
            self.root_log.push(es.root());
            self.counters.es_builds += 1;
            seeds[i] = Some(es);
        }
        res.sccs.into_iter().zip(seeds).collect()
    }

    fn bump(&mut self) -> u64 {
        self.epoch += 1;
        self.epoch
    }

    fn member(&self, x: usize, pid: PieceId) -> bool {
        self.piece_of[x] == pid && self.sep_level[x].is_none()
    }

    /// Whether `to` is reachable from `from` inside piece `pid` in `G ∖ E(S)`.
    fn reaches(&mut self, from: usize, to: usize, pid: PieceId) -> bool {
        self.counters.reach_checks += 1;
        if !self.member(from, pid) || !self.member(to, pid) {
            return false;
        }
        let ep = self.bump();
        self.stamp[from] = ep;
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            let outs: Vec<EdgeId> = self.g.out_edges(x).collect();
            for e in outs {
                self.counters.touched += 1;
                let y = self.g.edge(e).to;
                if self.stamp[y] != ep && self.member(y, pid) {
                    self.stamp[y] = ep;
                    stack.push(y);
                }
            }
        }
        false
    }

    /// SCCs of `G ∖ E(S)` induced on the vertices of piece `pid`.
    fn components(&mut self, pid: PieceId) -> Vec<Vec<usize>> {
        self.counters.scc_recomputations += 1;
        let verts = self.pieces[pid].vertices.clone();
        let view = self.view(&verts);
        self.counters.touched += view.edge_count() as u64;
        view.sccs()
            .into_iter()
            .map(|c| {
                let mut g: Vec<usize> = c.into_iter().map(|l| view.global(l)).collect();
                g.sort_unstable();
                g
            })
            .collect()
    }

    /// Deletes edge `e` (an id of the graph given at construction).
    pub fn delete(&mut self, e: EdgeId) -> Result<DecompEvent, DecompError> {
        if e >= self.g.edge_capacity() {
            return Err(GraphError::UnknownEdge(e).into());
        }
        let ed = self.g.edge(e);
        let inside = self.in_final_graph(e) && self.piece_of[ed.from] == self.piece_of[ed.to];
        self.g.delete_edge(e)?;
        if !inside {
            return Ok(DecompEvent::default());
        }
        let pid = self.piece_of[ed.from];
        let taken = std::mem::replace(
            &mut self.pieces[pid],
            Piece { vertices: Vec::new(), owner: 0, es: None, alive: false },
        );
        let old_size = taken.vertices.len();
        self.pieces[pid].vertices = taken.vertices.clone();
        let owner = taken.owner;
        let tagged = match (self.config.mode, taken.es) {
            (_, None) => self.esless_step(pid, ed.from, ed.to, owner),
            (Mode::Adaptive { .. }, Some(es)) => self.adaptive_step(pid, e, ed.from, ed.to, owner, es),
            (Mode::Oblivious { .. }, Some(es)) => self.oblivious_step(pid, e, ed.from, ed.to, owner, es),
        };
        let mut finals = Vec::new();
        self.settle(Some(owner), tagged, &mut finals);
        let separator = std::mem::take(&mut self.pending);
        if finals.len() == 1 {
            let (verts, owner, es) = finals.pop().unwrap();
            debug_assert_eq!(verts.len(), old_size);
            self.pieces[pid] = Piece { vertices: verts, owner, es, alive: true };
            return Ok(DecompEvent { separator, refinement: None });
        }
        // The largest new piece (smallest vertex on ties) inherits the old id.
        let keep = (0..finals.len())
            .max_by(|&a, &b| {
                let (x, y) = (&finals[a].0, &finals[b].0);
                x.len().cmp(&y.len()).then(y.iter().min().cmp(&x.iter().min()))
            })
            .unwrap();
        let inherit = finals.swap_remove(keep);
        finals.sort_by_key(|f| f.0.iter().copied().min());
        let mut ids = Vec::with_capacity(finals.len() + 1);
        for (verts, owner, es) in finals {
            ids.push(self.add_piece(verts, owner, es));
        }
        let (verts, owner, es) = inherit;
        for &v in &verts {
            self.piece_of[v] = pid;
        }
        self.pieces[pid] = Piece { vertices: verts, owner, es, alive: true };
        ids.push(pid);
        Ok(DecompEvent { separator, refinement: Some(Refinement { old: pid, old_size, pieces: ids }) })
    }

    fn split_after(&mut self, pid: PieceId, u: usize, v: usize) -> Vec<Vec<usize>> {
        if self.reaches(u, v, pid) {
            vec![self.pieces[pid].vertices.clone()]
        } else {
            self.components(pid)
        }
    }

    fn esless_step(&mut self, pid: PieceId, u: usize, v: usize, owner: usize) -> Vec<Tagged> {
        let comps = self.split_after(pid, u, v);
        match self.config.mode {
            Mode::Adaptive { .. } => comps.into_iter().map(|c| (c, None)).collect(),
            Mode::Oblivious { .. } => {
                if comps.len() == 1 {
                    return vec![(comps.into_iter().next().unwrap(), None)];
                }
                let quarter = self.align(self.unit(owner).low / 4);
                let mut out = Vec::new();
                for c in comps {
                    out.extend(self.partition_plus(&c, quarter, owner));
                }
                out
            }
        }
    }

    fn adaptive_step(&mut self, pid: PieceId, e: EdgeId, u: usize, v: usize, owner: usize, mut es: EsStructure) -> Vec<Tagged> {
        let unit = self.unit(owner);
        let omega = self.config.omega;
        es.remove_edge(e);
        let comps = self.split_after(pid, u, v);
        let root = es.root();
        let (mut with_root, others): (Vec<_>, Vec<_>) = comps.into_iter().partition(|c| c.binary_search(&root).is_ok());
        let root_comp = with_root.pop().expect("root stays in its piece");
        let outside: Vec<usize> = others.iter().flatten().copied().collect();
        es.remove_vertices_edges(&outside);
        let thr = (unit.high - unit.low) as f64 / (2 * omega) as f64;
        if (es.missing_in() as f64) < thr && (es.missing_out() as f64) < thr {
            let mut out: Vec<Tagged> = vec![(root_comp, Some(es))];
            out.extend(others.into_iter().map(|c| (c, None)));
            return out;
        }
        let mut out = Vec::new();
        for c in others {
            out.extend(self.partition_plus(&c, unit.low, owner));
        }
        let h = es.live_subgraph();
        let r2 = h.global(self.rng.gen_range(0..h.len()));
        self.root_log.push(r2);
        let rl = h.local(r2).unwrap();
        let (half, quarter) = (unit.low / 2, unit.low / 4);
        let nr = h.len();
        let out_d = h.distances(rl, false, Some(half));
        let in_d = h.distances(rl, true, Some(half));
        self.counters.touched += out_d.touched + in_d.touched;
        let lo = (quarter + 1).div_ceil(omega) * omega;
        let hi = self.align(half);
        self.counters.repartitions += 1;
        self.retire(Some(es));
        for reverse in [true, false] {
            let d = if reverse { &in_d } else { &out_d };
            let missing = d.dist.iter().filter(|x| x.is_none()).count();
            let ball = d.dist.iter().filter(|x| x.is_some_and(|y| y <= quarter)).count();
            if (missing as f64) < thr || 2 * ball < nr || hi < lo {
                continue;
            }
            self.counters.thin_layer_calls += 1;
            let layer = if reverse {
                wthin_layer(&h.reversed(), r2, lo, hi, omega)
            } else {
                wthin_layer(&h, r2, lo, hi, omega)
            };
            if let Ok(res) = layer {
                self.counters.touched += res.touched_cost;
                for &x in &res.layer_vertices {
                    if root_comp.binary_search(&x).is_ok() {
                        self.add_sep(x, owner);
                    }
                }
                out.extend(self.partition_plus(&root_comp, unit.low, owner));
                return out;
            }
        }
        let eighth = self.align(unit.low / 8);
        out.extend(self.partition_plus(&root_comp, eighth, owner));
        out
    }

    fn oblivious_step(&mut self, pid: PieceId, e: EdgeId, u: usize, v: usize, owner: usize, mut es: EsStructure) -> Vec<Tagged> {
        let unit = self.unit(owner);
        let omega = self.config.omega;
        let d = unit.low;
        let quarter = self.align(d / 4);
        es.remove_edge(e);
        let root = es.root();
        let mut comps = self.split_after(pid, u, v);
        loop {
            let idx = comps.iter().position(|c| c.binary_search(&root).is_ok()).unwrap();
            let outside: Vec<usize> = comps
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != idx)
                .flat_map(|(_, c)| c.iter().copied())
                .filter(|&x| !es.is_isolated(x))
                .collect();
            es.remove_vertices_edges(&outside);
            let far = comps[idx].iter().copied().find(|&x| es.out_level(x).is_none() || es.in_level(x).is_none());
            let Some(x) = far else { break };
            let h = es.live_subgraph();
            self.counters.fast_separator_calls += 1;
            let res = if es.out_level(x).is_none() {
                wfast_separator(&h.reversed(), x, quarter, omega)
            } else {
                wfast_separator(&h, x, quarter, omega)
            };
            let layer = match res {
                Ok(r) if !r.layer_vertices.is_empty() => {
                    self.counters.touched += r.touched_cost;
                    r.layer_vertices
                }
                _ => {
                    self.counters.fast_separator_fallbacks += 1;
                    vec![x]
                }
            };
            for &s in &layer {
                self.add_sep(s, owner);
            }
            es.remove_vertices_edges(&layer);
            comps = self.components(pid);
        }
        let idx = comps.iter().position(|c| c.binary_search(&root).is_ok()).unwrap();
        let root_comp = comps.swap_remove(idx);
        let mut out = Vec::new();
        for c in comps {
            if c.len() == 1 && self.sep_level[c[0]].is_some() {
                out.push((c, None));
            } else {
                out.extend(self.partition_plus(&c, quarter, owner));
            }
        }
        let far_both = es
            .vertices()
            .iter()
            .filter(|&&x| {
                let wide = |l: Option<u64>| l.is_none_or(|l| 2 * l >= d);
                wide(es.out_level(x)) && wide(es.in_level(x))
            })
            .count();
        if 2 * far_both > es.vertices().len() {
            self.counters.repartitions += 1;
            self.retire(Some(es));
            out.extend(self.partition_plus(&root_comp, quarter, owner));
        } else {
            out.push((root_comp, Some(es)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> DecrementalGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        DecrementalGraph::load_unweighted(n, &edges).unwrap()
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> DecrementalGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        DecrementalGraph::load_unweighted(n, &edges).unwrap()
    }

    /// Exact diameter of every piece in `G ∖ E(S)`; `None` if a piece is not
    /// strongly connected.
    fn piece_diameters(dec: &Decomposition) -> Option<Vec<(PieceId, u64)>> {
        let mut out = Vec::new();
        for id in dec.piece_ids() {
            let view = dec.view(dec.piece(id));
            let mut diam = 0;
            for r in 0..view.len() {
                for x in view.distances(r, false, None).dist {
                    diam = diam.max(x?);
                }
            }
            out.push((id, diam));
        }
        Some(out)
    }

    fn check(dec: &Decomposition) {
        let diam = piece_diameters(dec).expect("pieces strongly connected");
        for &(id, d) in &diam {
            let bound = dec.level_bound(dec.owner_level(id));
            assert!(d <= bound || dec.piece(id).len() == 1, "piece {id} diameter {d} > {bound}");
        }
        if dec.config().hierarchical {
            let total: u64 = diam.iter().map(|&(_, d)| d).sum();
            assert!(total <= 2 * dec.config().diameter_bound(), "diameter sum {total}");
        }
        let whole = Subgraph::induced(dec.graph(), &(0..dec.n()).collect::<Vec<_>>(), |e| dec.in_final_graph(e));
        assert_eq!(whole.sccs().len(), dec.piece_count());
        for comp in whole.sccs() {
            let id = dec.piece_of(whole.global(comp[0]));
            assert_eq!(dec.piece(id).len(), comp.len());
        }
    }

    #[test]
    fn dag_gives_singletons() {
        let g = DecrementalGraph::load_unweighted(5, &[(0, 1), (1, 2), (2, 3), (0, 4)]).unwrap();
        let dec = Decomposition::new(g, DecompConfig::adaptive(2, 16), 1).unwrap();
        assert_eq!(dec.separator_size(), 0);
        assert_eq!(dec.piece_count(), 5);
    }

    #[test]
    fn short_cycle_is_one_piece() {
        let dec = Decomposition::new(cycle(5), DecompConfig::adaptive(10, 20), 1).unwrap();
        assert_eq!(dec.separator_size(), 0);
        assert_eq!(dec.piece_count(), 1);
        assert!(dec.piece_root(0).is_some());
    }

    #[test]
    fn two_cycle_split() {
        let g = DecrementalGraph::load_unweighted(2, &[(0, 1), (1, 0)]).unwrap();
        for cfg in [DecompConfig::adaptive(2, 8), DecompConfig::oblivious(8)] {
            let mut dec = Decomposition::new(g.clone(), cfg, 3).unwrap();
            assert_eq!(dec.piece_count(), 1);
            let ev = dec.delete(0).unwrap();
            assert!(ev.separator.is_empty());
            let r = ev.refinement.unwrap();
            assert_eq!(r.pieces.len(), 2);
            assert_eq!(*r.pieces.last().unwrap(), r.old);
            assert_eq!(dec.piece_count(), 2);
        }
    }

    #[test]
    fn harmless_deletion_is_silent() {
        let mut edges: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.push((0, 3));
        let g = DecrementalGraph::load_unweighted(6, &edges).unwrap();
        let mut dec = Decomposition::new(g, DecompConfig::adaptive(6, 20), 2).unwrap();
        assert!(dec.delete(6).unwrap().is_empty());
    }

    #[test]
    fn oblivious_small_d_keeps_everything_in_s() {
        let dec = Decomposition::new(cycle(20), DecompConfig::oblivious(4), 1).unwrap();
        assert_eq!(dec.separator_size(), 20);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(Decomposition::new(cycle(4), DecompConfig::adaptive(4, 4), 0), Err(DecompError::Order { .. })));
        assert!(matches!(Decomposition::new(cycle(64), DecompConfig::adaptive(4, 8), 0), Err(DecompError::Floor { .. })));
        let w = DecrementalGraph::load(2, &[(0, 1, 3)]).unwrap();
        assert!(matches!(
            Decomposition::new(w, DecompConfig::oblivious(8).weighted(2), 0),
            Err(DecompError::WeightRange { .. })
        ));
    }

    fn run_script(cfg: DecompConfig, seed: u64) {
        let g = random_graph(60, 180, seed);
        let mut dec = Decomposition::new(g, cfg, seed).unwrap();
        check(&dec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut order: Vec<EdgeId> = dec.graph().alive_edges().collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut s_before = dec.separator_size();
        for e in order {
            let before: Vec<PieceId> = (0..dec.n()).map(|v| dec.piece_of(v)).collect();
            let ev = dec.delete(e).unwrap();
            assert!(dec.separator_size() >= s_before);
            s_before = dec.separator_size();
            if let Some(r) = &ev.refinement {
                let total: usize = r.pieces.iter().map(|&p| dec.piece(p).len()).sum();
                assert_eq!(total, r.old_size);
                for &p in &r.pieces[..r.pieces.len() - 1] {
                    assert!(2 * dec.piece(p).len() <= r.old_size);
                }
                for &p in &r.pieces {
                    for &v in dec.piece(p) {
                        assert_eq!(before[v], r.old);
                    }
                }
            }
            for &(v, _) in &ev.separator {
                assert_eq!(before[v], ev.refinement.as_ref().unwrap().old);
            }
            check(&dec);
        }
    }

    #[test]
    fn adaptive_scripts_keep_invariants() {
        for seed in 0..3 {
            run_script(DecompConfig::adaptive(6, 20), seed);
        }
    }

    #[test]
    fn oblivious_scripts_keep_invariants() {
        for seed in 0..3 {
            run_script(DecompConfig::oblivious(28), seed);
        }
    }

    #[test]
    fn hierarchical_scripts_keep_invariants() {
        for seed in 0..3 {
            run_script(DecompConfig::adaptive(12, 40).hierarchical(), seed);
            run_script(DecompConfig::oblivious(40).hierarchical(), seed);
        }
    }

    #[test]
    fn weighted_unit_input_matches_unweighted() {
        let g = random_graph(40, 120, 9);
        let a = Decomposition::new(g.clone(), DecompConfig::adaptive(6, 20), 4).unwrap();
        let b = Decomposition::new(g, DecompConfig::adaptive(6, 20).weighted(1), 4).unwrap();
        assert_eq!(a.separator_levels(), b.separator_levels());
        assert_eq!(a.root_log(), b.root_log());
    }
}
