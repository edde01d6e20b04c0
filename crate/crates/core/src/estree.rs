//! Even–Shiloach in/out shortest-path trees from a root, truncated at a
//! distance threshold and maintained under edge deletions.
//!
//! Integer weights are handled with the level-increase discipline: a vertex
//! that loses its last tight in-edge jumps to its minimum candidate level and
//! notifies its tree children.

use crate::graph::EdgeId;
use crate::pq::IndexedMinHeap;
use crate::subgraph::{LocalEdge, Subgraph};
use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EsError {
    #[error("root {0} is not a vertex of the view")]
    RootNotInView(usize),
}

/// Which tree of an [`EsStructure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Distances from the root.
    Out,
    /// Distances to the root.
    In,
}

#[derive(Debug, Clone)]
struct Tree {
    reverse: bool,
    dist: Vec<u64>,
    parent: Vec<Option<usize>>,
    ptr: Vec<usize>,
    missing: usize,
    scans: Vec<u64>,
    level_increases: u64,
    /// Local vertices whose distance rose, when tracking is on.
    changed: Option<Vec<usize>>,
}

/// Edge lists and liveness shared by both trees.
#[derive(Debug, Clone)]
struct Local {
    edges: Vec<LocalEdge>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    alive: Vec<bool>,
}

impl Local {
    fn into_list(&self, reverse: bool, v: usize) -> &[usize] {
        if reverse {
            &self.out_adj[v]
        } else {
            &self.in_adj[v]
        }
    }
    fn out_list(&self, reverse: bool, v: usize) -> &[usize] {
        if reverse {
            &self.in_adj[v]
        } else {
            &self.out_adj[v]
        }
    }
    fn tail(&self, reverse: bool, e: usize) -> usize {
        if reverse {
            self.edges[e].to
        } else {
            self.edges[e].from
        }
    }
    fn head(&self, reverse: bool, e: usize) -> usize {
        if reverse {
            self.edges[e].from
        } else {
            self.edges[e].to
        }
    }
}

impl Tree {
    fn build(local: &Local, root: usize, threshold: u64, reverse: bool) -> Tree {
        let n = local.out_adj.len();
        let unreach = threshold + 1;
        let mut dist = vec![unreach; n];
        let mut heap: IndexedMinHeap<u64> = IndexedMinHeap::with_capacity(n);
        let mut done = vec![false; n];
        let mut scans = vec![0u64; local.edges.len()];
        heap.set(root, 0);
        while let Some((v, dv)) = heap.pop_min() {
            done[v] = true;
            dist[v] = dv;
            for &e in local.out_list(reverse, v) {
                scans[e] += 1;
                let w = local.head(reverse, e);
                let nd = dv + local.edges[e].weight;
                if done[w] || nd > threshold {
                    continue;
                }
                if heap.key(w).is_none_or(|k| nd < k) {
                    heap.set(w, nd);
                }
            }
        }
        let mut parent = vec![None; n];
        let mut ptr = vec![0usize; n];
        for v in 0..n {
            if v == root || dist[v] == unreach {
                continue;
            }
            for (i, &e) in local.into_list(reverse, v).iter().enumerate() {
                scans[e] += 1;
                let x = local.tail(reverse, e);
                if dist[x] != unreach && dist[x] + local.edges[e].weight == dist[v] {
                    parent[v] = Some(e);
                    ptr[v] = i;
                    break;
                }
            }
        }
        let missing = dist.iter().filter(|&&d| d == unreach).count();
        Tree { reverse, dist, parent, ptr, missing, scans, level_increases: 0, changed: None }
    }

    fn repair(&mut self, local: &Local, dead: &[usize], threshold: u64) {
        let unreach = threshold + 1;
        let r = self.reverse;
        let mut heap: IndexedMinHeap<u64> = IndexedMinHeap::new();
        for &e in dead {
            let h = local.head(r, e);
            if self.parent[h] == Some(e) {
                heap.insert_if_absent(h, self.dist[h]);
            }
        }
        while let Some((v, _)) = heap.pop_min() {
            if self.dist[v] == unreach {
                continue;
            }
            let list = local.into_list(r, v);
            let mut found = None;
            while self.ptr[v] < list.len() {
                let e = list[self.ptr[v]];
                self.scans[e] += 1;
                if local.alive[e] {
                    let x = local.tail(r, e);
                    if self.dist[x] != unreach && self.dist[x] + local.edges[e].weight == self.dist[v] {
                        found = Some(e);
                        break;
                    }
                }
                self.ptr[v] += 1;
            }
            if found.is_some() {
                self.parent[v] = found;
                continue;
            }
            let mut best = unreach;
            for &e in list {
                self.scans[e] += 1;
                if local.alive[e] {
                    let x = local.tail(r, e);
                    if self.dist[x] != unreach {
                        best = best.min(self.dist[x] + local.edges[e].weight);
                    }
                }
            }
            let new = best.min(unreach);
            debug_assert!(new > self.dist[v]);
            self.dist[v] = new;
            self.ptr[v] = 0;
            self.parent[v] = None;
            self.level_increases += 1;
            if let Some(log) = &mut self.changed {
                log.push(v);
            }
            if new == unreach {
                self.missing += 1;
            } else {
                heap.insert_if_absent(v, new);
            }
            for &e in local.out_list(r, v) {
                self.scans[e] += 1;
                let h = local.head(r, e);
                if self.parent[h] == Some(e) {
                    heap.insert_if_absent(h, self.dist[h]);
                }
            }
        }
    }
}

/// Out-tree and in-tree from one root over a snapshot of a subgraph.
#[derive(Debug, Clone)]
pub struct EsStructure {
    vertices: Vec<usize>,
    index: HashMap<usize, usize>,
    edge_index: HashMap<EdgeId, usize>,
    local: Local,
    root: usize,
    threshold: u64,
    out_tree: Tree,
    in_tree: Tree,
}

impl EsStructure {
    /// Builds both trees on `view` rooted at the global vertex `root`.
    pub fn build(view: &Subgraph, root: usize, threshold: u64) -> Result<Self, EsError> {
        let r = view.local(root).ok_or(EsError::RootNotInView(root))?;
        let k = view.len();
        let local = Local {
            edges: view.edges().to_vec(),
            out_adj: (0..k).map(|v| view.out_edges(v).to_vec()).collect(),
            in_adj: (0..k).map(|v| view.in_edges(v).to_vec()).collect(),
            alive: vec![true; view.edge_count()],
        };
        let out_tree = Tree::build(&local, r, threshold, false);
        let in_tree = Tree::build(&local, r, threshold, true);
        Ok(EsStructure {
            vertices: view.vertices().to_vec(),
            index: view.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect(),
            edge_index: view.edges().iter().enumerate().map(|(i, e)| (e.id, i)).collect(),
            local,
            root,
            threshold,
            out_tree,
            in_tree,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Global vertices of the view, in local order.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.index.contains_key(&v)
    }

    /// Whether `e` is a live edge of this structure.
    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edge_index.get(&e).is_some_and(|&i| self.local.alive[i])
    }

    fn tree(&self, dir: Direction) -> &Tree {
        match dir {
            Direction::Out => &self.out_tree,
            Direction::In => &self.in_tree,
        }
    }

    /// Distance from (out) or to (in) the root, `None` beyond the threshold.
    pub fn level(&self, dir: Direction, v: usize) -> Option<u64> {
        let i = *self.index.get(&v)?;
        let d = self.tree(dir).dist[i];
        (d <= self.threshold).then_some(d)
    }

    pub fn out_level(&self, v: usize) -> Option<u64> {
        self.level(Direction::Out, v)
    }

    pub fn in_level(&self, v: usize) -> Option<u64> {
        self.level(Direction::In, v)
    }

    pub fn missing(&self, dir: Direction) -> usize {
        self.tree(dir).missing
    }

    pub fn missing_out(&self) -> usize {
        self.out_tree.missing
    }

    pub fn missing_in(&self) -> usize {
        self.in_tree.missing
    }

    /// Tree edge (global id) entering `v` in the out-tree, or leaving `v`
    /// towards the root in the in-tree.
    pub fn parent_edge(&self, dir: Direction, v: usize) -> Option<EdgeId> {
        let i = *self.index.get(&v)?;
        self.tree(dir).parent[i].map(|e| self.local.edges[e].id)
    }

    /// Vertex path root→v (out) or v→root (in) along tree edges.
    pub fn tree_path(&self, dir: Direction, v: usize) -> Option<Vec<usize>> {
        let mut i = *self.index.get(&v)?;
        let t = self.tree(dir);
        if t.dist[i] > self.threshold {
            return None;
        }
        let r = self.index[&self.root];
        let mut path = vec![self.vertices[i]];
        while i != r {
            let e = t.parent[i]?;
            i = self.local.tail(t.reverse, e);
            path.push(self.vertices[i]);
        }
        if dir == Direction::Out {
            path.reverse();
        }
        Some(path)
    }

    /// Deletes a global edge; returns `false` if it was not live here.
    pub fn remove_edge(&mut self, e: EdgeId) -> bool {
        match self.edge_index.get(&e) {
            Some(&i) if self.local.alive[i] => {
                self.local.alive[i] = false;
                self.repair(&[i]);
                true
            }
            _ => false,
        }
    }

    /// Deletes every live edge incident to the global vertex `v` in one batch.
    pub fn remove_vertex_edges(&mut self, v: usize) {
        self.remove_vertices_edges(&[v]);
    }

    /// Batched form of [`remove_vertex_edges`](Self::remove_vertex_edges).
    pub fn remove_vertices_edges(&mut self, vs: &[usize]) {
        let mut dead = Vec::new();
        for v in vs {
            let Some(&i) = self.index.get(v) else { continue };
            for &e in self.local.out_adj[i].iter().chain(self.local.in_adj[i].iter()) {
                if self.local.alive[e] {
                    self.local.alive[e] = false;
                    dead.push(e);
                }
            }
        }
        if !dead.is_empty() {
            self.repair(&dead);
        }
    }

    /// Starts recording distance increases of one tree.
    pub fn track_changes(&mut self, dir: Direction) {
        let t = match dir {
            Direction::Out => &mut self.out_tree,
            Direction::In => &mut self.in_tree,
        };
        t.changed.get_or_insert_with(Vec::new);
    }

    /// Global vertices whose distance rose since the previous call, sorted;
    /// empty unless tracking is on.
    pub fn take_changed(&mut self, dir: Direction) -> Vec<usize> {
        let t = match dir {
            Direction::Out => &mut self.out_tree,
            Direction::In => &mut self.in_tree,
        };
        let Some(log) = &mut t.changed else { return Vec::new() };
        let mut out: Vec<usize> = log.drain(..).map(|i| self.vertices[i]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn repair(&mut self, dead: &[usize]) {
        self.out_tree.repair(&self.local, dead, self.threshold);
        self.in_tree.repair(&self.local, dead, self.threshold);
    }

    /// Snapshot of the live edges as a subgraph over the same vertices.
    pub fn live_subgraph(&self) -> Subgraph {
        let edges: Vec<_> = self
            .local
            .edges
            .iter()
            .zip(&self.local.alive)
            .filter(|(_, &a)| a)
            .map(|(e, _)| (self.vertices[e.from], self.vertices[e.to], e.weight, e.id))
            .collect();
        Subgraph::from_edges(&self.vertices, edges)
    }

    /// Whether `v` still has a live incident edge.
    pub fn is_isolated(&self, v: usize) -> bool {
        self.index.get(&v).is_none_or(|&i| {
            self.local.out_adj[i].iter().chain(&self.local.in_adj[i]).all(|&e| !self.local.alive[e])
        })
    }

    /// Per-edge scans `(global id, weight, out-tree scans, in-tree scans)`.
    pub fn edge_scans(&self) -> impl Iterator<Item = (EdgeId, u64, u64, u64)> + '_ {
        self.local
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id, e.weight, self.out_tree.scans[i], self.in_tree.scans[i]))
    }

    pub fn total_scans(&self) -> u64 {
        self.out_tree.scans.iter().chain(&self.in_tree.scans).sum()
    }

    pub fn level_increases(&self) -> u64 {
        self.out_tree.level_increases + self.in_tree.level_increases
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DecrementalGraph;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn view(g: &DecrementalGraph) -> Subgraph {
        Subgraph::whole(g)
    }

    /// Truncated Bellman–Ford, independent of the tree code.
    fn reference(g: &DecrementalGraph, r: usize, d: u64, reverse: bool) -> Vec<Option<u64>> {
        let mut dist = vec![u64::MAX; g.n()];
        dist[r] = 0;
        for _ in 0..g.n() {
            for e in g.alive_edges() {
                let ed = g.edge(e);
                let (a, b) = if reverse { (ed.to, ed.from) } else { (ed.from, ed.to) };
                if dist[a] != u64::MAX && dist[a] + ed.weight < dist[b] {
                    dist[b] = dist[a] + ed.weight;
                }
            }
        }
        dist.into_iter().map(|x| (x <= d).then_some(x)).collect()
    }

    fn check(es: &EsStructure, g: &DecrementalGraph) {
        let r = es.root();
        let out = reference(g, r, es.threshold(), false);
        let inn = reference(g, r, es.threshold(), true);
        for v in 0..g.n() {
            assert_eq!(es.out_level(v), out[v], "out level of {v}");
            assert_eq!(es.in_level(v), inn[v], "in level of {v}");
        }
        assert_eq!(es.missing_out(), out.iter().filter(|x| x.is_none()).count());
        assert_eq!(es.missing_in(), inn.iter().filter(|x| x.is_none()).count());
    }

    #[test]
    fn path_example() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let es = EsStructure::build(&view(&g), 0, 2).unwrap();
        assert_eq!((0..3).map(|v| es.out_level(v)).collect::<Vec<_>>(), vec![Some(0), Some(1), Some(2)]);
        assert_eq!((0..3).map(|v| es.in_level(v)).collect::<Vec<_>>(), vec![Some(0), None, None]);
        assert_eq!(es.missing_in(), 2);
        assert_eq!(es.tree_path(Direction::Out, 2), Some(vec![0, 1, 2]));
    }

    #[test]
    fn zero_threshold_keeps_only_root() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        let es = EsStructure::build(&view(&g), 1, 0).unwrap();
        assert_eq!(es.missing_out(), 2);
        assert_eq!(es.missing_in(), 2);
        assert_eq!(es.out_level(1), Some(0));
    }

    #[test]
    fn root_outside_view_is_an_error() {
        let g = DecrementalGraph::load_unweighted(3, &[(0, 1)]).unwrap();
        let sub = Subgraph::induced(&g, &[0, 1], |_| true);
        assert_eq!(EsStructure::build(&sub, 2, 3).unwrap_err(), EsError::RootNotInView(2));
    }

    #[test]
    fn sole_exit_and_slack_edges() {
        let mut g = DecrementalGraph::load_unweighted(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let mut es = EsStructure::build(&view(&g), 0, 5).unwrap();
        let before: Vec<_> = (0..4).map(|v| es.out_level(v)).collect();
        g.delete_edge(3).unwrap();
        es.remove_edge(3);
        assert_eq!((0..4).map(|v| es.out_level(v)).collect::<Vec<_>>(), before);
        g.delete_edge(0).unwrap();
        es.remove_edge(0);
        assert_eq!(es.missing_out(), 3);
        check(&es, &g);
    }

    #[test]
    fn isolating_vertices() {
        let g = DecrementalGraph::load_unweighted(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (0, 3)]).unwrap();
        let mut es = EsStructure::build(&view(&g), 0, 5).unwrap();
        es.remove_vertex_edges(0);
        assert_eq!(es.missing_out(), 3);
        assert_eq!(es.missing_in(), 3);
        let scans = es.total_scans();
        es.remove_vertex_edges(0);
        assert_eq!(es.total_scans(), scans);

        let mut g2 = g.clone();
        let mut es = EsStructure::build(&view(&g2), 0, 5).unwrap();
        es.remove_vertex_edges(2);
        for e in [2, 3] {
            g2.delete_edge(e).unwrap();
        }
        check(&es, &g2);
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize, max_w: u64) -> DecrementalGraph {
        let edges: Vec<_> = (0..m)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(1..=max_w)))
            .collect();
        DecrementalGraph::load(n, &edges).unwrap()
    }

    #[test]
    fn builds_match_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_graph(&mut rng, 40, 120, 1);
            let es = EsStructure::build(&view(&g), rng.gen_range(0..40), 10).unwrap();
            check(&es, &g);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn deletions_track_reference(seed in any::<u64>(), max_w in 1u64..4, d in 0u64..14) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..30);
            let mut g = random_graph(&mut rng, n, 4 * n, max_w);
            let mut es = EsStructure::build(&view(&g), 0, d).unwrap();
            let mut prev: Vec<_> = (0..n).map(|v| (es.out_level(v), es.in_level(v))).collect();
            while g.alive_count() > 0 {
                let alive: Vec<_> = g.alive_edges().collect();
                let e = alive[rng.gen_range(0..alive.len())];
                g.delete_edge(e).unwrap();
                prop_assert!(es.remove_edge(e));
                check(&es, &g);
                for v in 0..n {
                    let now = (es.out_level(v), es.in_level(v));
                    let grow = |a: Option<u64>, b: Option<u64>| match (a, b) { (Some(x), Some(y)) => x <= y, (_, None) => true, (None, Some(_)) => false };
                    prop_assert!(grow(prev[v].0, now.0) && grow(prev[v].1, now.1));
                    prev[v] = now;
                }
            }
            for (_, _, so, si) in es.edge_scans() {
                prop_assert!(so <= 4 * (d + 2) + 1 && si <= 4 * (d + 2) + 1);
            }
        }
    }
}
