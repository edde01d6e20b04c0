//! Compact snapshots of vertex-induced subgraphs and the traversals run on them.

use crate::graph::{DecrementalGraph, EdgeId};
use crate::pq::IndexedMinHeap;
use std::collections::{BinaryHeap, VecDeque};
use rustc_hash::FxHashMap as HashMap;
use std::cmp::Reverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEdge {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
    /// Id of the edge in the host graph.
    pub id: EdgeId,
}

/// A subgraph with local vertex indices `0..len()`; local order follows the
/// order in which vertices were supplied.
#[derive(Debug, Clone, Default)]
pub struct Subgraph {
    vertices: Vec<usize>,
    index: HashMap<usize, usize>,
    edges: Vec<LocalEdge>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

/// Distances from a root; `None` for vertices beyond the limit or unreachable.
#[derive(Debug, Clone)]
pub struct Distances {
    pub dist: Vec<Option<u64>>,
    /// Edges examined while growing the search.
    pub touched: u64,
}

impl Subgraph {
    /// Global edges `(from, to, weight, id)` whose endpoints are both in `vertices`.
    pub fn from_edges(vertices: &[usize], edges: impl IntoIterator<Item = (usize, usize, u64, EdgeId)>) -> Self {
        let index: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let k = vertices.len();
        let mut sg = Subgraph {
            vertices: vertices.to_vec(),
            index,
            edges: Vec::new(),
            out_adj: vec![Vec::new(); k],
            in_adj: vec![Vec::new(); k],
        };
        for (u, v, w, id) in edges {
            if let (Some(&a), Some(&b)) = (sg.index.get(&u), sg.index.get(&v)) {
                let li = sg.edges.len();
                sg.edges.push(LocalEdge { from: a, to: b, weight: w, id });
                sg.out_adj[a].push(li);
                sg.in_adj[b].push(li);
            }
        }
        sg
    }

    /// Subgraph of `g` induced by `vertices`, keeping live edges accepted by `keep`.
    pub fn induced(g: &DecrementalGraph, vertices: &[usize], keep: impl Fn(EdgeId) -> bool) -> Self {
        let mut member = HashMap::with_capacity_and_hasher(vertices.len(), Default::default());
        for (i, &v) in vertices.iter().enumerate() {
            member.insert(v, i);
        }
        let edges = vertices.iter().flat_map(|&u| {
            g.out_edges(u).filter_map(|e| {
                let ed = g.edge(e);
                (member.contains_key(&ed.to) && keep(e)).then_some((ed.from, ed.to, ed.weight, e))
            })
        });
        let collected: Vec<_> = edges.collect();
        Self::from_edges(vertices, collected)
    }

    /// The whole live graph.
    pub fn whole(g: &DecrementalGraph) -> Self {
        let all: Vec<usize> = (0..g.n()).collect();
        Self::induced(g, &all, |_| true)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn global(&self, local: usize) -> usize {
        self.vertices[local]
    }

    pub fn local(&self, global: usize) -> Option<usize> {
        self.index.get(&global).copied()
    }

    pub fn edges(&self) -> &[LocalEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1)
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).max().unwrap_or(1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.out_adj[v].len() + self.in_adj[v].len()
    }

    /// Same vertices with every edge reversed.
    pub fn reversed(&self) -> Subgraph {
        let edges = self
            .edges
            .iter()
            .map(|e| (self.vertices[e.to], self.vertices[e.from], e.weight, e.id));
        Subgraph::from_edges(&self.vertices, edges.collect::<Vec<_>>())
    }

    /// Subgraph induced by the local vertices `keep` (in that order),
    /// retaining edges accepted by `edge_ok` (called with local edge index).
    pub fn restrict(&self, keep: &[usize], edge_ok: impl Fn(usize) -> bool) -> Subgraph {
        let globals: Vec<usize> = keep.iter().map(|&l| self.vertices[l]).collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| edge_ok(i))
            .map(|(_, e)| (self.vertices[e.from], self.vertices[e.to], e.weight, e.id))
            .collect();
        Subgraph::from_edges(&globals, edges)
    }

    /// Removes every edge with an endpoint in `cut` (local indices).
    pub fn without_edges_at(&self, cut: &[usize]) -> Subgraph {
        let mut bad = vec![false; self.len()];
        for &c in cut {
            bad[c] = true;
        }
        let all: Vec<usize> = (0..self.len()).collect();
        self.restrict(&all, |i| {
            let e = self.edges[i];
            !bad[e.from] && !bad[e.to]
        })
    }

    /// Shortest distances from `root` along out-edges (`reverse = false`) or
    /// in-edges, truncated at `limit`.
    pub fn distances(&self, root: usize, reverse: bool, limit: Option<u64>) -> Distances {
        let n = self.len();
        let mut dist = vec![None; n];
        let mut touched = 0u64;
        let within = |d: u64| limit.is_none_or(|l| d <= l);
        let adj = if reverse { &self.in_adj } else { &self.out_adj };
        let head = |e: &LocalEdge| if reverse { e.from } else { e.to };
        if self.is_unit_weight() {
            let mut q = VecDeque::new();
            dist[root] = Some(0);
            q.push_back(root);
            while let Some(v) = q.pop_front() {
                let dv = dist[v].unwrap();
                if !within(dv + 1) {
                    continue;
                }
                for &ei in &adj[v] {
                    touched += 1;
                    let w = head(&self.edges[ei]);
                    if dist[w].is_none() {
                        dist[w] = Some(dv + 1);
                        q.push_back(w);
                    }
                }
            }
        } else {
            let mut heap: IndexedMinHeap<u64> = IndexedMinHeap::with_capacity(n);
            let mut done = vec![false; n];
            heap.set(root, 0);
            while let Some((v, dv)) = heap.pop_min() {
                done[v] = true;
                dist[v] = Some(dv);
                for &ei in &adj[v] {
                    touched += 1;
                    let e = &self.edges[ei];
                    let w = head(e);
                    let nd = dv + e.weight;
                    if done[w] || !within(nd) {
                        continue;
                    }
                    if heap.key(w).is_none_or(|k| nd < k) {
                        heap.set(w, nd);
                    }
                }
            }
        }
        Distances { dist, touched }
    }

    /// Strongly connected components (local indices, each sorted),
    /// listed in topological order of the condensation with ties broken by
    /// the smallest global vertex id.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let comp = self.component_ids();
        let k = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut members = vec![Vec::new(); k];
        for v in 0..self.len() {
            members[comp[v]].push(v);
        }
        let mut indeg = vec![0usize; k];
        let mut succ = vec![Vec::new(); k];
        for e in &self.edges {
            let (a, b) = (comp[e.from], comp[e.to]);
            if a != b {
                succ[a].push(b);
                indeg[b] += 1;
            }
        }
        let key = |c: usize, m: &Vec<Vec<usize>>| m[c].iter().map(|&v| self.vertices[v]).min().unwrap();
        let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..k)
            .filter(|&c| indeg[c] == 0)
            .map(|c| Reverse((key(c, &members), c)))
            .collect();
        let mut order = Vec::with_capacity(k);
        while let Some(Reverse((_, c))) = ready.pop() {
            order.push(c);
            for &d in &succ[c] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(Reverse((key(d, &members), d)));
                }
            }
        }
        order.into_iter().map(|c| std::mem::take(&mut members[c])).collect()
    }

    /// Component index per local vertex (iterative Tarjan).
    pub fn component_ids(&self) -> Vec<usize> {
        const UNSEEN: usize = usize::MAX;
        let n = self.len();
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut comp = vec![UNSEEN; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_comp = 0;
        let mut call: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if index[start] != UNSEEN {
                continue;
            }
            call.push((start, 0));
            index[start] = next_index;
            low[start] = next_index;
            next_index += 1;
            stack.push(start);
            on_stack[start] = true;
            while let Some(&mut (v, ref mut it)) = call.last_mut() {
                if *it < self.out_adj[v].len() {
                    let w = self.edges[self.out_adj[v][*it]].to;
                    *it += 1;
                    if index[w] == UNSEEN {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(p, _)) = call.last() {
                        low[p] = low[p].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
        comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sg(n: usize, edges: &[(usize, usize, u64)]) -> Subgraph {
        let vs: Vec<usize> = (0..n).collect();
        Subgraph::from_edges(&vs, edges.iter().enumerate().map(|(i, &(u, v, w))| (u, v, w, i)))
    }

    #[test]
    fn sccs_come_out_topologically() {
        // 0 <-> 1 -> 2 <-> 3, 4 isolated
        let h = sg(5, &[(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 3, 1), (3, 2, 1)]);
        assert_eq!(h.sccs(), vec![vec![0, 1], vec![2, 3], vec![4]]);
        let r = h.reversed();
        assert_eq!(r.sccs(), vec![vec![2, 3], vec![0, 1], vec![4]]);
    }

    #[test]
    fn weighted_and_truncated_distances() {
        let h = sg(4, &[(0, 1, 2), (1, 2, 2), (0, 2, 5), (2, 3, 1)]);
        let d = h.distances(0, false, None).dist;
        assert_eq!(d, vec![Some(0), Some(2), Some(4), Some(5)]);
        let d = h.distances(0, false, Some(4)).dist;
        assert_eq!(d, vec![Some(0), Some(2), Some(4), None]);
        let back = h.distances(3, true, None).dist;
        assert_eq!(back, vec![Some(5), Some(3), Some(1), Some(0)]);
    }

    #[test]
    fn unit_bfs_respects_limit() {
        let h = sg(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
        assert_eq!(h.distances(0, false, Some(2)).dist, vec![Some(0), Some(1), Some(2), None]);
    }
}
