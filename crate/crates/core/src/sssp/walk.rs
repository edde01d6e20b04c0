//! Turning a walk through contracted sets into a walk in the graph.

use crate::decomp::Decomposition;
use crate::estree::Direction;
use std::collections::VecDeque;
use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

/// A walk through sets: `hops[i]` is a graph edge `(x, y)` with `x` in
/// `sets[i]` and `y` in `sets[i + 1]`.
#[derive(Debug, Clone, Default)]
pub(crate) struct SetWalk {
    pub sets: Vec<usize>,
    pub hops: Vec<(usize, usize)>,
}

impl SetWalk {
    pub fn start(set: usize) -> Self {
        SetWalk { sets: vec![set], hops: Vec::new() }
    }

    pub fn push(&mut self, hop: (usize, usize), set: usize) {
        self.hops.push(hop);
        self.sets.push(set);
    }

    /// Cuts every loop so each set appears once; the hop into the first
    /// visit and the hop out of the last visit are kept.
    pub fn simplify(&mut self) {
        let mut seen: HashMap<usize, usize> = HashMap::default();
        let mut sets: Vec<usize> = Vec::with_capacity(self.sets.len());
        let mut hops: Vec<(usize, usize)> = Vec::with_capacity(self.hops.len());
        for (i, &s) in self.sets.iter().enumerate() {
            if let Some(&p) = seen.get(&s) {
                for gone in sets.drain(p + 1..) {
                    seen.remove(&gone);
                }
                hops.truncate(p);
            } else {
                if i > 0 {
                    hops.push(self.hops[i - 1]);
                }
                seen.insert(s, sets.len());
                sets.push(s);
            }
        }
        self.sets = sets;
        self.hops = hops;
    }

    /// Expands the walk from `source` to `target`, routing inside each set
    /// with `route(a, b)`.
    pub fn expand(&self, source: usize, target: usize, mut route: impl FnMut(usize, usize) -> Option<Vec<usize>>) -> Option<Vec<usize>> {
        let mut walk = vec![source];
        let mut cur = source;
        for &(x, y) in &self.hops {
            walk.extend(route(cur, x)?.into_iter().skip(1));
            walk.push(y);
            cur = y;
        }
        walk.extend(route(cur, target)?.into_iter().skip(1));
        Some(shortcut(walk))
    }
}

/// Removes repeated vertices, keeping the walk valid.
pub(crate) fn shortcut(walk: Vec<usize>) -> Vec<usize> {
    let mut pos: HashMap<usize, usize> = HashMap::default();
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    for v in walk {
        if let Some(&p) = pos.get(&v) {
            for gone in out.drain(p + 1..) {
                pos.remove(&gone);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Route from `a` to `b` inside one piece: up the in-tree to the root, then
/// down the out-tree. Falls back to a BFS inside the piece when a tree does
/// not reach.
pub(crate) fn route_in_piece(dec: &Decomposition, a: usize, b: usize) -> Option<Vec<usize>> {
    if a == b {
        return Some(vec![a]);
    }
    if let (Some(up), Some(down)) = (dec.tree_path(Direction::In, a), dec.tree_path(Direction::Out, b)) {
        let mut p = up;
        p.extend(down.into_iter().skip(1));
        return Some(p);
    }
    bfs_in_piece(dec, a, b)
}

fn bfs_in_piece(dec: &Decomposition, a: usize, b: usize) -> Option<Vec<usize>> {
    let pid = dec.piece_of(a);
    let members: HashSet<usize> = dec.piece(pid).iter().copied().collect();
    let g = dec.graph();
    let mut prev: HashMap<usize, usize> = HashMap::default();
    let mut queue = VecDeque::from([a]);
    prev.insert(a, a);
    while let Some(v) = queue.pop_front() {
        if v == b {
            let mut path = vec![b];
            let mut x = b;
            while x != a {
                x = prev[&x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for e in g.out_edges(v) {
            let w = g.edge(e).to;
            if members.contains(&w) && dec.in_final_graph(e) && !prev.contains_key(&w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}
