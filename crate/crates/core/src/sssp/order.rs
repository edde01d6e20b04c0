//! The ordered list of contracted sets with prefix masses.

use crate::decomp::Decomposition;
use crate::subgraph::Subgraph;
use std::collections::BTreeMap;
use rustc_hash::FxHashMap as HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("set {0} is not in the order")]
    Unknown(usize),
    #[error("set {0} is already in the order")]
    Duplicate(usize),
    #[error("replacement mass {got} differs from the replaced mass {want}")]
    Mass { got: u64, want: u64 },
    #[error("set {0} has size zero")]
    Empty(usize),
}

/// Sets keyed by caller ids, in list order. `r(C)` is the total size of the
/// sets strictly before `C`.
#[derive(Debug, Clone, Default)]
pub struct TopOrder {
    by_rank: BTreeMap<u64, usize>,
    slot: HashMap<usize, (u64, u64)>,
    total: u64,
}

impl TopOrder {
    pub fn new(sets: impl IntoIterator<Item = (usize, u64)>) -> Result<Self, OrderError> {
        let mut t = TopOrder::default();
        for (key, size) in sets {
            if size == 0 {
                return Err(OrderError::Empty(key));
            }
            if t.slot.insert(key, (t.total, size)).is_some() {
                return Err(OrderError::Duplicate(key));
            }
            t.by_rank.insert(t.total, key);
            t.total += size;
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot.is_empty()
    }

    /// Sum of all sizes.
    pub fn mass(&self) -> u64 {
        self.total
    }

    pub fn contains(&self, key: usize) -> bool {
        self.slot.contains_key(&key)
    }

    pub fn r(&self, key: usize) -> Option<u64> {
        self.slot.get(&key).map(|s| s.0)
    }

    pub fn size(&self, key: usize) -> Option<u64> {
        self.slot.get(&key).map(|s| s.1)
    }

    /// Mass strictly between two sets, in either order; 0 for a set and itself.
    pub fn between(&self, a: usize, b: usize) -> u64 {
        let (Some(&(ra, sa)), Some(&(rb, sb))) = (self.slot.get(&a), self.slot.get(&b)) else {
            return 0;
        };
        if ra == rb {
            0
        } else if ra < rb {
            rb - ra - sa
        } else {
            ra - rb - sb
        }
    }

    /// Keys in list order.
    pub fn keys(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_rank.values().copied()
    }

    /// Replaces `old` by `parts` (in order); their sizes must add up to the
    /// size of `old`, so no other set moves. A part may reuse the key `old`.
    pub fn replace(&mut self, old: usize, parts: &[(usize, u64)]) -> Result<(), OrderError> {
        let (r, size) = *self.slot.get(&old).ok_or(OrderError::Unknown(old))?;
        let got: u64 = parts.iter().map(|p| p.1).sum();
        if got != size {
            return Err(OrderError::Mass { got, want: size });
        }
        for &(key, s) in parts {
            if s == 0 {
                return Err(OrderError::Empty(key));
            }
            if key != old && self.slot.contains_key(&key) {
                return Err(OrderError::Duplicate(key));
            }
        }
        self.slot.remove(&old);
        self.by_rank.remove(&r);
        let mut at = r;
        for &(key, s) in parts {
            self.slot.insert(key, (at, s));
            self.by_rank.insert(at, key);
            at += s;
        }
        Ok(())
    }
}

/// Orders vertex-disjoint sets that are each strongly connected in the
/// decomposition's final graph: first by the SCCs of `G_0` restricted to
/// their union (topologically), then within each such group by `G_1`, and so
/// on. Ties go to the smallest contained vertex. Returns the keys.
pub fn order_sets(dec: &Decomposition, sets: &[(usize, Vec<usize>)]) -> Vec<usize> {
    let mut owner: HashMap<usize, usize> = HashMap::default();
    for (i, (_, verts)) in sets.iter().enumerate() {
        for &v in verts {
            owner.insert(v, i);
        }
    }
    let mut out = Vec::with_capacity(sets.len());
    let all: Vec<usize> = (0..sets.len()).collect();
    refine(dec, sets, &owner, all, 0, &mut out);
    out
}

fn refine(
    dec: &Decomposition,
    sets: &[(usize, Vec<usize>)],
    owner: &HashMap<usize, usize>,
    group: Vec<usize>,
    level: usize,
    out: &mut Vec<usize>,
) {
    if group.len() == 1 {
        out.push(sets[group[0]].0);
        return;
    }
    let top = dec.top_level();
    if level > top {
        let mut g = group;
        g.sort_by_key(|&i| sets[i].1.iter().min().copied());
        out.extend(g.into_iter().map(|i| sets[i].0));
        return;
    }
    // One vertex per set, named by its smallest member so ties follow it.
    let rep: HashMap<usize, usize> = group.iter().map(|&i| (i, *sets[i].1.iter().min().unwrap())).collect();
    let g = dec.graph();
    let mut edges = Vec::new();
    for &i in &group {
        for &v in &sets[i].1 {
            for e in g.out_edges(v) {
                let to = g.edge(e).to;
                let Some(&j) = owner.get(&to) else { continue };
                if j != i && rep.contains_key(&j) && dec.in_level_graph(e, level) {
                    edges.push((rep[&i], rep[&j], 1, e));
                }
            }
        }
    }
    let vertices: Vec<usize> = group.iter().map(|i| rep[i]).collect();
    let contracted = Subgraph::from_edges(&vertices, edges);
    let back: HashMap<usize, usize> = group.iter().map(|&i| (rep[&i], i)).collect();
    for comp in contracted.sccs() {
        let members: Vec<usize> = comp.iter().map(|&l| back[&contracted.global(l)]).collect();
        refine(dec, sets, owner, members, level + 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_masses() {
        let t = TopOrder::new([(7, 2), (3, 1), (9, 4)]).unwrap();
        assert_eq!(t.r(7), Some(0));
        assert_eq!(t.r(3), Some(2));
        assert_eq!(t.r(9), Some(3));
        assert_eq!(t.between(7, 9), 1);
        assert_eq!(t.between(9, 7), 1);
        assert_eq!(t.between(7, 3), 0);
        assert_eq!(t.between(3, 3), 0);
        assert_eq!(t.keys().collect::<Vec<_>>(), vec![7, 3, 9]);
    }

    #[test]
    fn replace_keeps_successors() {
        let mut t = TopOrder::new([(0, 1), (1, 5), (2, 3)]).unwrap();
        t.replace(1, &[(4, 2), (1, 1), (5, 2)]).unwrap();
        assert_eq!(t.keys().collect::<Vec<_>>(), vec![0, 4, 1, 5, 2]);
        assert_eq!(t.r(2), Some(6));
        assert_eq!(t.r(1), Some(3));
        assert_eq!(t.between(0, 2), 5);
        assert_eq!(t.replace(1, &[(8, 2)]), Err(OrderError::Mass { got: 2, want: 1 }));
        assert_eq!(t.replace(1, &[(2, 1)]), Err(OrderError::Duplicate(2)));
        assert_eq!(t.replace(42, &[]), Err(OrderError::Unknown(42)));
    }
}
