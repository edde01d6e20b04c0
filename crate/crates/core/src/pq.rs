//! Addressable binary min-heap over dense integer ids.

const ABSENT: usize = usize::MAX;

/// Min-heap of `(key, id)` pairs with at most one entry per id.
/// Ties on `key` are broken by smaller id.
#[derive(Debug, Clone, Default)]
pub struct IndexedMinHeap<K> {
    heap: Vec<usize>,
    pos: Vec<usize>,
    keys: Vec<Option<K>>,
    ops: u64,
}

impl<K: Ord + Copy> IndexedMinHeap<K> {
    pub fn new() -> Self {
        IndexedMinHeap { heap: Vec::new(), pos: Vec::new(), keys: Vec::new(), ops: 0 }
    }

    pub fn with_capacity(n: usize) -> Self {
        IndexedMinHeap { heap: Vec::with_capacity(n), pos: vec![ABSENT; n], keys: vec![None; n], ops: 0 }
    }

    fn ensure(&mut self, id: usize) {
        if id >= self.pos.len() {
            self.pos.resize(id + 1, ABSENT);
            self.keys.resize(id + 1, None);
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Heap operations performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn contains(&self, id: usize) -> bool {
        self.pos.get(id).is_some_and(|&p| p != ABSENT)
    }

    pub fn key(&self, id: usize) -> Option<K> {
        if self.contains(id) {
            self.keys[id]
        } else {
            None
        }
    }

    fn less(&self, a: usize, b: usize) -> bool {
        (self.keys[a], a) < (self.keys[b], b)
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let p = (i - 1) / 2;
            if self.less(self.heap[i], self.heap[p]) {
                self.swap(i, p);
                i = p;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < self.heap.len() && self.less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    /// Inserts `id` or moves it to `key` (up or down).
    pub fn set(&mut self, id: usize, key: K) {
        self.ensure(id);
        self.ops += 1;
        if self.pos[id] == ABSENT {
            self.keys[id] = Some(key);
            self.pos[id] = self.heap.len();
            self.heap.push(id);
            self.sift_up(self.heap.len() - 1);
        } else {
            let old = self.keys[id];
            self.keys[id] = Some(key);
            let p = self.pos[id];
            if Some(key) < old {
                self.sift_up(p);
            } else {
                self.sift_down(p);
            }
        }
    }

    /// Inserts `id` unless already present; returns whether it was inserted.
    pub fn insert_if_absent(&mut self, id: usize, key: K) -> bool {
        if self.contains(id) {
            false
        } else {
            self.set(id, key);
            true
        }
    }

    pub fn peek_min(&self) -> Option<(usize, K)> {
        self.heap.first().map(|&id| (id, self.keys[id].expect("heap entry has a key")))
    }

    pub fn pop_min(&mut self) -> Option<(usize, K)> {
        let top = self.peek_min()?;
        self.remove(top.0);
        Some(top)
    }

    pub fn remove(&mut self, id: usize) -> Option<K> {
        if !self.contains(id) {
            return None;
        }
        self.ops += 1;
        let p = self.pos[id];
        let last = self.heap.len() - 1;
        self.swap(p, last);
        self.heap.pop();
        self.pos[id] = ABSENT;
        let key = self.keys[id].take();
        if p < self.heap.len() {
            self.sift_down(p);
            self.sift_up(p);
        }
        key
    }

    pub fn clear(&mut self) {
        for &id in &self.heap {
            self.pos[id] = ABSENT;
            self.keys[id] = None;
        }
        self.heap.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    proptest! {
        #[test]
        fn matches_ordered_map(ops in prop::collection::vec((0usize..20, 0u32..50, 0u8..3), 0..300)) {
            let mut h = IndexedMinHeap::new();
            let mut model: BTreeMap<usize, u32> = BTreeMap::new();
            for (id, key, kind) in ops {
                match kind {
                    0 => { h.set(id, key); model.insert(id, key); }
                    1 => { prop_assert_eq!(h.remove(id), model.remove(&id)); }
                    _ => {
                        let want = model.iter().map(|(&i, &k)| (k, i)).min();
                        let got = h.pop_min().map(|(i, k)| (k, i));
                        prop_assert_eq!(got, want);
                        if let Some((_, i)) = want { model.remove(&i); }
                    }
                }
                prop_assert_eq!(h.len(), model.len());
            }
        }
    }

    #[test]
    fn insert_if_absent_keeps_first_key() {
        let mut h = IndexedMinHeap::new();
        assert!(h.insert_if_absent(3, 5u64));
        assert!(!h.insert_if_absent(3, 1));
        assert_eq!(h.key(3), Some(5));
    }
}
