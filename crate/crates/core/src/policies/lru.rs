//! Fixed-capacity LRU inventory backed by a slab-allocated doubly linked list.

use std::collections::HashMap;

use thiserror::Error;

use crate::traffic::ContentId;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LruMisuse {
    #[error("touch of absent content {0}")]
    TouchAbsent(ContentId),
    #[error("insert of present content {0}")]
    InsertPresent(ContentId),
}

#[derive(Debug, Clone)]
struct Node {
    key: ContentId,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    index: HashMap<ContentId, usize>,
    nodes: Vec<Node>,
    /// MRU end.
    head: usize,
    /// LRU end.
    tail: usize,
}

impl LruCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            index: HashMap::with_capacity(capacity.min(1 << 16)),
            nodes: Vec::with_capacity(capacity.min(1 << 16)),
            head: NIL,
            tail: NIL,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, id: ContentId) -> bool {
        self.index.contains_key(&id)
    }

    fn unlink(&mut self, slot: usize) {
        let Node { prev, next, .. } = self.nodes[slot];
        if prev == NIL {
            self.head = next;
        } else {
            self.nodes[prev].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.nodes[next].prev = prev;
        }
    }

    fn push_front(&mut self, slot: usize) {
        self.nodes[slot].prev = NIL;
        self.nodes[slot].next = self.head;
        if self.head != NIL {
            self.nodes[self.head].prev = slot;
        }
        self.head = slot;
        if self.tail == NIL {
            self.tail = slot;
        }
    }

    /// Moves a cached `id` to the MRU position.
    pub fn touch(&mut self, id: ContentId) -> Result<(), LruMisuse> {
        let slot = *self.index.get(&id).ok_or(LruMisuse::TouchAbsent(id))?;
        if self.head != slot {
            self.unlink(slot);
            self.push_front(slot);
        }
        Ok(())
    }

    /// Inserts an absent `id` at MRU, returning the evicted LRU id if the
    /// cache was full. With zero capacity nothing is stored.
    pub fn insert(&mut self, id: ContentId) -> Result<Option<ContentId>, LruMisuse> {
        if self.index.contains_key(&id) {
            return Err(LruMisuse::InsertPresent(id));
        }
        if self.capacity == 0 {
            return Ok(Some(id));
        }
        if self.index.len() < self.capacity {
            let slot = self.nodes.len();
            self.nodes.push(Node { key: id, prev: NIL, next: NIL });
            self.index.insert(id, slot);
            self.push_front(slot);
            return Ok(None);
        }
        // Reuse the LRU slot for the newcomer.
        let slot = self.tail;
        let evicted = self.nodes[slot].key;
        self.index.remove(&evicted);
        self.unlink(slot);
        self.nodes[slot].key = id;
        self.index.insert(id, slot);
        self.push_front(slot);
        Ok(Some(evicted))
    }

    /// Inventory from MRU to LRU.
    pub fn iter(&self) -> impl Iterator<Item = ContentId> + '_ {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            if cur == NIL {
                return None;
            }
            let node = &self.nodes[cur];
            cur = node.next;
            Some(node.key)
        })
    }
}

pub fn lru_lookup(cache: &LruCache, id: ContentId) -> bool {
    cache.contains(id)
}

pub fn lru_touch(cache: &mut LruCache, id: ContentId) -> Result<(), LruMisuse> {
    cache.touch(id)
}

pub fn lru_insert(cache: &mut LruCache, id: ContentId) -> Result<Option<ContentId>, LruMisuse> {
    cache.insert(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inventory(c: &LruCache) -> Vec<ContentId> {
        c.iter().collect()
    }

    #[test]
    fn eviction_takes_lru() {
        let mut c = LruCache::new(2);
        assert_eq!(c.insert(1), Ok(None));
        assert_eq!(c.insert(2), Ok(None));
        assert_eq!(c.insert(3), Ok(Some(1)));
        assert_eq!(inventory(&c), vec![3, 2]);
    }

    #[test]
    fn touch_reorders() {
        let mut c = LruCache::new(2);
        c.insert(1).unwrap();
        c.insert(2).unwrap();
        c.touch(1).unwrap();
        assert_eq!(c.insert(3), Ok(Some(2)));
        assert_eq!(inventory(&c), vec![3, 1]);
    }

    #[test]
    fn capacity_one_replaces() {
        let mut c = LruCache::new(1);
        c.insert(5).unwrap();
        assert_eq!(c.insert(6), Ok(Some(5)));
        assert_eq!(inventory(&c), vec![6]);
    }

    #[test]
    fn capacity_zero_holds_nothing() {
        let mut c = LruCache::new(0);
        c.insert(1).unwrap();
        assert!(c.is_empty());
        assert!(!lru_lookup(&c, 1));
    }

    #[test]
    fn misuse_is_reported() {
        let mut c = LruCache::new(2);
        assert_eq!(c.touch(1), Err(LruMisuse::TouchAbsent(1)));
        c.insert(1).unwrap();
        assert_eq!(c.insert(1), Err(LruMisuse::InsertPresent(1)));
    }

    #[derive(Debug, Clone)]
    enum Op {
        Access(u64),
    }

    proptest! {
        /// Read-through accesses against a plain-vector LRU model.
        #[test]
        fn matches_list_model(cap in 0usize..6, ops in proptest::collection::vec((0u64..10).prop_map(Op::Access), 0..300)) {
            let mut cache = LruCache::new(cap);
            let mut model: Vec<u64> = Vec::new();
            for Op::Access(id) in ops {
                let hit = model.contains(&id);
                prop_assert_eq!(lru_lookup(&cache, id), hit);
                if hit {
                    lru_touch(&mut cache, id).unwrap();
                    model.retain(|&x| x != id);
                    model.insert(0, id);
                } else {
                    let evicted = lru_insert(&mut cache, id).unwrap();
                    if cap > 0 {
                        model.insert(0, id);
                        let expected = if model.len() > cap { model.pop() } else { None };
                        prop_assert_eq!(evicted, expected);
                    }
                }
                prop_assert!(cache.len() <= cap);
                prop_assert_eq!(inventory(&cache), model.clone());
                if cap > 0 {
                    prop_assert_eq!(cache.iter().next(), Some(id));
                }
            }
        }
    }
}
