use alloc::vec::Vec;

use crate::num;

#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Best feasible solutions seen so far, sorted by objective (ties keep
/// insertion order) and deduplicated on the rounded divable sub-vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPool {
    entries: Vec<PoolEntry>,
    capacity: usize,
    key_vars: Vec<usize>,
}

impl SolutionPool {
    /// `key_vars` are the divable variables used as deduplication key.
    pub fn new(capacity: usize, key_vars: Vec<usize>) -> Self {
        SolutionPool { entries: Vec::new(), capacity: capacity.max(1), key_vars }
    }

    pub fn from_entries(capacity: usize, key_vars: Vec<usize>, entries: Vec<PoolEntry>) -> Self {
        let mut pool = SolutionPool::new(capacity, key_vars);
        for e in entries {
            pool.insert(e.x, e.objective);
        }
        pool
    }

    pub fn key(&self, x: &[f64]) -> Vec<i64> {
        self.key_vars.iter().map(|&j| num::round(x[j]) as i64).collect()
    }

    /// Adds a solution; returns whether the pool changed.
    pub fn insert(&mut self, x: Vec<f64>, objective: f64) -> bool {
        let key = self.key(&x);
        if let Some(pos) = self.entries.iter().position(|e| self.key(&e.x) == key) {
            if self.entries[pos].objective <= objective {
                return false;
            }
            self.entries.remove(pos);
        }
        if self.entries.len() >= self.capacity && self.entries.last().is_some_and(|w| w.objective <= objective) {
            return false;
        }
        let pos = self.entries.partition_point(|e| e.objective <= objective);
        self.entries.insert(pos, PoolEntry { x, objective });
        self.entries.truncate(self.capacity);
        true
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn best(&self) -> Option<&PoolEntry> {
        self.entries.first()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn key_vars(&self) -> &[usize] {
        &self.key_vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn keeps_sorted_unique_and_capped() {
        let mut pool = SolutionPool::new(2, vec![0, 1]);
        assert!(pool.insert(vec![1.0, 0.0, 0.3], 5.0));
        assert!(pool.insert(vec![0.0, 1.0, 0.0], 3.0));
        // same key, worse objective
        assert!(!pool.insert(vec![1.0, 0.0, 0.9], 6.0));
        // same key, better objective replaces
        assert!(pool.insert(vec![1.0, 0.0, 0.1], 4.0));
        assert_eq!(pool.entries().iter().map(|e| e.objective).collect::<Vec<_>>(), vec![3.0, 4.0]);
        // full and worse than the worst
        assert!(!pool.insert(vec![1.0, 1.0, 0.0], 10.0));
        assert!(pool.insert(vec![0.0, 0.0, 0.0], 1.0));
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.best().unwrap().objective, 1.0);
    }
}
