use crate::gpoly::{Cut, CutSense};
use crate::model::SubsetMask;
use indexmap::IndexMap;

/// A pooled cut with the iteration that introduced its current bound
/// (0 for the initial naive cuts).
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub cut: Cut,
    pub iteration: usize,
}

/// Insertion-ordered cut set keyed by `(subset, sense)`.
///
/// A repeated key keeps whichever bound is tighter.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    entries: IndexMap<(SubsetMask, CutSense), PoolEntry>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cuts(cuts: impl IntoIterator<Item = Cut>) -> Self {
        let mut pool = Self::new();
        for c in cuts {
            pool.insert(c, 0);
        }
        pool
    }

    /// Adds `cut`; returns true when the pool changed (new key or tighter bound).
    pub fn insert(&mut self, cut: Cut, iteration: usize) -> bool {
        let key = (cut.subset.clone(), cut.sense);
        match self.entries.get_mut(&key) {
            Some(e) => {
                let tighter = match cut.sense {
                    CutSense::Upper => cut.bound < e.cut.bound,
                    CutSense::Lower => cut.bound > e.cut.bound,
                };
                if tighter {
                    *e = PoolEntry { cut, iteration };
                }
                tighter
            }
            None => {
                self.entries.insert(key, PoolEntry { cut, iteration });
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> &PoolEntry {
        &self.entries[index]
    }

    pub fn entries(&self) -> impl Iterator<Item = &PoolEntry> {
        self.entries.values()
    }

    pub fn cuts(&self) -> impl Iterator<Item = &Cut> {
        self.entries.values().map(|e| &e.cut)
    }

    /// Largest violation of any pooled cut by `p`.
    pub fn max_violation(&self, p: &[f64]) -> f64 {
        self.cuts().map(|c| c.violation(p)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_keep_tighter_bound() {
        let s = SubsetMask::from_indices(3, [0, 2]);
        let mut pool = CutPool::new();
        assert!(pool.insert(Cut::upper(s.clone(), 2.0), 0));
        assert!(!pool.insert(Cut::upper(s.clone(), 3.0), 1));
        assert!(pool.insert(Cut::upper(s.clone(), 1.0), 2));
        assert!(pool.insert(Cut::lower(s.clone(), 0.5), 2));
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.get(0).cut.bound, 1.0);
        assert_eq!(pool.get(0).iteration, 2);
        assert_eq!(pool.max_violation(&[1.0, 0.0, 1.0]), 1.0);
    }
}
