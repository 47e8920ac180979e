use std::fmt;

/// A subset of a fixed ground set `{0, .., capacity - 1}` stored as a bit vector.
///
/// Element `i` is bit `i % 64` of word `i / 64`. When the mask ranges over the
/// extended ground set of a horizon with `T` steps, element `T` is the
/// extension element.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    capacity: usize,
    words: Vec<u64>,
}

impl SubsetMask {
    pub fn empty(capacity: usize) -> Self {
        Self { capacity, words: vec![0; capacity.div_ceil(64)] }
    }

    pub fn full(capacity: usize) -> Self {
        let mut m = Self::empty(capacity);
        for (w, word) in m.words.iter_mut().enumerate() {
            let bits = (capacity - w * 64).min(64);
            *word = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        }
        m
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(capacity: usize, items: I) -> Self {
        let mut m = Self::empty(capacity);
        for i in items {
            m.insert(i);
        }
        m
    }

    /// Mask whose element `i` is bit `i` of `bits` (capacity at most 64).
    pub fn from_bits(capacity: usize, bits: u64) -> Self {
        assert!(capacity <= 64, "from_bits supports capacity <= 64");
        let mut m = Self::empty(capacity);
        if capacity > 0 {
            m.words[0] = bits & Self::full(capacity).words[0];
        }
        m
    }

    /// Low 64 bits of the mask.
    pub fn to_bits(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.capacity && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.capacity, "element {i} outside capacity {}", self.capacity);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.capacity {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn with(mut self, i: usize) -> Self {
        self.insert(i);
        self
    }

    pub fn without(mut self, i: usize) -> Self {
        self.remove(i);
        self
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.capacity, other.capacity, "mask capacity mismatch");
        Self {
            capacity: self.capacity,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.capacity).difference(self)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    /// Same elements viewed over a different capacity; elements beyond the new
    /// capacity are dropped.
    pub fn resized(&self, capacity: usize) -> Self {
        Self::from_indices(capacity, self.iter().filter(|&i| i < capacity))
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    /// Sum of `x` over the elements of the mask.
    pub fn sum(&self, x: &[f64]) -> f64 {
        self.iter().map(|i| x[i]).sum()
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
