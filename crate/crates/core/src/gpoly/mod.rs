//! Border functions of EV flexibility sets and their Minkowski sums.
//!
//! For a profile `P` the upper border is `f(A) = max { x(A) : x in P }` and the
//! lower border is `g(A) = min { x(A) : x in P }`. The aggregate border of a
//! fleet is the count-weighted sum of per-vehicle borders. Elements are 0-based
//! time steps; on the extended ground set the element `T` stands for the
//! extension element.

mod border;
mod structure;

pub use border::{profile_border, profile_border_lp};
pub use structure::{check_structure, BorderPair, BorderTable, StructureReport, StructureViolation};

use crate::lp::Sense;
use crate::model::{EvProfile, SubsetMask};
use dashmap::DashMap;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpolyError {
    #[error("border evaluation failed for EV profile {profile}")]
    SolveFailure { profile: usize },
    #[error("subset capacity {found} does not match horizon {expected}")]
    CapacityMismatch { expected: usize, found: usize },
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
    #[error("{0}")]
    Structure(#[from] StructureViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

/// How per-vehicle borders are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderMethod {
    /// Exact prefix sweep over the running-sum value function, `O(T)` per set.
    #[default]
    Sweep,
    /// One linear program per set.
    Lp,
}

/// A linear inequality on the aggregate charging vector: `p(subset) <= bound`
/// for [`CutSense::Upper`], `p(subset) >= bound` for [`CutSense::Lower`].
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub subset: SubsetMask,
    pub sense: CutSense,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutSense {
    Upper,
    Lower,
}

impl CutSense {
    pub fn as_lp_sense(self) -> Sense {
        match self {
            CutSense::Upper => Sense::Le,
            CutSense::Lower => Sense::Ge,
        }
    }
}

impl Cut {
    pub fn upper(subset: SubsetMask, bound: f64) -> Self {
        Self { subset, sense: CutSense::Upper, bound }
    }

    pub fn lower(subset: SubsetMask, bound: f64) -> Self {
        Self { subset, sense: CutSense::Lower, bound }
    }

    /// Amount by which `p` violates the cut (zero when satisfied).
    pub fn violation(&self, p: &[f64]) -> f64 {
        let v = self.subset.sum(p);
        match self.sense {
            CutSense::Upper => (v - self.bound).max(0.0),
            CutSense::Lower => (self.bound - v).max(0.0),
        }
    }
}

/// Evaluates aggregate borders of a fleet, optionally in parallel and memoized.
pub struct BorderEvaluator<'a> {
    fleet: &'a [EvProfile],
    steps: usize,
    method: BorderMethod,
    cache: Option<DashMap<(usize, Side, SubsetMask), f64>>,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> BorderEvaluator<'a> {
    pub fn new(fleet: &'a [EvProfile], steps: usize) -> Self {
        Self { fleet, steps, method: BorderMethod::Sweep, cache: None, pool: None }
    }

    pub fn with_method(mut self, method: BorderMethod) -> Self {
        self.method = method;
        self
    }

    /// Enables or disables the per-profile memo table.
    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled.then(DashMap::new);
        self
    }

    /// Evaluates profiles on a dedicated pool of `threads` workers; `threads <= 1`
    /// keeps evaluation on the calling thread.
    pub fn with_threads(mut self, threads: usize) -> Result<Self, GpolyError> {
        self.pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| GpolyError::ThreadPool(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(self)
    }

    pub fn fleet(&self) -> &[EvProfile] {
        self.fleet
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cache_len(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.len())
    }

    /// Per-vehicle border of profile `n` (not multiplied by its count).
    pub fn vehicle_border(&self, n: usize, a: &SubsetMask, side: Side) -> Result<f64, GpolyError> {
        if a.is_empty() {
            return Ok(0.0);
        }
        let key = self.cache.as_ref().map(|_| (n, side, a.clone()));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(v) = cache.get(key) {
                return Ok(*v);
            }
        }
        let profile = &self.fleet[n];
        let v = match self.method {
            BorderMethod::Sweep => profile_border(profile, a, side),
            BorderMethod::Lp => profile_border_lp(profile, a, side),
        }
        .ok_or(GpolyError::SolveFailure { profile: n })?;
        if let (Some(cache), Some(key)) = (&self.cache, key) {
            cache.insert(key, v);
        }
        Ok(v)
    }

    fn check_capacity(&self, a: &SubsetMask, extended: bool) -> Result<(), GpolyError> {
        let expected = self.steps + usize::from(extended);
        if a.capacity() != expected {
            return Err(GpolyError::CapacityMismatch { expected, found: a.capacity() });
        }
        Ok(())
    }

    /// Runs `work` for every profile and returns the results in fleet order.
    fn per_profile<T, F>(&self, work: F) -> Result<Vec<T>, GpolyError>
    where
        T: Send,
        F: Fn(usize) -> Result<T, GpolyError> + Sync + Send,
    {
        match &self.pool {
            Some(pool) if self.fleet.len() > 1 => {
                pool.install(|| (0..self.fleet.len()).into_par_iter().map(&work).collect())
            }
            _ => (0..self.fleet.len()).map(work).collect(),
        }
    }

    /// Aggregate border `sum_n count_n * border_n(A)` over a subset of the horizon.
    pub fn aggregate_border(&self, a: &SubsetMask, side: Side) -> Result<f64, GpolyError> {
        self.check_capacity(a, false)?;
        let parts = self.per_profile(|n| self.vehicle_border(n, a, side))?;
        Ok(self.weighted_sum(&parts))
    }

    pub fn upper(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        self.aggregate_border(a, Side::Upper)
    }

    pub fn lower(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        self.aggregate_border(a, Side::Lower)
    }

    fn weighted_sum(&self, parts: &[f64]) -> f64 {
        parts.iter().zip(self.fleet).map(|(v, p)| p.count as f64 * v).sum()
    }

    /// Submodular extension over the extended ground set:
    /// `f(A)` when the extension element is absent, `-g(T \ (A - {T}))` otherwise.
    pub fn base_extension(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        self.check_capacity(a, true)?;
        let (set, side) = extension_argument(a, self.steps);
        let v = self.aggregate_border(&set, side)?;
        Ok(if side == Side::Lower { -v } else { v })
    }

    /// `base_extension` on every prefix of `order` (a permutation of `0..=T`),
    /// evaluated profile by profile.
    pub fn base_extension_chain(&self, order: &[usize]) -> Result<Vec<f64>, GpolyError> {
        let ext = self.steps + 1;
        let mut prefixes = Vec::with_capacity(order.len());
        let mut cur = SubsetMask::empty(ext);
        for &e in order {
            cur.insert(e);
            prefixes.push(extension_argument(&cur, self.steps));
        }
        let parts = self.per_profile(|n| {
            prefixes.iter().map(|(set, side)| self.vehicle_border(n, set, *side)).collect::<Result<Vec<_>, _>>()
        })?;
        Ok((0..prefixes.len())
            .map(|k| {
                let v: f64 = parts.iter().zip(self.fleet).map(|(vals, p)| p.count as f64 * vals[k]).sum();
                if prefixes[k].1 == Side::Lower {
                    -v
                } else {
                    v
                }
            })
            .collect())
    }
}

/// Maps an extended subset to the horizon subset and border side used by the
/// base extension.
pub fn extension_argument(a: &SubsetMask, steps: usize) -> (SubsetMask, Side) {
    if a.contains(steps) {
        (a.resized(steps).complement(), Side::Lower)
    } else {
        (a.resized(steps), Side::Upper)
    }
}

/// Cuts of the naive aggregate: summed per-step power bounds and summed
/// running-sum bounds.
pub fn naive_polytope(fleet: &[EvProfile], steps: usize) -> Vec<Cut> {
    let weighted = |pick: fn(&EvProfile) -> &Vec<f64>, t: usize| -> f64 {
        fleet.iter().map(|p| p.count as f64 * pick(p)[t]).sum()
    };
    let mut cuts = Vec::with_capacity(4 * steps);
    for t in 0..steps {
        let single = SubsetMask::from_indices(steps, [t]);
        cuts.push(Cut::upper(single.clone(), weighted(|p| &p.p_max, t)));
        cuts.push(Cut::lower(single, weighted(|p| &p.p_min, t)));
    }
    for t in 0..steps {
        let prefix = SubsetMask::from_indices(steps, 0..=t);
        cuts.push(Cut::upper(prefix.clone(), weighted(|p| &p.s_max, t)));
        cuts.push(Cut::lower(prefix, weighted(|p| &p.s_min, t)));
    }
    cuts
}
