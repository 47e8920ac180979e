//! Submodular function minimization by the Fujishige-Wolfe minimum-norm point
//! algorithm over the base polyhedron of a normalized set function.

mod affine;

use crate::gpoly::GpolyError;
use crate::model::SubsetMask;
use affine::{affine_minimizer, combine};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfmError {
    #[error(transparent)]
    Border(#[from] GpolyError),
    #[error("minimum-norm point did not converge within {0} major cycles")]
    MaxIterations(usize),
    #[error("ground set of size {0} is too large for exhaustive minimization")]
    GroundSetTooLarge(usize),
    #[error("invalid ordering for ground set of size {0}")]
    InvalidOrdering(usize),
}

/// A set function over `{0, .., n-1}` with `h(empty) = 0`.
pub trait SetFunction {
    fn ground_size(&self) -> usize;

    fn eval(&self, a: &SubsetMask) -> Result<f64, SfmError>;

    /// Values on the prefixes of `order`, in order.
    fn eval_chain(&self, order: &[usize]) -> Result<Vec<f64>, SfmError> {
        let mut cur = SubsetMask::empty(self.ground_size());
        order
            .iter()
            .map(|&e| {
                cur.insert(e);
                self.eval(&cur)
            })
            .collect()
    }
}

/// Adapts a closure into a [`SetFunction`].
pub struct FnSetFunction<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&SubsetMask) -> f64> FnSetFunction<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&SubsetMask) -> f64> SetFunction for FnSetFunction<F> {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn eval(&self, a: &SubsetMask) -> Result<f64, SfmError> {
        Ok((self.f)(a))
    }
}

/// One greedy chain: an ordering and the function values on its prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub order: Vec<usize>,
    pub values: Vec<f64>,
}

impl Chain {
    /// Prefix sets paired with their values.
    pub fn sets(&self, n: usize) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
        let mut cur = SubsetMask::empty(n);
        self.order.iter().zip(&self.values).map(move |(&e, &v)| {
            cur.insert(e);
            (cur.clone(), v)
        })
    }
}

/// Every set evaluated during one minimization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub ground_size: usize,
    pub chains: Vec<Chain>,
    /// Sets evaluated outside greedy chains (the extracted minimizers).
    pub extra: Vec<(SubsetMask, f64)>,
}

/// Edmonds greedy vertex of the base polyhedron for `order`:
/// `v[order[i]] = h(S_i) - h(S_{i-1})`. The chain is appended to `trace`.
pub fn greedy_vertex(h: &dyn SetFunction, order: &[usize], trace: &mut Trace) -> Result<Vec<f64>, SfmError> {
    let n = h.ground_size();
    if order.len() != n || SubsetMask::from_indices(n, order.iter().copied()).len() != n {
        return Err(SfmError::InvalidOrdering(n));
    }
    let values = h.eval_chain(order)?;
    let mut v = vec![0.0; n];
    let mut prev = 0.0;
    for (&e, &val) in order.iter().zip(&values) {
        v[e] = val - prev;
        prev = val;
    }
    trace.chains.push(Chain { order: order.to_vec(), values });
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeOptions {
    /// Relative tolerance of the Wolfe optimality gap.
    pub eps: f64,
    /// Convex weights at or below this are treated as zero.
    pub coef_tol: f64,
    /// Major-cycle cap; `None` means `100 * n`.
    pub max_major: Option<usize>,
}

impl Default for WolfeOptions {
    fn default() -> Self {
        Self { eps: 1e-10, coef_tol: 1e-12, max_major: None }
    }
}

#[derive(Debug, Clone)]
pub struct MinNormResult {
    pub x: Vec<f64>,
    /// Minimal minimizer, `{e : x_e < -neg_tol}` unless a level set does better.
    pub minimizer: SubsetMask,
    /// `h(minimizer)`.
    pub value: f64,
    /// `{e : x_e <= neg_tol}`, for diagnostics.
    pub maximal_minimizer: SubsetMask,
    pub maximal_value: f64,
    pub major_cycles: usize,
    pub minor_cycles: usize,
    /// `|x|^2` after each major cycle.
    pub norm_history: Vec<f64>,
    pub trace: Trace,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordering of `0..n` by increasing `x`, ties by index.
fn ascending(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    order
}

/// Minimizes `h` (which must satisfy `h(empty) = h(full) = 0`) by the
/// minimum-norm point algorithm.
pub fn min_norm_point(h: &dyn SetFunction, opts: &WolfeOptions) -> Result<MinNormResult, SfmError> {
    let n = h.ground_size();
    let mut trace = Trace { ground_size: n, ..Trace::default() };
    if n == 0 {
        let empty = SubsetMask::empty(0);
        return Ok(MinNormResult {
            x: vec![],
            minimizer: empty.clone(),
            value: 0.0,
            maximal_minimizer: empty,
            maximal_value: 0.0,
            major_cycles: 0,
            minor_cycles: 0,
            norm_history: vec![],
            trace,
        });
    }
    let cap = opts.max_major.unwrap_or(100 * n);

    let first = greedy_vertex(h, &(0..n).collect::<Vec<_>>(), &mut trace)?;
    let mut points = vec![first.clone()];
    let mut lambda = vec![1.0];
    let mut x = first;
    let mut norm = dot(&x, &x);
    let mut history = vec![norm];
    let mut major = 0;
    let mut minor = 0;
    let mut converged = false;

    while major < cap {
        major += 1;
        let q = greedy_vertex(h, &ascending(&x), &mut trace)?;
        let scale = points.iter().map(|p| dot(p, p)).fold(dot(&q, &q), f64::max);
        if norm - dot(&x, &q) <= opts.eps * scale {
            converged = true;
            break;
        }
        let dup_tol = 1e-12 * (1.0 + scale);
        if points.iter().any(|p| p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= dup_tol) {
            converged = true;
            break;
        }
        points.push(q);
        lambda.push(0.0);

        loop {
            minor += 1;
            let alpha = affine_minimizer(&points);
            if alpha.iter().all(|&a| a > opts.coef_tol) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (&l, &a) in lambda.iter().zip(&alpha) {
                if a <= opts.coef_tol && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let keep: Vec<bool> = lambda.iter().map(|&l| l > opts.coef_tol).collect();
            if keep.iter().all(|&k| k) {
                // Rounding left every weight positive; drop the smallest.
                let (i, _) = lambda
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty active set");
                points.remove(i);
                lambda.remove(i);
            } else {
                let mut idx = 0;
                points.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
                lambda.retain(|&l| l > opts.coef_tol);
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            if points.len() <= 1 {
                break;
            }
        }
        let next = combine(&points, &lambda);
        let next_norm = dot(&next, &next);
        if next_norm > norm {
            // No numerical progress possible from here.
            converged = true;
            break;
        }
        x = next;
        norm = next_norm;
        history.push(norm);
    }
    if !converged {
        return Err(SfmError::MaxIterations(cap));
    }

    // Level sets of x along one more chain, then pick the minimizer.
    greedy_vertex(h, &ascending(&x), &mut trace)?;
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let neg_tol = 1e-9 * (1.0 + xmax);
    let a_min = SubsetMask::from_indices(n, (0..n).filter(|&e| x[e] < -neg_tol));
    let a_max = SubsetMask::from_indices(n, (0..n).filter(|&e| x[e] <= neg_tol));
    let v_min = h.eval(&a_min)?;
    let v_max = h.eval(&a_max)?;
    trace.extra.push((a_min.clone(), v_min));
    trace.extra.push((a_max.clone(), v_max));

    let mut best = (SubsetMask::empty(n), 0.0);
    let mut hmax = 0.0f64;
    for chain in &trace.chains {
        for (set, v) in chain.sets(n) {
            hmax = hmax.max(v.abs());
            if v < best.1 {
                best = (set, v);
            }
        }
    }
    let tie = 1e-12 * (1.0 + hmax);
    let (minimizer, value) = if v_min <= best.1 + tie {
        (a_min, v_min)
    } else {
        let v = h.eval(&best.0)?;
        (best.0, v)
    };
    Ok(MinNormResult {
        x,
        minimizer,
        value,
        maximal_minimizer: a_max,
        maximal_value: v_max,
        major_cycles: major,
        minor_cycles: minor,
        norm_history: history,
        trace,
    })
}

/// A set evaluated during minimization whose value is below `-tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Harvested {
    pub set: SubsetMask,
    pub value: f64,
}

/// Distinct sets in `trace` with value below `-tol`, in order of first
/// appearance.
pub fn collect_cuts(trace: &Trace, tol: f64) -> Vec<Harvested> {
    let n = trace.ground_size;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let chain_sets = trace.chains.iter().flat_map(|c| c.sets(n));
    for (set, value) in chain_sets.chain(trace.extra.iter().cloned()) {
        if value < -tol && seen.insert(set.clone()) {
            out.push(Harvested { set, value });
        }
    }
    out
}

/// Exhaustive minimization; ties go to the smallest mask in binary order.
pub fn brute_force_sfm(h: &dyn SetFunction) -> Result<(SubsetMask, f64), SfmError> {
    let n = h.ground_size();
    if n > 20 {
        return Err(SfmError::GroundSetTooLarge(n));
    }
    let mut best = (SubsetMask::empty(n), h.eval(&SubsetMask::empty(n))?);
    for bits in 1..(1u64 << n) {
        let a = SubsetMask::from_bits(n, bits);
        let v = h.eval(&a)?;
        if v < best.1 {
            best = (a, v);
        }
    }
    Ok(best)
}
