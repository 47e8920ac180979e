use super::{BorderEvaluator, GpolyError, Side};
use crate::model::SubsetMask;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

/// A pair of set functions `(g, f)` over `{0, .., T-1}`.
pub trait BorderPair {
    fn steps(&self) -> usize;
    fn upper(&self, a: &SubsetMask) -> Result<f64, GpolyError>;
    fn lower(&self, a: &SubsetMask) -> Result<f64, GpolyError>;

    /// Extension of `f` to `{0, .., T}` built from the pair.
    fn extension(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        let (set, side) = super::extension_argument(a, self.steps());
        match side {
            Side::Upper => self.upper(&set),
            Side::Lower => Ok(-self.lower(&set)?),
        }
    }
}

impl BorderPair for BorderEvaluator<'_> {
    fn steps(&self) -> usize {
        BorderEvaluator::steps(self)
    }
    fn upper(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        BorderEvaluator::upper(self, a)
    }
    fn lower(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        BorderEvaluator::lower(self, a)
    }
}

/// Explicit value tables indexed by subset bits (at most 20 steps).
#[derive(Debug, Clone, PartialEq)]
pub struct BorderTable {
    pub steps: usize,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl BorderTable {
    pub fn from_pair(pair: &impl BorderPair) -> Result<Self, GpolyError> {
        let steps = pair.steps();
        assert!(steps <= 20, "border tables support at most 20 steps");
        let masks = (0..1u64 << steps).map(|b| SubsetMask::from_bits(steps, b));
        let mut f = Vec::new();
        let mut g = Vec::new();
        for a in masks {
            f.push(pair.upper(&a)?);
            g.push(pair.lower(&a)?);
        }
        Ok(Self { steps, f, g })
    }
}

impl BorderPair for BorderTable {
    fn steps(&self) -> usize {
        self.steps
    }
    fn upper(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        Ok(self.f[a.to_bits() as usize])
    }
    fn lower(&self, a: &SubsetMask) -> Result<f64, GpolyError> {
        Ok(self.g[a.to_bits() as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    EmptySet,
    Submodular,
    Supermodular,
    CrossInequality,
    Ordering,
    ExtensionSubmodular,
    ExtensionFullSet,
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PropertyKind::EmptySet => "zero on the empty set",
            PropertyKind::Submodular => "submodularity of f",
            PropertyKind::Supermodular => "supermodularity of g",
            PropertyKind::CrossInequality => "cross-inequality",
            PropertyKind::Ordering => "g <= f",
            PropertyKind::ExtensionSubmodular => "submodularity of the extension",
            PropertyKind::ExtensionFullSet => "zero extension on the full set",
        };
        f.write_str(s)
    }
}

/// A failed structural check with its witness pair.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} fails on A={a:?}, B={b:?}: {lhs} < {rhs}")]
pub struct StructureViolation {
    pub kind: PropertyKind,
    pub a: SubsetMask,
    pub b: SubsetMask,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub pairs_checked: usize,
    pub exhaustive: bool,
}

/// Checks that `(g, f)` is a paramodular pair and that the extension is
/// submodular. Exhaustive over all subset pairs for `T <= 4`; otherwise
/// `samples` random pairs drawn from `seed`.
pub fn check_structure(
    pair: &impl BorderPair,
    samples: usize,
    seed: u64,
) -> Result<StructureReport, GpolyError> {
    let steps = pair.steps();
    let empty = SubsetMask::empty(steps);
    for v in [pair.upper(&empty)?, pair.lower(&empty)?] {
        if v != 0.0 {
            return Err(violation(PropertyKind::EmptySet, &empty, &empty, v, 0.0));
        }
    }
    let full_ext = SubsetMask::full(steps + 1);
    let v = pair.extension(&full_ext)?;
    if v != 0.0 {
        return Err(violation(PropertyKind::ExtensionFullSet, &full_ext, &full_ext, v, 0.0));
    }

    let exhaustive = steps <= 4;
    let mut checked = 0;
    if exhaustive {
        let n = 1u64 << steps;
        for x in 0..n {
            for y in x..n {
                check_pair(pair, &SubsetMask::from_bits(steps, x), &SubsetMask::from_bits(steps, y))?;
                checked += 1;
            }
        }
        let n = 1u64 << (steps + 1);
        for x in 0..n {
            for y in x..n {
                check_extension_pair(
                    pair,
                    &SubsetMask::from_bits(steps + 1, x),
                    &SubsetMask::from_bits(steps + 1, y),
                )?;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |cap: usize| {
            let density = rng.gen_range(0.1..0.9);
            SubsetMask::from_indices(cap, (0..cap).filter(|_| rng.gen_bool(density)).collect::<Vec<_>>())
        };
        for _ in 0..samples {
            let (a, b) = (draw(steps), draw(steps));
            check_pair(pair, &a, &b)?;
            let (a, b) = (draw(steps + 1), draw(steps + 1));
            check_extension_pair(pair, &a, &b)?;
            checked += 1;
        }
    }
    Ok(StructureReport { pairs_checked: checked, exhaustive })
}

fn violation(kind: PropertyKind, a: &SubsetMask, b: &SubsetMask, lhs: f64, rhs: f64) -> GpolyError {
    GpolyError::Structure(StructureViolation { kind, a: a.clone(), b: b.clone(), lhs, rhs })
}

fn tol(values: &[f64]) -> f64 {
    1e-9 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Fails when `lhs < rhs` beyond rounding.
fn require(kind: PropertyKind, a: &SubsetMask, b: &SubsetMask, lhs: f64, rhs: f64) -> Result<(), GpolyError> {
    if lhs < rhs - tol(&[lhs, rhs]) {
        Err(violation(kind, a, b, lhs, rhs))
    } else {
        Ok(())
    }
}

fn check_pair(pair: &impl BorderPair, a: &SubsetMask, b: &SubsetMask) -> Result<(), GpolyError> {
    let (u, i) = (a.union(b), a.intersection(b));
    let (fa, fb, fu, fi) = (pair.upper(a)?, pair.upper(b)?, pair.upper(&u)?, pair.upper(&i)?);
    require(PropertyKind::Submodular, a, b, fa + fb, fu + fi)?;
    let (ga, gb, gu, gi) = (pair.lower(a)?, pair.lower(b)?, pair.lower(&u)?, pair.lower(&i)?);
    require(PropertyKind::Supermodular, a, b, gu + gi, ga + gb)?;
    require(PropertyKind::Ordering, a, b, fa, ga)?;
    let (a_b, b_a) = (a.difference(b), b.difference(a));
    require(PropertyKind::CrossInequality, a, b, fa - gb, pair.upper(&a_b)? - pair.lower(&b_a)?)?;
    require(PropertyKind::CrossInequality, b, a, fb - ga, pair.upper(&b_a)? - pair.lower(&a_b)?)?;
    Ok(())
}

fn check_extension_pair(pair: &impl BorderPair, a: &SubsetMask, b: &SubsetMask) -> Result<(), GpolyError> {
    let lhs = pair.extension(a)? + pair.extension(b)?;
    let rhs = pair.extension(&a.union(b))? + pair.extension(&a.intersection(b))?;
    require(PropertyKind::ExtensionSubmodular, a, b, lhs, rhs)
}
