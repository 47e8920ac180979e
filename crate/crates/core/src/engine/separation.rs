use super::EngineError;
use crate::gpoly::{extension_argument, BorderEvaluator, Cut, Side};
use crate::model::SubsetMask;
use crate::sfm::{collect_cuts, min_norm_point, SetFunction, SfmError, WolfeOptions};
use indexmap::IndexSet;

/// `h(A) = f*(A) - p*(A)` where `p* = (p, -sum p)` is the extended query.
pub struct SeparationFunction<'e, 'f> {
    evaluator: &'e BorderEvaluator<'f>,
    extended: Vec<f64>,
}

impl<'e, 'f> SeparationFunction<'e, 'f> {
    pub fn new(evaluator: &'e BorderEvaluator<'f>, p: &[f64]) -> Self {
        let mut extended = p.to_vec();
        extended.push(-p.iter().sum::<f64>());
        Self { evaluator, extended }
    }
}

impl SetFunction for SeparationFunction<'_, '_> {
    fn ground_size(&self) -> usize {
        self.extended.len()
    }

    fn eval(&self, a: &SubsetMask) -> Result<f64, SfmError> {
        Ok(self.evaluator.base_extension(a)? - a.sum(&self.extended))
    }

    fn eval_chain(&self, order: &[usize]) -> Result<Vec<f64>, SfmError> {
        let f = self.evaluator.base_extension_chain(order)?;
        let mut acc = 0.0;
        Ok(order
            .iter()
            .zip(f)
            .map(|(&e, v)| {
                acc += self.extended[e];
                v - acc
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationOutcome {
    /// True when `p` lies in the aggregate flexibility set within tolerance.
    pub feasible: bool,
    /// Minimum of the separation function found by the SFM solver.
    pub sfm_value: f64,
    /// Minimizer over the extended ground set.
    pub minimizer: SubsetMask,
    /// Violated inequalities in `p` space, deduplicated.
    pub cuts: Vec<Cut>,
    pub major_cycles: usize,
    /// Extended sets with value below the threshold, before mapping.
    pub harvested: usize,
}

/// Maps an extended set to its `p`-space inequality with the exact border bound.
pub fn map_extended_set(evaluator: &BorderEvaluator, set: &SubsetMask) -> Result<Cut, EngineError> {
    let (subset, side) = extension_argument(set, evaluator.steps());
    Ok(match side {
        Side::Upper => {
            let bound = evaluator.upper(&subset)?;
            Cut::upper(subset, bound)
        }
        Side::Lower => {
            let bound = evaluator.lower(&subset)?;
            Cut::lower(subset, bound)
        }
    })
}

/// Tests `p` against the aggregate flexibility set by minimizing
/// `f* - p*`; a minimum below `-sep_tol * (1 + |p|_1)` yields cuts.
///
/// With `all_cuts` every chain set below the threshold is mapped to a cut;
/// otherwise only the minimizer is.
pub fn separation_oracle(
    evaluator: &BorderEvaluator,
    p: &[f64],
    sep_tol: f64,
    all_cuts: bool,
    wolfe: &WolfeOptions,
) -> Result<SeparationOutcome, EngineError> {
    let h = SeparationFunction::new(evaluator, p);
    let result = min_norm_point(&h, wolfe)?;
    let threshold = sep_tol * (1.0 + p.iter().map(|v| v.abs()).sum::<f64>());
    let feasible = result.value >= -threshold;
    let mut cuts = Vec::new();
    let mut harvested = 0;
    if !feasible {
        let sets: Vec<SubsetMask> = if all_cuts {
            let mut sets = vec![result.minimizer.clone()];
            sets.extend(collect_cuts(&result.trace, threshold).into_iter().map(|c| c.set));
            sets
        } else {
            vec![result.minimizer.clone()]
        };
        let unique: IndexSet<SubsetMask> = sets.into_iter().collect();
        harvested = unique.len();
        let mut seen = IndexSet::new();
        for set in &unique {
            let cut = map_extended_set(evaluator, set)?;
            if seen.insert((cut.subset.clone(), cut.sense)) {
                cuts.push(cut);
            }
        }
    }
    Ok(SeparationOutcome {
        feasible,
        sfm_value: result.value,
        minimizer: result.minimizer,
        cuts,
        major_cycles: result.major_cycles,
        harvested,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpoly::tests::derived_pair;
    use crate::gpoly::CutSense;

    fn run(p: &[f64]) -> SeparationOutcome {
        let fleet = derived_pair();
        let ev = BorderEvaluator::new(&fleet, 3);
        separation_oracle(&ev, p, 1e-6, true, &WolfeOptions::default()).unwrap()
    }

    fn set(items: &[usize]) -> SubsetMask {
        SubsetMask::from_indices(3, items.iter().copied())
    }

    #[test]
    fn feasible_query() {
        let out = run(&[1.0, 1.0, 0.0]);
        assert!(out.feasible);
        assert!(out.cuts.is_empty());
    }

    #[test]
    fn fractional_query_is_cut() {
        let out = run(&[1.0, 0.5, 0.5]);
        assert!(!out.feasible);
        assert_eq!(out.sfm_value, -0.5);
        let upper = Cut::upper(set(&[0, 2]), 1.0);
        let lower = Cut::lower(set(&[1]), 1.0);
        assert!(out.cuts.contains(&upper) || out.cuts.contains(&lower), "{:?}", out.cuts);
        assert!(out.cuts.iter().all(|c| c == &upper || c == &lower));
    }

    #[test]
    fn overcharging_first_step_is_cut() {
        let out = run(&[2.0, 1.0, 0.0]);
        assert!(!out.feasible);
        assert!(out.cuts.contains(&Cut::upper(set(&[0]), 1.0)), "{:?}", out.cuts);
        for c in &out.cuts {
            assert!(c.violation(&[2.0, 1.0, 0.0]) > 0.0);
        }
    }

    #[test]
    fn single_cut_mode_emits_minimizer_only() {
        let fleet = derived_pair();
        let ev = BorderEvaluator::new(&fleet, 3);
        let out = separation_oracle(&ev, &[1.0, 0.5, 0.5], 1e-6, false, &WolfeOptions::default()).unwrap();
        assert_eq!(out.cuts, vec![Cut::upper(set(&[0, 2]), 1.0)]);
        assert_eq!(out.cuts[0].sense, CutSense::Upper);
    }

    #[test]
    fn chain_evaluation_matches_pointwise() {
        let fleet = derived_pair();
        let ev = BorderEvaluator::new(&fleet, 3);
        let h = SeparationFunction::new(&ev, &[0.2, 0.7, 0.1]);
        let order = [3, 1, 0, 2];
        let chain = h.eval_chain(&order).unwrap();
        let mut cur = SubsetMask::empty(4);
        for (k, &e) in order.iter().enumerate() {
            cur.insert(e);
            assert!((chain[k] - h.eval(&cur).unwrap()).abs() < 1e-15);
        }
    }
}
