//! Cutting-plane unit commitment with an exact aggregate EV flexibility set.
//!
//! The master problem starts from the naive aggregate of the fleet. Each
//! iteration solves the master, asks the separation oracle whether the EV
//! schedule is disaggregable, and if not adds the violated border inequalities
//! found during submodular minimization.

mod extensive;
mod master;
mod pool;
mod separation;

pub use extensive::{disaggregation_certificate, solve_extensive, Certificate, MAX_REFERENCE_ROWS};
pub use master::{build_master, ev_var, unit_var};
pub use pool::{CutPool, PoolEntry};
pub use separation::{map_extended_set, separation_oracle, SeparationFunction, SeparationOutcome};

use crate::gpoly::{naive_polytope, BorderEvaluator, GpolyError};
use crate::lp::LpStatus;
use crate::model::{Instance, ModelError};
use crate::sfm::{SfmError, WolfeOptions};
use master::LazyMaster;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Border(#[from] GpolyError),
    #[error(transparent)]
    Sfm(#[from] SfmError),
    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),
    #[error("master problem could not be built: {0}")]
    InvalidMaster(String),
    #[error("iteration {iteration} found a violation but produced no new cut")]
    Stalled { iteration: usize },
    #[error("reference problem needs {rows} rows, above the limit of {limit}")]
    TooLarge { rows: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutMode {
    /// Every chain set below the threshold.
    All,
    /// Only the minimizer.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative separation tolerance, scaled by `1 + |p|_1`.
    pub sep_tol: f64,
    pub max_iters: usize,
    pub threads: usize,
    pub cut_mode: CutMode,
    /// When false, stop after the first master solve (naive aggregate only).
    pub separation: bool,
    pub wolfe: WolfeOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            sep_tol: 1e-6,
            max_iters: 100,
            threads: 1,
            cut_mode: CutMode::All,
            separation: true,
            wolfe: WolfeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub cuts_added: usize,
    pub sfm_value: Option<f64>,
    pub oracle_ms: f64,
    pub master_ms: f64,
    pub master_rows: usize,
    pub wolfe_cycles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: Vec<IterationRecord>,
    pub p_schedule: Vec<f64>,
    pub unit_schedules: Vec<Vec<f64>>,
    /// Cuts added by separation, excluding the naive ones.
    pub total_cuts: usize,
    pub pool: Vec<PoolEntry>,
    pub total_ms: f64,
}

impl SolveReport {
    fn empty(status: SolveStatus) -> Self {
        Self {
            status,
            objective: f64::NAN,
            iterations: vec![],
            p_schedule: vec![],
            unit_schedules: vec![],
            total_cuts: 0,
            pool: vec![],
            total_ms: 0.0,
        }
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the cutting-plane loop on a validated instance.
pub fn solve_uc(instance: &Instance, opts: &SolveOptions) -> Result<SolveReport, EngineError> {
    instance.validate()?;
    let start = Instant::now();
    let steps = instance.steps();
    let evaluator = BorderEvaluator::new(&instance.fleet, steps).with_threads(opts.threads)?;
    let mut pool = CutPool::from_cuts(naive_polytope(&instance.fleet, steps));
    let mut master = LazyMaster::new(instance, &pool)?;
    let mut report = SolveReport::empty(SolveStatus::IterationLimit);

    for iteration in 1..=opts.max_iters {
        let t_master = Instant::now();
        let sol = master.solve(&pool);
        let master_ms = ms_since(t_master);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                report.status = SolveStatus::Infeasible;
                break;
            }
            other => return Err(EngineError::Lp(other)),
        }
        let p = sol.x[ev_var(instance, 0)..].to_vec();
        report.objective = sol.objective_value;
        report.unit_schedules =
            (0..instance.units.len()).map(|m| sol.x[m * steps..(m + 1) * steps].to_vec()).collect();
        report.p_schedule = p.clone();
        let mut record = IterationRecord {
            iteration,
            objective: sol.objective_value,
            cuts_added: 0,
            sfm_value: None,
            oracle_ms: 0.0,
            master_ms,
            master_rows: master.rows,
            wolfe_cycles: 0,
        };
        if !opts.separation {
            report.iterations.push(record);
            report.status = SolveStatus::Optimal;
            break;
        }

        let t_oracle = Instant::now();
        let outcome =
            separation_oracle(&evaluator, &p, opts.sep_tol, opts.cut_mode == CutMode::All, &opts.wolfe)?;
        record.oracle_ms = ms_since(t_oracle);
        record.sfm_value = Some(outcome.sfm_value);
        record.wolfe_cycles = outcome.major_cycles;
        if outcome.feasible {
            report.iterations.push(record);
            report.status = SolveStatus::Optimal;
            break;
        }
        let added = outcome.cuts.into_iter().filter(|c| pool.insert(c.clone(), iteration)).count();
        record.cuts_added = added;
        report.total_cuts += added;
        report.iterations.push(record);
        if added == 0 {
            return Err(EngineError::Stalled { iteration });
        }
    }
    report.pool = pool.entries().cloned().collect();
    report.total_ms = ms_since(start);
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::gpoly::tests::derived_pair;
    use crate::model::{ProductionUnit, TimeHorizon};

    /// One unit with capacity 3, zero demand and the derived two-profile fleet.
    pub(crate) fn derived_instance(cost: [f64; 3]) -> Instance {
        let mut unit = ProductionUnit::flat("g", 3, 0.0, 0.0, 3.0);
        unit.cost = cost.to_vec();
        Instance { horizon: TimeHorizon::hourly(3), demand: vec![0.0; 3], units: vec![unit], fleet: derived_pair() }
    }

    #[test]
    fn derived_instance_needs_two_iterations() {
        let r = solve_uc(&derived_instance([1.0, 3.0, 1.0]), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 4.0).abs() < 1e-9);
        assert_eq!(r.iterations.len(), 2);
        assert!((r.iterations[0].objective - 2.0).abs() < 1e-9);
        assert_eq!(r.iterations[0].sfm_value, Some(-1.0));
        assert!(r.total_cuts >= 1);
        assert!((r.p_schedule[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn naive_optimum_can_be_exact() {
        let r = solve_uc(&derived_instance([1.0, 2.0, 3.0]), &SolveOptions::default()).unwrap();
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert_eq!(r.iterations.len(), 1);
        for (a, b) in r.p_schedule.iter().zip([1.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn separation_disabled_returns_naive_bound() {
        let opts = SolveOptions { separation: false, ..SolveOptions::default() };
        let r = solve_uc(&derived_instance([1.0, 3.0, 1.0]), &opts).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_cut_mode_also_converges() {
        let opts = SolveOptions { cut_mode: CutMode::Single, ..SolveOptions::default() };
        let r = solve_uc(&derived_instance([1.0, 3.0, 1.0]), &opts).unwrap();
        assert!((r.objective - 4.0).abs() < 1e-9);
        assert_eq!(r.iterations[0].cuts_added, 1);
    }

    #[test]
    fn empty_fleet_single_iteration() {
        let mut inst = derived_instance([1.0, 1.0, 1.0]);
        inst.fleet.clear();
        inst.demand = vec![1.0, 2.0, 3.0];
        let r = solve_uc(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.iterations.len(), 1);
        assert!((r.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_demand_reported() {
        let mut inst = derived_instance([1.0, 1.0, 1.0]);
        inst.demand = vec![5.0, 0.0, 0.0];
        let r = solve_uc(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn iteration_limit_reported() {
        let opts = SolveOptions { max_iters: 1, ..SolveOptions::default() };
        let r = solve_uc(&derived_instance([1.0, 3.0, 1.0]), &opts).unwrap();
        assert_eq!(r.status, SolveStatus::IterationLimit);
        assert_eq!(r.iterations.len(), 1);
    }
}
