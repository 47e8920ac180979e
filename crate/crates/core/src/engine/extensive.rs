use super::master::{add_unit_rows, unit_var};
use super::{EngineError, IterationRecord, SolveReport, SolveStatus};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Row};
use crate::model::{EvProfile, Instance};
use std::time::Instant;

/// Upper limit on rows for the dense reference solves.
pub const MAX_REFERENCE_ROWS: usize = 6000;

/// Adds one block of `T` charging variables per profile with its running-sum
/// rows; returns the first column.
fn add_fleet_block(lp: &mut LinearProgram, fleet: &[EvProfile], steps: usize) -> usize {
    let first = lp.num_vars();
    for profile in fleet {
        for t in 0..steps {
            lp.add_var(0.0, profile.p_min[t], profile.p_max[t]);
        }
    }
    for (n, profile) in fleet.iter().enumerate() {
        let base = first + n * steps;
        for t in 0..steps {
            let coeffs = (0..=t).map(|k| (base + k, 1.0)).collect();
            lp.add_row(Row::range(coeffs, profile.s_min[t], profile.s_max[t]));
        }
    }
    first
}

fn aggregate(x: &[f64], first: usize, fleet: &[EvProfile], steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|t| fleet.iter().enumerate().map(|(n, p)| p.count as f64 * x[first + n * steps + t]).sum())
        .collect()
}

fn check_size(fleet: &[EvProfile], steps: usize, extra: usize) -> Result<(), EngineError> {
    let rows = fleet.len() * steps + extra;
    if rows > MAX_REFERENCE_ROWS {
        return Err(EngineError::TooLarge { rows, limit: MAX_REFERENCE_ROWS });
    }
    Ok(())
}

/// Solves the unit-commitment LP with explicit per-profile charging variables.
pub fn solve_extensive(instance: &Instance) -> Result<SolveReport, EngineError> {
    instance.validate()?;
    let start = Instant::now();
    let steps = instance.steps();
    let units = instance.units.len();
    check_size(&instance.fleet, steps, steps)?;

    let mut lp = LinearProgram::new();
    for unit in &instance.units {
        for t in 0..steps {
            lp.add_var(unit.cost[t], unit.p_min[t], unit.p_max[t]);
        }
    }
    add_unit_rows(instance, &mut lp, 0);
    let first = add_fleet_block(&mut lp, &instance.fleet, steps);
    for t in 0..steps {
        let mut coeffs: Vec<(usize, f64)> = (0..units).map(|m| (unit_var(steps, m, t), 1.0)).collect();
        for (n, p) in instance.fleet.iter().enumerate() {
            coeffs.push((first + n * steps + t, -(p.count as f64)));
        }
        lp.add_row(Row::eq(coeffs, instance.demand[t]));
    }
    let sol = solve_lp(&lp);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let status = match sol.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        other => return Err(EngineError::Lp(other)),
    };
    let optimal = status == SolveStatus::Optimal;
    let p_schedule = if optimal { aggregate(&sol.x, first, &instance.fleet, steps) } else { vec![] };
    let unit_schedules = if optimal {
        (0..units).map(|m| sol.x[m * steps..(m + 1) * steps].to_vec()).collect()
    } else {
        vec![]
    };
    let objective = if optimal { sol.objective_value } else { f64::NAN };
    Ok(SolveReport {
        status,
        objective,
        iterations: vec![IterationRecord {
            iteration: 1,
            objective,
            cuts_added: 0,
            sfm_value: None,
            oracle_ms: 0.0,
            master_ms: ms,
            master_rows: lp.rows.len(),
            wolfe_cycles: 0,
        }],
        p_schedule,
        unit_schedules,
        total_cuts: 0,
        pool: vec![],
        total_ms: ms,
    })
}

/// Outcome of splitting an aggregate schedule among the profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// One single-vehicle schedule per profile; `residual` is the largest
    /// mismatch between the weighted sum and the target.
    Feasible { schedules: Vec<Vec<f64>>, residual: f64 },
    Infeasible { residual: f64 },
}

impl Certificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Certificate::Feasible { .. })
    }
}

/// Finds per-profile schedules whose count-weighted sum equals `p`.
///
/// Mismatch is absorbed by slack variables and minimized; the split is
/// accepted when the total slack is at most `tol * (1 + |p|_1)`.
pub fn disaggregation_certificate(fleet: &[EvProfile], p: &[f64], tol: f64) -> Result<Certificate, EngineError> {
    let steps = p.len();
    check_size(fleet, steps, steps)?;
    let mut lp = LinearProgram::new();
    let first = add_fleet_block(&mut lp, fleet, steps);
    let slack = lp.num_vars();
    for _ in 0..2 * steps {
        lp.add_var(1.0, 0.0, f64::INFINITY);
    }
    for t in 0..steps {
        let mut coeffs: Vec<(usize, f64)> =
            fleet.iter().enumerate().map(|(n, pr)| (first + n * steps + t, pr.count as f64)).collect();
        coeffs.push((slack + 2 * t, 1.0));
        coeffs.push((slack + 2 * t + 1, -1.0));
        lp.add_row(Row::eq(coeffs, p[t]));
    }
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(EngineError::Lp(sol.status));
    }
    let agg = aggregate(&sol.x, first, fleet, steps);
    let residual = agg.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = 1.0 + p.iter().map(|v| v.abs()).sum::<f64>();
    if sol.objective_value <= tol * scale {
        let schedules = (0..fleet.len()).map(|n| sol.x[first + n * steps..first + (n + 1) * steps].to_vec()).collect();
        Ok(Certificate::Feasible { schedules, residual })
    } else {
        Ok(Certificate::Infeasible { residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::tests::derived_instance;
    use crate::gpoly::tests::derived_pair;

    #[test]
    fn extensive_objectives() {
        assert!((solve_extensive(&derived_instance([1.0, 3.0, 1.0])).unwrap().objective - 4.0).abs() < 1e-9);
        assert!((solve_extensive(&derived_instance([1.0, 2.0, 3.0])).unwrap().objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_for_feasible_aggregate() {
        let fleet = derived_pair();
        match disaggregation_certificate(&fleet, &[1.0, 1.0, 0.0], 1e-7).unwrap() {
            Certificate::Feasible { schedules, residual } => {
                assert!(residual < 1e-9);
                assert!((schedules[0][0] - 1.0).abs() < 1e-9 && schedules[0][2].abs() < 1e-9);
                assert!((schedules[1][1] - 1.0).abs() < 1e-9);
                for (s, p) in schedules.iter().zip(&fleet) {
                    assert!(p.max_violation(s) < 1e-9);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificate_rejects_fractional_aggregate() {
        let c = disaggregation_certificate(&derived_pair(), &[1.0, 0.5, 0.5], 1e-7).unwrap();
        assert!(!c.is_feasible());
    }

    #[test]
    fn certificate_for_empty_fleet() {
        assert!(disaggregation_certificate(&[], &[0.0; 4], 1e-7).unwrap().is_feasible());
        assert!(!disaggregation_certificate(&[], &[0.0, 1.0], 1e-7).unwrap().is_feasible());
    }
}
