//! Dense bounded-variable linear programming.
//!
//! Problems are stated as `min c'x` subject to per-variable bounds and a list of
//! sparse rows `lo <= a'x <= hi`. The solver is a revised primal simplex on the
//! bounded formulation with a dense basis inverse; see [`simplex`].

mod simplex;

pub use simplex::Simplex;

use serde::{Deserialize, Serialize};

/// Absolute feasibility tolerance on row and bound residuals (scaled units).
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
/// Smallest pivot element accepted in the ratio test.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// One sparse linear row `lo <= coeffs . x <= hi`.
///
/// One-sided rows use an infinite bound on the other side; the `le`/`ge`/`eq`
/// constructors cover the usual sense/rhs form.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        match sense {
            Sense::Le => Self::range(coeffs, f64::NEG_INFINITY, rhs),
            Sense::Ge => Self::range(coeffs, rhs, f64::INFINITY),
            Sense::Eq => Self::range(coeffs, rhs, rhs),
        }
    }

    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Sense::Le, rhs)
    }

    pub fn ge(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Sense::Ge, rhs)
    }

    pub fn eq(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(coeffs, Sense::Eq, rhs)
    }

    /// Two-sided row; both sides may be finite.
    pub fn range(coeffs: Vec<(usize, f64)>, lo: f64, hi: f64) -> Self {
        Self { coeffs, lo, hi }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.activity(x);
        (self.lo - v).max(v - self.hi).max(0.0)
    }
}

/// A linear program in minimization form.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max);
        self.rows.iter().map(|r| r.violation(x)).fold(bounds, f64::max)
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err("bound vectors do not match objective length".into());
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(format!("objective coefficient {j} is not finite"));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(format!("variable {j} has invalid bounds"));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.lo.is_nan() || row.hi.is_nan() {
                return Err(format!("row {i} has a NaN bound"));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(format!("row {i} references variable {j} out of range"));
                }
                if !a.is_finite() {
                    return Err(format!("row {i} has a non-finite coefficient"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; for `Infeasible` this is the phase-one point with least
    /// total infeasibility.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub max_residual: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `lp` from a cold start.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    match Simplex::new(lp) {
        Ok(mut s) => s.solve(),
        Err(_) => LpSolution {
            status: LpStatus::NumericalFailure,
            x: vec![0.0; lp.num_vars()],
            objective_value: f64::NAN,
            max_residual: f64::INFINITY,
            iterations: 0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_minimum_at_lower_bound() {
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x, vec![0.0]);
        assert_eq!(sol.objective_value, 0.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(Row::ge(vec![(x, 1.0)], 1.0));
        lp.add_row(Row::le(vec![(x, 1.0)], 0.0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn simplex_corner() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(-1.0, 0.0, f64::INFINITY);
        lp.add_row(Row::le(vec![(x, 1.0), (y, 1.0)], 1.0));
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_row(Row::le(vec![(x, 1.0), (y, -1.0)], 1.0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + 2y s.t. x + y = 3, x - y >= -1, x,y free, x <= 1
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, f64::NEG_INFINITY, 1.0);
        let y = lp.add_var(2.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row(Row::eq(vec![(x, 1.0), (y, 1.0)], 3.0));
        lp.add_row(Row::ge(vec![(x, 1.0), (y, -1.0)], -1.0));
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9 && (sol.x[1] - 2.0).abs() < 1e-9);
        assert!((sol.objective_value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn empty_row_checks() {
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(Row::ge(vec![], 1.0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(Row::le(vec![], 1.0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Optimal);
    }

    #[test]
    fn fixed_variables_stay_put() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-5.0, 2.0, 2.0);
        let y = lp.add_var(1.0, 0.0, 10.0);
        lp.add_row(Row::ge(vec![(x, 1.0), (y, 1.0)], 3.0));
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.x[0], 2.0);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn objective_scaling_preserves_status() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(3.0, 0.0, 4.0);
        let y = lp.add_var(-2.0, 0.0, 4.0);
        lp.add_row(Row::le(vec![(x, -1.0), (y, 1.0)], 1.5));
        let base = solve_lp(&lp);
        for k in [0.5, 7.0, 1e3] {
            let mut scaled = lp.clone();
            scaled.objective.iter_mut().for_each(|c| *c *= k);
            let s = solve_lp(&scaled);
            assert_eq!(s.status, base.status);
            assert!((s.objective_value - k * base.objective_value).abs() < 1e-9 * k);
        }
    }
}
