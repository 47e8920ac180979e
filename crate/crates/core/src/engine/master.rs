use super::pool::CutPool;
use super::EngineError;
use crate::gpoly::Cut;
use crate::lp::{LinearProgram, LpSolution, LpStatus, Row, Simplex};
use crate::model::Instance;

/// Column of `z^m_t` in the master problem.
pub fn unit_var(steps: usize, m: usize, t: usize) -> usize {
    m * steps + t
}

/// Column of `p_t` in the master problem.
pub fn ev_var(instance: &Instance, t: usize) -> usize {
    instance.units.len() * instance.steps() + t
}

pub(crate) fn cut_row(instance: &Instance, cut: &Cut) -> Row {
    let coeffs = cut.subset.iter().map(|t| (ev_var(instance, t), 1.0)).collect();
    Row::new(coeffs, cut.sense.as_lp_sense(), cut.bound)
}

/// Production variables, costs, unit rows and demand balance; `p` is free.
pub(crate) fn base_problem(instance: &Instance) -> LinearProgram {
    let steps = instance.steps();
    let mut lp = LinearProgram::new();
    for unit in &instance.units {
        for t in 0..steps {
            lp.add_var(unit.cost[t], unit.p_min[t], unit.p_max[t]);
        }
    }
    for _ in 0..steps {
        lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    }
    for t in 0..steps {
        let mut coeffs: Vec<(usize, f64)> =
            (0..instance.units.len()).map(|m| (unit_var(steps, m, t), 1.0)).collect();
        coeffs.push((ev_var(instance, t), -1.0));
        lp.add_row(Row::eq(coeffs, instance.demand[t]));
    }
    add_unit_rows(instance, &mut lp, 0);
    lp
}

/// Ramp and generic rows of every unit; `offset` shifts unit columns.
pub(crate) fn add_unit_rows(instance: &Instance, lp: &mut LinearProgram, offset: usize) {
    let steps = instance.steps();
    for (m, unit) in instance.units.iter().enumerate() {
        let var = |t: usize| offset + unit_var(steps, m, t);
        if unit.ramp_up.is_some() || unit.ramp_down.is_some() {
            let up = unit.ramp_up.unwrap_or(f64::INFINITY);
            let down = unit.ramp_down.unwrap_or(f64::INFINITY);
            for t in 1..steps {
                lp.add_row(Row::range(vec![(var(t), 1.0), (var(t - 1), -1.0)], -down, up));
            }
        }
        for row in &unit.extra_rows {
            let coeffs = row.coeffs.iter().map(|&(t, a)| (var(t), a)).collect();
            lp.add_row(Row::new(coeffs, row.sense, row.rhs));
        }
    }
}

/// The master LP with every pool cut as a row.
pub fn build_master(instance: &Instance, pool: &CutPool) -> LinearProgram {
    let mut lp = base_problem(instance);
    for cut in pool.cuts() {
        lp.add_row(cut_row(instance, cut));
    }
    lp
}

/// Master problem kept as a warm simplex; pool cuts become rows only once the
/// current optimum violates them.
pub(crate) struct LazyMaster<'a> {
    instance: &'a Instance,
    simplex: Simplex,
    /// Bound currently enforced for each pool index, if any.
    active: Vec<Option<f64>>,
    pub(crate) rows: usize,
}

impl<'a> LazyMaster<'a> {
    pub(crate) fn new(instance: &'a Instance, pool: &CutPool) -> Result<Self, EngineError> {
        let mut lp = base_problem(instance);
        let mut active = Vec::with_capacity(pool.len());
        for entry in pool.entries() {
            lp.add_row(cut_row(instance, &entry.cut));
            active.push(Some(entry.cut.bound));
        }
        let rows = lp.rows.len();
        let simplex = Simplex::new(&lp).map_err(EngineError::InvalidMaster)?;
        Ok(Self { instance, simplex, active, rows })
    }

    /// Optimal master solution over the whole pool.
    pub(crate) fn solve(&mut self, pool: &CutPool) -> LpSolution {
        self.active.resize(pool.len(), None);
        loop {
            let sol = self.simplex.solve();
            if sol.status != LpStatus::Optimal {
                return sol;
            }
            let p = &sol.x[ev_var(self.instance, 0)..];
            let mut new_rows = Vec::new();
            for (i, entry) in pool.entries().enumerate() {
                let cut = &entry.cut;
                if self.active[i] == Some(cut.bound) {
                    continue;
                }
                if cut.violation(p) > 1e-9 * (1.0 + cut.bound.abs()) {
                    new_rows.push(cut_row(self.instance, cut));
                    self.active[i] = Some(cut.bound);
                }
            }
            if new_rows.is_empty() {
                return sol;
            }
            self.rows += new_rows.len();
            self.simplex.add_rows(&new_rows);
        }
    }
}
