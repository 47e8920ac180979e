//! Revised primal simplex for bounded variables.
//!
//! Every row `lo <= a'x <= hi` gets a logical variable `r = a'x` carrying the
//! row bounds, so the equality system is `[A | -I] (x, r) = 0` and every
//! variable is boxed (possibly by infinite bounds). The starting basis is the
//! all-logical one. Phase one minimizes the sum of bound violations of basic
//! variables from whatever basis is current, which makes it double as the warm
//! start after rows are appended. The basis inverse is stored dense and
//! column-major and updated in product form, with periodic reinversion.

use super::{LinearProgram, LpSolution, LpStatus, Row, FEAS_TOL, OPT_TOL, PIVOT_TOL};

const DEGENERATE_STEP: f64 = 1e-12;
const MIN_REFACTOR_INTERVAL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable, held at its current value.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

/// A simplex solver instance that can be re-solved after appending rows.
#[derive(Debug, Clone)]
pub struct Simplex {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    orig_cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    row_coeffs: Vec<Vec<(usize, f64)>>,
    x_scale: f64,
    empty_row_infeasible: bool,

    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    /// Column-major `m x m` inverse of the basis matrix.
    binv: Vec<f64>,
    pivots_since_refactor: usize,
    degenerate_run: usize,
    iterations: usize,
}

fn pow2_scale(v: f64) -> f64 {
    if v <= 1.0 || !v.is_finite() {
        1.0
    } else {
        2f64.powi(v.log2().round() as i32)
    }
}

impl Simplex {
    pub fn new(lp: &LinearProgram) -> Result<Self, String> {
        lp.check()?;
        let n = lp.num_vars();
        let mut magnitude = 0.0f64;
        for j in 0..n {
            for b in [lp.lower[j], lp.upper[j]] {
                if b.is_finite() {
                    magnitude = magnitude.max(b.abs());
                }
            }
        }
        for r in &lp.rows {
            for b in [r.lo, r.hi] {
                if b.is_finite() {
                    magnitude = magnitude.max(b.abs());
                }
            }
        }
        let x_scale = pow2_scale(magnitude);
        let c_max = lp.objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let c_scale = pow2_scale(c_max);

        let mut s = Simplex {
            n,
            m: 0,
            cost: lp.objective.iter().map(|c| c / c_scale).collect(),
            orig_cost: lp.objective.clone(),
            lo: lp.lower.iter().map(|b| b / x_scale).collect(),
            hi: lp.upper.iter().map(|b| b / x_scale).collect(),
            cols: vec![Vec::new(); n],
            row_coeffs: Vec::new(),
            x_scale,
            empty_row_infeasible: false,
            basis: Vec::new(),
            state: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            binv: Vec::new(),
            pivots_since_refactor: 0,
            degenerate_run: 0,
            iterations: 0,
        };
        for j in 0..n {
            let (st, v) = initial_nonbasic(s.lo[j], s.hi[j]);
            s.state.push(st);
            s.x.push(v);
        }
        s.add_rows(&lp.rows);
        Ok(s)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Appends a row, keeping the current basis (the new logical enters it).
    pub fn add_row(&mut self, row: &Row) {
        self.add_rows(std::slice::from_ref(row));
    }

    /// Appends several rows at once; their logicals enter the basis.
    pub fn add_rows(&mut self, rows: &[Row]) {
        let m = self.m;
        let k = rows.len();
        if k == 0 {
            return;
        }
        let mut merged_rows = Vec::with_capacity(k);
        for (offset, row) in rows.iter().enumerate() {
            let i = m + offset;
            let mut sorted = row.coeffs.clone();
            sorted.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
            for (j, a) in sorted {
                match merged.last_mut() {
                    Some((q, v)) if *q == j => *v += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            if merged.is_empty() && (row.lo > FEAS_TOL * self.x_scale || row.hi < -FEAS_TOL * self.x_scale) {
                self.empty_row_infeasible = true;
            }
            for &(j, a) in &merged {
                self.cols[j].push((i, a));
            }
            merged_rows.push(merged);
        }

        // B' = [[B, 0], [R, -I]] so B'^-1 = [[B^-1, 0], [R B^-1, -I]], where R holds
        // the new rows' coefficients on the current basic columns.
        let size = m + k;
        let mut binv = vec![0.0; size * size];
        if m > 0 {
            let mut pos = vec![usize::MAX; self.n];
            for (q, &var) in self.basis.iter().enumerate() {
                if var < self.n {
                    pos[var] = q;
                }
            }
            let basic_coeffs: Vec<Vec<(usize, f64)>> = merged_rows
                .iter()
                .map(|r| r.iter().filter(|&&(j, _)| pos[j] != usize::MAX).map(|&(j, a)| (pos[j], a)).collect())
                .collect();
            for j in 0..m {
                let src = &self.binv[j * m..(j + 1) * m];
                let dst = &mut binv[j * size..j * size + size];
                dst[..m].copy_from_slice(src);
                for (r, coeffs) in basic_coeffs.iter().enumerate() {
                    dst[m + r] = coeffs.iter().map(|&(q, a)| a * src[q]).sum();
                }
            }
        }
        for r in 0..k {
            binv[(m + r) * size + m + r] = -1.0;
        }
        self.binv = binv;

        for (row, merged) in rows.iter().zip(merged_rows) {
            let activity: f64 = merged.iter().map(|&(j, a)| a * self.x[j]).sum();
            let i = self.m;
            self.row_coeffs.push(merged);
            self.lo.push(row.lo / self.x_scale);
            self.hi.push(row.hi / self.x_scale);
            self.x.push(activity);
            self.state.push(VarState::Basic);
            self.basis.push(self.n + i);
            self.m += 1;
        }
    }

    fn total_vars(&self) -> usize {
        self.n + self.m
    }

    /// `B^-1 a_q` for any (structural or logical) variable `q`.
    fn ftran(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        if q < self.n {
            for &(k, a) in &self.cols[q] {
                let col = &self.binv[k * m..(k + 1) * m];
                for (o, b) in out.iter_mut().zip(col) {
                    *o += a * b;
                }
            }
        } else {
            let k = q - self.n;
            for (o, b) in out.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                *o = -b;
            }
        }
        out
    }

    fn is_infeasible(&self, var: usize) -> i8 {
        let v = self.x[var];
        if v < self.lo[var] - FEAS_TOL {
            -1
        } else if v > self.hi[var] + FEAS_TOL {
            1
        } else {
            0
        }
    }

    fn basic_costs(&self, phase: Phase) -> Vec<f64> {
        self.basis
            .iter()
            .map(|&var| match phase {
                Phase::One => self.is_infeasible(var) as f64,
                Phase::Two => {
                    if var < self.n {
                        self.cost[var]
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|j| {
                self.binv[j * m..(j + 1) * m]
                    .iter()
                    .zip(cb)
                    .map(|(b, c)| b * c)
                    .sum()
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        if j < self.n {
            let c = if phase == Phase::Two { self.cost[j] } else { 0.0 };
            c - self.cols[j].iter().map(|&(k, a)| y[k] * a).sum::<f64>()
        } else {
            y[j - self.n]
        }
    }

    /// Picks an entering variable and direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64], phase: Phase, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.total_vars() {
            let st = self.state[j];
            if st == VarState::Basic || self.hi[j] <= self.lo[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase);
            let dir = match st {
                VarState::AtLower if d < -OPT_TOL => 1.0,
                VarState::AtUpper if d > OPT_TOL => -1.0,
                VarState::Free if d.abs() > OPT_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| d.abs() > s) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    /// Distance basic position `i` may move at `rate` per unit step before
    /// hitting its relevant bound, padded by `pad`.
    fn limit(&self, i: usize, rate: f64, pad: f64) -> Option<(f64, bool)> {
        let var = self.basis[i];
        let v = self.x[var];
        let (lo, hi) = (self.lo[var], self.hi[var]);
        if rate < 0.0 {
            if v > hi + FEAS_TOL {
                Some((((v - hi + pad) / -rate).max(0.0), true))
            } else if v < lo - FEAS_TOL || !lo.is_finite() {
                None
            } else {
                Some((((v - lo + pad) / -rate).max(0.0), false))
            }
        } else if v < lo - FEAS_TOL {
            Some((((lo - v + pad) / rate).max(0.0), false))
        } else if v > hi + FEAS_TOL || !hi.is_finite() {
            None
        } else {
            Some((((hi - v + pad) / rate).max(0.0), true))
        }
    }

    fn iterate(&mut self, phase: Phase) -> Step {
        let bland = self.degenerate_run > 10 * (self.total_vars());
        let cb = self.basic_costs(phase);
        let y = self.duals(&cb);
        let Some((q, dir)) = self.price(&y, phase, bland) else {
            return Step::Optimal;
        };
        let alpha = self.ftran(q);

        // Harris two-pass ratio test.
        let mut theta_max = f64::INFINITY;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((l, _)) = self.limit(i, -dir * a, FEAS_TOL) {
                theta_max = theta_max.min(l);
            }
        }
        let flip = self.hi[q] - self.lo[q];
        if flip.is_finite() && flip <= theta_max {
            self.apply_step(q, dir, flip, &alpha);
            self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
            self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
            self.note_step(flip);
            return Step::Pivoted;
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        let mut leave: Option<(usize, f64, bool)> = None;
        let mut best_alpha = 0.0;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((l, upper)) = self.limit(i, -dir * a, 0.0) {
                if l <= theta_max {
                    let better = if bland {
                        leave.is_none_or(|(k, _, _)| self.basis[i] < self.basis[k])
                    } else {
                        a.abs() > best_alpha
                    };
                    if better {
                        best_alpha = a.abs();
                        leave = Some((i, l, upper));
                    }
                }
            }
        }
        let Some((r, theta, to_upper)) = leave else {
            return Step::Unbounded;
        };
        self.apply_step(q, dir, theta, &alpha);
        let out = self.basis[r];
        if to_upper {
            self.x[out] = self.hi[out];
            self.state[out] = VarState::AtUpper;
        } else {
            self.x[out] = self.lo[out];
            self.state[out] = VarState::AtLower;
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        self.update_inverse(r, &alpha);
        self.note_step(theta);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= MIN_REFACTOR_INTERVAL.max(2 * self.m) {
            self.refactor();
        }
        Step::Pivoted
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64, alpha: &[f64]) {
        if theta == 0.0 {
            return;
        }
        for (i, &a) in alpha.iter().enumerate() {
            let var = self.basis[i];
            self.x[var] -= dir * a * theta;
        }
        self.x[q] += dir * theta;
    }

    fn note_step(&mut self, theta: f64) {
        self.iterations += 1;
        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn update_inverse(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        for j in 0..m {
            let col = &mut self.binv[j * m..(j + 1) * m];
            let v = col[r] / ar;
            if v != 0.0 {
                for (c, a) in col.iter_mut().zip(alpha) {
                    *c -= a * v;
                }
            }
            col[r] = v;
        }
    }

    /// Recomputes the basis inverse from scratch, swapping in logicals for
    /// columns that turn out dependent, then refreshes basic values.
    fn refactor(&mut self) {
        let m = self.m;
        loop {
            // Dense B, column-major.
            let mut b = vec![0.0; m * m];
            for (k, &var) in self.basis.iter().enumerate() {
                if var < self.n {
                    for &(i, a) in &self.cols[var] {
                        b[k * m + i] = a;
                    }
                } else {
                    b[k * m + (var - self.n)] = -1.0;
                }
            }
            match invert(&b, m) {
                Ok(inv) => {
                    self.binv = inv;
                    break;
                }
                Err(k) => {
                    // Replace the dependent column with a logical not yet basic.
                    let used: std::collections::HashSet<usize> = self
                        .basis
                        .iter()
                        .filter(|&&v| v >= self.n)
                        .map(|&v| v - self.n)
                        .collect();
                    let Some(free_row) = (0..m).find(|i| !used.contains(i)) else {
                        break;
                    };
                    let out = self.basis[k];
                    let (st, v) = nearest_bound(self.lo[out], self.hi[out], self.x[out]);
                    self.state[out] = st;
                    self.x[out] = v;
                    self.basis[k] = self.n + free_row;
                    self.state[self.n + free_row] = VarState::Basic;
                }
            }
        }
        self.pivots_since_refactor = 0;
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut w = vec![0.0; m];
        for j in 0..self.n {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    w[i] += a * self.x[j];
                }
            }
        }
        for i in 0..m {
            if self.state[self.n + i] != VarState::Basic {
                w[i] -= self.x[self.n + i];
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &wk) in w.iter().enumerate() {
            if wk != 0.0 {
                for (o, b) in xb.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *o -= b * wk;
                }
            }
        }
        for (k, &var) in self.basis.iter().enumerate() {
            self.x[var] = xb[k];
        }
    }

    fn any_basic_infeasible(&self) -> bool {
        self.basis.iter().any(|&v| self.is_infeasible(v) != 0)
    }

    pub fn solve(&mut self) -> LpSolution {
        if self.empty_row_infeasible {
            return self.finish(LpStatus::Infeasible);
        }
        let max_iters = self.iterations + 50 * (self.total_vars() + self.m) + 1000;
        let mut verifications = 0;
        self.recompute_basics();
        loop {
            if self.iterations > max_iters {
                return self.finish(LpStatus::NumericalFailure);
            }
            let phase = if self.any_basic_infeasible() { Phase::One } else { Phase::Two };
            match self.iterate(phase) {
                Step::Pivoted => {}
                Step::Unbounded => {
                    return self.finish(if phase == Phase::Two {
                        LpStatus::Unbounded
                    } else {
                        LpStatus::NumericalFailure
                    });
                }
                Step::Optimal => {
                    // Confirm on freshly computed basic values before reporting;
                    // refactor only once the confirmation has already failed.
                    if verifications > 0 {
                        self.refactor();
                    } else {
                        self.recompute_basics();
                    }
                    let infeasible = self.any_basic_infeasible();
                    let stable = match phase {
                        Phase::One => infeasible,
                        Phase::Two => !infeasible,
                    };
                    if stable || verifications >= 3 {
                        let status = if infeasible { LpStatus::Infeasible } else { LpStatus::Optimal };
                        return self.finish(status);
                    }
                    verifications += 1;
                }
            }
        }
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let x: Vec<f64> = self.x[..self.n].iter().map(|v| v * self.x_scale).collect();
        let objective_value = self.orig_cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let mut residual = 0.0f64;
        for j in 0..self.n {
            let v = self.x[j];
            residual = residual.max(self.lo[j] - v).max(v - self.hi[j]);
        }
        for (i, coeffs) in self.row_coeffs.iter().enumerate() {
            let act: f64 = coeffs.iter().map(|&(j, a)| a * self.x[j]).sum();
            residual = residual.max(self.lo[self.n + i] - act).max(act - self.hi[self.n + i]);
        }
        LpSolution {
            status,
            x,
            objective_value,
            max_residual: residual.max(0.0) * self.x_scale,
            iterations: self.iterations,
        }
    }
}

fn initial_nonbasic(lo: f64, hi: f64) -> (VarState, f64) {
    if lo.is_finite() {
        (VarState::AtLower, lo)
    } else if hi.is_finite() {
        (VarState::AtUpper, hi)
    } else {
        (VarState::Free, 0.0)
    }
}

fn nearest_bound(lo: f64, hi: f64, v: f64) -> (VarState, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if (v - lo).abs() <= (hi - v).abs() {
                (VarState::AtLower, lo)
            } else {
                (VarState::AtUpper, hi)
            }
        }
        (true, false) => (VarState::AtLower, lo),
        (false, true) => (VarState::AtUpper, hi),
        (false, false) => (VarState::Free, v),
    }
}

/// Gauss-Jordan inverse of a column-major `m x m` matrix with partial
/// pivoting. On singularity returns the offending column index.
fn invert(b: &[f64], m: usize) -> Result<Vec<f64>, usize> {
    // Work row-major on [B | I].
    let w = 2 * m;
    let mut a = vec![0.0; m * w];
    for i in 0..m {
        for j in 0..m {
            a[i * w + j] = b[j * m + i];
        }
        a[i * w + m + i] = 1.0;
    }
    let mut perm_col_row = vec![0usize; m];
    let mut used = vec![false; m];
    for col in 0..m {
        let mut piv = None;
        let mut best = 1e-11;
        for i in 0..m {
            if !used[i] && a[i * w + col].abs() > best {
                best = a[i * w + col].abs();
                piv = Some(i);
            }
        }
        let p = piv.ok_or(col)?;
        used[p] = true;
        perm_col_row[col] = p;
        let pv = a[p * w + col];
        for j in 0..w {
            a[p * w + j] /= pv;
        }
        let prow: Vec<f64> = a[p * w..(p + 1) * w].to_vec();
        for i in 0..m {
            if i != p {
                let f = a[i * w + col];
                if f != 0.0 {
                    for (x, y) in a[i * w..(i + 1) * w].iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    // Row perm_col_row[k] of the right half holds row k of B^-1.
    let mut inv = vec![0.0; m * m];
    for k in 0..m {
        let src = perm_col_row[k];
        for j in 0..m {
            inv[j * m + k] = a[src * w + m + j];
        }
    }
    Ok(inv)
}
