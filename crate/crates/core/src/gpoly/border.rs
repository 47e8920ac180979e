use super::Side;
use crate::lp::{solve_lp, LpStatus};
use crate::model::{EvProfile, SubsetMask};

/// Concave piecewise-linear value over the running sum, with at most two
/// slopes `hi_w > lo_w`: slope `hi_w` on `[lo, lo + a]`, then `lo_w` on
/// `[lo + a, lo + a + b]`. `v` is the value at `lo`.
struct ValueFn {
    lo: f64,
    a: f64,
    b: f64,
    v: f64,
    hi_w: f64,
    lo_w: f64,
}

impl ValueFn {
    fn hi(&self) -> f64 {
        self.lo + self.a + self.b
    }

    /// Appends a step with weight `w` and power window `[pmin, pmax]`.
    fn step(&mut self, w: f64, pmin: f64, pmax: f64) {
        self.lo += pmin;
        self.v += w * pmin;
        if w == self.hi_w {
            self.a += pmax - pmin;
        } else {
            self.b += pmax - pmin;
        }
    }

    /// Restricts the domain to `[smin, smax]`; `None` when they do not meet.
    fn clip(&mut self, smin: f64, smax: f64) -> Option<()> {
        let tol = 1e-9 * (1.0 + smin.abs().max(smax.abs()).max(self.lo.abs()));
        if smin > self.hi() + tol || smax < self.lo - tol {
            return None;
        }
        let left = smin - self.lo;
        if left > 0.0 {
            let from_a = left.min(self.a);
            let from_b = (left - from_a).min(self.b);
            self.v += self.hi_w * from_a + self.lo_w * from_b;
            self.a -= from_a;
            self.b -= from_b;
            self.lo += from_a + from_b;
        }
        let right = self.hi() - smax;
        if right > 0.0 {
            let from_b = right.min(self.b);
            let from_a = (right - from_b).min(self.a);
            self.b -= from_b;
            self.a -= from_a;
            if self.lo > smax {
                self.lo = smax;
            }
        }
        Some(())
    }

    fn max(&self) -> f64 {
        self.v + self.hi_w.max(0.0) * self.a + self.lo_w.max(0.0) * self.b
    }
}

/// Per-vehicle border of `profile` on `a` by a forward sweep over time.
///
/// Tracks the best objective as a function of the running sum; each step
/// convolves with a segment of slope 0 or 1 and then clips to the running-sum
/// window. Returns `None` when the profile is empty.
pub fn profile_border(profile: &EvProfile, a: &SubsetMask, side: Side) -> Option<f64> {
    let (w_in, w_out): (f64, f64) = match side {
        Side::Upper => (1.0, 0.0),
        Side::Lower => (-1.0, 0.0),
    };
    let mut f = ValueFn { lo: 0.0, a: 0.0, b: 0.0, v: 0.0, hi_w: w_in.max(w_out), lo_w: w_in.min(w_out) };
    for t in 0..profile.steps() {
        let w = if a.contains(t) { w_in } else { w_out };
        f.step(w, profile.p_min[t], profile.p_max[t]);
        f.clip(profile.s_min[t], profile.s_max[t])?;
    }
    let best = f.max();
    Some(match side {
        Side::Upper => best,
        Side::Lower => -best,
    })
}

/// Per-vehicle border computed by a linear program over the flexibility set.
pub fn profile_border_lp(profile: &EvProfile, a: &SubsetMask, side: Side) -> Option<f64> {
    let mut lp = profile.flexibility_lp();
    let sign = match side {
        Side::Upper => -1.0,
        Side::Lower => 1.0,
    };
    for t in a.iter() {
        lp.objective[t] = sign;
    }
    let sol = solve_lp(&lp);
    (sol.status == LpStatus::Optimal).then_some(sign * sol.objective_value)
}
