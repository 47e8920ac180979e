//! Instance data: horizon, demand, production units and EV flexibility profiles.

mod mask;

pub use mask::SubsetMask;

use crate::lp::{solve_lp, LinearProgram, LpStatus, Row, Sense, FEAS_TOL};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch { what: String, expected: usize, found: usize },
    #[error("{what}: lower bound exceeds upper bound at step {t}")]
    BoundOrderViolation { what: String, t: usize },
    #[error("EV profile {profile} has an empty flexibility set")]
    EmptyFlexibilitySet { profile: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeHorizon {
    pub steps: usize,
    pub step_hours: f64,
}

impl TimeHorizon {
    pub fn new(steps: usize, step_hours: f64) -> Self {
        Self { steps, step_hours }
    }

    pub fn hourly(steps: usize) -> Self {
        Self::new(steps, 1.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.steps == 0 {
            return Err(ModelError::InvalidValue("horizon must have at least one step".into()));
        }
        if !(self.step_hours > 0.0 && self.step_hours.is_finite()) {
            return Err(ModelError::InvalidValue("step duration must be positive".into()));
        }
        Ok(())
    }
}

/// EV data as state-of-charge bounds and driving consumption (energies in MWh).
#[derive(Debug, Clone, PartialEq)]
pub struct EvProfileRaw {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub soc_min: Vec<f64>,
    pub soc_max: Vec<f64>,
    pub soc_init: f64,
    pub drive: Vec<f64>,
}

impl EvProfileRaw {
    pub fn validate(&self, steps: usize) -> Result<(), ModelError> {
        check_len("p_min", &self.p_min, steps)?;
        check_len("p_max", &self.p_max, steps)?;
        check_len("soc_min", &self.soc_min, steps)?;
        check_len("soc_max", &self.soc_max, steps)?;
        check_len("drive", &self.drive, steps)?;
        check_finite("soc_init", &[self.soc_init])?;
        check_order("power", &self.p_min, &self.p_max)?;
        check_order("state of charge", &self.soc_min, &self.soc_max)?;
        if let Some(t) = self.drive.iter().position(|&g| g < 0.0) {
            return Err(ModelError::InvalidValue(format!("negative driving consumption at step {t}")));
        }
        if let Some(t) = self.soc_min.iter().position(|&s| s < 0.0) {
            return Err(ModelError::InvalidValue(format!("negative minimum state of charge at step {t}")));
        }
        Ok(())
    }
}

/// Canonical EV flexibility class: per-step power bounds and bounds on the
/// running sum of power, shared by `count` identical vehicles.
///
/// `s_min[t] <= p[0] + .. + p[t] <= s_max[t]`. The running sums are in MW·step,
/// which is MWh for hourly steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EvProfile {
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub s_min: Vec<f64>,
    pub s_max: Vec<f64>,
    pub count: u64,
}

impl EvProfile {
    pub fn steps(&self) -> usize {
        self.p_min.len()
    }

    /// The same profile with a different vehicle count.
    pub fn with_count(&self, count: u64) -> Self {
        Self { count, ..self.clone() }
    }

    /// Feasibility LP over one vehicle's charging vector.
    pub fn flexibility_lp(&self) -> LinearProgram {
        let steps = self.steps();
        let mut lp = LinearProgram::new();
        for t in 0..steps {
            lp.add_var(0.0, self.p_min[t], self.p_max[t]);
        }
        for t in 0..steps {
            let coeffs = (0..=t).map(|k| (k, 1.0)).collect();
            lp.add_row(Row::range(coeffs, self.s_min[t], self.s_max[t]));
        }
        lp
    }

    /// Largest violation of the power and running-sum bounds by a single-vehicle schedule.
    pub fn max_violation(&self, p: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        let mut cum = 0.0;
        for t in 0..self.steps() {
            cum += p[t];
            worst = worst
                .max(self.p_min[t] - p[t])
                .max(p[t] - self.p_max[t])
                .max(self.s_min[t] - cum)
                .max(cum - self.s_max[t]);
        }
        worst
    }
}

/// Converts state-of-charge data into running-sum bounds.
///
/// `s[t] = (soc[t] - soc_init + drive[0] + .. + drive[t]) / step_hours`; power
/// bounds are copied.
pub fn reduce_profile(raw: &EvProfileRaw, count: u64, step_hours: f64) -> EvProfile {
    let mut cum_drive = 0.0;
    let mut s_min = Vec::with_capacity(raw.drive.len());
    let mut s_max = Vec::with_capacity(raw.drive.len());
    for t in 0..raw.drive.len() {
        cum_drive += raw.drive[t];
        s_min.push((raw.soc_min[t] - raw.soc_init + cum_drive) / step_hours);
        s_max.push((raw.soc_max[t] - raw.soc_init + cum_drive) / step_hours);
    }
    EvProfile { p_min: raw.p_min.clone(), p_max: raw.p_max.clone(), s_min, s_max, count }
}

/// Checks bound ordering and nonemptiness of one profile; `index` labels errors.
pub fn validate_profile(profile: &EvProfile, index: usize) -> Result<(), ModelError> {
    let steps = profile.steps();
    check_len("p_max", &profile.p_max, steps)?;
    check_len("s_min", &profile.s_min, steps)?;
    check_len("s_max", &profile.s_max, steps)?;
    for v in [&profile.p_min, &profile.p_max, &profile.s_min, &profile.s_max] {
        check_finite("EV profile bound", v)?;
    }
    if profile.count == 0 {
        return Err(ModelError::InvalidValue(format!("EV profile {index} has zero vehicles")));
    }
    check_order(&format!("EV profile {index} power"), &profile.p_min, &profile.p_max)?;
    check_order(&format!("EV profile {index} energy"), &profile.s_min, &profile.s_max)?;
    feasible_point(profile).map(|_| ()).map_err(|_| ModelError::EmptyFlexibilitySet { profile: index })
}

/// A single-vehicle schedule inside the profile's flexibility set.
pub fn feasible_point(profile: &EvProfile) -> Result<Vec<f64>, ModelError> {
    let sol = solve_lp(&profile.flexibility_lp());
    if sol.status == LpStatus::Optimal && sol.max_residual <= FEAS_TOL {
        Ok(sol.x)
    } else {
        Err(ModelError::EmptyFlexibilitySet { profile: 0 })
    }
}

/// A generic linear row over one unit's production vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionUnit {
    pub name: String,
    pub cost: Vec<f64>,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub ramp_up: Option<f64>,
    pub ramp_down: Option<f64>,
    pub extra_rows: Vec<UnitRow>,
}

impl ProductionUnit {
    /// A unit with constant cost and capacity and no dynamic constraints.
    pub fn flat(name: &str, steps: usize, cost: f64, p_min: f64, p_max: f64) -> Self {
        Self {
            name: name.to_string(),
            cost: vec![cost; steps],
            p_min: vec![p_min; steps],
            p_max: vec![p_max; steps],
            ramp_up: None,
            ramp_down: None,
            extra_rows: Vec::new(),
        }
    }

    pub fn validate(&self, steps: usize) -> Result<(), ModelError> {
        let what = |f: &str| format!("unit {} {f}", self.name);
        check_len(&what("cost"), &self.cost, steps)?;
        check_len(&what("p_min"), &self.p_min, steps)?;
        check_len(&what("p_max"), &self.p_max, steps)?;
        check_finite(&what("cost"), &self.cost)?;
        check_finite(&what("bounds"), &self.p_min)?;
        check_finite(&what("bounds"), &self.p_max)?;
        check_order(&what("production"), &self.p_min, &self.p_max)?;
        for r in [self.ramp_up, self.ramp_down].into_iter().flatten() {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(ModelError::InvalidValue(what("ramp limit must be nonnegative")));
            }
        }
        for row in &self.extra_rows {
            if !row.rhs.is_finite() {
                return Err(ModelError::InvalidValue(what("row rhs must be finite")));
            }
            for &(t, a) in &row.coeffs {
                if t >= steps {
                    return Err(ModelError::InvalidValue(what(&format!("row references step {t}"))));
                }
                if !a.is_finite() {
                    return Err(ModelError::InvalidValue(what("row coefficient must be finite")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub horizon: TimeHorizon,
    pub demand: Vec<f64>,
    pub units: Vec<ProductionUnit>,
    pub fleet: Vec<EvProfile>,
}

impl Instance {
    pub fn steps(&self) -> usize {
        self.horizon.steps
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        validate_instance(self)
    }
}

pub fn validate_instance(instance: &Instance) -> Result<(), ModelError> {
    instance.horizon.validate()?;
    let steps = instance.horizon.steps;
    check_len("demand", &instance.demand, steps)?;
    check_finite("demand", &instance.demand)?;
    for unit in &instance.units {
        unit.validate(steps)?;
    }
    for (n, profile) in instance.fleet.iter().enumerate() {
        check_len(&format!("EV profile {n} p_min"), &profile.p_min, steps)?;
        validate_profile(profile, n)?;
    }
    Ok(())
}

fn check_len(what: &str, v: &[f64], expected: usize) -> Result<(), ModelError> {
    if v.len() != expected {
        return Err(ModelError::LengthMismatch { what: what.to_string(), expected, found: v.len() });
    }
    Ok(())
}

fn check_finite(what: &str, v: &[f64]) -> Result<(), ModelError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::InvalidValue(format!("{what} must be finite")))
    }
}

fn check_order(what: &str, lo: &[f64], hi: &[f64]) -> Result<(), ModelError> {
    match lo.iter().zip(hi).position(|(a, b)| a > b) {
        Some(t) => Err(ModelError::BoundOrderViolation { what: what.to_string(), t }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn reduction_substitutes_cumulative_drive() {
        let raw = EvProfileRaw {
            p_min: vec![0.0; 2],
            p_max: vec![1.0; 2],
            soc_min: vec![0.0, 0.4],
            soc_max: vec![1.0, 1.0],
            soc_init: 0.5,
            drive: vec![0.0, 0.2],
        };
        let p = reduce_profile(&raw, 3, 1.0);
        assert!(approx(&p.s_min, &[-0.5, 0.1]));
        assert!(approx(&p.s_max, &[0.5, 0.7]));
        assert_eq!(p.p_max, raw.p_max);
        assert_eq!(p.count, 3);
    }

    #[test]
    fn reduction_identity_without_drive_or_initial_charge() {
        let raw = EvProfileRaw {
            p_min: vec![0.0; 3],
            p_max: vec![1.0; 3],
            soc_min: vec![0.1, 0.2, 0.3],
            soc_max: vec![1.0, 2.0, 3.0],
            soc_init: 0.0,
            drive: vec![0.0; 3],
        };
        let p = reduce_profile(&raw, 1, 1.0);
        assert_eq!(p.s_min, raw.soc_min);
        assert_eq!(p.s_max, raw.soc_max);
    }

    #[test]
    fn full_battery_has_no_headroom() {
        let raw = EvProfileRaw {
            p_min: vec![0.0; 4],
            p_max: vec![1.0; 4],
            soc_min: vec![0.0; 4],
            soc_max: vec![0.8; 4],
            soc_init: 0.8,
            drive: vec![0.0; 4],
        };
        assert!(reduce_profile(&raw, 1, 1.0).s_max.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn half_hour_steps_scale_running_sums() {
        let raw = EvProfileRaw {
            p_min: vec![0.0; 2],
            p_max: vec![1.0; 2],
            soc_min: vec![0.0, 0.5],
            soc_max: vec![1.0, 1.0],
            soc_init: 0.0,
            drive: vec![0.0, 0.0],
        };
        let p = reduce_profile(&raw, 1, 0.5);
        assert!(approx(&p.s_min, &[0.0, 1.0]));
        assert!(approx(&p.s_max, &[2.0, 2.0]));
    }

    fn profile(p_min: &[f64], p_max: &[f64], s_min: &[f64], s_max: &[f64]) -> EvProfile {
        EvProfile {
            p_min: p_min.to_vec(),
            p_max: p_max.to_vec(),
            s_min: s_min.to_vec(),
            s_max: s_max.to_vec(),
            count: 1,
        }
    }

    #[test]
    fn slack_profile_validates() {
        let p = profile(&[0.0; 3], &[1.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0, 2.0]);
        assert_eq!(validate_profile(&p, 0), Ok(()));
    }

    #[test]
    fn energy_beyond_power_is_empty() {
        let p = profile(&[0.0; 3], &[1.0, 0.0, 1.0], &[0.0, 0.0, 3.0], &[3.0, 3.0, 3.0]);
        assert_eq!(validate_profile(&p, 4), Err(ModelError::EmptyFlexibilitySet { profile: 4 }));
    }

    #[test]
    fn inverted_power_bounds_rejected() {
        let p = profile(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(
            validate_profile(&p, 0),
            Err(ModelError::BoundOrderViolation { t: 0, .. })
        ));
    }

    fn one_unit_instance(steps: usize) -> Instance {
        Instance {
            horizon: TimeHorizon::hourly(steps),
            demand: vec![1.0; steps],
            units: vec![ProductionUnit::flat("g", steps, 1.0, 0.0, 5.0)],
            fleet: vec![],
        }
    }

    #[test]
    fn instance_validation() {
        let inst = one_unit_instance(3);
        assert_eq!(validate_instance(&inst), Ok(()));

        let mut short = inst.clone();
        short.demand.pop();
        assert!(matches!(validate_instance(&short), Err(ModelError::LengthMismatch { .. })));

        let mut bad = inst;
        bad.fleet.push(profile(&[0.0; 3], &[1.0, 0.0, 1.0], &[0.0, 0.0, 3.0], &[3.0; 3]));
        assert_eq!(validate_instance(&bad), Err(ModelError::EmptyFlexibilitySet { profile: 0 }));
    }

    #[test]
    fn feasible_point_respects_constraints() {
        let p = profile(&[-0.5, 0.0, 0.0], &[1.0, 0.5, 1.0], &[-0.5, 0.0, 1.0], &[1.0, 1.0, 1.5]);
        let x = feasible_point(&p).unwrap();
        assert!(p.max_violation(&x) <= FEAS_TOL);
    }

    proptest! {
        #[test]
        fn reduction_shift_equivariant(
            soc in proptest::collection::vec(0.0f64..5.0, 4),
            drive in proptest::collection::vec(0.0f64..1.0, 4),
            init in 0.0f64..3.0,
            delta in -2.0f64..2.0,
        ) {
            let raw = EvProfileRaw {
                p_min: vec![0.0; 4],
                p_max: vec![1.0; 4],
                soc_min: soc.clone(),
                soc_max: soc.iter().map(|s| s + 1.0).collect(),
                soc_init: init,
                drive,
            };
            let base = reduce_profile(&raw, 1, 1.0);
            let shifted = reduce_profile(&EvProfileRaw { soc_init: init + delta, ..raw }, 1, 1.0);
            for t in 0..4 {
                prop_assert!((base.s_min[t] - delta - shifted.s_min[t]).abs() < 1e-9);
                prop_assert!((base.s_max[t] - delta - shifted.s_max[t]).abs() < 1e-9);
            }
        }
    }
}
