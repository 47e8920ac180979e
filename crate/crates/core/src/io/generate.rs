//! Synthetic instances: daily-periodic demand, a heterogeneous production
//! park and commuter-style EV classes.
//!
//! The horizon starts on a Monday at midnight. Each EV class has a home
//! charger and a battery; on weekdays it leaves in the morning and returns in
//! the evening, consuming energy while away, and it stays plugged in all
//! weekend. Driving energy is scaled so that the fleet's minimum net charge
//! over the horizon equals `ev_share` times total demand.

use crate::lp::Sense;
use crate::model::{reduce_profile, EvProfile, EvProfileRaw, Instance, ProductionUnit, TimeHorizon, UnitRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub steps: usize,
    pub step_hours: f64,
    pub num_profiles: usize,
    pub fleet_size: u64,
    pub ev_share: f64,
    pub v2g: bool,
    pub num_units: usize,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            steps: 24,
            step_hours: 1.0,
            num_profiles: 10,
            fleet_size: 5_100_000,
            ev_share: 0.035,
            v2g: false,
            num_units: 12,
            seed: 0,
        }
    }
}

const MEAN_DEMAND_MW: f64 = 50_000.0;
const CHARGERS_KW: [f64; 3] = [3.7, 7.4, 11.0];

/// Vehicle counts: an even split with the remainder on the first class.
pub fn profile_counts(fleet_size: u64, num_profiles: usize) -> Vec<u64> {
    if num_profiles == 0 {
        return vec![];
    }
    let base = fleet_size / num_profiles as u64;
    let mut counts = vec![base; num_profiles];
    counts[0] += fleet_size - base * num_profiles as u64;
    counts
}

fn demand_curve(rng: &mut ChaCha8Rng, h: &TimeHorizon) -> Vec<f64> {
    (0..h.steps)
        .map(|t| {
            let hour = t as f64 * h.step_hours;
            let day = (hour / 24.0).floor() as usize;
            let weekend = if day % 7 >= 5 { 0.9 } else { 1.0 };
            let shape = 1.0 + 0.16 * (2.0 * PI * (hour - 19.0) / 24.0).cos()
                + 0.05 * (4.0 * PI * (hour - 13.0) / 24.0).cos();
            MEAN_DEMAND_MW * weekend * shape * (1.0 + rng.gen_range(-0.01..0.01))
        })
        .collect()
}

struct Commute {
    capacity: f64,
    power: f64,
    depart: f64,
    back: f64,
    intensity: f64,
    init_frac: f64,
}

fn away(c: &Commute, hour: f64) -> bool {
    let day = (hour / 24.0).floor() as usize;
    let hod = hour - 24.0 * day as f64;
    day % 7 < 5 && hod >= c.depart && hod < c.back
}

/// Raw single-vehicle data in MW / MWh, with unscaled driving consumption.
fn raw_profile(c: &Commute, h: &TimeHorizon, v2g: bool, drive_scale: f64) -> EvProfileRaw {
    let steps = h.steps;
    let tau = h.step_hours;
    let hours: Vec<f64> = (0..steps).map(|t| t as f64 * tau).collect();
    let plugged: Vec<bool> = hours.iter().map(|&hr| !away(c, hr)).collect();
    let away_steps_per_day = ((c.back - c.depart) / tau).ceil().max(1.0);
    let drive: Vec<f64> = plugged
        .iter()
        .map(|&p| if p { 0.0 } else { drive_scale * c.intensity / away_steps_per_day })
        .collect();
    let p_max: Vec<f64> = plugged.iter().map(|&p| if p { c.power } else { 0.0 }).collect();
    let p_min: Vec<f64> = p_max.iter().map(|&p| if v2g { -p } else { 0.0 }).collect();

    let reserve = 0.1 * c.capacity;
    let soc_init = c.init_frac * c.capacity;
    // Highest reachable state of charge under maximal charging.
    let mut reach = Vec::with_capacity(steps);
    let mut level = soc_init;
    for t in 0..steps {
        level = (level + p_max[t] * tau).min(c.capacity) - drive[t];
        reach.push(level);
    }
    let mut soc_min = vec![reserve; steps];
    for t in 0..steps {
        if t + 1 < steps && plugged[t] && !plugged[t + 1] {
            let trip: f64 = (t + 1..steps).take_while(|&k| !plugged[k]).map(|k| drive[k]).sum();
            soc_min[t] = reserve + trip;
        }
    }
    soc_min[steps - 1] = soc_init;
    for t in 0..steps {
        soc_min[t] = soc_min[t].min(reach[t]).max(0.0);
    }
    EvProfileRaw { p_min, p_max, soc_min, soc_max: vec![c.capacity; steps], soc_init, drive }
}

fn commuters(rng: &mut ChaCha8Rng, n: usize) -> Vec<Commute> {
    (0..n)
        .map(|_| Commute {
            capacity: rng.gen_range(40.0..75.0) / 1000.0,
            power: CHARGERS_KW[rng.gen_range(0..CHARGERS_KW.len())] / 1000.0,
            depart: rng.gen_range(6.0..9.5),
            back: rng.gen_range(16.0..20.0),
            intensity: rng.gen_range(0.5..1.5),
            init_frac: rng.gen_range(0.4..0.8),
        })
        .collect()
}

fn build_fleet(rng: &mut ChaCha8Rng, p: &GeneratorParams, h: &TimeHorizon, demand: &[f64]) -> Vec<EvProfile> {
    let classes = commuters(rng, p.num_profiles);
    let counts = profile_counts(p.fleet_size, p.num_profiles);
    let target: f64 = p.ev_share * demand.iter().sum::<f64>() * h.step_hours;
    let unit_drive: f64 = classes
        .iter()
        .zip(&counts)
        .map(|(c, &k)| k as f64 * raw_profile(c, h, p.v2g, 1.0).drive.iter().sum::<f64>())
        .sum();
    let scale = if unit_drive > 0.0 { target / unit_drive } else { 0.0 };
    classes
        .iter()
        .zip(&counts)
        .map(|(c, &k)| reduce_profile(&raw_profile(c, h, p.v2g, scale), k, h.step_hours))
        .collect()
}

#[derive(Clone, Copy)]
enum Tech {
    Nuclear,
    Coal,
    Gas,
    Peaker,
    Hydro,
}

const ROTATION: [Tech; 8] =
    [Tech::Nuclear, Tech::Gas, Tech::Coal, Tech::Peaker, Tech::Hydro, Tech::Gas, Tech::Coal, Tech::Peaker];

fn build_units(rng: &mut ChaCha8Rng, p: &GeneratorParams, h: &TimeHorizon, capacity: f64) -> Vec<ProductionUnit> {
    let techs: Vec<Tech> = (0..p.num_units).map(|m| ROTATION[m % ROTATION.len()]).collect();
    let weight = |t: Tech| match t {
        Tech::Nuclear => 3.5,
        Tech::Coal => 1.5,
        Tech::Gas => 1.5,
        Tech::Peaker => 1.0,
        Tech::Hydro => 0.8,
    };
    let total: f64 = techs.iter().map(|&t| weight(t)).sum();
    let steps = h.steps;
    techs
        .iter()
        .enumerate()
        .map(|(m, &tech)| {
            let cap = capacity * weight(tech) / total * rng.gen_range(0.9..1.1);
            let (name, cost, min_frac, ramp_per_hour) = match tech {
                Tech::Nuclear => ("nuclear", rng.gen_range(8.0..12.0), 0.2, Some(0.08)),
                Tech::Coal => ("coal", rng.gen_range(25.0..35.0), 0.0, Some(0.3)),
                Tech::Gas => ("gas", rng.gen_range(45.0..65.0), 0.0, Some(0.6)),
                Tech::Peaker => ("peaker", rng.gen_range(90.0..140.0), 0.0, None),
                Tech::Hydro => ("hydro", rng.gen_range(2.0..5.0), 0.0, None),
            };
            let phase = rng.gen_range(0.0..2.0 * PI);
            let mut unit = ProductionUnit {
                name: format!("{name}-{m}"),
                cost: (0..steps)
                    .map(|t| cost * (1.0 + 0.03 * (2.0 * PI * t as f64 * h.step_hours / 24.0 + phase).sin()))
                    .collect(),
                p_min: vec![min_frac * cap; steps],
                p_max: vec![cap; steps],
                ramp_up: ramp_per_hour.map(|r| r * cap * h.step_hours),
                ramp_down: ramp_per_hour.map(|r| r * cap * h.step_hours),
                extra_rows: vec![],
            };
            if let Tech::Hydro = tech {
                // Reservoir: average output at most 40% of capacity.
                unit.extra_rows.push(UnitRow {
                    coeffs: (0..steps).map(|t| (t, 1.0)).collect(),
                    sense: Sense::Le,
                    rhs: 0.4 * cap * steps as f64,
                });
            }
            unit
        })
        .collect()
}

/// Builds a deterministic instance from `params`.
pub fn generate_instance(params: &GeneratorParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let horizon = TimeHorizon::new(params.steps, params.step_hours);
    let demand = demand_curve(&mut rng, &horizon);
    let fleet = build_fleet(&mut rng, params, &horizon, &demand);
    let max_demand = demand.iter().copied().fold(0.0, f64::max);
    let max_ev: f64 = (0..params.steps)
        .map(|t| fleet.iter().map(|p| p.count as f64 * p.p_max[t]).sum::<f64>())
        .fold(0.0, f64::max);
    let units = build_units(&mut rng, params, &horizon, 1.3 * (max_demand + max_ev));
    Instance { horizon, demand, units, fleet }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::instance_to_string;

    #[test]
    fn counts_split_evenly() {
        assert_eq!(profile_counts(5_100_000, 100), vec![51_000; 100]);
        let c = profile_counts(10, 3);
        assert_eq!(c, vec![4, 3, 3]);
        assert_eq!(c.iter().sum::<u64>(), 10);
    }

    #[test]
    fn deterministic_in_seed() {
        let p = GeneratorParams { seed: 17, ..GeneratorParams::default() };
        assert_eq!(instance_to_string(&generate_instance(&p)), instance_to_string(&generate_instance(&p)));
        let q = GeneratorParams { seed: 18, ..p.clone() };
        assert_ne!(generate_instance(&p).demand, generate_instance(&q).demand);
    }

    #[test]
    fn generated_instances_validate() {
        for (steps, tau, n, v2g) in [(24, 1.0, 5, false), (48, 0.5, 3, true), (96, 1.0, 8, false), (168, 1.0, 4, true)] {
            for seed in 0..3 {
                let p = GeneratorParams { steps, step_hours: tau, num_profiles: n, v2g, seed, ..Default::default() };
                let inst = generate_instance(&p);
                inst.validate().unwrap_or_else(|e| panic!("T={steps} seed={seed}: {e}"));
                assert_eq!(inst.units.len(), 12);
            }
        }
    }

    #[test]
    fn ev_share_hits_target() {
        for seed in 0..5 {
            let p = GeneratorParams { seed, num_profiles: 20, ..Default::default() };
            let inst = generate_instance(&p);
            let ev: f64 = inst.fleet.iter().map(|f| f.count as f64 * f.s_min[p.steps - 1]).sum();
            let share = ev / inst.demand.iter().sum::<f64>();
            assert!((0.03..=0.04).contains(&share), "share {share}");
        }
    }
}
