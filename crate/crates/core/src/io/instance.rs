use super::IoError;
use crate::lp::Sense;
use crate::model::{reduce_profile, EvProfile, EvProfileRaw, Instance, ProductionUnit, TimeHorizon, UnitRow};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonDoc {
    #[serde(rename = "T")]
    steps: usize,
    step_hours: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowDoc {
    coeffs: IndexMap<String, f64>,
    sense: Sense,
    rhs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitDoc {
    name: String,
    cost: Vec<f64>,
    p_min: Vec<f64>,
    p_max: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ramp_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ramp_down: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    extra_rows: Vec<RowDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfileDoc {
    count: u64,
    p_min: Vec<f64>,
    p_max: Vec<f64>,
    soc_min: Vec<f64>,
    soc_max: Vec<f64>,
    soc_init: f64,
    drive: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    count: u64,
    p_min: Vec<f64>,
    p_max: Vec<f64>,
    s_min: Vec<f64>,
    s_max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    horizon: HorizonDoc,
    demand: Vec<f64>,
    units: Vec<UnitDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ev_profiles_raw: Vec<RawProfileDoc>,
    #[serde(default)]
    ev_profiles: Vec<ProfileDoc>,
}

fn row_from_doc(unit: &str, doc: RowDoc) -> Result<UnitRow, IoError> {
    let mut coeffs = Vec::with_capacity(doc.coeffs.len());
    for (key, v) in doc.coeffs {
        let t = key.parse::<usize>().map_err(|_| IoError::Schema {
            field: format!("units[{unit}].extra_rows.coeffs"),
            message: format!("key {key:?} is not a step index"),
        })?;
        coeffs.push((t, v));
    }
    Ok(UnitRow { coeffs, sense: doc.sense, rhs: doc.rhs })
}

fn instance_from_doc(doc: InstanceDoc) -> Result<Instance, IoError> {
    let horizon = TimeHorizon::new(doc.horizon.steps, doc.horizon.step_hours);
    horizon.validate()?;
    let mut units = Vec::with_capacity(doc.units.len());
    for u in doc.units {
        let extra_rows = u.extra_rows.into_iter().map(|r| row_from_doc(&u.name, r)).collect::<Result<_, _>>()?;
        units.push(ProductionUnit {
            name: u.name,
            cost: u.cost,
            p_min: u.p_min,
            p_max: u.p_max,
            ramp_up: u.ramp_up,
            ramp_down: u.ramp_down,
            extra_rows,
        });
    }
    let mut fleet: Vec<EvProfile> = doc
        .ev_profiles
        .into_iter()
        .map(|p| EvProfile { p_min: p.p_min, p_max: p.p_max, s_min: p.s_min, s_max: p.s_max, count: p.count })
        .collect();
    for raw in doc.ev_profiles_raw {
        let r = EvProfileRaw {
            p_min: raw.p_min,
            p_max: raw.p_max,
            soc_min: raw.soc_min,
            soc_max: raw.soc_max,
            soc_init: raw.soc_init,
            drive: raw.drive,
        };
        r.validate(horizon.steps)?;
        fleet.push(reduce_profile(&r, raw.count, horizon.step_hours));
    }
    let instance = Instance { horizon, demand: doc.demand, units, fleet };
    instance.validate()?;
    Ok(instance)
}

fn doc_from_instance(instance: &Instance) -> InstanceDoc {
    InstanceDoc {
        horizon: HorizonDoc { steps: instance.horizon.steps, step_hours: instance.horizon.step_hours },
        demand: instance.demand.clone(),
        units: instance
            .units
            .iter()
            .map(|u| UnitDoc {
                name: u.name.clone(),
                cost: u.cost.clone(),
                p_min: u.p_min.clone(),
                p_max: u.p_max.clone(),
                ramp_up: u.ramp_up,
                ramp_down: u.ramp_down,
                extra_rows: u
                    .extra_rows
                    .iter()
                    .map(|r| RowDoc {
                        coeffs: r.coeffs.iter().map(|(t, v)| (t.to_string(), *v)).collect(),
                        sense: r.sense,
                        rhs: r.rhs,
                    })
                    .collect(),
            })
            .collect(),
        ev_profiles_raw: vec![],
        ev_profiles: instance
            .fleet
            .iter()
            .map(|p| ProfileDoc {
                count: p.count,
                p_min: p.p_min.clone(),
                p_max: p.p_max.clone(),
                s_min: p.s_min.clone(),
                s_max: p.s_max.clone(),
            })
            .collect(),
    }
}

/// Parses and validates an instance document. Reduced profiles come first in
/// the fleet, followed by the reductions of any raw profiles.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(IoError::from_json)?;
    instance_from_doc(doc)
}

pub fn instance_to_string(instance: &Instance) -> String {
    serde_json::to_string_pretty(&doc_from_instance(instance)).expect("instance documents always serialize")
}

pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    parse_instance(&text)
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, instance_to_string(instance) + "\n")
        .map_err(|e| IoError::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelError;

    const MINIMAL: &str = r#"{
        "horizon": {"T": 2, "step_hours": 1.0},
        "demand": [1.0, 2.0],
        "units": [{"name": "g", "cost": [1.0, 1.0], "p_min": [0.0, 0.0], "p_max": [5.0, 5.0]}]
    }"#;

    #[test]
    fn minimal_document() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.steps(), 2);
        assert!(inst.fleet.is_empty());
        assert_eq!(inst.units[0].ramp_up, None);
    }

    #[test]
    fn short_vector_is_length_mismatch() {
        let text = MINIMAL.replace(
            r#""units""#,
            r#""ev_profiles": [{"count": 1, "p_min": [0, 0], "p_max": [1, 1], "s_min": [0], "s_max": [1, 1]}], "units""#,
        );
        assert!(matches!(parse_instance(&text), Err(IoError::Model(ModelError::LengthMismatch { .. }))));
    }

    #[test]
    fn raw_profile_matches_reduced_form() {
        let raw = MINIMAL.replace(
            r#""units""#,
            r#""ev_profiles_raw": [{"count": 3, "p_min": [0, 0], "p_max": [1, 1], "soc_min": [0, 0.4],
                "soc_max": [1, 1], "soc_init": 0.5, "drive": [0, 0.2]}], "units""#,
        );
        let reduced = MINIMAL.replace(
            r#""units""#,
            r#""ev_profiles": [{"count": 3, "p_min": [0, 0], "p_max": [1, 1], "s_min": [-0.5, 0.1],
                "s_max": [0.5, 0.7]}], "units""#,
        );
        let a = parse_instance(&raw).unwrap();
        let b = parse_instance(&reduced).unwrap();
        assert_eq!(a.fleet[0].count, b.fleet[0].count);
        for (x, y) in a.fleet[0].s_min.iter().zip(&b.fleet[0].s_min) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_instance("{\n \"horizon\": {\"T\": 2}\n}").unwrap_err();
        match err {
            IoError::Parse { line, message, .. } => {
                assert!(line >= 2);
                assert!(message.contains("step_hours"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extra_rows_round_trip() {
        let mut inst = parse_instance(MINIMAL).unwrap();
        inst.units[0].extra_rows.push(UnitRow { coeffs: vec![(1, 2.0), (0, 1.0)], sense: Sense::Le, rhs: 7.5 });
        inst.units[0].ramp_down = Some(0.25);
        let back = parse_instance(&instance_to_string(&inst)).unwrap();
        assert_eq!(back, inst);
    }
}
