use hgt_wasm::{classify_json, limit_json, simulate_json};
use serde_json::Value;

#[test]
fn limit_includes_phase_times() {
    let v: Value = serde_json::from_str(&limit_json(1.4, 1.0 / std::f64::consts::PI, 1.5, 1.0, 8.0, 50).unwrap()).unwrap();
    let times = v["times"].as_array().unwrap();
    let s1 = v["phase_times"][0].as_f64().unwrap();
    assert!(times.iter().any(|t| t.as_f64() == Some(s1)));
    assert_eq!(v["beta"].as_array().unwrap().len(), times.len());
    assert_eq!(v["beta"][0].as_array().unwrap().len(), 3);
}

#[test]
fn classify_reports_kind() {
    let v: Value = serde_json::from_str(&classify_json(0.41, 1.0 / std::f64::consts::PI, 2.8).unwrap()).unwrap();
    assert_eq!(v["classification"]["kind"], "EvolutionarySuicide");
}

#[test]
fn bad_parameters_are_errors() {
    assert!(classify_json(5.0, 0.3, 1.0).is_err());
    assert!(limit_json(1.4, 0.3, 1.5, 1.0, -1.0, 10).is_err());
}

#[test]
fn simulate_small_population() {
    let v: Value = serde_json::from_str(&simulate_json(1.4, 0.5, 1.5, 1.0, 200, 1, 1.0, 0.1).unwrap()).unwrap();
    assert_eq!(v["times"].as_array().unwrap().len(), 11);
    assert!(v["events"].as_u64().unwrap() > 0);
}
