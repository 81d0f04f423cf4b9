use kineseq_wasm::ops;
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn canonical_poses_classify_as_themselves() {
    for label in ["A", "B", "C"] {
        let kp = ops::canonical_pose(label).unwrap();
        let v = parse(&ops::classify_pose(&kp).unwrap());
        assert_eq!(v["label"], label);
        assert_eq!(v["accuracy"], 1.0);
        assert_eq!(v["accepted"], true);
    }
    assert!(ops::canonical_pose("Z").is_err());
}

#[test]
fn classify_rejects_bad_input() {
    assert!(ops::classify_pose("[]").unwrap_err().contains("missing"));
    assert!(ops::classify_pose("not json").is_err());
}

#[test]
fn scatter_has_one_point_per_sample() {
    let v = parse(&ops::pca_scatter().unwrap());
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 60);
    assert!(pts.iter().all(|p| p["x"].is_f64() && p["y"].is_f64()));
}

#[test]
fn simulation_timeline_and_report() {
    let v = parse(&ops::simulate_and_analyze("A6 B6 C10 B6 A6 NULL7 A8 B10 A8", 0.0, 1).unwrap());
    assert_eq!(v["frames"].as_array().unwrap().len(), 67);
    let ids = v["report"]["identified"].as_array().unwrap();
    let names: Vec<&str> = ids.iter().map(|i| i["movement"].as_str().unwrap()).collect();
    assert_eq!(names, ["sit-up-to-stand", "half-sit-up"]);
    assert!(ops::simulate_and_analyze("A6 Q3", 0.0, 1).is_err());
}

#[test]
fn dictionary_lists_sample_movements() {
    let v = parse(&ops::dictionary());
    assert_eq!(v["movements"].as_array().unwrap().len(), 3);
}
