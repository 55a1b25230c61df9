use exindep_wasm_demo::{audit_document, curves, max_degree};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn curves_are_cdfs() {
    let v = parse(&curves(1000, 10_000, 0.3, 0.1).unwrap());
    for key in ["product", "gumbel"] {
        let ys: Vec<f64> = v[key].as_array().unwrap().iter().map(|y| y.as_f64().unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] <= w[1]), "{key}");
        assert!(ys.iter().all(|y| (0.0..=1.0).contains(y)), "{key}");
    }
}

#[test]
fn audit_reports_bad_documents() {
    let dep = r#"{"atoms": [0.25, 0.25, 0.25, 0.25], "events": [[0, 1], [0, 2]], "dep": [[1], [0]]}"#;
    let v = parse(&audit_document(dep).unwrap());
    assert!(v["exact_gap"].as_f64().unwrap().abs() < 1e-12);
    assert!(audit_document(r#"{"atoms": [0.7, 0.7], "events": [[0]]}"#).is_err());
}

#[test]
fn max_degree_is_seeded() {
    assert_eq!(max_degree(60, 0.4, 20, 8).unwrap(), max_degree(60, 0.4, 20, 8).unwrap());
    assert_ne!(max_degree(60, 0.4, 20, 8).unwrap(), max_degree(60, 0.4, 20, 9).unwrap());
}
