use congrusum_demo::{mean_square_curve_json, sk_table_json, weighted_sums_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn table_for_five() {
    let v = parse(sk_table_json(5, 2).unwrap());
    let values: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["29", "28", "22", "21"]);
    assert_eq!(v["main_term"], "25");
    assert_eq!(v["rows"][0]["error"], 4.0);
}

#[test]
fn weighted_sums_split_by_parity() {
    let v = parse(weighted_sums_json(7).unwrap());
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    assert_eq!(points.iter().filter(|p| p["odd"] == true).count(), 3);
    for p in points
        .iter()
        .filter(|p| p["odd"] == false && p["principal"] == false)
    {
        let norm = p["re"].as_f64().unwrap().hypot(p["im"].as_f64().unwrap());
        assert!(norm < 1e-9);
    }
    let principal = points.iter().find(|p| p["principal"] == true).unwrap();
    assert!((principal["re"].as_f64().unwrap() - 21.0).abs() < 1e-9);
}

#[test]
fn curve_points_are_odd_moduli() {
    let v = parse(mean_square_curve_json(21).unwrap());
    let points = v["points"].as_array().unwrap();
    let ns: Vec<u64> = points.iter().map(|p| p["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, (3..=21).step_by(2).collect::<Vec<_>>());
    assert!(points.iter().all(|p| p["identity"] == true));
}

#[test]
fn out_of_range_inputs_are_rejected() {
    assert!(sk_table_json(1, 2).is_err());
    assert!(sk_table_json(10, 1).is_err());
    assert!(weighted_sums_json(100_000).is_err());
    assert!(mean_square_curve_json(2).is_err());
}
