//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions do the
//! work and are what the native tests call.

use congrusum::arith::{euler_phi, gcd, rational_to_f64};
use congrusum::sk_engine::{main_term, sk_table, CharacterExpansion};
use congrusum::verify::check_mean_square;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest modulus the page accepts for tables and point clouds.
pub const MAX_MODULUS: u64 = 2000;
/// Largest modulus for the mean-square curve.
pub const MAX_CURVE_MODULUS: u64 = 601;

fn check_modulus(n: u64, max: u64) -> Result<(), String> {
    if !(2..=max).contains(&n) {
        return Err(format!("n must be between 2 and {max}"));
    }
    Ok(())
}

/// `S_k(n, m)` and its error term for each reduced `m`.
pub fn sk_table_json(n: u64, k: u32) -> Result<String, String> {
    check_modulus(n, MAX_MODULUS)?;
    if !(2..=8).contains(&k) {
        return Err("k must be between 2 and 8".into());
    }
    let table = sk_table(n, k).map_err(|e| e.to_string())?;
    let main = main_term(n, k);
    let main_f = rational_to_f64(&main);
    let rows: Vec<Value> = table
        .iter()
        .filter(|&(m, _)| gcd(m, n) == 1)
        .map(|(m, v)| {
            let value = congrusum::ExactRational::from_integer(v.clone().into());
            json!({
                "m": m,
                "value": v.to_string(),
                "error": rational_to_f64(&(value - &main)),
            })
        })
        .collect();
    let scale = (n as f64).powf(1.5) * (euler_phi(n) as f64).powi(k as i32 - 1);
    Ok(json!({
        "n": n,
        "k": k,
        "phi": euler_phi(n),
        "main_term": main.to_string(),
        "main_term_approx": main_f,
        "error_scale": scale,
        "rows": rows,
    })
    .to_string())
}

/// `T(chi)` for every character mod `n`, tagged by parity.
pub fn weighted_sums_json(n: u64) -> Result<String, String> {
    check_modulus(n, MAX_MODULUS)?;
    let exp = CharacterExpansion::new(n);
    let points: Vec<Value> = exp
        .group()
        .characters()
        .zip(exp.weighted_sums())
        .enumerate()
        .map(|(i, (chi, t))| {
            json!({
                "index": i,
                "re": t.re,
                "im": t.im,
                "odd": chi.is_odd(),
                "principal": chi.principal,
            })
        })
        .collect();
    let nf = n as f64;
    Ok(json!({
        "n": n,
        "phi": euler_phi(n),
        "bound": 2.0 * 3f64.sqrt() * nf.powf(1.5) * nf.ln(),
        "points": points,
    })
    .to_string())
}

/// Mean square of the `k = 2` error over odd `n` up to `n_max`, divided by
/// its predicted main term.
pub fn mean_square_curve_json(n_max: u64) -> Result<String, String> {
    if !(3..=MAX_CURVE_MODULUS).contains(&n_max) {
        return Err(format!("n_max must be between 3 and {MAX_CURVE_MODULUS}"));
    }
    let points = (3..=n_max)
        .step_by(2)
        .map(|n| {
            let rec = check_mean_square(n).map_err(|e| e.to_string())?;
            Ok(json!({ "n": n, "ratio": rec.ratio, "identity": rec.pass }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(json!({ "points": points }).to_string())
}

#[wasm_bindgen(js_name = skTable)]
pub fn sk_table_js(n: u32, k: u32) -> Result<String, JsError> {
    sk_table_json(n as u64, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = weightedSums)]
pub fn weighted_sums_js(n: u32) -> Result<String, JsError> {
    weighted_sums_json(n as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = meanSquareCurve)]
pub fn mean_square_curve_js(n_max: u32) -> Result<String, JsError> {
    mean_square_curve_json(n_max as u64).map_err(|e| JsError::new(&e))
}
