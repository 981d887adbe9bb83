//! Browser bindings for the `ttwalk` demo page. Every function returns a
//! JSON string; errors come back as `{"error": "..."}`.

use serde_json::{json, Value};
use ttwalk::folds::{fold_decomposition, realize_power};
use ttwalk::invariants::{check_property_g_with, BlockTable, Caps};
use ttwalk::nielsen::NielsenSequence;
use ttwalk::rose_map::{RoseMap, DEFAULT_SIZE_CAP};
use ttwalk::spectral::{log_norm_series, log_spectral_radius, Matrix};
use ttwalk::walk::{is_e_n, sample_with_chain, Chain, WalkConfig};
use wasm_bindgen::prelude::*;

fn finish(r: ttwalk::Result<Value>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e.to_string() })).to_string()
}

/// Samples walks of length `n` until one is cyclically admissible (at most
/// `max_trials`), then certifies property (G) for it.
#[wasm_bindgen]
pub fn sample_and_certify(rank: usize, n: usize, seed: u32, max_trials: usize) -> String {
    finish(sample_and_certify_impl(rank, n, seed.into(), max_trials))
}

fn sample_and_certify_impl(rank: usize, n: usize, seed: u64, max_trials: usize) -> ttwalk::Result<Value> {
    let cfg = WalkConfig::new(rank, seed, n, 1)?;
    let chain = Chain::new(rank)?;
    for t in 0..max_trials as u64 {
        let traj = sample_with_chain(&chain, &cfg, t);
        if !is_e_n(&traj.items) {
            continue;
        }
        let seq = traj.sequence();
        let rep = check_property_g_with(&seq, &Caps::default(), &BlockTable::new(rank))?;
        return Ok(json!({ "trial": t, "sequence": seq.to_string(), "full": rep.is_full(), "report": rep }));
    }
    Ok(json!({ "error": format!("no cyclically admissible walk in {max_trials} trials") }))
}

/// X_n / n along one walk, with (1/n) log λ at cyclically admissible n.
#[wasm_bindgen]
pub fn lyapunov_curve(rank: usize, n: usize, seed: u32) -> String {
    finish(lyapunov_curve_impl(rank, n, seed.into()))
}

fn lyapunov_curve_impl(rank: usize, n: usize, seed: u64) -> ttwalk::Result<Value> {
    let cfg = WalkConfig::new(rank, seed, n, 1)?;
    let traj = sample_with_chain(&Chain::new(rank)?, &cfg, 0);
    let xs = log_norm_series(&traj.items, rank);
    let mut m = Matrix::identity(rank);
    let mut growth = Vec::new();
    for (k, t) in traj.items.iter().enumerate() {
        m.left_mul_elementary(t);
        if k >= 1 && is_e_n(&traj.items[..=k]) {
            growth.push(json!([k + 1, log_spectral_radius(&m, 1e-9)? / (k + 1) as f64]));
        }
    }
    let norm: Vec<f64> = xs.iter().enumerate().skip(1).map(|(k, x)| x / k as f64).collect();
    Ok(json!({ "x_over_n": norm, "log_lambda_over_n": growth }))
}

/// Fold decomposition of a rose map given in text form, and a cyclically
/// admissible realization of a power when the map qualifies.
#[wasm_bindgen]
pub fn decompose(map_text: &str) -> String {
    finish(decompose_impl(map_text))
}

fn decompose_impl(map_text: &str) -> ttwalk::Result<Value> {
    let f = RoseMap::parse(map_text)?;
    let dec = fold_decomposition(&f)?;
    let power = match realize_power(&f) {
        Ok((p, seq)) => {
            let verified = RoseMap::from_sequence_capped(&seq, DEFAULT_SIZE_CAP).ok().zip(f.power(p).ok()).map(|(a, b)| a == b);
            json!({ "p": p, "sequence": seq.to_string(), "verified": verified })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "nielsen_part": NielsenSequence::new(dec.nielsen_part.clone(), f.rank()).map(|s| s.to_string()).unwrap_or_default(),
        "perm_part": dec.perm_part.to_string(),
        "recomposition_verified": dec.recompose()? == f,
        "realized_power": power,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certify_returns_a_report() {
        let v: Value = serde_json::from_str(&sample_and_certify(3, 40, 1, 100)).unwrap();
        assert!(v["report"]["rank"] == 3, "{v}");
    }

    #[test]
    fn curve_has_one_point_per_step() {
        let v: Value = serde_json::from_str(&lyapunov_curve(3, 50, 2)).unwrap();
        assert_eq!(v["x_over_n"].as_array().unwrap().len(), 50);
    }

    #[test]
    fn decompose_fibonacci() {
        let v: Value = serde_json::from_str(&decompose("rank 2\na1 -> a1a2\na2 -> a1\n")).unwrap();
        assert_eq!(v["recomposition_verified"], true);
        assert_eq!(v["realized_power"]["p"], 2);
    }

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&decompose("nonsense")).unwrap();
        assert!(v["error"].is_string());
    }
}
