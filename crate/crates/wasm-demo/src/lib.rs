//! Browser bindings. Each export returns a JSON string for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use arbrec::arrivals::{bidirected_path_adversary, uniform_random_sequence};
use arbrec::engine::{run_sequence, RecourseTrace};
use arbrec::experiment::default_m;
use arbrec::mincost::{incremental_recourse, triangle_adversary};

const MAX_N: usize = 4096;
const MAX_M: usize = 200_000;

#[derive(Serialize)]
struct EngineRun {
    n: usize,
    m: usize,
    total_recourse: u64,
    phase1_recourse: Option<u64>,
    phase2_recourse: Option<u64>,
    deletions: Vec<usize>,
    num_roots: Vec<usize>,
    rho: Vec<Option<f64>>,
}

impl From<&RecourseTrace> for EngineRun {
    fn from(t: &RecourseTrace) -> Self {
        let phases = t.phases();
        Self {
            n: t.n,
            m: t.m(),
            total_recourse: t.total_recourse(),
            phase1_recourse: phases.map(|p| p.phase1),
            phase2_recourse: phases.map(|p| p.phase2),
            deletions: t.records.iter().map(|r| r.deletions).collect(),
            num_roots: t.records.iter().map(|r| r.num_roots).collect(),
            rho: t.records.iter().map(|r| r.rho).collect(),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn random_run_json(n: usize, m: Option<usize>, seed: u64) -> Result<String, String> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must be in 2..={MAX_N}"));
    }
    let m = m.unwrap_or_else(|| default_m(n));
    if m > MAX_M {
        return Err(format!("m must be at most {MAX_M}"));
    }
    let seq = uniform_random_sequence(n, m, seed).map_err(|e| e.to_string())?;
    let (trace, _) = run_sequence(n, &seq.entries, &mut []).map_err(|e| e.to_string())?;
    to_json(&EngineRun::from(&trace))
}

pub fn adversary_run_json(n: usize) -> Result<String, String> {
    if n > MAX_N {
        return Err(format!("n must be at most {MAX_N}"));
    }
    let seq = bidirected_path_adversary(n).map_err(|e| e.to_string())?;
    let (trace, _) = run_sequence(n, &seq.entries, &mut []).map_err(|e| e.to_string())?;
    to_json(&EngineRun::from(&trace))
}

pub fn triangle_json(n: usize) -> Result<String, String> {
    if n > 300 {
        return Err("n must be at most 300".into());
    }
    let inst = triangle_adversary(n).map_err(|e| e.to_string())?;
    let report = incremental_recourse(&inst).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Random arrivals; `m = 0` means `ceil(n log2 n)`.
#[wasm_bindgen]
pub fn run_random(n: usize, m: usize, seed: u32) -> Result<String, JsError> {
    random_run_json(n, (m > 0).then_some(m), seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn run_adversary(n: usize) -> Result<String, JsError> {
    adversary_run_json(n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn triangle_recourse(n: usize) -> Result<String, JsError> {
    triangle_json(n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn random_run_has_per_step_series() {
        let v: Value = serde_json::from_str(&random_run_json(64, None, 1).unwrap()).unwrap();
        assert_eq!(v["m"], 384);
        assert_eq!(v["deletions"].as_array().unwrap().len(), 384);
        let total: u64 = v["deletions"].as_array().unwrap().iter().map(|d| d.as_u64().unwrap()).sum();
        assert_eq!(v["total_recourse"], total);
    }

    #[test]
    fn adversary_total() {
        let v: Value = serde_json::from_str(&adversary_run_json(10).unwrap()).unwrap();
        assert_eq!(v["total_recourse"], 36);
        assert!(v["phase1_recourse"].is_null());
        assert!(adversary_run_json(7).is_err());
    }

    #[test]
    fn triangle_report() {
        let v: Value = serde_json::from_str(&triangle_json(30).unwrap()).unwrap();
        assert!(v["total_recourse"].as_u64().unwrap() >= 45);
        assert!(triangle_json(31).is_err());
    }

    #[test]
    fn limits() {
        assert!(random_run_json(1, None, 0).is_err());
        assert!(random_run_json(100, Some(MAX_M + 1), 0).is_err());
    }
}
