//! Browser bindings for the discrimination toolkit. Every export takes plain
//! strings and numbers and returns a JSON document.

use serde::Serialize;
use serde_json::json;
use unidisc::discrimination::{analyze, synthesize_sequential, Truth};
use unidisc::harness::{GateSpec, HarnessError, SchemeCircuits, SchemeKind};
use unidisc::qasm::emit;
use unidisc::qmath::{u3_params, Unitary2};
use unidisc::sim::{success_probability, run_shots, NoiseModel};
use wasm_bindgen::prelude::*;

const DEVICE_QUBITS: usize = 5;

fn gates(u: &str, v: &str) -> Result<(Unitary2, Unitary2), String> {
    let u: GateSpec = u.parse().map_err(|e: HarnessError| e.to_string())?;
    let v: GateSpec = v.parse().map_err(|e: HarnessError| e.to_string())?;
    Ok((u.unitary(), v.unitary()))
}

fn scheme(name: &str) -> Result<SchemeKind, String> {
    name.parse().map_err(|e: HarnessError| e.to_string())
}

fn truth(name: &str) -> Result<Truth, String> {
    match name {
        "first" => Ok(Truth::FirstGate),
        "second" => Ok(Truth::SecondGate),
        other => Err(format!("unknown oracle choice `{other}` (expected first or second)")),
    }
}

fn matrix_json(m: &Unitary2) -> serde_json::Value {
    let e = m.entries();
    json!(e
        .iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

/// Spread, copy count, sequential auxiliary gate and QASM for every scheme
/// that can be built for the pair.
pub fn analyze_pair_json(u: &str, v: &str) -> Result<String, String> {
    let (gu, gv) = gates(u, v)?;
    let report = analyze(&gu, &gv);
    let sequential = synthesize_sequential(&gu, &gv).ok().map(|s| {
        json!({
            "aux": u3_params(&s.aux),
            "w": matrix_json(&s.w),
            "trace_w": s.w.trace().norm(),
        })
    });
    let mut qasm = serde_json::Map::new();
    let mut errors = serde_json::Map::new();
    for kind in SchemeKind::ALL {
        match SchemeCircuits::build(kind, &gu, &gv) {
            Ok(c) => {
                let map: Vec<usize> = (0..c.num_qubits()).collect();
                for (t, label) in [(Truth::FirstGate, "first"), (Truth::SecondGate, "second")] {
                    let text = emit(c.circuit(t), DEVICE_QUBITS, &map).map_err(|e| e.to_string())?;
                    qasm.insert(format!("{kind}_{label}"), text.into());
                }
            }
            Err(e) => {
                errors.insert(kind.to_string(), e.to_string().into());
            }
        }
    }
    Ok(to_json(&json!({
        "report": report,
        "sequential": sequential,
        "qasm": qasm,
        "errors": errors,
    })))
}

/// One noisy run; counts use logical bit order.
#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    u: &str,
    v: &str,
    scheme_name: &str,
    truth_name: &str,
    shots: u32,
    p1: f64,
    p2: f64,
    readout_eps: f64,
    seed: u32,
) -> Result<String, String> {
    let (gu, gv) = gates(u, v)?;
    let kind = scheme(scheme_name)?;
    let t = truth(truth_name)?;
    let noise = NoiseModel::new(p1, p2, readout_eps).map_err(|e| e.to_string())?;
    let circuits = SchemeCircuits::build(kind, &gu, &gv).map_err(|e| e.to_string())?;
    let counts = run_shots(circuits.circuit(t), shots as u64, &noise, seed as u64)
        .map_err(|e| e.to_string())?;
    let correct = counts.correct(&circuits.rule, t);
    Ok(to_json(&json!({
        "counts": counts,
        "success_count": correct,
        "success_rate": correct as f64 / counts.total as f64,
    })))
}

/// Success rate of all four scheme/oracle scenarios as readout error grows
/// from 0 to `max_eps` in `steps` equal increments.
#[allow(clippy::too_many_arguments)]
pub fn readout_sweep_json(
    u: &str,
    v: &str,
    shots: u32,
    p1: f64,
    p2: f64,
    max_eps: f64,
    steps: u32,
    seed: u32,
) -> Result<String, String> {
    let (gu, gv) = gates(u, v)?;
    let steps = steps.max(1);
    let built: Vec<SchemeCircuits> = SchemeKind::ALL
        .iter()
        .filter_map(|&k| SchemeCircuits::build(k, &gu, &gv).ok())
        .collect();
    let mut points = Vec::new();
    for i in 0..=steps {
        let eps = max_eps * i as f64 / steps as f64;
        let noise = NoiseModel::new(p1, p2, eps).map_err(|e| e.to_string())?;
        let mut rates = serde_json::Map::new();
        for c in &built {
            for (t, label) in [(Truth::FirstGate, "first"), (Truth::SecondGate, "second")] {
                let p = success_probability(c.circuit(t), &c.rule, t, shots as u64, &noise, seed as u64)
                    .map_err(|e| e.to_string())?;
                rates.insert(format!("{}_{label}", c.kind), p.into());
            }
        }
        points.push(json!({ "readout_eps": eps, "rates": rates }));
    }
    Ok(to_json(&points))
}

#[wasm_bindgen]
pub fn analyze_pair(u: &str, v: &str) -> Result<String, JsValue> {
    analyze_pair_json(u, v).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    u: &str,
    v: &str,
    scheme: &str,
    truth: &str,
    shots: u32,
    p1: f64,
    p2: f64,
    readout_eps: f64,
    seed: u32,
) -> Result<String, JsValue> {
    simulate_json(u, v, scheme, truth, shots, p1, p2, readout_eps, seed)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn readout_sweep(
    u: &str,
    v: &str,
    shots: u32,
    p1: f64,
    p2: f64,
    max_eps: f64,
    steps: u32,
    seed: u32,
) -> Result<String, JsValue> {
    readout_sweep_json(u, v, shots, p1, p2, max_eps, steps, seed).map_err(|e| JsValue::from_str(&e))
}
