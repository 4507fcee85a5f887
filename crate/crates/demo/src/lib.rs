//! Browser bindings: the parameter rule for k, a traced run of the additive
//! generator algorithm, and batch experiments over the built-in algebras.
//!
//! Every export returns a JSON string. The plain functions below the
//! wasm wrappers are what the native tests exercise.

use expgroup::algebra::{build_family, catalog};
use expgroup::blackbox::OracleSession;
use expgroup::generation::{b_failure_bound, run_b_traced, BParams, CoinStream};
use expgroup::harness::{
    cmd_choose_k, cmd_gen_additive, cmd_subproduct_bound, trial_streams, ExperimentConfig, LoadedAlgebra,
};
use expgroup::truth::{generating_system, sigma_closure, ElementSet};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest algebra offered in the page; keeps batch runs interactive.
const MAX_SIZE: usize = 64;
const MAX_TRIALS: u64 = 100_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn loaded(name: &str) -> Result<LoadedAlgebra, String> {
    let (n, family) = catalog()
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| format!("unknown algebra `{name}`"))?;
    let alg = build_family(&family).map_err(err)?;
    if alg.size() > MAX_SIZE {
        return Err(format!(
            "`{name}` has {} elements; the demo stops at {MAX_SIZE}",
            alg.size()
        ));
    }
    Ok(LoadedAlgebra {
        name: n.to_string(),
        family: Some(family),
        generators: generating_system(&alg),
        alg,
        salt_bits: None,
        ideal_generators: None,
    })
}

pub fn algebra_list() -> String {
    let list: Vec<Value> = catalog()
        .into_iter()
        .filter_map(|(n, f)| {
            let a = build_family(&f).ok()?;
            (a.size() <= MAX_SIZE)
                .then(|| json!({"name": n, "size": a.size(), "operations": a.signature().omega_len()}))
        })
        .collect();
    Value::Array(list).to_string()
}

/// `chooseK(c)` and the curve `n/c^n` for `n = 1..=n_max`.
pub fn k_rule(c: f64, n_max: u32) -> Result<String, String> {
    let r = cmd_choose_k(c).map_err(err)?;
    let curve: Vec<Value> = (1..=n_max.clamp(1, 64))
        .map(|n| json!({"n": n, "bound": b_failure_bound(n, c).min(1.0)}))
        .collect();
    Ok(json!({"c": r.c, "k": r.k, "exponent": r.exponent, "expBound": r.exp_bound, "curve": curve}).to_string())
}

/// One run of the additive generator algorithm, round by round. Decoding
/// happens here, outside the algorithm, to show what each round reached.
pub fn trace_additive(name: &str, c: f64, salt_bits: u32, seed: u64) -> Result<String, String> {
    let a = loaded(name)?;
    let alg = &a.alg;
    let params = BParams::new(c).map_err(err)?;
    let (salts, coins) = trial_streams(seed, 0);
    let mut o = OracleSession::with_rng(alg, salt_bits.min(16), salts).map_err(err)?;
    let n = {
        use expgroup::blackbox::Oracle;
        o.encoding_len()
    };
    let s = o.handles_of(&a.generators);
    let mut coins = CoinStream::new(coins);
    let rounds = run_b_traced(&mut o, n, &s, &params, &mut coins).map_err(err)?;
    let mut out = Vec::new();
    for (i, r) in rounds.iter().enumerate() {
        let idx = o.decode_all(&r.output).map_err(err)?;
        let set = ElementSet::from_indices(alg.size(), idx.iter().copied());
        let span = expgroup::truth::subgroup_closure(alg, &set);
        out.push(json!({
            "round": i + 1,
            "subsums": r.subsums.len(),
            "generators": set.len(),
            "span": span.len(),
            "sample": set.iter().take(12).map(|e| alg.label(e)).collect::<Vec<_>>(),
        }));
    }
    let target = sigma_closure(alg, &ElementSet::from_indices(alg.size(), a.generators.iter().copied())).0;
    let last = rounds
        .last()
        .map(|r| o.decode_all(&r.output))
        .transpose()
        .map_err(err)?
        .unwrap_or_default();
    let reached = expgroup::truth::subgroup_closure(alg, &ElementSet::from_indices(alg.size(), last));
    Ok(json!({
        "algebra": a.name,
        "size": alg.size(),
        "n": n,
        "k": params.k,
        "target": target.len(),
        "success": reached == target,
        "rounds": out,
    })
    .to_string())
}

/// A batch run of `gen-additive` or `subproduct-bound`, as the CLI reports it.
pub fn experiment(
    command: &str,
    name: &str,
    trials: u64,
    seed: u64,
    c: f64,
    k: Option<usize>,
) -> Result<String, String> {
    let a = loaded(name)?;
    let cfg = ExperimentConfig {
        c,
        k,
        trials: trials.clamp(1, MAX_TRIALS),
        seed,
        ..Default::default()
    };
    let r = match command {
        "gen-additive" => cmd_gen_additive(&a, &cfg),
        "subproduct-bound" => cmd_subproduct_bound(&a, &cfg),
        other => return Err(format!("unknown command `{other}`")),
    }
    .map_err(err)?;
    Ok(r.to_json())
}

#[wasm_bindgen(js_name = algebras)]
pub fn wasm_algebras() -> String {
    algebra_list()
}

#[wasm_bindgen(js_name = chooseK)]
pub fn wasm_choose_k(c: f64, n_max: u32) -> Result<String, JsError> {
    k_rule(c, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = traceAdditive)]
pub fn wasm_trace_additive(name: &str, c: f64, salt_bits: u32, seed: u64) -> Result<String, JsError> {
    trace_additive(name, c, salt_bits, seed).map_err(|e| JsError::new(&e))
}

/// `k` of 0 means chooseK(c).
#[wasm_bindgen(js_name = experiment)]
pub fn wasm_experiment(command: &str, name: &str, trials: u32, seed: u64, c: f64, k: u32) -> Result<String, JsError> {
    let k = (k > 0).then_some(k as usize);
    experiment(command, name, trials.into(), seed, c, k).map_err(|e| JsError::new(&e))
}
