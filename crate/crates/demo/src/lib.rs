//! Browser demo: amplitude estimation outcome laws, multilevel budget plans
//! and a mean-estimation error sweep. Results are flat `Float64Array`s or
//! text so the page needs no bindings beyond the generated glue.

use qsolve::qcore::ae_outcome_distribution;
use qsolve::qestimate::{qmean_estimator, LeafBackend};
use qsolve::qsingular::select_budgets;
use qsolve::rng::SeedPath;
use rand::Rng;
use wasm_bindgen::prelude::*;

/// Interleaved `(estimate, probability)` pairs of the outcome law.
pub fn outcome_law(a: f64, t: u32) -> qsolve::Result<Vec<f64>> {
    let d = ae_outcome_distribution(a, t)?;
    Ok(d.support.iter().zip(&d.probs).flat_map(|(x, p)| [*x, *p]).collect())
}

pub fn plan_table(n: u64, s: u32, sigma: f64, d: usize, d1: usize) -> qsolve::Result<String> {
    Ok(select_budgets(n, s, sigma, d, d1)?.to_csv())
}

/// Interleaved `(queries, 3/4-quantile error)` for budgets `16, 32, ..., max_n`
/// on random sequences in `[-1, 1]` of length `len`.
pub fn mean_sweep(len: usize, max_n: u64, trials: usize, seed: u64) -> qsolve::Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut n = 16;
    let mut idx = 0;
    while n <= max_n {
        let mut errs = Vec::with_capacity(trials);
        let mut queries = 0;
        for t in 0..trials {
            let mut rng = SeedPath::root(seed).child(idx).child(t as u64).rng();
            let f: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mean = f.iter().sum::<f64>() / len as f64;
            let est = qmean_estimator(&f, n, LeafBackend::Quantum)?;
            queries = est.queries();
            errs.push((est.draw(&mut rng).value - mean).abs());
        }
        out.push(queries as f64);
        out.push(qsolve::bench::error_quantile(&errs, 0.25));
        n *= 2;
        idx += 1;
    }
    Ok(out)
}

fn js(e: qsolve::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = aeLaw)]
pub fn ae_law(a: f64, t: u32) -> Result<Vec<f64>, JsError> {
    outcome_law(a, t).map_err(js)
}

#[wasm_bindgen(js_name = budgetPlan)]
pub fn budget_plan(n: u32, s: u32, sigma: f64, d: u32, d1: u32) -> Result<String, JsError> {
    plan_table(n as u64, s, sigma, d as usize, d1 as usize).map_err(js)
}

#[wasm_bindgen(js_name = meanSweep)]
pub fn mean_sweep_js(len: u32, max_n: u32, trials: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    mean_sweep(len as usize, max_n as u64, trials as usize, seed as u64).map_err(js)
}
