//! Browser bindings for the interactive demo in `www/`.
//!
//! The plain functions (`curves`, `designed_kernel`, `estimate`) hold the logic and are
//! tested natively; the `#[wasm_bindgen]` wrappers only serialize to JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use compclass::experiment::{builtin, builtin_names, design, KernelChoice, Overrides, ScenarioConfig};
use compclass::{estimate_perr, multiclass_asymptotics, sigma2_from_snr_db, BoundEvaluator, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub m: usize,
    pub kernel: String,
    pub profile: String,
    pub snr_db: Vec<f64>,
    pub union_bound: Vec<f64>,
}

/// A curve, or why the kernel could not be built for this `M`.
#[derive(Debug, Clone, Serialize)]
pub struct CurveSlot {
    pub m: usize,
    pub curve: Option<Curve>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelView {
    pub rows: Vec<Vec<f64>>,
    pub report: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub p_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub union_bound: f64,
    pub n_trials: u64,
}

fn configured(name: &str, kernel: &str, m: usize) -> Result<ScenarioConfig> {
    let choice = match kernel {
        "random" => KernelChoice::Random,
        "designed" => KernelChoice::Designed,
        other => return Err(compclass::Error::InvalidInput(format!("unknown kernel kind `{other}`"))),
    };
    builtin(name)?.with_overrides(&Overrides { m: Some(m), kernel: Some(choice), ..Default::default() })
}

/// Union-bound curves over the scenario's SNR grid for `M = 1..=m_max`.
pub fn curves(name: &str, kernel: &str, m_max: usize) -> Result<Vec<CurveSlot>> {
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let cfg = configured(name, kernel, m)?;
        let built = cfg.build_source().and_then(|src| {
            let k = cfg.build_kernel(&src)?;
            let ev = BoundEvaluator::new(&k, &src)?;
            let snr_db = cfg.snr_grid()?.points().to_vec();
            let union_bound = snr_db.iter().map(|&s| ev.union(sigma2_from_snr_db(s))).collect::<Result<Vec<_>>>()?;
            let profile = multiclass_asymptotics(&k, &src)?.to_string();
            Ok(Curve { m, kernel: k.provenance().label().to_owned(), profile, snr_db, union_bound })
        });
        out.push(match built {
            Ok(c) => CurveSlot { m, curve: Some(c), error: None },
            Err(e) => CurveSlot { m, curve: None, error: Some(e.to_string()) },
        });
    }
    Ok(out)
}

pub fn designed_kernel(name: &str, m: usize) -> Result<KernelView> {
    let d = design(&builtin(name)?, m)?;
    let phi = d.kernel.phi();
    let rows = (0..phi.nrows()).map(|r| phi.row(r).iter().copied().collect()).collect();
    Ok(KernelView { rows, report: d.report() })
}

pub fn estimate(name: &str, kernel: &str, m: usize, snr_db: f64, trials: u64) -> Result<Estimate> {
    let cfg = configured(name, kernel, m)?;
    let src = cfg.build_source()?;
    let k = cfg.build_kernel(&src)?;
    let sigma2 = sigma2_from_snr_db(snr_db);
    let e = estimate_perr(&src, &k, sigma2, trials, cfg.seed)?;
    let union_bound = BoundEvaluator::new(&k, &src)?.union(sigma2)?;
    Ok(Estimate { p_err: e.p_err, ci_low: e.ci_low, ci_high: e.ci_high, union_bound, n_trials: e.n_trials })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = scenarioNames)]
pub fn scenario_names() -> String {
    serde_json::to_string(&builtin_names().collect::<Vec<_>>()).unwrap_or_else(|_| "[]".into())
}

#[wasm_bindgen(js_name = boundCurves)]
pub fn bound_curves(name: &str, kernel: &str, m_max: usize) -> std::result::Result<String, JsError> {
    to_js(curves(name, kernel, m_max))
}

#[wasm_bindgen(js_name = designKernel)]
pub fn design_kernel(name: &str, m: usize) -> std::result::Result<String, JsError> {
    to_js(designed_kernel(name, m))
}

#[wasm_bindgen(js_name = monteCarlo)]
pub fn monte_carlo(
    name: &str,
    kernel: &str,
    m: usize,
    snr_db: f64,
    trials: u32,
) -> std::result::Result<String, JsError> {
    // u32 keeps this a plain JS number rather than a BigInt
    to_js(estimate(name, kernel, m, snr_db, u64::from(trials)))
}
