use wasm_bindgen::prelude::*;

use diqkd::behavior::critical_eta_star;
use diqkd::certify::local_analysis;
use diqkd::conic::Tolerances;
use diqkd::keyrate::{chsh_rate_chain, click_binning, test_settings};
use diqkd::schemes::{behavior, SchemeConfig};

fn js_err(e: diqkd::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Lower bound on the critical local efficiency for `n_k` key outcomes.
#[wasm_bindgen(js_name = criticalEtaStar)]
pub fn critical_eta_star_js(n_k: u32, m: u32) -> Result<f64, JsValue> {
    critical_eta_star(n_k, m).map_err(js_err)
}

#[wasm_bindgen(js_name = chshRate)]
pub fn chsh_rate_js(s: f64) -> f64 {
    chsh_rate_chain(s).value
}

/// Runs a scheme with default analyzers and returns
/// `{p_herald, chsh, w}` as JSON, with `chsh` the magnitude of S.
#[wasm_bindgen]
pub fn simulate(scheme: &str, eta_l: f64, eta_t: f64, t: f64) -> Result<String, JsValue> {
    let base = match scheme {
        "SH" | "sh" => SchemeConfig::sh_default(),
        "CH" | "ch" => SchemeConfig::ch_default(),
        other => return Err(JsValue::from_str(&format!("unknown scheme {other}"))),
    };
    let cfg = SchemeConfig { eta_t, t, ..base }.with_local_efficiency(eta_l);
    cfg.validate().map_err(js_err)?;
    let res = behavior(&cfg).map_err(js_err)?;
    let (xs, ys) = test_settings(&cfg);
    let test = res.behavior.restrict(&xs, &ys).map_err(js_err)?;
    let chsh = test.chsh(&click_binning()).map_err(js_err)?.abs();
    let w = local_analysis(&test, &Tolerances::default()).map_err(js_err)?.signed_w;
    Ok(serde_json::json!({ "p_herald": res.p_herald, "chsh": chsh, "w": w }).to_string())
}
