//! Browser demo: three JSON-in, JSON-out operations on top of `besovlab`.
//!
//! The `*_json` functions are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` exports only convert the error type.

use besovlab::functionals::{dyadic_eps_grid, max_reach, HQuadrature, SemiNormSpec};
use besovlab::gridfn::{Generator, GridBox, GridFunction, LpExponent};
use besovlab::kernels::{KernelContext, KernelFamily};
use besovlab::limits::{bbm_sweep, default_quadrature, ms_sweep, theo_ratio_sweep};
use besovlab::omega::OmegaFn;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

/// Largest sample count accepted from the page, to keep the tab responsive.
const MAX_SAMPLES: usize = 40_000;

fn parse(input: &str) -> Result<Value, String> {
    serde_json::from_str(input).map_err(|e| format!("bad JSON: {e}"))
}

fn text<'a>(v: &'a Value, key: &str, default: &'a str) -> &'a str {
    v.get(key).and_then(Value::as_str).unwrap_or(default)
}

fn num(v: &Value, key: &str, default: f64) -> Result<f64, String> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(x) => x.as_f64().ok_or_else(|| format!("`{key}` must be a number")),
    }
}

fn list(v: &Value, key: &str) -> Result<Option<Vec<f64>>, String> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| format!("`{key}` must hold numbers")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(_) => Err(format!("`{key}` must be an array")),
    }
}

fn finite_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Samples `f` on its support padded by `pad` on each side.
fn sample(gen_text: &str, spacing: f64, pad: f64) -> Result<GridFunction, String> {
    let gen = Generator::parse(gen_text).map_err(|e| e.to_string())?;
    if gen.dim() != 1 {
        return Err("the demo plots one-dimensional functions only".into());
    }
    let (lo, hi) = gen.support().ok_or("function must be compactly supported")?;
    let bx = GridBox::new(vec![lo[0].floor() - pad], vec![hi[0].ceil() + pad]).map_err(|e| e.to_string())?;
    if (bx.hi[0] - bx.lo[0]) / spacing > MAX_SAMPLES as f64 {
        return Err(format!("more than {MAX_SAMPLES} samples; increase the spacing"));
    }
    GridFunction::sample(&gen, &bx, spacing, 0.0).map_err(|e| e.to_string())
}

/// `{kind: "ms" | "bbm", f, p, spacing, rgrid}` to the sweep values and their limit.
pub fn limit_sweep_json(input: &str) -> Out {
    let v = parse(input)?;
    let kind = text(&v, "kind", "ms");
    let p = num(&v, "p", 1.0)?;
    let spacing = num(&v, "spacing", 1.0 / 512.0)?;
    let f = sample(text(&v, "f", "indicator(0,1)"), spacing, 3.0)?;
    let rep = match kind {
        "ms" => {
            let grid = list(&v, "rgrid")?.unwrap_or_else(|| vec![0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.02, 0.01]);
            ms_sweep(&f, p, &grid, &HQuadrature::default())
        }
        "bbm" => {
            let grid = list(&v, "rgrid")?.unwrap_or_else(|| vec![0.8, 0.85, 0.9, 0.93, 0.96, 0.98, 0.99]);
            bbm_sweep(&f, p, &grid, 1, &default_quadrature())
        }
        other => return Err(format!("unknown sweep `{other}`; use ms or bbm")),
    }
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "kind": kind,
        "grid": rep.grid,
        "values": rep.values,
        "target": rep.target.map(finite_json),
        "extrapolated": finite_json(rep.extrapolated),
        "relative_error": rep.relative_error.map(finite_json),
    })
    .to_string())
}

/// `{f, kernel, omega, s, p, M, spacing, kmax}` to `D_omega` along dyadic epsilon.
pub fn d_omega_curve_json(input: &str) -> Out {
    let v = parse(input)?;
    let s = num(&v, "s", 0.5)?;
    let p = LpExponent::finite(num(&v, "p", 1.0)?).map_err(|e| e.to_string())?;
    let order = num(&v, "M", 1.0)? as u32;
    let spacing = num(&v, "spacing", 1.0 / 512.0)?;
    let kmax = num(&v, "kmax", 8.0)? as usize;
    let spec = SemiNormSpec::new(s, p, LpExponent::Infinity, order).map_err(|e| e.to_string())?;
    let f = sample(text(&v, "f", "indicator(0,1)"), spacing, order as f64 + 2.0)?;
    let family = KernelFamily::parse(text(&v, "kernel", "choice2"), KernelContext { dim: 1, s: Some(s) })
        .map_err(|e| e.to_string())?;
    let omega = OmegaFn::parse(text(&v, "omega", "id")).map_err(|e| e.to_string())?;
    let h_max = max_reach(&f, order).floor().max(spacing);
    let eps = dyadic_eps_grid(h_max, kmax.min(16));
    let t = theo_ratio_sweep(&f, &family, &omega, &spec, &eps, &default_quadrature()).map_err(|e| e.to_string())?;
    Ok(json!({
        "eps": t.report.grid,
        "values": t.report.values,
        "nikolskii": t.nikolskii,
        "omega_nikolskii": omega.eval(t.nikolskii),
        "ratio": t.ratio,
    })
    .to_string())
}

/// `{kernel, s, eps, points}` to the radial density `rho_eps(r)` on `[0, R_eff]`.
pub fn kernel_profile_json(input: &str) -> Out {
    let v = parse(input)?;
    let s = num(&v, "s", 0.5)?;
    let eps = num(&v, "eps", 1.0)?;
    let points = (num(&v, "points", 200.0)? as usize).clamp(2, 4000);
    let family = KernelFamily::parse(text(&v, "kernel", "uniform"), KernelContext { dim: 1, s: Some(s) })
        .map_err(|e| e.to_string())?;
    let k = family.instantiate(eps).map_err(|e| e.to_string())?;
    let radius = k.effective_radius();
    // Skip r = 0, where power-type kernels are singular.
    let r: Vec<f64> = (1..=points).map(|i| radius * i as f64 / points as f64).collect();
    let density: Vec<Value> = r.iter().map(|&t| finite_json(k.density(t))).collect();
    Ok(json!({
        "label": family.label(),
        "r": r,
        "density": density,
        "mass": k.mass(),
        "radius": radius,
    })
    .to_string())
}

fn js(r: Out) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn limit_sweep(input: &str) -> Result<String, JsValue> {
    js(limit_sweep_json(input))
}

#[wasm_bindgen]
pub fn d_omega_curve(input: &str) -> Result<String, JsValue> {
    js(d_omega_curve_json(input))
}

#[wasm_bindgen]
pub fn kernel_profile(input: &str) -> Result<String, JsValue> {
    js(kernel_profile_json(input))
}
