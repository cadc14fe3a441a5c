//! Built-in inputs for `crsing --demo NAME`, one per worked example.

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::poly::BihomPoly;
use crate::surface::CRSurface;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Names accepted by [`demo_surface`].
pub const SURFACE_DEMOS: &[&str] = &["zbar3", "zbar4-0.3", "fail-0.9", "residual", "holomorphic-lead", "zbar4"];

pub fn demo_surface(name: &str) -> Result<CRSurface> {
    let s = match name {
        "zbar3" => CRSurface::from_leading(3, &[(3, c(1.0, 0.0))], 1.0),
        "zbar4-0.3" => CRSurface::from_leading(4, &[(4, c(1.0, 0.0)), (3, c(0.3, 0.0))], 1.0),
        "fail-0.9" => CRSurface::from_leading(3, &[(3, c(1.0, 0.0)), (2, c(0.9, 0.0))], 1.0),
        "residual" => CRSurface::from_leading(3, &[(3, c(1.0, 0.0))], 1.0)
            .and_then(|s| s.with_residual(BihomPoly::monomial(2, 2, c(1.0, 0.0)))),
        "holomorphic-lead" => CRSurface::from_leading(3, &[(0, c(1.0, 1.0)), (2, c(0.1, 0.0)), (3, c(1.0, 0.0))], 1.0),
        "zbar4" => CRSurface::from_leading(4, &[(4, c(1.0, 0.0))], 1.0),
        _ => {
            return Err(Error::invalid(format!(
                "unknown surface demo '{name}' (known: {})",
                SURFACE_DEMOS.join(", ")
            )))
        }
    }?;
    Ok(s)
}

fn poly_fn(terms: &[(u32, u32, f64, f64)]) -> serde_json::Value {
    json!({
        "kind": "poly",
        "terms": terms.iter().map(|&(a, b, re, im)| json!({"a": a, "b": b, "re": re, "im": im})).collect::<Vec<_>>(),
    })
}

/// Names accepted by [`demo_tool_input`] for each tool.
pub fn tool_demos(command: &str) -> &'static [&'static str] {
    match command {
        "sector-scan" => &["zbar", "zbar-half-z", "abs2", "sheet-zbar4-0.3"],
        "approximate" => &["zbar-in-zbar3", "zbar-in-abs2", "zbar-in-zbar"],
        "hull-probe" => &["abs2", "zbar"],
        _ => &[],
    }
}

/// JSON input document for a tool subcommand.
pub fn demo_tool_input(command: &str, name: &str) -> Result<String> {
    let zbar = poly_fn(&[(0, 1, 1.0, 0.0)]);
    let abs2 = poly_fn(&[(1, 1, 1.0, 0.0)]);
    let v = match (command, name) {
        ("sector-scan", "zbar") => json!({"function": zbar, "radius": 1.0}),
        ("sector-scan", "zbar-half-z") => {
            json!({"function": poly_fn(&[(0, 1, 1.0, 0.0), (1, 0, 0.5, 0.0)]), "radius": 1.0})
        }
        ("sector-scan", "abs2") => json!({"function": abs2, "radius": 1.0, "exceptional": [[0.0, 0.0]]}),
        ("sector-scan", "sheet-zbar4-0.3") => json!({
            "function": {"kind": "sheet", "surface": demo_surface("zbar4-0.3")?.to_spec()},
            "radius": 1.0,
        }),
        ("approximate", "zbar-in-zbar3") => json!({
            "function": poly_fn(&[(0, 3, 1.0, 0.0)]),
            "target": zbar,
            "radius": 1.0,
            "schedule": (0..=6).map(|d| [d, d]).collect::<Vec<_>>(),
        }),
        ("approximate", "zbar-in-abs2") => json!({
            "function": abs2,
            "target": zbar,
            "radius": 1.0,
            "schedule": (0..=8).map(|d| [d, d]).collect::<Vec<_>>(),
        }),
        ("approximate", "zbar-in-zbar") => json!({
            "function": zbar,
            "target": zbar,
            "radius": 1.0,
            "schedule": [[0, 0], [0, 1]],
        }),
        ("hull-probe", "abs2") => json!({"graph": abs2, "radius": 1.0, "probe": {"z": [0.0, 0.0], "w": [0.25, 0.0]}}),
        ("hull-probe", "zbar") => json!({"graph": zbar, "radius": 1.0, "probe": {"z": [0.0, 0.0], "w": [0.5, 0.0]}}),
        _ => {
            return Err(Error::invalid(format!(
                "unknown {command} demo '{name}' (known: {})",
                tool_demos(command).join(", ")
            )))
        }
    };
    Ok(serde_json::to_string_pretty(&v).expect("demo JSON serializes"))
}
