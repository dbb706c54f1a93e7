//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Polygons cross the boundary as `x,y` CSV text and reports come back as
//! JSON strings. The `*_json` functions hold the logic and are callable from
//! native code; the exported wrappers only convert errors to `JsValue`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ngon_core::convexify::{convexify, FlipStep};
use ngon_core::lab::{verify_polygon, Constants, InequalityReport};
use ngon_core::manifold::{sample_with, seeded_rng};
use ngon_core::{Point, SamplerConfig, VertexPolygon};

#[derive(Serialize)]
struct PolygonReport {
    /// Counterclockwise vertices as stored.
    vertices: Vec<Point>,
    barycenter: Point,
    simple: bool,
    report: InequalityReport,
}

#[derive(Serialize)]
struct Trace<'a> {
    flips: usize,
    perimeter_drift: f64,
    area_strictly_increasing: bool,
    deficit_nonincreasing: bool,
    steps: &'a [FlipStep],
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Summary and inequality records of a polygon given as CSV.
pub fn polygon_report_json(csv: &str, c_n: Option<f64>) -> Result<String, String> {
    let p = VertexPolygon::from_csv_str(csv).map_err(|e| e.to_string())?;
    let consts = Constants {
        c_n,
        side_variance: None,
    };
    let report = verify_polygon(&p, &consts).map_err(|e| e.to_string())?;
    to_json(&PolygonReport {
        vertices: p.vertices().to_vec(),
        barycenter: p.barycenter(),
        simple: p.is_simple(),
        report,
    })
}

/// Full pocket-flip trace of a simple polygon given as CSV.
pub fn convexify_json(csv: &str, max_flips: usize) -> Result<String, String> {
    let p = VertexPolygon::from_csv_str(csv).map_err(|e| e.to_string())?;
    let (_, trace) = convexify(&p, max_flips).map_err(|e| e.to_string())?;
    to_json(&Trace {
        flips: trace.flips(),
        perimeter_drift: trace.perimeter_drift(),
        area_strictly_increasing: trace.area_strictly_increasing(),
        deficit_nonincreasing: trace.deficit_nonincreasing(),
        steps: &trace.steps,
    })
}

/// Vertices of a random manifold point as CSV.
pub fn random_polygon_csv(n: usize, seed: u64, convex: bool) -> Result<String, String> {
    let config = if convex {
        SamplerConfig::convex()
    } else {
        SamplerConfig::default()
    };
    let m = sample_with(n, &config, &mut seeded_rng(seed), 100_000).map_err(|e| e.to_string())?;
    Ok(m.to_vertices().map_err(|e| e.to_string())?.to_csv_string())
}

#[wasm_bindgen(js_name = polygonReport)]
pub fn polygon_report(csv: &str, c_n: Option<f64>) -> Result<String, JsValue> {
    polygon_report_json(csv, c_n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = convexifyTrace)]
pub fn convexify_trace(csv: &str, max_flips: usize) -> Result<String, JsValue> {
    convexify_json(csv, max_flips).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = randomPolygon)]
pub fn random_polygon(n: usize, seed: u64, convex: bool) -> Result<String, JsValue> {
    random_polygon_csv(n, seed, convex).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn rectangle_report() {
        let v: Value =
            serde_json::from_str(&polygon_report_json("0,0\n2,0\n2,1\n0,1\n", None).unwrap())
                .unwrap();
        assert_eq!(v["report"]["summary"]["perimeter"], 6.0);
        assert_eq!(v["simple"], true);
        assert_eq!(v["barycenter"]["x"], 1.0);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(polygon_report_json("0,0\n1,1\n", None).unwrap_err().contains("3 vertices"));
        assert!(polygon_report_json("0,0\nfoo\n", None).is_err());
    }

    #[test]
    fn dent_trace() {
        let v: Value = serde_json::from_str(
            &convexify_json("0,0\n0.5,0.2\n1,0\n1,1\n0,1\n", 10).unwrap(),
        )
        .unwrap();
        assert_eq!(v["flips"], 1);
        assert_eq!(v["steps"].as_array().unwrap().len(), 2);
        assert_eq!(v["area_strictly_increasing"], true);
    }

    #[test]
    fn random_polygon_parses_back() {
        let csv = random_polygon_csv(7, 5, true).unwrap();
        let p = VertexPolygon::from_csv_str(&csv).unwrap();
        assert_eq!(p.n(), 7);
        assert!(p.is_convex());
        assert_eq!(csv, random_polygon_csv(7, 5, true).unwrap());
    }
}
