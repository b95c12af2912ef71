//! Browser bindings for three interactive views: the ironed revenue curve of
//! a two-component mixture, a hazard-rate comparison, and targeted versus
//! non-targeted recruitment in the two-point market.
//!
//! Each operation takes and returns JSON so the page needs no glue beyond
//! `JSON.parse`. The plain functions are the ones tested natively.

use auction_lab::cli::experiments::best_posted_sequence_iid;
use auction_lab::revenue_lab::expected_revenue_discrete;
use auction_lab::{hr_dominance, DistributionSpec, IronedCurve, Mixture, ValueDistribution};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const CURVE_POINTS: usize = 257;

fn spec(text: &str) -> Result<DistributionSpec, String> {
    let d: DistributionSpec = serde_json::from_str(text).map_err(|e| format!("bad distribution: {e}"))?;
    d.validated().map_err(|e| e.to_string())
}

/// Raw and ironed revenue curves of `w * first + (1 - w) * second`.
pub fn revenue_curve(first: &str, second: &str, w: f64) -> Result<Value, String> {
    let (a, b) = (spec(first)?, spec(second)?);
    let parts: Vec<(f64, DistributionSpec)> = if w >= 1.0 {
        vec![(1.0, a)]
    } else if w <= 0.0 {
        vec![(1.0, b)]
    } else {
        vec![(w, a), (1.0 - w, b)]
    };
    let mix = Mixture::new(parts).map_err(|e| e.to_string())?;
    let c = IronedCurve::build(mix, 4097).map_err(|e| e.to_string())?;
    let stride = (c.grid.len() - 1) / (CURVE_POINTS - 1);
    let pick = |xs: &[f64]| -> Vec<f64> { xs.iter().step_by(stride).copied().collect() };
    let cells = c.ironed_phi.len();
    let phi_at = |xs: &[f64]| -> Vec<f64> { (0..CURVE_POINTS).map(|j| xs[(j * stride).min(cells - 1)]).collect() };
    Ok(json!({
        "q": pick(&c.grid),
        "raw": pick(&c.raw_r),
        "hull": pick(&c.hull_r),
        "raw_phi": phi_at(&c.raw_phi),
        "ironed_phi": phi_at(&c.ironed_phi),
        "max_gap": c.max_gap(),
    }))
}

/// Hazard rates of both distributions on their common support, and whether
/// either dominates the other.
pub fn hazard_compare(first: &str, second: &str) -> Result<Value, String> {
    let (a, b) = (spec(first)?, spec(second)?);
    let common = a
        .support()
        .intersect(&b.support())
        .ok_or_else(|| "supports do not overlap".to_string())?;
    let lo = common.lo;
    // cap unbounded supports where either tail is all but exhausted
    let hi = if common.hi.is_finite() {
        common.hi
    } else {
        a.quantile(0.999).unwrap_or(lo + 1.0).max(b.quantile(0.999).unwrap_or(lo + 1.0))
    };
    let xs: Vec<f64> = (0..CURVE_POINTS)
        .map(|j| lo + (hi - lo) * j as f64 / CURVE_POINTS as f64)
        .collect();
    let h = |d: &DistributionSpec| -> Vec<Option<f64>> { xs.iter().map(|&x| d.hazard(x).ok()).collect() };
    let ab = hr_dominance(&a, &b, 2001).map_err(|e| e.to_string())?;
    let ba = hr_dominance(&b, &a, 2001).map_err(|e| e.to_string())?;
    Ok(json!({
        "x": xs,
        "first": h(&a),
        "second": h(&b),
        "first_dominates": ab.dominates,
        "second_dominates": ba.dominates,
        "crossing": ab.crossing.or(ba.crossing),
    }))
}

/// For `n` bidders worth `n^2` w.p. `1/n^2` and 1 otherwise: the optimal
/// revenue, second price with targeted extras at 1 and `n^2`, and second
/// price with `n` extra draws from the market, for each `n` up to `n_max`.
pub fn targeting_curve(n_max: usize) -> Result<Value, String> {
    let mut rows = Vec::new();
    for n in 2..=n_max.clamp(2, 60) {
        let hi = (n * n) as f64;
        let bidder = DistributionSpec::two_point(1.0, hi, 1.0 / hi).map_err(|e| e.to_string())?;
        let (opt, _) = best_posted_sequence_iid(&bidder, n, &[1.0, hi]);
        let mut targeted = vec![bidder; n];
        targeted.push(DistributionSpec::PointMass { value: 1.0 });
        targeted.push(DistributionSpec::PointMass { value: hi });
        let t = expected_revenue_discrete(&targeted, None).map_err(|e| e.to_string())?;
        let u = expected_revenue_discrete(&vec![bidder; 2 * n], None).map_err(|e| e.to_string())?;
        rows.push(json!({"n": n, "opt": opt, "targeted": t.mean, "nontargeted": u.mean}));
    }
    Ok(Value::Array(rows))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = revenueCurve)]
pub fn revenue_curve_js(first: &str, second: &str, w: f64) -> Result<String, JsValue> {
    to_js(revenue_curve(first, second, w))
}

#[wasm_bindgen(js_name = hazardCompare)]
pub fn hazard_compare_js(first: &str, second: &str) -> Result<String, JsValue> {
    to_js(hazard_compare(first, second))
}

#[wasm_bindgen(js_name = targetingCurve)]
pub fn targeting_curve_js(n_max: usize) -> Result<String, JsValue> {
    to_js(targeting_curve(n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    const U01: &str = r#"{"family":"uniform","a":0,"b":1}"#;
    const U_HIGH: &str = r#"{"family":"uniform","a":0,"b":10}"#;

    #[test]
    fn uniform_curve_is_not_ironed() {
        let v = revenue_curve(U01, U01, 0.5).unwrap();
        assert!(v["max_gap"].as_f64().unwrap() < 1e-9);
        assert_eq!(v["q"].as_array().unwrap().len(), CURVE_POINTS);
        assert_eq!(v["ironed_phi"].as_array().unwrap().len(), CURVE_POINTS);
    }

    #[test]
    fn separated_mixture_is_ironed() {
        let v = revenue_curve(U01, U_HIGH, 0.9).unwrap();
        assert!(v["max_gap"].as_f64().unwrap() > 1e-3);
        let phi: Vec<f64> = v["ironed_phi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(phi.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exponential_hazards() {
        let v = hazard_compare(r#"{"family":"exponential","lambda":1}"#, r#"{"family":"exponential","lambda":2}"#).unwrap();
        assert_eq!(v["first_dominates"], true);
        assert_eq!(v["second_dominates"], false);
        assert_eq!(v["first"][0].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn targeting_beats_nontargeted_at_ten() {
        let rows = targeting_curve(10).unwrap();
        let last = rows.as_array().unwrap().last().unwrap().clone();
        assert_eq!(last["n"], 10);
        let opt = last["opt"].as_f64().unwrap();
        assert!(last["targeted"].as_f64().unwrap() >= 0.99 * opt);
        assert!(last["nontargeted"].as_f64().unwrap() < 0.35 * opt);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(revenue_curve(r#"{"family":"cauchy"}"#, U01, 0.5).is_err());
        assert!(hazard_compare(r#"{"family":"uniform","a":0,"b":1}"#, r#"{"family":"uniform","a":2,"b":3}"#).is_err());
    }
}
