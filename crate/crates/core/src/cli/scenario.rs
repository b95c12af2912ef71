//! Scenario files: a versioned JSON document describing a market, a
//! mechanism, extra bidders and estimator settings.
//!
//! ```json
//! {
//!   "version": 1,
//!   "id": "two-groups",
//!   "market": {
//!     "components": [{"family": "uniform", "a": 0, "b": 1}, {"family": "exponential", "lambda": 1}],
//!     "weights": [[0.5, 0.5]],
//!     "iid": true,
//!     "n": 3
//!   },
//!   "mechanism": {"kind": "second_price"},
//!   "extras": {"bidders": [{"component": 0}, {"value": 1.0}, {"marginal": 0}], "mode": "compete"},
//!   "estimator": {"seed": 7, "n_samples": 100000, "n_streams": 16, "profile_cap": 1000000, "tol": 1e-6},
//!   "outputs": {"csv": "out.csv", "format_version": 1}
//! }
//! ```
//!
//! Without `"iid": true`, `weights` holds one row per bidder and `n` is implied.

use std::sync::Arc;

use serde_json::{Map, Value};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::ironing::{iron, DEFAULT_IRONING_GRID};
use crate::mechanisms::MechanismSpec;
use crate::mixtures::{build_market, MarketModel, ROW_SUM_TOL};
use crate::revenue_lab::{EstimatorConfig, ExtraBidder, Extras, ExtrasMode};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum MechanismChoice {
    SecondPrice,
    SecondPriceReserve(f64),
    SecondPriceBidderReserves(Vec<f64>),
    /// Myerson on each bidder's mixture; the mixtures must be regular.
    Myerson,
    MyersonIroned { grid: usize },
    /// Myerson after observing every bidder's component.
    MyersonDiscriminating,
    PostedSequence { prices: Vec<f64>, order: Vec<usize> },
    RandomSubsetReserve { subset_size: usize },
}

impl MechanismChoice {
    pub fn resolve(&self, market: &MarketModel) -> Result<MechanismSpec> {
        Ok(match self {
            Self::SecondPrice => MechanismSpec::SecondPrice,
            Self::SecondPriceReserve(r) => MechanismSpec::anonymous_reserve(*r)?,
            Self::SecondPriceBidderReserves(rs) => MechanismSpec::SecondPriceBidderReserves(rs.clone()),
            Self::Myerson => MechanismSpec::myerson_regular((0..market.n()).map(|i| market.bidder(i)).collect())?,
            Self::MyersonIroned { grid } => MechanismSpec::MyersonIroned(
                (0..market.n())
                    .map(|i| iron(market, i, *grid).map(Arc::new))
                    .collect::<Result<_>>()?,
            ),
            Self::MyersonDiscriminating => MechanismSpec::MyersonDiscriminating(market.components().to_vec()),
            Self::PostedSequence { prices, order } => MechanismSpec::PostedSequence {
                prices: prices.clone(),
                order: order.clone(),
            },
            Self::RandomSubsetReserve { subset_size } => MechanismSpec::RandomSubsetReserve {
                subset_size: *subset_size,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub csv: Option<String>,
    pub format_version: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub market: MarketModel,
    pub mechanism: MechanismChoice,
    pub extras: Extras,
    pub estimator: EstimatorConfig,
    pub outputs: Outputs,
}

type Obj = Map<String, Value>;

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Obj> {
    v.as_object().ok_or_else(|| Error::schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Obj, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::schema(join(path, key), "missing field"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(path, "expected a finite number"))
}

fn count(v: &Value, path: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| Error::schema(path, "expected a nonnegative integer"))
}

fn num_field(obj: &Obj, key: &str, path: &str) -> Result<f64> {
    number(field(obj, key, path)?, &join(path, key))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::schema(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn check_keys(obj: &Obj, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::schema(join(path, k), "unknown field")),
        None => Ok(()),
    }
}

fn parse_distribution(v: &Value, path: &str) -> Result<DistributionSpec> {
    let obj = object(v, path)?;
    let family_path = join(path, "family");
    let family = field(obj, "family", path)?
        .as_str()
        .ok_or_else(|| Error::schema(&family_path, "expected a string"))?;
    let keys: &[&str] = match family {
        "uniform" => &["family", "a", "b"],
        "exponential" => &["family", "lambda"],
        "power_law" => &["family", "alpha"],
        "equal_revenue" => &["family"],
        "truncated_normal" => &["family", "mu", "sigma"],
        "point_mass" => &["family", "value"],
        "two_point" => &["family", "lo", "hi", "p_hi"],
        other => return Err(Error::schema(family_path, format!("unknown family `{other}`"))),
    };
    check_keys(obj, keys, path)?;
    let spec = match family {
        "uniform" => DistributionSpec::Uniform {
            a: num_field(obj, "a", path)?,
            b: num_field(obj, "b", path)?,
        },
        "exponential" => DistributionSpec::Exponential {
            lambda: num_field(obj, "lambda", path)?,
        },
        "power_law" => DistributionSpec::PowerLaw {
            alpha: num_field(obj, "alpha", path)?,
        },
        "equal_revenue" => DistributionSpec::EqualRevenue,
        "truncated_normal" => DistributionSpec::TruncatedNormal {
            mu: num_field(obj, "mu", path)?,
            sigma: num_field(obj, "sigma", path)?,
        },
        "point_mass" => DistributionSpec::PointMass {
            value: num_field(obj, "value", path)?,
        },
        _ => DistributionSpec::TwoPoint {
            lo: num_field(obj, "lo", path)?,
            hi: num_field(obj, "hi", path)?,
            p_hi: num_field(obj, "p_hi", path)?,
        },
    };
    spec.validate().map_err(|e| Error::schema(path, e.to_string()))?;
    Ok(spec)
}

fn parse_market(v: &Value) -> Result<MarketModel> {
    let path = "market";
    let obj = object(v, path)?;
    check_keys(obj, &["components", "weights", "iid", "n"], path)?;
    let comps_v = field(obj, "components", path)?
        .as_array()
        .ok_or_else(|| Error::schema("market.components", "expected an array"))?;
    if comps_v.is_empty() {
        return Err(Error::schema("market.components", "at least one component is required"));
    }
    let components = comps_v
        .iter()
        .enumerate()
        .map(|(i, c)| parse_distribution(c, &format!("market.components[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let rows_v = field(obj, "weights", path)?
        .as_array()
        .ok_or_else(|| Error::schema("market.weights", "expected an array of rows"))?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for (i, row_v) in rows_v.iter().enumerate() {
        let rpath = format!("market.weights[{i}]");
        let row = numbers(row_v, &rpath)?;
        if row.len() != components.len() {
            return Err(Error::schema(
                rpath,
                format!("row has {} entries for {} components", row.len(), components.len()),
            ));
        }
        if let Some(j) = row.iter().position(|&w| w < 0.0) {
            return Err(Error::schema(format!("{rpath}[{j}]"), "negative weight"));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::schema(rpath, "row sum"));
        }
        rows.push(row);
    }

    let iid = match obj.get("iid") {
        None => false,
        Some(b) => b.as_bool().ok_or_else(|| Error::schema("market.iid", "expected a boolean"))?,
    };
    let weights = if iid {
        if rows.len() != 1 {
            return Err(Error::schema("market.weights", "an iid market takes exactly one row"));
        }
        let n = count(field(obj, "n", path)?, "market.n")? as usize;
        if n == 0 {
            return Err(Error::schema("market.n", "at least one bidder is required"));
        }
        vec![rows[0].clone(); n]
    } else {
        if let Some(n) = obj.get("n") {
            if count(n, "market.n")? as usize != rows.len() {
                return Err(Error::schema("market.n", "does not match the number of weight rows"));
            }
        }
        if rows.is_empty() {
            return Err(Error::schema("market.weights", "at least one bidder is required"));
        }
        rows
    };
    build_market(components, weights).map_err(|e| Error::schema(path, e.to_string()))
}

fn parse_mechanism(v: Option<&Value>) -> Result<MechanismChoice> {
    let path = "mechanism";
    let Some(v) = v else {
        return Ok(MechanismChoice::SecondPrice);
    };
    let obj = object(v, path)?;
    let kind_path = "mechanism.kind";
    let kind = field(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| Error::schema(kind_path, "expected a string"))?;
    Ok(match kind {
        "second_price" => {
            check_keys(obj, &["kind"], path)?;
            MechanismChoice::SecondPrice
        }
        "second_price_reserve" => {
            check_keys(obj, &["kind", "reserve"], path)?;
            let r = num_field(obj, "reserve", path)?;
            if r < 0.0 {
                return Err(Error::schema("mechanism.reserve", "reserve must be nonnegative"));
            }
            MechanismChoice::SecondPriceReserve(r)
        }
        "second_price_bidder_reserves" => {
            check_keys(obj, &["kind", "reserves"], path)?;
            let rs = numbers(field(obj, "reserves", path)?, "mechanism.reserves")?;
            if let Some(i) = rs.iter().position(|&r| r < 0.0) {
                return Err(Error::schema(format!("mechanism.reserves[{i}]"), "reserve must be nonnegative"));
            }
            MechanismChoice::SecondPriceBidderReserves(rs)
        }
        "myerson" => {
            check_keys(obj, &["kind"], path)?;
            MechanismChoice::Myerson
        }
        "myerson_ironed" => {
            check_keys(obj, &["kind", "grid"], path)?;
            let grid = match obj.get("grid") {
                Some(g) => count(g, "mechanism.grid")? as usize,
                None => DEFAULT_IRONING_GRID,
            };
            MechanismChoice::MyersonIroned { grid }
        }
        "myerson_discriminating" => {
            check_keys(obj, &["kind"], path)?;
            MechanismChoice::MyersonDiscriminating
        }
        "posted_sequence" => {
            check_keys(obj, &["kind", "prices", "order"], path)?;
            let prices = numbers(field(obj, "prices", path)?, "mechanism.prices")?;
            let order_v = field(obj, "order", path)?
                .as_array()
                .ok_or_else(|| Error::schema("mechanism.order", "expected an array"))?;
            let order = order_v
                .iter()
                .enumerate()
                .map(|(i, x)| count(x, &format!("mechanism.order[{i}]")).map(|c| c as usize))
                .collect::<Result<Vec<_>>>()?;
            if prices.len() != order.len() {
                return Err(Error::schema("mechanism.order", "must have one entry per price"));
            }
            MechanismChoice::PostedSequence { prices, order }
        }
        "random_subset_reserve" => {
            check_keys(obj, &["kind", "subset_size"], path)?;
            let subset_size = count(field(obj, "subset_size", path)?, "mechanism.subset_size")? as usize;
            MechanismChoice::RandomSubsetReserve { subset_size }
        }
        other => return Err(Error::schema(kind_path, format!("unknown mechanism `{other}`"))),
    })
}

fn parse_extras(v: Option<&Value>, market: &MarketModel) -> Result<Extras> {
    let path = "extras";
    let Some(v) = v else {
        return Ok(Extras::none());
    };
    let obj = object(v, path)?;
    check_keys(obj, &["bidders", "mode"], path)?;
    let mode = match obj.get("mode").map(|m| m.as_str()) {
        None => ExtrasMode::Compete,
        Some(Some("compete")) => ExtrasMode::Compete,
        Some(Some("reserve")) => ExtrasMode::Reserve,
        Some(_) => return Err(Error::schema("extras.mode", "expected `compete` or `reserve`")),
    };
    let list = match obj.get("bidders") {
        None => Vec::new(),
        Some(b) => b
            .as_array()
            .ok_or_else(|| Error::schema("extras.bidders", "expected an array"))?
            .clone(),
    };
    let mut bidders = Vec::with_capacity(list.len());
    for (i, b) in list.iter().enumerate() {
        let bpath = format!("extras.bidders[{i}]");
        let o = object(b, &bpath)?;
        if o.len() != 1 {
            return Err(Error::schema(bpath, "expected exactly one of `component`, `value`, `marginal`"));
        }
        let (key, val) = o.iter().next().expect("one entry");
        let vpath = join(&bpath, key);
        let extra = match key.as_str() {
            "component" => {
                let t = count(val, &vpath)? as usize;
                if t >= market.k() {
                    return Err(Error::schema(vpath, format!("component index out of range for k = {}", market.k())));
                }
                ExtraBidder::Component(t)
            }
            "value" => {
                let x = number(val, &vpath)?;
                if x < 0.0 {
                    return Err(Error::schema(vpath, "value must be nonnegative"));
                }
                ExtraBidder::Value(x)
            }
            "marginal" => {
                let i = count(val, &vpath)? as usize;
                if i >= market.n() {
                    return Err(Error::schema(vpath, format!("bidder index out of range for n = {}", market.n())));
                }
                ExtraBidder::Marginal(i)
            }
            _ => return Err(Error::schema(vpath, "unknown extra-bidder kind")),
        };
        bidders.push(extra);
    }
    Ok(Extras { bidders, mode })
}

fn parse_estimator(v: Option<&Value>, seed_fallback: Option<u64>) -> Result<EstimatorConfig> {
    let path = "estimator";
    let empty = Map::new();
    let obj = match v {
        Some(v) => object(v, path)?,
        None => &empty,
    };
    check_keys(obj, &["seed", "n_samples", "n_streams", "profile_cap", "tol"], path)?;
    let seed = match (obj.get("seed"), seed_fallback) {
        (Some(s), _) => count(s, "estimator.seed")?,
        (None, Some(s)) => s,
        (None, None) => return Err(Error::schema("estimator.seed", "missing field; a seed is mandatory")),
    };
    let mut cfg = EstimatorConfig::new(seed, 100_000);
    if let Some(n) = obj.get("n_samples") {
        cfg.n_samples = count(n, "estimator.n_samples")?;
        if cfg.n_samples == 0 {
            return Err(Error::schema("estimator.n_samples", "must be at least 1"));
        }
    }
    if let Some(n) = obj.get("n_streams") {
        cfg.n_streams = count(n, "estimator.n_streams")?;
        if cfg.n_streams == 0 {
            return Err(Error::schema("estimator.n_streams", "must be at least 1"));
        }
    }
    if let Some(c) = obj.get("profile_cap") {
        cfg.profile_cap = count(c, "estimator.profile_cap")? as usize;
    }
    if let Some(t) = obj.get("tol") {
        cfg.quadrature_tol = number(t, "estimator.tol")?;
        if cfg.quadrature_tol <= 0.0 {
            return Err(Error::schema("estimator.tol", "must be positive"));
        }
    }
    Ok(cfg)
}

fn parse_outputs(v: Option<&Value>) -> Result<Outputs> {
    let path = "outputs";
    let mut out = Outputs {
        csv: None,
        format_version: SCHEMA_VERSION,
    };
    let Some(v) = v else {
        return Ok(out);
    };
    let obj = object(v, path)?;
    check_keys(obj, &["csv", "format_version"], path)?;
    if let Some(c) = obj.get("csv") {
        out.csv = Some(
            c.as_str()
                .ok_or_else(|| Error::schema("outputs.csv", "expected a path string"))?
                .to_string(),
        );
    }
    if let Some(f) = obj.get("format_version") {
        out.format_version = count(f, "outputs.format_version")?;
        if out.format_version != SCHEMA_VERSION {
            return Err(Error::schema("outputs.format_version", "unsupported format version"));
        }
    }
    Ok(out)
}

/// Parses and validates a scenario; the seed must be given in the file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    parse_scenario_with_seed(text, None)
}

/// As [`parse_scenario`], using `seed_fallback` when the file has no seed.
pub fn parse_scenario_with_seed(text: &str, seed_fallback: Option<u64>) -> Result<ScenarioConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::schema("", format!("invalid JSON: {e}")))?;
    let root = object(&doc, "")?;
    check_keys(root, &["version", "id", "market", "mechanism", "extras", "estimator", "outputs"], "")?;
    let version = count(field(root, "version", "")?, "version")?;
    if version != SCHEMA_VERSION {
        return Err(Error::schema("version", format!("unsupported version {version}, expected {SCHEMA_VERSION}")));
    }
    let id = match root.get("id") {
        None => "scenario".to_string(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::schema("id", "expected a string"))?
            .to_string(),
    };
    let market = parse_market(field(root, "market", "")?)?;
    let mechanism = parse_mechanism(root.get("mechanism"))?;
    let extras = parse_extras(root.get("extras"), &market)?;
    if extras.mode == ExtrasMode::Reserve && mechanism != MechanismChoice::SecondPrice {
        return Err(Error::schema("extras.mode", "reserve extras require the second_price mechanism"));
    }
    let estimator = parse_estimator(root.get("estimator"), seed_fallback)?;
    let outputs = parse_outputs(root.get("outputs"))?;
    Ok(ScenarioConfig {
        id,
        market,
        mechanism,
        extras,
        estimator,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "market": {"components": [{"family": "uniform", "a": 0, "b": 1}], "weights": [[1.0]], "iid": true, "n": 2},
        "mechanism": {"kind": "second_price"},
        "estimator": {"seed": 1}
    }"#;

    fn schema_path(r: Result<ScenarioConfig>) -> (String, String) {
        match r {
            Err(Error::Schema { path, reason }) => (path, reason),
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_scenario_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.market.n(), 2);
        assert_eq!(s.market.k(), 1);
        assert_eq!(s.mechanism, MechanismChoice::SecondPrice);
        assert_eq!(s.estimator.seed, 1);
    }

    #[test]
    fn bad_row_sum_names_the_row() {
        let text = MINIMAL.replace(
            r#""components": [{"family": "uniform", "a": 0, "b": 1}], "weights": [[1.0]]"#,
            r#""components": [{"family": "uniform", "a": 0, "b": 1}, {"family": "exponential", "lambda": 1}], "weights": [[0.6, 0.5]]"#,
        );
        assert_eq!(schema_path(parse_scenario(&text)), ("market.weights[0]".into(), "row sum".into()));
    }

    #[test]
    fn unknown_family_names_the_field() {
        let text = MINIMAL.replace(r#""family": "uniform", "a": 0, "b": 1"#, r#""family": "cauchy""#);
        let (path, reason) = schema_path(parse_scenario(&text));
        assert_eq!(path, "market.components[0].family");
        assert!(reason.contains("cauchy"));
    }

    #[test]
    fn seed_is_mandatory_without_fallback() {
        let text = MINIMAL.replace(r#""estimator": {"seed": 1}"#, r#""estimator": {}"#);
        assert_eq!(schema_path(parse_scenario(&text)).0, "estimator.seed");
        assert_eq!(parse_scenario_with_seed(&text, Some(9)).unwrap().estimator.seed, 9);
    }

    #[test]
    fn other_diagnostics() {
        let wrong_version = MINIMAL.replace(r#""version": 1"#, r#""version": 2"#);
        assert_eq!(schema_path(parse_scenario(&wrong_version)).0, "version");
        let bad_param = MINIMAL.replace(r#""a": 0, "b": 1"#, r#""a": 2, "b": 1"#);
        assert_eq!(schema_path(parse_scenario(&bad_param)).0, "market.components[0]");
        let bad_mech = MINIMAL.replace("second_price", "vcg");
        assert_eq!(schema_path(parse_scenario(&bad_mech)).0, "mechanism.kind");
        let extra_key = MINIMAL.replace(r#""version": 1"#, r#""version": 1, "colour": "red""#);
        assert_eq!(schema_path(parse_scenario(&extra_key)).0, "colour");
    }

    #[test]
    fn full_scenario_parses() {
        let text = r#"{
            "version": 1,
            "id": "full",
            "market": {
                "components": [{"family": "uniform", "a": 0, "b": 1}, {"family": "uniform", "a": 0, "b": 2}],
                "weights": [[0.5, 0.5], [0.2, 0.8]]
            },
            "mechanism": {"kind": "second_price_reserve", "reserve": 0.5},
            "extras": {"bidders": [{"component": 1}, {"value": 0.3}, {"marginal": 1}]},
            "estimator": {"seed": 3, "n_samples": 1000, "n_streams": 4, "profile_cap": 10, "tol": 1e-5},
            "outputs": {"csv": "x.csv", "format_version": 1}
        }"#;
        let s = parse_scenario(text).unwrap();
        assert!(!s.market.is_iid());
        assert_eq!(s.extras.bidders.len(), 3);
        assert_eq!(s.estimator.n_streams, 4);
        assert_eq!(s.outputs.csv.as_deref(), Some("x.csv"));
        assert!(matches!(s.mechanism.resolve(&s.market).unwrap(), MechanismSpec::SecondPriceAnonymousReserve(_)));
    }
}
