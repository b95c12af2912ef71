//! Recipes for augmenting a market with extra bidders or a reserve, each with
//! the revenue guarantee factor it carries against the coin-observing optimum.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::dist::{hr_dominance, ValueDistribution, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismSpec;
use crate::mixtures::MarketModel;
use crate::revenue_lab::{estimate_mc, EstimatorConfig, ExtraBidder, Extras, RevenueEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    TargetedPerComponent { components: Vec<usize> },
    SingleHrDominant { component: usize },
    NonTargetedCount { n_star: u64 },
    NonTargetedHrCount { n_star: u64 },
    AnonymousReserve { reserve: f64, component: usize },
    /// Reserve drawn as the maximum of one fresh value per listed component.
    SampleReserve { components: Vec<usize> },
    RandomSubsetReserve { subset_size: usize },
    NoReserve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionStatus {
    Verified,
    /// Holds under a documented heuristic rather than a check.
    Heuristic,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumption {
    pub name: String,
    pub status: AssumptionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Assumption {
    fn new(name: &str, status: AssumptionStatus, note: Option<String>) -> Self {
        Self {
            name: name.into(),
            status,
            note,
        }
    }

    fn verified(name: &str) -> Self {
        Self::new(name, AssumptionStatus::Verified, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub strategy: Strategy,
    pub guarantee_factor: f64,
    pub assumptions: Vec<Assumption>,
    /// Number of components the guarantee refers to.
    pub k: usize,
    /// Smallest group size, for the sample-based recipes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// Number of original bidders.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<(String, RevenueEstimate)>,
}

impl AugmentationPlan {
    fn new(strategy: Strategy, k: usize, n: usize, t: Option<usize>, assumptions: Vec<Assumption>) -> Self {
        let mut plan = Self {
            strategy,
            guarantee_factor: f64::NAN,
            assumptions,
            k,
            t,
            n,
            notes: Vec::new(),
            evidence: Vec::new(),
        };
        plan.guarantee_factor = factor_formula(&plan);
        plan
    }

    /// The mechanism and extras that realize the plan on `market`.
    pub fn realization(&self) -> (MechanismSpec, Extras) {
        match &self.strategy {
            Strategy::TargetedPerComponent { components } => {
                (MechanismSpec::SecondPrice, Extras::per_component(components.iter().copied()))
            }
            Strategy::SingleHrDominant { component } => (MechanismSpec::SecondPrice, Extras::per_component([*component])),
            Strategy::NonTargetedCount { n_star } | Strategy::NonTargetedHrCount { n_star } => (
                MechanismSpec::SecondPrice,
                Extras::compete(vec![ExtraBidder::Marginal(0); *n_star as usize]),
            ),
            Strategy::AnonymousReserve { reserve, .. } => {
                (MechanismSpec::SecondPriceAnonymousReserve(*reserve), Extras::none())
            }
            Strategy::SampleReserve { components } => (
                MechanismSpec::SecondPrice,
                Extras::as_reserve(components.iter().map(|&t| ExtraBidder::Component(t)).collect()),
            ),
            Strategy::RandomSubsetReserve { subset_size } => (
                MechanismSpec::RandomSubsetReserve {
                    subset_size: *subset_size,
                },
                Extras::none(),
            ),
            Strategy::NoReserve => (MechanismSpec::SecondPrice, Extras::none()),
        }
    }

    pub fn label(&self) -> String {
        match &self.strategy {
            Strategy::TargetedPerComponent { components } => format!("targeted{components:?}"),
            Strategy::SingleHrDominant { component } => format!("hr_dominant({component})"),
            Strategy::NonTargetedCount { n_star } => format!("nontargeted({n_star})"),
            Strategy::NonTargetedHrCount { n_star } => format!("nontargeted_hr({n_star})"),
            Strategy::AnonymousReserve { reserve, component } => format!("anonymous_reserve({reserve},{component})"),
            Strategy::SampleReserve { components } => format!("sample_reserve{components:?}"),
            Strategy::RandomSubsetReserve { subset_size } => format!("random_subset_reserve({subset_size})"),
            Strategy::NoReserve => "no_reserve".into(),
        }
    }
}

fn factor_formula(plan: &AugmentationPlan) -> f64 {
    let k = plan.k as f64;
    let t = plan.t.unwrap_or(0) as f64;
    match &plan.strategy {
        Strategy::TargetedPerComponent { .. } | Strategy::SingleHrDominant { .. } => 2.0,
        Strategy::NonTargetedCount { .. } => 2.0 * (k + 1.0) / k,
        Strategy::NonTargetedHrCount { .. } => 2.0 * E / (E - 1.0),
        Strategy::AnonymousReserve { .. } => 4.0 * k,
        Strategy::SampleReserve { .. } => 2.0 * (t + 1.0) / t,
        Strategy::NoReserve => 2.0 * t / (t - 1.0),
        Strategy::RandomSubsetReserve { subset_size } => {
            let n = plan.n as f64;
            2.0 * (k + 1.0) / k * n / (n - *subset_size as f64)
        }
    }
}

/// The plan's factor, provided none of its assumptions failed.
pub fn guarantee_factor(plan: &AugmentationPlan) -> Result<f64> {
    if let Some(a) = plan.assumptions.iter().find(|a| a.status == AssumptionStatus::Failed) {
        return Err(Error::AssumptionUnverified(a.name.clone()));
    }
    Ok(factor_formula(plan))
}

fn require_regular(market: &MarketModel) -> Result<Assumption> {
    for t in market.used_components() {
        if market.irregular_components().contains(&t) {
            return Err(Error::IrregularComponent { index: t });
        }
    }
    Ok(Assumption::verified("components regular"))
}

/// One extra bidder from every component in use; factor 2.
pub fn plan_targeted(market: &MarketModel) -> Result<AugmentationPlan> {
    let regular = require_regular(market)?;
    let components = market.used_components();
    let k = components.len();
    Ok(AugmentationPlan::new(
        Strategy::TargetedPerComponent { components },
        k,
        market.n(),
        None,
        vec![regular],
    ))
}

/// The used component that hazard-rate dominates every other used component.
pub fn dominant_component(market: &MarketModel) -> Result<usize> {
    let used = market.used_components();
    let mut first_failure: Option<(usize, usize, f64)> = None;
    'candidates: for &a in &used {
        for &b in &used {
            if a == b {
                continue;
            }
            let cert = hr_dominance(&market.components()[a], &market.components()[b], DEFAULT_GRID)?;
            if !cert.dominates {
                first_failure.get_or_insert((a, b, cert.crossing.unwrap_or(f64::NAN)));
                continue 'candidates;
            }
        }
        return Ok(a);
    }
    let (a, b, crossing) = first_failure.expect("a single used component always dominates");
    Err(Error::NoDominantComponent { a, b, crossing })
}

/// One extra bidder from the hazard-rate dominant component; factor 2.
pub fn plan_hr_dominant(market: &MarketModel) -> Result<AugmentationPlan> {
    let regular = require_regular(market)?;
    let component = dominant_component(market)?;
    Ok(AugmentationPlan::new(
        Strategy::SingleHrDominant { component },
        market.used_components().len(),
        market.n(),
        None,
        vec![regular, Assumption::verified("hazard-rate dominant component")],
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonTargetedCounts {
    pub n_general: u64,
    pub factor_general: f64,
    pub n_hr: Option<u64>,
    pub factor_hr: f64,
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Draws from the marginal needed so that every component appears with
/// probability at least `k/(k+1)`, and the hazard-rate variant `1/p1`.
pub fn nontargeted_counts(k: usize, delta: f64, p1: Option<f64>) -> Result<NonTargetedCounts> {
    if k == 0 || !(delta > 0.0) || delta > 1.0 / k as f64 + 1e-12 {
        return Err(Error::InvalidDelta { delta, k });
    }
    let kf = k as f64;
    let n_general = ceil_count((kf.ln() + (kf + 1.0).ln()) / delta).max(1);
    let n_hr = match p1 {
        None => None,
        Some(p) if p > 0.0 && p <= 1.0 => Some(ceil_count(1.0 / p)),
        Some(p) => {
            return Err(Error::InvalidParameter {
                family: "planner",
                reason: format!("dominant-component weight {p} must lie in (0, 1]"),
            })
        }
    };
    Ok(NonTargetedCounts {
        n_general,
        factor_general: 2.0 * (kf + 1.0) / kf,
        n_hr,
        factor_hr: 2.0 * E / (E - 1.0),
    })
}

fn require_iid(market: &MarketModel) -> Result<Vec<Assumption>> {
    if !market.is_iid() {
        return Err(Error::AssumptionUnverified("identically distributed bidders".into()));
    }
    let k = market.used_components().len();
    let delta = market.delta();
    if delta > 1.0 / k as f64 + 1e-12 {
        return Err(Error::InvalidDelta { delta, k });
    }
    Ok(vec![
        Assumption::verified("identically distributed bidders"),
        Assumption::verified("every used component has weight at least delta"),
    ])
}

/// `n*` extra draws from the common mixture; factor `2(k+1)/k`.
pub fn plan_nontargeted(market: &MarketModel) -> Result<AugmentationPlan> {
    let mut assumptions = vec![require_regular(market)?];
    assumptions.extend(require_iid(market)?);
    let k = market.used_components().len();
    let counts = nontargeted_counts(k, market.delta(), None)?;
    let mut plan = AugmentationPlan::new(
        Strategy::NonTargetedCount {
            n_star: counts.n_general,
        },
        k,
        market.n(),
        None,
        assumptions,
    );
    if k == 1 {
        plan.notes
            .push("a single component is already regular; the count formula is reported unchanged".into());
    }
    Ok(plan)
}

/// `ceil(1/p1)` extra draws from the common mixture, where `p1` is the weight
/// of the hazard-rate dominant component; factor `2e/(e-1)`.
pub fn plan_nontargeted_hr(market: &MarketModel) -> Result<AugmentationPlan> {
    let mut assumptions = vec![require_regular(market)?];
    assumptions.extend(require_iid(market)?);
    let dominant = dominant_component(market)?;
    assumptions.push(Assumption::verified("hazard-rate dominant component"));
    let k = market.used_components().len();
    let p1 = market.weights()[0][dominant];
    let counts = nontargeted_counts(k, market.delta(), Some(p1))?;
    Ok(AugmentationPlan::new(
        Strategy::NonTargetedHrCount {
            n_star: counts.n_hr.expect("p1 supplied"),
        },
        k,
        market.n(),
        None,
        assumptions,
    ))
}

/// Compares second price with each component's monopoly reserve by Monte
/// Carlo (common random numbers across candidates) and keeps the best; factor `4k`.
pub fn select_anonymous_reserve(market: &MarketModel, cfg: &EstimatorConfig) -> Result<AugmentationPlan> {
    let used = market.used_components();
    let mut notes = Vec::new();
    let mut evidence = Vec::new();
    let mut best: Option<(f64, usize, RevenueEstimate)> = None;
    for &t in &used {
        let reserve = match market.components()[t].monopoly_reserve() {
            Ok(r) => r,
            Err(Error::SupremumNotAttained { cap }) => {
                notes.push(format!(
                    "component {t}: monopoly revenue still increasing at {cap}; candidate skipped"
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        let mech = MechanismSpec::anonymous_reserve(reserve)?;
        let est = estimate_mc(market, &mech, &Extras::none(), cfg)?;
        evidence.push((mech.label(), est));
        if best.as_ref().is_none_or(|b| est.mean > b.2.mean) {
            best = Some((reserve, t, est));
        }
    }
    let Some((reserve, component, _)) = best else {
        return Err(Error::AssumptionUnverified(
            "no component has an attained monopoly reserve".into(),
        ));
    };
    let mut plan = AugmentationPlan::new(
        Strategy::AnonymousReserve { reserve, component },
        used.len(),
        market.n(),
        None,
        vec![Assumption::verified("monopoly reserve attained")],
    );
    plan.notes = notes;
    plan.evidence = evidence;
    Ok(plan)
}

/// Group size per component: supplied, or `floor(n * min_i p_{i,t})`.
fn group_size(market: &MarketModel, group_sizes: Option<&[usize]>) -> Result<(usize, Assumption)> {
    let used = market.used_components();
    match group_sizes {
        Some(gs) => {
            if gs.len() != market.k() {
                return Err(Error::MalformedMarket(format!(
                    "{} group sizes for {} components",
                    gs.len(),
                    market.k()
                )));
            }
            if let Some(&t) = used.iter().find(|&&t| gs[t] > market.n()) {
                return Err(Error::MalformedMarket(format!(
                    "group size {} of component {t} exceeds n = {}",
                    gs[t],
                    market.n()
                )));
            }
            let t = used.iter().map(|&c| gs[c]).min().unwrap_or(0);
            Ok((t, Assumption::verified("group sizes supplied")))
        }
        None => {
            let n = market.n() as f64;
            let t = used
                .iter()
                .map(|&c| {
                    let min_w = market.weights().iter().map(|row| row[c]).fold(f64::INFINITY, f64::min);
                    (n * min_w + 1e-9).floor() as usize
                })
                .min()
                .unwrap_or(0);
            Ok((
                t,
                Assumption::new(
                    "group sizes supplied",
                    AssumptionStatus::Heuristic,
                    Some("derived as floor(n * min_i p_it); the guarantees assume fixed group sizes".into()),
                ),
            ))
        }
    }
}

/// Second price without extras or reserve; factor `2t/(t-1)`, needs `t >= 2`.
pub fn plan_no_reserve(market: &MarketModel, group_sizes: Option<&[usize]>) -> Result<AugmentationPlan> {
    let regular = require_regular(market)?;
    let (t, groups) = group_size(market, group_sizes)?;
    if t < 2 {
        return Err(Error::GroupTooSmall { t, needed: 2 });
    }
    Ok(AugmentationPlan::new(
        Strategy::NoReserve,
        market.used_components().len(),
        market.n(),
        Some(t),
        vec![regular, groups],
    ))
}

/// The sample-based recipes: a reserve drawn as the maximum of one fresh value
/// per component, a reserve taken from a random subset of the bidders, and no
/// reserve. Recipes whose preconditions fail are left out.
pub fn sample_based_plans(market: &MarketModel, group_sizes: Option<&[usize]>) -> Result<Vec<AugmentationPlan>> {
    let regular = require_regular(market)?;
    let (t, groups) = group_size(market, group_sizes)?;
    if t < 1 {
        return Err(Error::GroupTooSmall { t, needed: 1 });
    }
    let used = market.used_components();
    let k = used.len();
    let n = market.n();
    let mut plans = vec![AugmentationPlan::new(
        Strategy::SampleReserve { components: used.clone() },
        k,
        n,
        Some(t),
        vec![regular.clone(), groups.clone()],
    )];

    if let Ok(counts) = nontargeted_counts(k, market.delta(), None) {
        let subset = counts.n_general as usize;
        if subset < n {
            let mut plan = AugmentationPlan::new(
                Strategy::RandomSubsetReserve { subset_size: subset },
                k,
                n,
                Some(t),
                vec![
                    regular.clone(),
                    Assumption::new(
                        "subset size covers every component",
                        AssumptionStatus::Heuristic,
                        Some(format!("subset of {subset} drawn from {n} bidders")),
                    ),
                ],
            );
            plan.notes
                .push("the reserve sample is removed from the auction, costing a factor n/(n - subset)".into());
            plans.push(plan);
        }
    }
    if t >= 2 {
        plans.push(AugmentationPlan::new(
            Strategy::NoReserve,
            k,
            n,
            Some(t),
            vec![regular, groups],
        ));
    }
    Ok(plans)
}

/// Monte Carlo revenue of the plan's realization.
pub fn evaluate_plan(market: &MarketModel, plan: &AugmentationPlan, cfg: &EstimatorConfig) -> Result<RevenueEstimate> {
    let (mech, extras) = plan.realization();
    estimate_mc(market, &mech, &extras, cfg)
}
