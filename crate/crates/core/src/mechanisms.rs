//! Single-item mechanisms: second price (plain, anonymous reserve, per-bidder
//! reserves, random-subset reserve), Myerson (regular, ironed, and the
//! coin-observing discriminating variant) and sequential posted prices.
//!
//! Ties go to the lowest bidder index everywhere. A value equal to a reserve
//! qualifies.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, SupportInterval, ValueDistribution, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::ironing::IronedCurve;
use crate::mixtures::Mixture;

pub const CRITICAL_TOL: f64 = 1e-9;
pub const CRITICAL_MAX_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// One of the market's bidders; `coin` is the component index when observed.
    Original { coin: Option<usize> },
    /// Recruited bidder drawn from a known component.
    Extra { component: usize },
    /// Recruited bidder with a fixed value.
    DeterministicExtra,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValuationProfile {
    pub values: Vec<f64>,
    pub origins: Vec<Origin>,
}

impl ValuationProfile {
    /// Original bidders with unobserved coins.
    pub fn from_values(values: Vec<f64>) -> Self {
        let origins = vec![Origin::Original { coin: None }; values.len()];
        Self { values, origins }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, value: f64, origin: Origin) {
        self.values.push(value);
        self.origins.push(origin);
    }

    pub fn clear(&mut self) {
        self.values.clear();
        self.origins.clear();
    }

    /// Component index behind bidder `i`, if known.
    pub fn component(&self, i: usize) -> Option<usize> {
        match self.origins[i] {
            Origin::Original { coin } => coin,
            Origin::Extra { component } => Some(component),
            Origin::DeterministicExtra => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub winner: Option<usize>,
    pub payments: Vec<f64>,
    pub revenue: f64,
}

impl AuctionOutcome {
    pub fn no_sale(n: usize) -> Self {
        Self {
            winner: None,
            payments: vec![0.0; n],
            revenue: 0.0,
        }
    }

    pub fn sale(n: usize, winner: usize, price: f64) -> Self {
        let mut payments = vec![0.0; n];
        payments[winner] = price;
        Self {
            winner: Some(winner),
            payments,
            revenue: price,
        }
    }

    pub fn price(&self) -> f64 {
        self.winner.map_or(0.0, |w| self.payments[w])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reserve<'a> {
    None,
    Anonymous(f64),
    PerBidder(&'a [f64]),
}

impl Reserve<'_> {
    fn for_bidder(&self, i: usize) -> f64 {
        match self {
            Reserve::None => 0.0,
            Reserve::Anonymous(r) => *r,
            Reserve::PerBidder(rs) => rs[i],
        }
    }
}

pub fn run_second_price(values: &[f64], reserve: Reserve<'_>) -> Result<AuctionOutcome> {
    if values.is_empty() {
        return Err(Error::InvalidMechanism("empty valuation profile".into()));
    }
    match reserve {
        Reserve::Anonymous(r) if r < 0.0 => return Err(Error::NegativeReserve(r)),
        Reserve::PerBidder(rs) => {
            if rs.len() != values.len() {
                return Err(Error::InvalidMechanism(format!(
                    "{} reserves for {} bidders",
                    rs.len(),
                    values.len()
                )));
            }
            if let Some(&r) = rs.iter().find(|r| **r < 0.0) {
                return Err(Error::NegativeReserve(r));
            }
        }
        _ => {}
    }

    let mut winner: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v >= reserve.for_bidder(i) && winner.is_none_or(|w| v > values[w]) {
            winner = Some(i);
        }
    }
    let Some(w) = winner else {
        return Ok(AuctionOutcome::no_sale(values.len()));
    };
    let runner_up = values
        .iter()
        .enumerate()
        .filter(|&(i, &v)| i != w && v >= reserve.for_bidder(i))
        .map(|(_, &v)| v)
        .fold(0.0_f64, f64::max);
    let price = runner_up.max(reserve.for_bidder(w));
    Ok(AuctionOutcome::sale(values.len(), w, price))
}

/// A bidder prior that can report (possibly ironed) virtual values.
pub trait VirtualValuation {
    fn support(&self) -> SupportInterval;
    fn phi(&self, v: f64) -> Result<f64>;
}

/// Virtual values at the top of a bounded support are taken as the left limit.
fn phi_with_closed_top<D: ValueDistribution + ?Sized>(d: &D, v: f64) -> Result<f64> {
    let s = d.support();
    if s.is_bounded() && v == s.hi && s.hi > s.lo {
        return d.virtual_value(v.next_down());
    }
    d.virtual_value(v)
}

impl VirtualValuation for DistributionSpec {
    fn support(&self) -> SupportInterval {
        ValueDistribution::support(self)
    }
    fn phi(&self, v: f64) -> Result<f64> {
        phi_with_closed_top(self, v)
    }
}

impl VirtualValuation for Mixture {
    fn support(&self) -> SupportInterval {
        ValueDistribution::support(self)
    }
    fn phi(&self, v: f64) -> Result<f64> {
        phi_with_closed_top(self, v)
    }
}

impl VirtualValuation for IronedCurve {
    fn support(&self) -> SupportInterval {
        ValueDistribution::support(self.prior())
    }
    fn phi(&self, v: f64) -> Result<f64> {
        Ok(self.ironed_virtual_value(v))
    }
}

impl<T: VirtualValuation + ?Sized> VirtualValuation for Arc<T> {
    fn support(&self) -> SupportInterval {
        (**self).support()
    }
    fn phi(&self, v: f64) -> Result<f64> {
        (**self).phi(v)
    }
}

impl<T: VirtualValuation + ?Sized> VirtualValuation for &T {
    fn support(&self) -> SupportInterval {
        (**self).support()
    }
    fn phi(&self, v: f64) -> Result<f64> {
        (**self).phi(v)
    }
}

/// Highest nonnegative virtual value, lowest index on ties.
fn argmax_nonnegative(phis: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &p) in phis.iter().enumerate() {
        if p >= 0.0 && best.is_none_or(|b| p > phis[b]) {
            best = Some(i);
        }
    }
    best
}

/// Myerson's auction for independent priors: allocate to the highest
/// nonnegative (ironed) virtual value, charge the critical bid.
pub fn run_myerson<P: VirtualValuation>(values: &[f64], priors: &[P]) -> Result<AuctionOutcome> {
    if values.len() != priors.len() {
        return Err(Error::InvalidMechanism(format!(
            "{} priors for {} bidders",
            priors.len(),
            values.len()
        )));
    }
    let mut phis = Vec::with_capacity(values.len());
    for (i, (&v, p)) in values.iter().zip(priors).enumerate() {
        let s = p.support();
        if !(v >= s.lo && v <= s.hi) {
            return Err(Error::ValueOutsideSupport { bidder: i, value: v });
        }
        phis.push(p.phi(v)?);
    }
    let Some(w) = argmax_nonnegative(&phis) else {
        return Ok(AuctionOutcome::no_sale(values.len()));
    };

    let best_before = phis[..w].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_after = phis[w + 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let prior = &priors[w];
    let wins = |b: f64| -> Result<bool> {
        let p = prior.phi(b)?;
        Ok(p >= 0.0 && p > best_before && p >= best_after)
    };
    let price = threshold_bid(w, prior.support().lo, values[w], wins)?;
    Ok(AuctionOutcome::sale(values.len(), w, price))
}

/// Infimum bid in `[lo, value]` at which `wins` holds, by bisection.
fn threshold_bid(bidder: usize, lo: f64, value: f64, wins: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    if !wins(value)? {
        return Err(Error::NonMonotoneAllocation { bidder });
    }
    if wins(lo)? {
        return Ok(lo);
    }
    let tol = CRITICAL_TOL * value.abs().max(1.0);
    let (mut a, mut b) = (lo, value);
    for _ in 0..CRITICAL_MAX_ITERS {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if wins(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    for k in 1..=4 {
        let probe = b + (value - b) * k as f64 / 4.0;
        if !wins(probe)? {
            return Err(Error::NonMonotoneAllocation { bidder });
        }
    }
    Ok(b)
}

/// Critical bid of `winner` under an arbitrary allocation rule, searched in
/// `[lo, values[winner]]` with all other bids held fixed.
pub fn critical_payment(
    values: &[f64],
    winner: usize,
    lo: f64,
    allocation: impl Fn(&[f64]) -> Result<Option<usize>>,
) -> Result<f64> {
    if winner >= values.len() {
        return Err(Error::IndexOutOfRange {
            index: winner,
            len: values.len(),
        });
    }
    let scratch = std::cell::RefCell::new(values.to_vec());
    let wins = |b: f64| -> Result<bool> {
        let mut bids = scratch.borrow_mut();
        bids[winner] = b;
        Ok(allocation(&bids)? == Some(winner))
    };
    threshold_bid(winner, lo, values[winner], wins)
}

/// Offers `prices[j]` to bidder `order[j]` in turn; the first acceptance ends it.
pub fn run_posted_sequence(values: &[f64], prices: &[f64], order: &[usize]) -> Result<AuctionOutcome> {
    if prices.len() != order.len() {
        return Err(Error::InvalidMechanism(format!(
            "{} prices for {} offers",
            prices.len(),
            order.len()
        )));
    }
    if order.len() > values.len() {
        return Err(Error::InvalidMechanism("more offers than bidders".into()));
    }
    if let Some(&bad) = order.iter().find(|&&i| i >= values.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: values.len(),
        });
    }
    for (&i, &p) in order.iter().zip(prices) {
        if values[i] >= p {
            return Ok(AuctionOutcome::sale(values.len(), i, p));
        }
    }
    Ok(AuctionOutcome::no_sale(values.len()))
}

/// Uses the highest value among `subset_size` randomly chosen bidders as an
/// anonymous reserve on the remaining bidders. Sampled bidders never win.
pub fn run_random_subset_reserve<R: Rng + ?Sized>(
    values: &[f64],
    subset_size: usize,
    rng: &mut R,
) -> Result<AuctionOutcome> {
    let n = values.len();
    if subset_size >= n {
        return Err(Error::InvalidMechanism(format!(
            "subset of {subset_size} leaves no bidders out of {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for j in 0..subset_size {
        let pick = rng.random_range(j..n);
        idx.swap(j, pick);
    }
    let reserve = idx[..subset_size].iter().map(|&i| values[i]).fold(0.0, f64::max);
    let mut rest = idx[subset_size..].to_vec();
    rest.sort_unstable();
    let rest_values: Vec<f64> = rest.iter().map(|&i| values[i]).collect();
    let inner = run_second_price(&rest_values, Reserve::Anonymous(reserve))?;
    Ok(match inner.winner {
        Some(w) => AuctionOutcome::sale(n, rest[w], inner.revenue),
        None => AuctionOutcome::no_sale(n),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MechanismSpec {
    SecondPrice,
    SecondPriceAnonymousReserve(f64),
    SecondPriceBidderReserves(Vec<f64>),
    /// Myerson with one regular prior per bidder position.
    MyersonRegular(Vec<Mixture>),
    MyersonIroned(Vec<Arc<IronedCurve>>),
    /// Myerson run on the component each bidder's coin selected; the profile
    /// must carry the coins.
    MyersonDiscriminating(Vec<DistributionSpec>),
    PostedSequence { prices: Vec<f64>, order: Vec<usize> },
    RandomSubsetReserve { subset_size: usize },
}

impl MechanismSpec {
    /// Myerson over regular priors; rejects priors failing the regularity certificate.
    pub fn myerson_regular(priors: Vec<Mixture>) -> Result<Self> {
        for (i, p) in priors.iter().enumerate() {
            if !p.regularity_check(DEFAULT_GRID)? {
                return Err(Error::IrregularComponent { index: i });
            }
        }
        Ok(Self::MyersonRegular(priors))
    }

    pub fn anonymous_reserve(r: f64) -> Result<Self> {
        if r < 0.0 {
            return Err(Error::NegativeReserve(r));
        }
        Ok(Self::SecondPriceAnonymousReserve(r))
    }

    pub fn label(&self) -> String {
        match self {
            Self::SecondPrice => "second_price".into(),
            Self::SecondPriceAnonymousReserve(r) => format!("second_price_reserve({r})"),
            Self::SecondPriceBidderReserves(rs) => format!("second_price_bidder_reserves({rs:?})"),
            Self::MyersonRegular(_) => "myerson".into(),
            Self::MyersonIroned(_) => "myerson_ironed".into(),
            Self::MyersonDiscriminating(_) => "myerson_discriminating".into(),
            Self::PostedSequence { prices, order } => format!("posted_sequence({prices:?},{order:?})"),
            Self::RandomSubsetReserve { subset_size } => format!("random_subset_reserve({subset_size})"),
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Self::RandomSubsetReserve { .. })
    }

    /// Runs a deterministic mechanism.
    pub fn run(&self, profile: &ValuationProfile) -> Result<AuctionOutcome> {
        let values = &profile.values;
        match self {
            Self::SecondPrice => run_second_price(values, Reserve::None),
            Self::SecondPriceAnonymousReserve(r) => run_second_price(values, Reserve::Anonymous(*r)),
            Self::SecondPriceBidderReserves(rs) => run_second_price(values, Reserve::PerBidder(rs)),
            Self::MyersonRegular(priors) => run_myerson(values, priors),
            Self::MyersonIroned(curves) => run_myerson(values, curves),
            Self::MyersonDiscriminating(components) => {
                let priors = (0..profile.len())
                    .map(|i| {
                        profile.component(i).map(|t| &components[t]).ok_or_else(|| {
                            Error::InvalidMechanism(format!("bidder {i} has no observed component"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                run_myerson(values, &priors)
            }
            Self::PostedSequence { prices, order } => run_posted_sequence(values, prices, order),
            Self::RandomSubsetReserve { .. } => Err(Error::InvalidMechanism(
                "random-subset reserve needs a random stream".into(),
            )),
        }
    }

    pub fn run_with<R: Rng + ?Sized>(&self, profile: &ValuationProfile, rng: &mut R) -> Result<AuctionOutcome> {
        match self {
            Self::RandomSubsetReserve { subset_size } => run_random_subset_reserve(&profile.values, *subset_size, rng),
            _ => self.run(profile),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn u(a: f64, b: f64) -> DistributionSpec {
        DistributionSpec::uniform(a, b).unwrap()
    }

    #[test]
    fn second_price_examples() {
        let o = run_second_price(&[0.8, 0.3], Reserve::None).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(0), 0.3));
        assert_eq!(o.payments, vec![0.3, 0.0]);
        let o = run_second_price(&[0.8, 0.3], Reserve::Anonymous(0.5)).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(0), 0.5));
        let o = run_second_price(&[0.4, 0.3], Reserve::Anonymous(0.5)).unwrap();
        assert_eq!((o.winner, o.revenue), (None, 0.0));
        assert_eq!(
            run_second_price(&[0.4], Reserve::Anonymous(-1.0)),
            Err(Error::NegativeReserve(-1.0))
        );
    }

    #[test]
    fn second_price_ties_and_bidder_reserves() {
        let o = run_second_price(&[0.5, 0.7, 0.7], Reserve::None).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(1), 0.7));
        // bidder 0 fails its reserve, bidder 1 pays max(its reserve, runner-up)
        let rs = [0.9, 0.2, 0.0];
        let o = run_second_price(&[0.8, 0.6, 0.1], Reserve::PerBidder(&rs)).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(1), 0.2));
        // value equal to the reserve qualifies
        let o = run_second_price(&[0.5], Reserve::Anonymous(0.5)).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(0), 0.5));
    }

    #[test]
    fn myerson_iid_uniform() {
        let priors = [u(0.0, 1.0), u(0.0, 1.0)];
        let o = run_myerson(&[0.8, 0.3], &priors).unwrap();
        assert_eq!(o.winner, Some(0));
        // threshold = max(phi^{-1}(0), 0.3) = 0.5
        assert_abs_diff_eq!(o.revenue, 0.5, epsilon = 1e-8);
        let o = run_myerson(&[0.8, 0.7], &priors).unwrap();
        assert_abs_diff_eq!(o.revenue, 0.7, epsilon = 1e-8);
    }

    #[test]
    fn myerson_non_iid_prefers_virtual_value() {
        // phi_0(0.6) = 0.2, phi_1(0.9) = -0.2
        let priors = [u(0.0, 1.0), u(0.0, 2.0)];
        let o = run_myerson(&[0.6, 0.9], &priors).unwrap();
        assert_eq!(o.winner, Some(0));
        assert_abs_diff_eq!(o.revenue, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn myerson_no_sale_when_all_negative() {
        let priors = [u(0.0, 1.0), u(0.0, 2.0)];
        let o = run_myerson(&[0.3, 0.6], &priors).unwrap();
        assert_eq!(o, AuctionOutcome::no_sale(2));
    }

    #[test]
    fn myerson_rejects_values_outside_support() {
        let priors = [u(0.0, 1.0)];
        assert!(matches!(run_myerson(&[1.5], &priors), Err(Error::ValueOutsideSupport { bidder: 0, .. })));
        // the support top itself is accepted
        assert_eq!(run_myerson(&[1.0], &priors).unwrap().winner, Some(0));
    }

    #[test]
    fn critical_payment_examples() {
        let sp = |b: &[f64]| Ok(run_second_price(b, Reserve::None)?.winner);
        assert_abs_diff_eq!(critical_payment(&[0.8, 0.3], 0, 0.0, sp).unwrap(), 0.3, epsilon = 1e-9);
        let spr = |b: &[f64]| Ok(run_second_price(b, Reserve::Anonymous(0.5))?.winner);
        assert_abs_diff_eq!(critical_payment(&[0.8, 0.3], 0, 0.0, spr).unwrap(), 0.5, epsilon = 1e-9);
        let priors = [u(0.0, 1.0), u(0.0, 2.0)];
        let my = |b: &[f64]| Ok(run_myerson(b, &priors)?.winner);
        let c = critical_payment(&[0.6, 0.9], 0, 0.0, my).unwrap();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c, run_myerson(&[0.6, 0.9], &priors).unwrap().revenue, epsilon = 1e-9);
    }

    #[test]
    fn critical_payment_detects_non_monotone_rule() {
        // wins only on [0.3, 0.5] and above 0.8: not upward closed
        let weird = |b: &[f64]| Ok(((0.3..=0.5).contains(&b[0]) || b[0] >= 0.8).then_some(0));
        let r = critical_payment(&[0.9], 0, 0.0, weird);
        assert_eq!(r, Err(Error::NonMonotoneAllocation { bidder: 0 }));
    }

    #[test]
    fn posted_sequence_examples() {
        let o = run_posted_sequence(&[5.0, 1.0], &[10.0, 1.0], &[0, 1]).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(1), 1.0));
        let o = run_posted_sequence(&[20.0, 1.0], &[10.0, 1.0], &[0, 1]).unwrap();
        assert_eq!((o.winner, o.revenue), (Some(0), 10.0));
        let o = run_posted_sequence(&[20.0, 1.0], &[], &[]).unwrap();
        assert_eq!(o.revenue, 0.0);
        assert!(matches!(
            run_posted_sequence(&[1.0], &[1.0], &[3]),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        ));
    }

    #[test]
    fn random_subset_reserve_never_sells_to_sampled_bidder() {
        let mut rng = crate::stream::stream(3, 0);
        let values = [0.9, 0.1, 0.5, 0.7];
        for _ in 0..200 {
            let o = run_random_subset_reserve(&values, 2, &mut rng).unwrap();
            if let Some(w) = o.winner {
                assert!(o.revenue <= values[w]);
            }
        }
        assert!(run_random_subset_reserve(&values, 4, &mut rng).is_err());
    }

    #[test]
    fn discriminating_myerson_reads_coins() {
        let comps = vec![u(0.0, 1.0), u(0.0, 2.0)];
        let m = MechanismSpec::MyersonDiscriminating(comps);
        let mut p = ValuationProfile::default();
        p.push(0.6, Origin::Original { coin: Some(0) });
        p.push(0.9, Origin::Original { coin: Some(1) });
        let o = m.run(&p).unwrap();
        assert_eq!(o.winner, Some(0));
        assert!(m.run(&ValuationProfile::from_values(vec![0.6, 0.9])).is_err());
    }

    #[test]
    fn myerson_regular_constructor_checks_regularity() {
        let mix = Mixture::new([
            (0.9, DistributionSpec::exponential(10.0).unwrap()),
            (0.1, DistributionSpec::exponential(0.1).unwrap()),
        ])
        .unwrap();
        assert!(matches!(
            MechanismSpec::myerson_regular(vec![u(0.0, 1.0).into(), mix]),
            Err(Error::IrregularComponent { index: 1 })
        ));
    }
}
