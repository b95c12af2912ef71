//! Parameterized value distributions and their auction-theoretic views:
//! hazard rate, virtual value, revenue curve, monopoly reserve, and the
//! grid certificates for regularity and hazard-rate dominance.
//!
//! Conventions:
//! - `cdf` is right-continuous; `survival_left(x)` is `P(V >= x)`, so a
//!   posted price sitting on an atom sells the atom.
//! - Grid work is done in quantile space on `(QUANTILE_EPS, 1 - QUANTILE_EPS)`
//!   which handles unbounded supports without choosing a truncation point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUANTILE_EPS: f64 = 1e-9;
pub const MONOTONE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 10_001;

/// Closed support interval `[lo, hi]`; `hi` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SupportInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0) || !(lo <= hi) {
            return Err(Error::InvalidParameter {
                family: "support",
                reason: format!("need 0 <= lo <= hi, got [{lo}, {hi}]"),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership in `[lo, hi)`, the region where hazard rates are finite.
    pub fn contains_half_open(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    pub fn intersect(&self, other: &SupportInterval) -> Option<SupportInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (hi > lo).then_some(SupportInterval { lo, hi })
    }
}

/// Anything with a cdf over non-negative values.
///
/// Implementors provide the primitive evaluations; the derived auction
/// quantities come as provided methods. Implementations override `hazard` and
/// `virtual_value` where a closed form is more accurate than the ratio.
pub trait ValueDistribution {
    fn support(&self) -> SupportInterval;

    fn cdf(&self, x: f64) -> f64;

    /// `1 - F(x)`, computed without cancellation where possible.
    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `P(V >= x) = 1 - F(x-)`.
    fn survival_left(&self, x: f64) -> f64;

    /// Point masses as `(location, mass)`, sorted by location.
    fn atoms(&self) -> Vec<(f64, f64)>;

    /// Density on the support; fails for distributions with atoms.
    fn pdf(&self, x: f64) -> Result<f64>;

    /// Generalized inverse `inf { x : F(x) >= q }`.
    fn quantile(&self, q: f64) -> Result<f64>;

    fn is_atomic(&self) -> bool {
        !self.atoms().is_empty()
    }

    fn hazard(&self, x: f64) -> Result<f64> {
        let f = self.checked_density(x)?;
        Ok(f / self.survival(x))
    }

    fn virtual_value(&self, x: f64) -> Result<f64> {
        let f = self.checked_density(x)?;
        Ok(x - self.survival(x) / f)
    }

    fn hazard_and_virtual(&self, x: f64) -> Result<(f64, f64)> {
        Ok((self.hazard(x)?, self.virtual_value(x)?))
    }

    /// Density at `x` after checking that hazard-rate quantities make sense there.
    fn checked_density(&self, x: f64) -> Result<f64> {
        if self.is_atomic() {
            return Err(Error::AtomicDistribution);
        }
        let s = self.support();
        if !s.contains_half_open(x) {
            return Err(Error::OutsideSupport { x, lo: s.lo, hi: s.hi });
        }
        self.pdf(x)
    }

    /// `R(q) = q * F^{-1}(1 - q)` for a sale probability `q`.
    fn revenue_curve_point(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter {
                family: "revenue_curve",
                reason: format!("sale probability must lie in (0, 1), got {q}"),
            });
        }
        Ok(q * self.quantile(1.0 - q)?)
    }

    /// Expected revenue of a take-it-or-leave-it price against one bidder.
    fn posted_price_revenue(&self, price: f64) -> f64 {
        price * self.survival_left(price)
    }

    /// Maximizer of `r * P(V >= r)`.
    fn monopoly_reserve(&self) -> Result<f64> {
        monopoly_reserve_search(self)
    }

    /// Grid certificate that the virtual value is nondecreasing.
    fn regularity_check(&self, grid_size: usize) -> Result<bool> {
        if self.is_atomic() {
            return Err(Error::AtomicDistribution);
        }
        let grid_size = grid_size.max(100);
        let mut prev: Option<f64> = None;
        for q in quantile_grid(QUANTILE_EPS, 1.0 - QUANTILE_EPS, grid_size) {
            let x = self.quantile(q)?;
            let phi = self.virtual_value(x)?;
            if let Some(p) = prev {
                if phi - p < -MONOTONE_TOL {
                    return Ok(false);
                }
            }
            prev = Some(phi);
        }
        Ok(true)
    }
}

/// `count` evenly spaced points covering `[a, b]`.
pub(crate) fn quantile_grid(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = if count > 1 { (b - a) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(move |i| if i + 1 == count { b } else { a + step * i as f64 })
}

/// A family plus its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    Exponential { lambda: f64 },
    /// `F(x) = 1 - x^{-alpha}` on `[1, inf)`.
    PowerLaw { alpha: f64 },
    /// `F(x) = 1 - 1/(x + 1)` on `[0, inf)`.
    EqualRevenue,
    /// Normal(mu, sigma) conditioned on `[0, inf)`.
    TruncatedNormal { mu: f64, sigma: f64 },
    PointMass { value: f64 },
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
}

impl DistributionSpec {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::Uniform { a, b }.validated()
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::Exponential { lambda }.validated()
    }

    pub fn power_law(alpha: f64) -> Result<Self> {
        Self::PowerLaw { alpha }.validated()
    }

    pub fn equal_revenue() -> Self {
        Self::EqualRevenue
    }

    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::TruncatedNormal { mu, sigma }.validated()
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::PointMass { value }.validated()
    }

    pub fn two_point(lo: f64, hi: f64, p_hi: f64) -> Result<Self> {
        Self::TwoPoint { lo, hi, p_hi }.validated()
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::PowerLaw { .. } => "power_law",
            Self::EqualRevenue => "equal_revenue",
            Self::TruncatedNormal { .. } => "truncated_normal",
            Self::PointMass { .. } => "point_mass",
            Self::TwoPoint { .. } => "two_point",
        }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidParameter {
                family: self.family_name(),
                reason,
            })
        };
        match *self {
            Self::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a >= 0.0 && b > a) {
                    return bad(format!("need 0 <= a < b finite, got a = {a}, b = {b}"));
                }
            }
            Self::Exponential { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad(format!("need lambda > 0, got {lambda}"));
                }
            }
            Self::PowerLaw { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("need alpha > 0, got {alpha}"));
                }
            }
            Self::EqualRevenue => {}
            Self::TruncatedNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("need finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"));
                }
            }
            Self::PointMass { value } => {
                if !(value >= 0.0 && value.is_finite()) {
                    return bad(format!("need a finite value >= 0, got {value}"));
                }
            }
            Self::TwoPoint { lo, hi, p_hi } => {
                if !(lo >= 0.0 && hi.is_finite() && lo < hi) {
                    return bad(format!("need 0 <= lo < hi, got lo = {lo}, hi = {hi}"));
                }
                if !(p_hi > 0.0 && p_hi < 1.0) {
                    return bad(format!("need 0 < p_hi < 1, got {p_hi}"));
                }
            }
        }
        Ok(())
    }

    /// Inverse-transform draw from a uniform `u` in `(0, 1)`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => a + u * (b - a),
            Self::Exponential { lambda } => -(-u).ln_1p() / lambda,
            Self::PowerLaw { alpha } => (1.0 - u).powf(-1.0 / alpha),
            Self::EqualRevenue => u / (1.0 - u),
            Self::TruncatedNormal { .. } => self.quantile(u).unwrap_or(0.0),
            Self::PointMass { value } => value,
            Self::TwoPoint { lo, hi, p_hi } => {
                if u > 1.0 - p_hi {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(crate::stream::open01(rng))
    }
}

/// Standard normal survival `P(Z > z)`.
fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `pdf(z) / sf(z)` for the standard normal, stable deep in the right tail.
fn normal_inverse_mills(z: f64) -> f64 {
    if z < 30.0 {
        normal_pdf(z) / normal_sf(z)
    } else {
        let z2 = z * z;
        z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))
    }
}

impl ValueDistribution for DistributionSpec {
    fn support(&self) -> SupportInterval {
        let (lo, hi) = match *self {
            Self::Uniform { a, b } => (a, b),
            Self::Exponential { .. } | Self::EqualRevenue | Self::TruncatedNormal { .. } => {
                (0.0, f64::INFINITY)
            }
            Self::PowerLaw { .. } => (1.0, f64::INFINITY),
            Self::PointMass { value } => (value, value),
            Self::TwoPoint { lo, hi, .. } => (lo, hi),
        };
        SupportInterval { lo, hi }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            Self::PowerLaw { alpha } => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-alpha)
                }
            }
            Self::EqualRevenue => {
                if x <= 0.0 {
                    0.0
                } else {
                    x / (x + 1.0)
                }
            }
            Self::TruncatedNormal { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - self.survival(x)
                }
            }
            Self::PointMass { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::TwoPoint { lo, hi, p_hi } => {
                if x >= hi {
                    1.0
                } else if x >= lo {
                    1.0 - p_hi
                } else {
                    0.0
                }
            }
        }
    }

    fn survival(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { lambda } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            Self::PowerLaw { alpha } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-alpha)
                }
            }
            Self::EqualRevenue => {
                if x <= 0.0 {
                    1.0
                } else {
                    1.0 / (x + 1.0)
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal_sf((x - mu) / sigma) / normal_sf(-mu / sigma)
                }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    fn survival_left(&self, x: f64) -> f64 {
        match *self {
            Self::PointMass { value } => {
                if x <= value {
                    1.0
                } else {
                    0.0
                }
            }
            Self::TwoPoint { lo, hi, p_hi } => {
                if x <= lo {
                    1.0
                } else if x <= hi {
                    p_hi
                } else {
                    0.0
                }
            }
            _ => self.survival(x),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            Self::PointMass { value } => vec![(value, 1.0)],
            Self::TwoPoint { lo, hi, p_hi } => vec![(lo, 1.0 - p_hi), (hi, p_hi)],
            _ => Vec::new(),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Self::PointMass { .. } | Self::TwoPoint { .. })
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        let s = self.support();
        let inside = x >= s.lo && x <= s.hi;
        Ok(match *self {
            Self::Uniform { a, b } => {
                if inside {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Exponential { lambda } => {
                if inside {
                    lambda * (-lambda * x).exp()
                } else {
                    0.0
                }
            }
            Self::PowerLaw { alpha } => {
                if inside {
                    alpha * x.powf(-alpha - 1.0)
                } else {
                    0.0
                }
            }
            Self::EqualRevenue => {
                if inside {
                    1.0 / ((x + 1.0) * (x + 1.0))
                } else {
                    0.0
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if inside {
                    normal_pdf((x - mu) / sigma) / (sigma * normal_sf(-mu / sigma))
                } else {
                    0.0
                }
            }
            Self::PointMass { .. } | Self::TwoPoint { .. } => return Err(Error::AtomicDistribution),
        })
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter {
                family: "quantile",
                reason: format!("probability must lie in [0, 1], got {q}"),
            });
        }
        let unbounded = |q: f64| Err(Error::UnboundedQuantile { q });
        match *self {
            Self::Uniform { a, b } => Ok(a + q * (b - a)),
            Self::Exponential { lambda } => {
                if q == 1.0 {
                    unbounded(q)
                } else {
                    Ok(-(-q).ln_1p() / lambda)
                }
            }
            Self::PowerLaw { alpha } => {
                if q == 1.0 {
                    unbounded(q)
                } else {
                    Ok((1.0 - q).powf(-1.0 / alpha))
                }
            }
            Self::EqualRevenue => {
                if q == 1.0 {
                    unbounded(q)
                } else {
                    Ok(q / (1.0 - q))
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if q == 1.0 {
                    return unbounded(q);
                }
                if q == 0.0 {
                    return Ok(0.0);
                }
                Ok(truncated_normal_quantile(self, q, mu, sigma))
            }
            Self::PointMass { value } => Ok(value),
            Self::TwoPoint { lo, hi, p_hi } => Ok(if q <= 1.0 - p_hi { lo } else { hi }),
        }
    }

    fn hazard(&self, x: f64) -> Result<f64> {
        self.checked_density(x)?;
        Ok(match *self {
            Self::Uniform { b, .. } => 1.0 / (b - x),
            Self::Exponential { lambda } => lambda,
            Self::PowerLaw { alpha } => alpha / x,
            Self::EqualRevenue => 1.0 / (x + 1.0),
            Self::TruncatedNormal { mu, sigma } => normal_inverse_mills((x - mu) / sigma) / sigma,
            Self::PointMass { .. } | Self::TwoPoint { .. } => unreachable!("rejected by checked_density"),
        })
    }

    fn virtual_value(&self, x: f64) -> Result<f64> {
        self.checked_density(x)?;
        Ok(match *self {
            Self::Uniform { b, .. } => 2.0 * x - b,
            Self::Exponential { lambda } => x - 1.0 / lambda,
            Self::PowerLaw { alpha } => x * (1.0 - 1.0 / alpha),
            Self::EqualRevenue => -1.0,
            Self::TruncatedNormal { .. } => x - 1.0 / self.hazard(x)?,
            Self::PointMass { .. } | Self::TwoPoint { .. } => unreachable!("rejected by checked_density"),
        })
    }
}

/// Bisection on the cdf, switching to the survival function in the upper
/// half so tail quantiles keep full relative precision.
fn truncated_normal_quantile(d: &DistributionSpec, q: f64, mu: f64, sigma: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = mu.max(0.0) + 10.0 * sigma;
    let upper_tail = q > 0.5;
    let target_sf = 1.0 - q;
    let reached = |x: f64| {
        if upper_tail {
            d.survival(x) <= target_sf
        } else {
            d.cdf(x) >= q
        }
    };
    while !reached(hi) {
        hi = 2.0 * hi + sigma;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    hi
}

fn monopoly_reserve_search<D: ValueDistribution + ?Sized>(d: &D) -> Result<f64> {
    const COARSE: usize = 2048;
    const REL_TOL: f64 = 1e-9;
    let support = d.support();
    let objective = |r: f64| d.posted_price_revenue(r);

    let mut candidates: Vec<(f64, f64)> = d
        .atoms()
        .into_iter()
        .map(|(x, _)| (x, objective(x)))
        .collect();

    let purely_atomic = {
        let mass: f64 = d.atoms().iter().map(|(_, m)| m).sum();
        mass >= 1.0 - 1e-12
    };

    if !purely_atomic {
        let cap_q = 1.0 - QUANTILE_EPS;
        let mut us: Vec<f64> = (0..COARSE).map(|j| j as f64 / COARSE as f64).collect();
        let mut s = 3.5;
        while s <= 9.0 + 1e-12 {
            us.push(1.0 - 10f64.powf(-s));
            s += 0.5;
        }
        us.push(cap_q);
        us.sort_by(f64::total_cmp);
        us.dedup();
        let mut grid: Vec<f64> = us.iter().map(|&u| d.quantile(u)).collect::<Result<_>>()?;
        grid.dedup();

        let (best, best_val) = grid
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, objective(r)))
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });

        let last = grid.len() - 1;
        if !support.is_bounded() && best == last && last > 0 && best_val > objective(grid[last - 1]) {
            return Err(Error::SupremumNotAttained { cap: grid[last] });
        }

        let a = grid[best.saturating_sub(1)];
        let b = grid[(best + 1).min(last)];
        let r = golden_section_max(objective, a, b, REL_TOL);
        let refined = if objective(r) >= best_val { r } else { grid[best] };
        candidates.push((refined, objective(refined)));
    }

    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let best = candidates
        .iter()
        .fold(None::<(f64, f64)>, |acc, &(x, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((x, v)),
        })
        .expect("at least one candidate");
    Ok(best.0)
}

pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (0.5 * (a + b)).abs().max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Outcome of a hazard-rate dominance scan of `first` over `second`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HrCertificate {
    pub dominates: bool,
    /// Where `h_first - h_second` changes sign, or the first violating grid
    /// point if there is no sign change. `None` when dominance holds.
    pub crossing: Option<f64>,
}

/// Checks `h_first(x) <= h_second(x) + tol` on a grid spaced in `first`'s
/// quantiles over the support intersection.
pub fn hr_dominance<A, B>(first: &A, second: &B, grid_size: usize) -> Result<HrCertificate>
where
    A: ValueDistribution + ?Sized,
    B: ValueDistribution + ?Sized,
{
    if first.is_atomic() || second.is_atomic() {
        return Err(Error::AtomicDistribution);
    }
    let common = first
        .support()
        .intersect(&second.support())
        .ok_or(Error::DisjointSupports)?;
    let grid_size = grid_size.max(2);

    let qa = first.cdf(common.lo).clamp(0.0, 1.0 - QUANTILE_EPS);
    let qb = if common.hi.is_finite() { first.cdf(common.hi) } else { 1.0 };
    let qb = qb.min(1.0 - QUANTILE_EPS).max(qa);

    let mut xs: Vec<f64> = Vec::with_capacity(grid_size + 1);
    for q in quantile_grid(qa, qb, grid_size) {
        let x = first.quantile(q)?.max(common.lo);
        if x < common.hi {
            xs.push(x);
        }
    }
    if common.hi.is_finite() {
        let edge = common.hi - common.width() * 1e-9;
        if xs.last().is_none_or(|&last| last < edge) {
            xs.push(edge);
        }
    }

    let mut diffs = Vec::with_capacity(xs.len());
    for &x in &xs {
        diffs.push(first.hazard(x)? - second.hazard(x)? - MONOTONE_TOL);
    }

    let Some(first_bad) = diffs.iter().position(|&d| d > 0.0) else {
        return Ok(HrCertificate {
            dominates: true,
            crossing: None,
        });
    };
    let interpolate = |i: usize, j: usize| {
        let (x0, x1, d0, d1) = (xs[i], xs[j], diffs[i], diffs[j]);
        if d1 == d0 {
            x1
        } else {
            x0 + (x1 - x0) * (-d0) / (d1 - d0)
        }
    };
    let crossing = if first_bad > 0 {
        interpolate(first_bad - 1, first_bad)
    } else {
        match diffs.iter().position(|&d| d <= 0.0) {
            Some(j) => interpolate(j - 1, j),
            None => xs[0],
        }
    };
    Ok(HrCertificate {
        dominates: false,
        crossing: Some(crossing),
    })
}

/// `first` hazard-rate dominates `second`: `h_first <= h_second` on the
/// shared support.
pub fn hr_dominates<A, B>(first: &A, second: &B, grid_size: usize) -> Result<bool>
where
    A: ValueDistribution + ?Sized,
    B: ValueDistribution + ?Sized,
{
    Ok(hr_dominance(first, second, grid_size)?.dominates)
}
