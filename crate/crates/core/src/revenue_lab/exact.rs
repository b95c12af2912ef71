//! Deterministic revenue evaluation for independent bidders: the distribution
//! of the second-highest value, adaptive quadrature of its tail, exact sums for
//! purely discrete markets and closed-form posted-sequence revenue.

use super::{Method, RevenueEstimate};
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-6;
const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 4_000_000;
/// Tail substitution evaluates no closer than this to `u = 1`.
const TAIL_U_MAX: f64 = 1.0 - 1.0 / (1u64 << 34) as f64;

/// Probabilities that none, exactly one, or at least two values exceed `z`.
fn exceed_counts<D: ValueDistribution>(dists: &[D], z: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1, mut p2) = (1.0, 0.0, 0.0);
    for d in dists {
        let s = d.survival(z);
        let f = d.cdf(z);
        p2 += p1 * s;
        p1 = p1 * f + p0 * s;
        p0 *= f;
    }
    (p0, p1, p2)
}

/// `P(second-highest value <= z)` for independent bidders.
pub fn vickrey_revenue_cdf<D: ValueDistribution>(dists: &[D], z: f64) -> f64 {
    let (p0, p1, _) = exceed_counts(dists, z);
    (p0 + p1).min(1.0)
}

/// `P(second-highest value > z)`, computed without cancellation.
pub fn second_price_tail<D: ValueDistribution>(dists: &[D], z: f64) -> f64 {
    exceed_counts(dists, z).2
}

/// `P(max value >= r)`.
fn prob_max_at_least<D: ValueDistribution>(dists: &[D], r: f64) -> f64 {
    1.0 - dists.iter().map(|d| 1.0 - d.survival_left(r)).product::<f64>()
}

fn check_reserve(reserve: Option<f64>) -> Result<f64> {
    let r = reserve.unwrap_or(0.0);
    if r < 0.0 || !r.is_finite() {
        return Err(Error::NegativeReserve(r));
    }
    Ok(r)
}

/// Points where the tail of the second-highest value may jump or kink.
fn breakpoints<D: ValueDistribution>(dists: &[D], r: f64) -> (Vec<f64>, bool) {
    let mut pts = vec![r];
    let mut unbounded = false;
    for d in dists {
        let s = d.support();
        for x in [s.lo, s.hi] {
            if x.is_finite() && x > r {
                pts.push(x);
            }
        }
        unbounded |= !s.hi.is_finite();
        pts.extend(d.atoms().into_iter().map(|(x, _)| x).filter(|&x| x > r));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    (pts, unbounded)
}

struct Simpson<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: usize,
    converged: bool,
}

impl Simpson<'_> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    fn integrate(&mut self, a: f64, b: f64, tol: f64) -> f64 {
        let (fa, fb) = (self.eval(a), self.eval(b));
        let m = 0.5 * (a + b);
        let fm = self.eval(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.step(a, b, fa, fm, fb, whole, tol, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.eval(lm), self.eval(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        if depth >= MAX_DEPTH || self.evals >= MAX_EVALS || !diff.is_finite() {
            self.converged = false;
            return left + right + diff / 15.0;
        }
        self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Expected second-price revenue (optionally with an anonymous reserve) as
/// `r P(max >= r) + integral_r^inf P(second > z) dz`, by adaptive Simpson on
/// each smooth piece and the substitution `z = B + u/(1-u)` on an unbounded tail.
pub fn expected_revenue_quadrature<D: ValueDistribution>(
    dists: &[D],
    reserve: Option<f64>,
    tol: f64,
) -> Result<RevenueEstimate> {
    if dists.is_empty() {
        return Err(Error::InvalidMechanism("no bidders".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            family: "quadrature",
            reason: format!("tolerance {tol} must be positive"),
        });
    }
    let r = check_reserve(reserve)?;
    let (pts, unbounded) = breakpoints(dists, r);
    let pieces = pts.len() - 1 + usize::from(unbounded);
    let piece_tol = tol / (pieces.max(1) as f64 + 1.0);

    let mut total = r * prob_max_at_least(dists, r);
    for w in pts.windows(2) {
        // The tail jumps at atoms; evaluate just inside each piece.
        let (a, b) = (w[0].next_up(), w[1].next_down());
        if b <= a {
            continue;
        }
        let f = |z: f64| second_price_tail(dists, z.clamp(a, b));
        let mut s = Simpson {
            f: &f,
            evals: 0,
            converged: true,
        };
        total += s.integrate(a, b, piece_tol);
    }
    if unbounded {
        let start = *pts.last().expect("reserve is always a breakpoint");
        let g = |u: f64| {
            let u = u.min(TAIL_U_MAX);
            let one_minus = 1.0 - u;
            let z = if u == 0.0 { start.next_up() } else { start + u / one_minus };
            second_price_tail(dists, z) / (one_minus * one_minus)
        };
        let mut s = Simpson {
            f: &g,
            evals: 0,
            converged: true,
        };
        total += s.integrate(0.0, 1.0, piece_tol);
        if !s.converged || !total.is_finite() {
            return Err(Error::DivergentTail { tol });
        }
        // Power-law extrapolation of the mass beyond the last evaluated point.
        let z_max = start + TAIL_U_MAX / (1.0 - TAIL_U_MAX);
        let (t_hi, t_lo) = (second_price_tail(dists, z_max), second_price_tail(dists, z_max / 10.0));
        if t_hi > 0.0 {
            let decay = (t_lo / t_hi).log10();
            let remainder = if decay > 1.0 { z_max * t_hi / (decay - 1.0) } else { f64::INFINITY };
            if remainder > piece_tol {
                return Err(Error::DivergentTail { tol });
            }
            total += remainder;
        }
    }
    Ok(RevenueEstimate {
        mean: total,
        std_err: 0.0,
        n_samples: 0,
        method: Method::Quadrature,
    })
}

/// Exact expected second-price revenue when every bidder is purely discrete.
pub fn expected_revenue_discrete<D: ValueDistribution>(dists: &[D], reserve: Option<f64>) -> Result<RevenueEstimate> {
    if dists.is_empty() {
        return Err(Error::InvalidMechanism("no bidders".into()));
    }
    for d in dists {
        let mass: f64 = d.atoms().iter().map(|a| a.1).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                family: "discrete evaluation",
                reason: format!("atoms carry mass {mass}, not 1"),
            });
        }
    }
    let r = check_reserve(reserve)?;
    let mut pts: Vec<f64> = std::iter::once(r)
        .chain(dists.iter().flat_map(|d| d.atoms()).map(|a| a.0).filter(|&x| x > r))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // The tail is constant on each [x_j, x_{j+1}).
    let tail: f64 = pts.windows(2).map(|w| (w[1] - w[0]) * second_price_tail(dists, w[0])).sum();
    Ok(RevenueEstimate::exact(r * prob_max_at_least(dists, r) + tail))
}

/// Expected revenue of offering `prices[j]` to bidder `order[j]` in turn.
pub fn posted_sequence_revenue<D: ValueDistribution>(dists: &[D], prices: &[f64], order: &[usize]) -> Result<f64> {
    if prices.len() != order.len() {
        return Err(Error::InvalidMechanism(format!(
            "{} prices for {} offers",
            prices.len(),
            order.len()
        )));
    }
    let mut seen = vec![false; dists.len()];
    let mut reach = 1.0;
    let mut total = 0.0;
    for (&i, &p) in order.iter().zip(prices) {
        if i >= dists.len() {
            return Err(Error::IndexOutOfRange { index: i, len: dists.len() });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidMechanism(format!("bidder {i} offered twice")));
        }
        let accept = dists[i].survival_left(p);
        total += reach * accept * p;
        reach *= 1.0 - accept;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use approx::assert_abs_diff_eq;

    fn er() -> DistributionSpec {
        DistributionSpec::equal_revenue()
    }
    fn pm1() -> DistributionSpec {
        DistributionSpec::point_mass(1.0).unwrap()
    }
    fn u01() -> DistributionSpec {
        DistributionSpec::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let d = [er(), er(), er(), pm1()];
        for z in [1.0_f64, 1.5, 3.0, 40.0] {
            let oracle = (z.powi(3) + 3.0 * z * z) / (z + 1.0_f64).powi(3);
            assert_abs_diff_eq!(vickrey_revenue_cdf(&d, z), oracle, epsilon = 1e-12);
        }
        for z in [0.0_f64, 0.3, 0.99] {
            let oracle = z.powi(3) / (z + 1.0_f64).powi(3);
            assert_abs_diff_eq!(vickrey_revenue_cdf(&d, z), oracle, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(vickrey_revenue_cdf(&[u01(), u01()], 0.5), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn tail_complements_cdf() {
        let d = [er(), u01(), pm1()];
        for z in [0.2, 0.9, 1.0, 2.0, 10.0] {
            assert_abs_diff_eq!(vickrey_revenue_cdf(&d, z) + second_price_tail(&d, z), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn quadrature_instances() {
        let q = |d: &[DistributionSpec]| expected_revenue_quadrature(d, None, 1e-6).unwrap().mean;
        assert_abs_diff_eq!(q(&[er(), er(), pm1(), er()]), 0.125 + 8f64.ln(), epsilon = 1e-4);
        assert_abs_diff_eq!(q(&[pm1(), er(), pm1(), er()]), 1.5, epsilon = 1e-4);
        assert_abs_diff_eq!(q(&[pm1(), pm1(), pm1(), er()]), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q(&[u01(), u01()]), 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn quadrature_with_reserve() {
        // two U(0,1) with reserve 1/2: 5/12
        let e = expected_revenue_quadrature(&[u01(), u01()], Some(0.5), 1e-8).unwrap();
        assert_abs_diff_eq!(e.mean, 5.0 / 12.0, epsilon = 1e-7);
        assert_eq!(e.method, Method::Quadrature);
    }

    #[test]
    fn exponential_tail() {
        // E[min of two Exp(1)] = 1/2
        let e = DistributionSpec::exponential(1.0).unwrap();
        assert_abs_diff_eq!(expected_revenue_quadrature(&[e, e], None, 1e-8).unwrap().mean, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn heavy_tail_diverges() {
        // P(second > z) ~ 1/z for two bidders with tail index 1/2
        let p = DistributionSpec::power_law(0.5).unwrap();
        assert!(matches!(
            expected_revenue_quadrature(&[p, p], None, 1e-6),
            Err(Error::DivergentTail { .. })
        ));
    }

    #[test]
    fn discrete_matches_binomial_oracle() {
        let n = 10;
        let d = vec![DistributionSpec::two_point(1.0, 100.0, 0.01).unwrap(); n];
        let e = expected_revenue_discrete(&d, None).unwrap();
        let p = 0.01_f64;
        let p_two_high = 1.0 - (1.0 - p).powi(n as i32) - n as f64 * p * (1.0 - p).powi(n as i32 - 1);
        assert_abs_diff_eq!(e.mean, 1.0 + 99.0 * p_two_high, epsilon = 1e-12);
        assert_abs_diff_eq!(
            expected_revenue_discrete(&d, Some(100.0)).unwrap().mean,
            100.0 * (1.0 - (1.0 - p).powi(n as i32)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn posted_sequence_closed_form() {
        let h = 1e6;
        let r = posted_sequence_revenue(&[er(), er()], &[h, h], &[0, 1]).unwrap();
        assert_abs_diff_eq!(r, h * (2.0 * h + 1.0) / (h + 1.0).powi(2), epsilon = 1e-9);
        let r = posted_sequence_revenue(&[pm1(), er()], &[h, 1.0], &[1, 0]).unwrap();
        assert_abs_diff_eq!(r, 2.0 * h / (h + 1.0), epsilon = 1e-9);
        assert!(posted_sequence_revenue(&[pm1()], &[1.0, 1.0], &[0, 0]).is_err());
    }
}
