//! Ironing: the upper concave hull of the revenue curve `R(q) = q F^{-1}(1-q)`
//! sampled on a uniform grid of sale probabilities.
//!
//! Marginal revenue `dR/dq` equals the virtual value at price `F^{-1}(1-q)`;
//! the hull's slope is the ironed virtual value. Both are reported per grid
//! cell, so the ironed values are exactly constant across ironed intervals.

use serde::{Deserialize, Serialize};

use crate::dist::{ValueDistribution, QUANTILE_EPS};
use crate::error::{Error, Result};
use crate::mixtures::{MarketModel, Mixture};

pub const DEFAULT_IRONING_GRID: usize = 4097;
pub const MIN_IRONING_GRID: usize = 257;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IronedCurve {
    prior: Mixture,
    /// Sale probabilities, ascending from `QUANTILE_EPS` to 1.
    pub grid: Vec<f64>,
    pub raw_r: Vec<f64>,
    pub hull_r: Vec<f64>,
    /// Chord slope of the raw curve per cell (length `grid.len() - 1`).
    pub raw_phi: Vec<f64>,
    /// Hull slope per cell; nonincreasing in `q`.
    pub ironed_phi: Vec<f64>,
}

/// Irons bidder `i`'s marginal distribution.
pub fn iron(market: &MarketModel, i: usize, grid_size: usize) -> Result<IronedCurve> {
    if i >= market.n() {
        return Err(Error::IndexOutOfRange { index: i, len: market.n() });
    }
    IronedCurve::build(market.bidder(i), grid_size)
}

impl IronedCurve {
    pub fn build(prior: Mixture, grid_size: usize) -> Result<Self> {
        if prior.is_atomic() {
            return Err(Error::AtomicDistribution);
        }
        let m = grid_size.max(MIN_IRONING_GRID);
        let grid: Vec<f64> = (0..m)
            .map(|j| {
                if j + 1 == m {
                    1.0
                } else {
                    QUANTILE_EPS + (1.0 - QUANTILE_EPS) * j as f64 / (m - 1) as f64
                }
            })
            .collect();
        let raw_r = grid
            .iter()
            .map(|&q| Ok(q * prior.quantile(1.0 - q)?))
            .collect::<Result<Vec<f64>>>()?;

        let (hull_r, ironed_phi) = upper_hull_on_grid(&grid, &raw_r);
        let raw_phi = grid
            .windows(2)
            .zip(raw_r.windows(2))
            .map(|(q, y)| (y[1] - y[0]) / (q[1] - q[0]))
            .collect();
        Ok(Self {
            prior,
            grid,
            raw_r,
            hull_r,
            raw_phi,
            ironed_phi,
        })
    }

    pub fn prior(&self) -> &Mixture {
        &self.prior
    }

    fn cell_of(&self, q: f64) -> usize {
        let idx = self.grid.partition_point(|&g| g <= q);
        idx.saturating_sub(1).min(self.ironed_phi.len() - 1)
    }

    /// Ironed virtual value at a value `v`, via its sale probability.
    pub fn ironed_virtual_value(&self, v: f64) -> f64 {
        self.ironed_phi[self.cell_of(self.prior.survival(v))]
    }

    /// Largest gap between hull and raw curve.
    pub fn max_gap(&self) -> f64 {
        self.hull_r
            .iter()
            .zip(&self.raw_r)
            .map(|(h, r)| h - r)
            .fold(0.0, f64::max)
    }
}

/// Monotone-chain upper hull of `(xs, ys)` (xs ascending), evaluated back on
/// `xs`, with the slope of the hull segment covering each cell.
fn upper_hull_on_grid(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[a] - xs[o]) * (ys[j] - ys[o]) - (ys[a] - ys[o]) * (xs[j] - xs[o]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut out = vec![0.0; xs.len()];
    let mut slopes = vec![0.0; xs.len().saturating_sub(1)];
    let mut prev = f64::INFINITY;
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        // rounding in the cross product must not reorder adjacent slopes
        let slope = ((ys[b] - ys[a]) / (xs[b] - xs[a])).min(prev);
        prev = slope;
        slopes[a..b].fill(slope);
        for j in a..=b {
            out[j] = if j == a || j == b {
                ys[j]
            } else {
                ys[a] + slope * (xs[j] - xs[a])
            };
        }
    }
    if hull.len() == 1 {
        out[0] = ys[0];
    }
    (out, slopes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hull_of_concave_points_is_identity() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * (1.0 - x)).collect();
        assert_eq!(upper_hull_on_grid(&xs, &ys).0, ys);
    }

    #[test]
    fn hull_bridges_a_dip() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 1.0, 0.0, 1.0];
        let (h, slopes) = upper_hull_on_grid(&xs, &ys);
        assert_eq!(h, vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(slopes, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn regular_curve_is_not_ironed() {
        for d in [
            DistributionSpec::uniform(0.0, 1.0).unwrap(),
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::truncated_normal(1.0, 0.4).unwrap(),
        ] {
            let c = IronedCurve::build(d.into(), 1025).unwrap();
            assert!(c.max_gap() < 1e-8, "{d:?}");
            for (a, b) in c.ironed_phi.iter().zip(&c.raw_phi) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn uniform_ironed_phi_matches_closed_form() {
        // R(q) = q (1 - q) is quadratic, so chord slopes equal phi at cell midpoints.
        let d = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let c = IronedCurve::build(d.into(), 513).unwrap();
        for (j, phi) in c.ironed_phi.iter().enumerate() {
            let q_mid = 0.5 * (c.grid[j] + c.grid[j + 1]);
            let v = 1.0 - q_mid;
            assert_abs_diff_eq!(*phi, 2.0 * v - 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn atomic_prior_rejected() {
        let d = DistributionSpec::point_mass(1.0).unwrap();
        assert_eq!(IronedCurve::build(d.into(), 513), Err(Error::AtomicDistribution));
    }
}
