//! Mixtures of regular components and the market of bidders drawing from them.
//!
//! Each bidder `i` first flips a `k`-sided coin with biases `p[i][t]`, then
//! draws a value from component `G_t`. The coin is kept alongside the value so
//! benchmarks that observe it can be evaluated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, SupportInterval, ValueDistribution, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::stream::open01;

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;

/// A finite convex combination of distribution specs. Zero-weight parts are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    parts: Vec<(f64, DistributionSpec)>,
}

impl Mixture {
    pub fn new(parts: impl IntoIterator<Item = (f64, DistributionSpec)>) -> Result<Self> {
        let parts: Vec<_> = parts.into_iter().collect();
        let mut sum = 0.0;
        for (col, (w, d)) in parts.iter().enumerate() {
            if *w < 0.0 {
                return Err(Error::NegativeWeight { row: 0, col, value: *w });
            }
            d.validate()?;
            sum += w;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::WeightRowSum { row: 0, sum });
        }
        Ok(Self {
            parts: parts.into_iter().filter(|(w, _)| *w > 0.0).collect(),
        })
    }

    pub fn parts(&self) -> &[(f64, DistributionSpec)] {
        &self.parts
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let u = open01(rng);
        let mut acc = 0.0;
        let mut chosen = self.parts.len() - 1;
        for (t, (w, _)) in self.parts.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = t;
                break;
            }
        }
        (chosen, self.parts[chosen].1.sample(rng))
    }
}

impl From<DistributionSpec> for Mixture {
    fn from(d: DistributionSpec) -> Self {
        Self { parts: vec![(1.0, d)] }
    }
}

impl ValueDistribution for Mixture {
    fn support(&self) -> SupportInterval {
        let lo = self.parts.iter().map(|(_, d)| d.support().lo).fold(f64::INFINITY, f64::min);
        let hi = self.parts.iter().map(|(_, d)| d.support().hi).fold(0.0, f64::max);
        SupportInterval { lo, hi }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.parts.iter().map(|(w, d)| w * d.cdf(x)).sum()
    }

    fn survival(&self, x: f64) -> f64 {
        self.parts.iter().map(|(w, d)| w * d.survival(x)).sum()
    }

    fn survival_left(&self, x: f64) -> f64 {
        self.parts.iter().map(|(w, d)| w * d.survival_left(x)).sum()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (w, d) in &self.parts {
            for (x, m) in d.atoms() {
                match out.iter_mut().find(|(y, _)| *y == x) {
                    Some(slot) => slot.1 += w * m,
                    None => out.push((x, w * m)),
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    fn is_atomic(&self) -> bool {
        self.parts.iter().any(|(_, d)| d.is_atomic())
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        self.parts.iter().map(|(w, d)| Ok(w * d.pdf(x)?)).sum()
    }

    fn quantile(&self, q: f64) -> Result<f64> {
        if let [(_, only)] = self.parts.as_slice() {
            return only.quantile(q);
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter {
                family: "quantile",
                reason: format!("probability must lie in [0, 1], got {q}"),
            });
        }
        let support = self.support();
        if q == 0.0 {
            return Ok(support.lo);
        }
        if q == 1.0 {
            return if support.is_bounded() {
                Ok(support.hi)
            } else {
                Err(Error::UnboundedQuantile { q })
            };
        }
        // The mixture quantile lies between the extreme component quantiles.
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for (_, d) in &self.parts {
            let x = d.quantile(q)?;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if self.cdf(lo) >= q {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
        }
        // Snap onto an atom the bisection converged to from above.
        for (a, _) in self.atoms() {
            if a >= lo && a <= hi && self.cdf(a) >= q {
                return Ok(a);
            }
        }
        Ok(hi)
    }
}

/// `n` bidders over `k` shared components with per-bidder mixture weights.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketModel {
    components: Vec<DistributionSpec>,
    weights: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    delta: f64,
    iid: bool,
    irregular: Vec<usize>,
}

/// Validates and assembles a market.
///
/// Components failing the regularity certificate (including atomic ones) are
/// recorded in [`MarketModel::irregular_components`] rather than rejected.
pub fn build_market(components: Vec<DistributionSpec>, weights: Vec<Vec<f64>>) -> Result<MarketModel> {
    let k = components.len();
    if k == 0 {
        return Err(Error::MalformedMarket("at least one component is required".into()));
    }
    if weights.is_empty() {
        return Err(Error::MalformedMarket("at least one bidder is required".into()));
    }
    for d in &components {
        d.validate()?;
    }
    for (row, ws) in weights.iter().enumerate() {
        if ws.len() != k {
            return Err(Error::MalformedMarket(format!(
                "weights row {row} has {} entries for {k} components",
                ws.len()
            )));
        }
        for (col, &w) in ws.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(Error::NegativeWeight { row, col, value: w });
            }
        }
        let sum: f64 = ws.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::WeightRowSum { row, sum });
        }
    }

    let delta = weights
        .iter()
        .flatten()
        .copied()
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let iid = weights
        .iter()
        .all(|row| row.iter().zip(&weights[0]).all(|(a, b)| (a - b).abs() <= ROW_SUM_TOL));
    let irregular = components
        .iter()
        .enumerate()
        .filter(|(_, d)| !matches!(d.regularity_check(DEFAULT_GRID), Ok(true)))
        .map(|(t, _)| t)
        .collect();
    let cumulative = weights
        .iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect()
        })
        .collect();

    Ok(MarketModel {
        components,
        weights,
        cumulative,
        delta,
        iid,
        irregular,
    })
}

impl MarketModel {
    /// `n` identical bidders sharing one weight row.
    pub fn iid(components: Vec<DistributionSpec>, row: Vec<f64>, n: usize) -> Result<Self> {
        build_market(components, vec![row; n])
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[DistributionSpec] {
        &self.components
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Smallest positive mixture probability.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_iid(&self) -> bool {
        self.iid
    }

    pub fn irregular_components(&self) -> &[usize] {
        &self.irregular
    }

    pub fn all_components_regular(&self) -> bool {
        self.irregular.is_empty()
    }

    /// Components carrying positive weight for some bidder.
    pub fn used_components(&self) -> Vec<usize> {
        (0..self.k())
            .filter(|&t| self.weights.iter().any(|row| row[t] > 0.0))
            .collect()
    }

    pub fn bidder(&self, i: usize) -> Mixture {
        Mixture {
            parts: self.weights[i]
                .iter()
                .zip(&self.components)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, d)| (*w, *d))
                .collect(),
        }
    }

    pub fn mixture_cdf(&self, i: usize, x: f64) -> f64 {
        self.weights[i]
            .iter()
            .zip(&self.components)
            .map(|(w, d)| w * d.cdf(x))
            .sum()
    }

    pub fn mixture_pdf(&self, i: usize, x: f64) -> Result<f64> {
        self.weights[i]
            .iter()
            .zip(&self.components)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, d)| Ok(w * d.pdf(x)?))
            .sum()
    }

    /// Draws bidder `i`'s coin, then a value from the selected component.
    pub fn sample_two_stage<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> (usize, f64) {
        let t = self.sample_coin(i, rng);
        (t, self.components[t].sample(rng))
    }

    pub fn sample_coin<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let u = open01(rng);
        let cum = &self.cumulative[i];
        cum.iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| cum.iter().rposition(|_| true).unwrap())
    }

    /// Number of index profiles `k^n`, as a float so it cannot overflow.
    pub fn profile_space_size(&self) -> f64 {
        (self.k() as f64).powi(self.n() as i32)
    }

    pub fn enumerate_profiles(&self, cap: usize) -> Result<ProfileIter<'_>> {
        let size = self.profile_space_size();
        if size > cap as f64 {
            return Err(Error::ProfileSpaceTooLarge { size, cap });
        }
        Ok(ProfileIter {
            market: self,
            next: Some(vec![0; self.n()]),
        })
    }

    /// The product distribution `G(q)` for an index profile.
    pub fn conditional(&self, indices: &[usize]) -> Vec<DistributionSpec> {
        indices.iter().map(|&t| self.components[t]).collect()
    }

    /// The market where every bidder is pinned to the given component.
    pub fn pinned(&self, indices: &[usize]) -> Result<MarketModel> {
        let weights = indices
            .iter()
            .map(|&t| {
                let mut row = vec![0.0; self.k()];
                row[t] = 1.0;
                row
            })
            .collect();
        build_market(self.components.clone(), weights)
    }
}

/// One outcome of all `n` coins.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexProfile {
    pub indices: Vec<usize>,
    pub weight: f64,
}

impl IndexProfile {
    /// Number of distinct components appearing in the profile.
    pub fn distinct_count(&self) -> usize {
        let mut seen = self.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn distinct_components(&self) -> Vec<usize> {
        let mut seen = self.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        seen
    }
}

/// Lexicographic walk over `[0, k)^n`.
pub struct ProfileIter<'a> {
    market: &'a MarketModel,
    next: Option<Vec<usize>>,
}

impl Iterator for ProfileIter<'_> {
    type Item = IndexProfile;

    fn next(&mut self) -> Option<IndexProfile> {
        let indices = self.next.take()?;
        let weight = indices
            .iter()
            .enumerate()
            .map(|(i, &t)| self.market.weights[i][t])
            .product();

        let mut succ = indices.clone();
        let k = self.market.k();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < k {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(IndexProfile { indices, weight })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn u(a: f64, b: f64) -> DistributionSpec {
        DistributionSpec::uniform(a, b).unwrap()
    }
    fn exp(l: f64) -> DistributionSpec {
        DistributionSpec::exponential(l).unwrap()
    }

    #[test]
    fn build_market_examples() {
        let m = build_market(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![vec![0.5, 0.5]; 2]).unwrap();
        assert!(m.is_iid());
        assert_eq!(m.delta(), 0.5);
        let m = build_market(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap();
        assert!(!m.is_iid());
        assert_eq!(m.delta(), 0.1);
        let e = build_market(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![vec![0.6, 0.5]]).unwrap_err();
        assert!(matches!(e, Error::WeightRowSum { row: 0, .. }));
        let e = build_market(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![vec![1.2, -0.2]]).unwrap_err();
        assert!(matches!(e, Error::NegativeWeight { row: 0, col: 1, .. }));
        assert!(build_market(vec![u(0.0, 1.0)], vec![vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn irregular_components_are_flagged_not_fatal() {
        let tp = DistributionSpec::two_point(1.0, 100.0, 0.01).unwrap();
        let m = build_market(vec![u(0.0, 1.0), tp], vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(m.irregular_components(), &[1]);
        assert!(!m.all_components_regular());
    }

    #[test]
    fn mixture_cdf_examples() {
        let m = build_market(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(m.mixture_cdf(0, 1.0), 0.75);
        let mixed = build_market(
            vec![DistributionSpec::point_mass(1.0).unwrap(), DistributionSpec::EqualRevenue],
            vec![vec![0.5, 0.5]],
        )
        .unwrap();
        assert_eq!(mixed.mixture_cdf(0, 1.0), 0.75);
        let degenerate = build_market(vec![exp(2.0), u(0.0, 2.0)], vec![vec![1.0, 0.0]]).unwrap();
        for x in [0.0, 0.3, 1.7, 9.0] {
            assert_eq!(degenerate.mixture_cdf(0, x), exp(2.0).cdf(x));
        }
    }

    #[test]
    fn mixture_regularity() {
        let mix = Mixture::new([(0.9, exp(10.0)), (0.1, exp(0.1))]).unwrap();
        assert!(!mix.regularity_check(DEFAULT_GRID).unwrap());
        let mono = Mixture::from(exp(1.0));
        assert!(mono.regularity_check(DEFAULT_GRID).unwrap());
    }

    #[test]
    fn mixture_quantile_snaps_to_atoms() {
        let mix = Mixture::new([(0.5, DistributionSpec::point_mass(1.0).unwrap()), (0.5, DistributionSpec::EqualRevenue)])
            .unwrap();
        // F(1-) = 0.25, F(1) = 0.75
        assert_eq!(mix.quantile(0.5).unwrap(), 1.0);
        assert_eq!(mix.quantile(0.75).unwrap(), 1.0);
        let x = mix.quantile(0.2).unwrap();
        assert_abs_diff_eq!(mix.cdf(x), 0.2, epsilon = 1e-12);
        assert!(mix.quantile(1.0).is_err());
    }

    #[test]
    fn enumerate_profiles_examples() {
        let m = MarketModel::iid(vec![u(0.0, 1.0), u(0.0, 2.0)], vec![0.5, 0.5], 2).unwrap();
        let ps: Vec<_> = m.enumerate_profiles(DEFAULT_PROFILE_CAP).unwrap().collect();
        assert_eq!(ps.len(), 4);
        assert!(ps.iter().all(|p| p.weight == 0.25));
        assert_eq!(ps.iter().map(|p| p.weight).sum::<f64>(), 1.0);
        assert_eq!(ps[0].indices, vec![0, 0]);
        assert_eq!(ps[0].distinct_count(), 1);
        assert_eq!(ps[1].indices, vec![0, 1]);
        assert_eq!(ps[1].distinct_count(), 2);

        let big = MarketModel::iid(vec![u(0.0, 1.0), u(0.0, 2.0), exp(1.0)], vec![0.2, 0.3, 0.5], 30).unwrap();
        assert!(matches!(
            big.enumerate_profiles(DEFAULT_PROFILE_CAP),
            Err(Error::ProfileSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn profile_weights_sum_to_one() {
        let m = build_market(
            vec![u(0.0, 1.0), exp(1.0), exp(3.0)],
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.15, 0.8, 0.05]],
        )
        .unwrap();
        let ps: Vec<_> = m.enumerate_profiles(1000).unwrap().collect();
        assert_eq!(ps.len(), 27);
        let total: f64 = ps.iter().map(|p| p.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // averaging the per-profile component cdf recovers the marginal mixture
        for i in 0..3 {
            let x = 0.8;
            let avg: f64 = ps.iter().map(|p| p.weight * m.components()[p.indices[i]].cdf(x)).sum();
            assert_abs_diff_eq!(avg, m.mixture_cdf(i, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn two_stage_sampling_is_deterministic() {
        let m = build_market(vec![u(0.0, 1.0), exp(2.0)], vec![vec![0.3, 0.7]]).unwrap();
        let mut a = crate::stream::stream(5, 1);
        let mut b = crate::stream::stream(5, 1);
        for _ in 0..100 {
            let (ta, va) = m.sample_two_stage(0, &mut a);
            let (tb, vb) = m.sample_two_stage(0, &mut b);
            assert_eq!((ta, va.to_bits()), (tb, vb.to_bits()));
        }
    }

    #[test]
    fn zero_weight_components_never_drawn() {
        let m = build_market(vec![u(0.0, 1.0), exp(2.0), u(5.0, 6.0)], vec![vec![0.5, 0.0, 0.5]]).unwrap();
        let mut rng = crate::stream::stream(1, 0);
        for _ in 0..10_000 {
            assert_ne!(m.sample_coin(0, &mut rng), 1);
        }
    }
}
