//! The coin-observing benchmark `sum_q p(q) OPT(G(q))`.

use super::engine::{run_streams, Moments};
use super::exact::posted_sequence_revenue;
use super::mc::{draw_profile, Extras};
use super::{EstimatorConfig, Method, RevenueEstimate};
use crate::dist::{DistributionSpec, ValueDistribution};
use crate::error::{Error, Result};
use crate::mechanisms::{run_myerson, MechanismSpec};
use crate::mixtures::MarketModel;

/// Maps the conditional components of one index profile to `(prices, order)`.
pub type PostedPolicy<'a> = dyn Fn(&[DistributionSpec]) -> Result<(Vec<f64>, Vec<usize>)> + 'a;

/// Posts each bidder's monopoly price, or `horizon` when that price is a
/// supremum that is never attained, highest prices first.
pub fn horizon_posted_policy(horizon: f64) -> impl Fn(&[DistributionSpec]) -> Result<(Vec<f64>, Vec<usize>)> {
    move |dists: &[DistributionSpec]| {
        let mut offers = Vec::with_capacity(dists.len());
        for (i, d) in dists.iter().enumerate() {
            let price = match d.monopoly_reserve() {
                Ok(r) => r,
                Err(Error::SupremumNotAttained { .. }) => horizon,
                Err(e) => return Err(e),
            };
            offers.push((price, i));
        }
        offers.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(offers.into_iter().unzip())
    }
}

/// Benchmark with an explicit posted-sequence policy per profile, evaluated
/// exactly over all index profiles.
pub fn discriminating_benchmark_posted(
    market: &MarketModel,
    cfg: &EstimatorConfig,
    policy: &PostedPolicy<'_>,
) -> Result<RevenueEstimate> {
    let mut total = 0.0;
    for profile in market.enumerate_profiles(cfg.profile_cap)? {
        if profile.weight == 0.0 {
            continue;
        }
        let dists = market.conditional(&profile.indices);
        let (prices, order) = policy(&dists)?;
        total += profile.weight * posted_sequence_revenue(&dists, &prices, &order)?;
    }
    Ok(RevenueEstimate::exact(total))
}

/// Benchmark with Myerson's auction run on each profile's regular components.
///
/// Small profile spaces are stratified: every positive-weight profile gets
/// `max(round(p(q) N), 2)` samples on its own streams. Larger spaces sample
/// the coins jointly with the values.
pub fn discriminating_benchmark(market: &MarketModel, cfg: &EstimatorConfig) -> Result<RevenueEstimate> {
    cfg.validate()?;
    for t in market.used_components() {
        if market.irregular_components().contains(&t) {
            return Err(Error::IrregularComponent { index: t });
        }
    }

    if market.profile_space_size() > cfg.profile_cap as f64 {
        let mech = MechanismSpec::MyersonDiscriminating(market.components().to_vec());
        let extras = Extras::none();
        let [rev] = run_streams(
            cfg.seed,
            cfg.n_samples,
            cfg.n_streams,
            0,
            crate::mechanisms::ValuationProfile::default,
            |p, rng| {
                draw_profile(market, &extras, rng, p);
                Ok([mech.run(p)?.revenue])
            },
        )?;
        return Ok(RevenueEstimate {
            mean: rev.mean(),
            std_err: rev.std_err(),
            n_samples: cfg.n_samples,
            method: Method::MonteCarlo,
        });
    }

    let (mut mean, mut var, mut count) = (0.0, 0.0, 0u64);
    for (ordinal, profile) in market.enumerate_profiles(cfg.profile_cap)?.enumerate() {
        if profile.weight == 0.0 {
            continue;
        }
        let dists = market.conditional(&profile.indices);
        let n_q = ((profile.weight * cfg.n_samples as f64).round() as u64).max(2);
        let [rev]: [Moments; 1] = run_streams(
            cfg.seed,
            n_q,
            cfg.n_streams,
            (ordinal as u64 + 1) * cfg.n_streams,
            || vec![0.0; dists.len()],
            |values, rng| {
                for (v, d) in values.iter_mut().zip(&dists) {
                    *v = d.sample(rng);
                }
                Ok([run_myerson(values, &dists)?.revenue])
            },
        )?;
        mean += profile.weight * rev.mean();
        var += (profile.weight * rev.std_err()).powi(2);
        count += n_q;
    }
    Ok(RevenueEstimate {
        mean,
        std_err: var.sqrt(),
        n_samples: count,
        method: Method::MonteCarlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::MechanismSpec;
    use crate::revenue_lab::estimate_mc;

    #[test]
    fn half_equal_revenue_mixture_with_posted_policies() {
        let market = MarketModel::iid(
            vec![DistributionSpec::equal_revenue(), DistributionSpec::point_mass(1.0).unwrap()],
            vec![0.5, 0.5],
            2,
        )
        .unwrap();
        let cfg = EstimatorConfig::new(0, 1);
        let h = 1e6;
        let b = discriminating_benchmark_posted(&market, &cfg, &horizon_posted_policy(h)).unwrap();
        let both_er = h * (2.0 * h + 1.0) / (h + 1.0_f64).powi(2);
        let mixed = 2.0 * h / (h + 1.0);
        let oracle = 0.25 * 1.0 + 0.25 * both_er + 0.5 * mixed;
        assert!((b.mean - oracle).abs() < 1e-12);
        assert!(b.mean >= 1.75 - 0.01 && b.mean <= 1.75);
    }

    #[test]
    fn single_component_equals_plain_myerson() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let market = MarketModel::iid(vec![u], vec![1.0], 3).unwrap();
        let cfg = EstimatorConfig::new(4, 100_000);
        let b = discriminating_benchmark(&market, &cfg).unwrap();
        let mech = MechanismSpec::myerson_regular(vec![u.into(); 3]).unwrap();
        let m = estimate_mc(&market, &mech, &Extras::none(), &cfg).unwrap();
        assert!((b.mean - m.mean).abs() <= 4.0 * b.combined_se(&m), "{b:?} {m:?}");
    }

    #[test]
    fn stratified_and_sampled_coins_agree() {
        let market = MarketModel::iid(
            vec![
                DistributionSpec::uniform(0.0, 1.0).unwrap(),
                DistributionSpec::uniform(0.0, 3.0).unwrap(),
            ],
            vec![0.7, 0.3],
            3,
        )
        .unwrap();
        let cfg = EstimatorConfig::new(8, 100_000);
        let strat = discriminating_benchmark(&market, &cfg).unwrap();
        let sampled = discriminating_benchmark(&market, &EstimatorConfig { profile_cap: 1, ..cfg }).unwrap();
        assert!((strat.mean - sampled.mean).abs() <= 4.0 * strat.combined_se(&sampled));
    }

    #[test]
    fn irregular_components_rejected() {
        let market = MarketModel::iid(
            vec![DistributionSpec::equal_revenue(), DistributionSpec::point_mass(1.0).unwrap()],
            vec![0.5, 0.5],
            2,
        )
        .unwrap();
        assert!(matches!(
            discriminating_benchmark(&market, &EstimatorConfig::new(0, 10)),
            Err(Error::IrregularComponent { .. })
        ));
    }
}
