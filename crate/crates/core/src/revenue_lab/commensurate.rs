//! Empirical check that a pair of mechanisms `(M', M)` is commensurate: on
//! draws where the winners differ, `M'`'s winner has nonnegative expected
//! virtual value, and the price `M'` collects is at least the virtual value of
//! `M`'s winner.

use serde::{Deserialize, Serialize};

use super::engine::run_streams;
use super::mc::{draw_profile, ExtraBidder, Extras, ExtrasMode};
use super::EstimatorConfig;
use crate::dist::ValueDistribution;
use crate::error::{Error, Result};
use crate::mechanisms::{MechanismSpec, ValuationProfile};
use crate::mixtures::MarketModel;

pub const MIN_DIVERGENCE_SAMPLES: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommensurateReport {
    pub n_samples: u64,
    pub divergence_count: u64,
    /// Mean and standard error of `M'`'s winner virtual value on divergence draws.
    pub expectation_mean: f64,
    pub expectation_se: f64,
    /// Divergence draws where `M'`'s price is at least `M`'s winner virtual value.
    pub pointwise_pass: u64,
}

impl CommensurateReport {
    pub fn no_divergence(&self) -> bool {
        self.divergence_count == 0
    }

    pub fn expectation_holds(&self, n_se: f64) -> bool {
        self.no_divergence() || self.expectation_mean >= -n_se * self.expectation_se
    }

    pub fn pointwise_rate(&self) -> f64 {
        if self.divergence_count == 0 {
            1.0
        } else {
            self.pointwise_pass as f64 / self.divergence_count as f64
        }
    }

    pub fn verdict(&self) -> String {
        if self.no_divergence() {
            return "no divergence".into();
        }
        format!(
            "{} divergences; expectation {:.6} (se {:.6}); pointwise {}/{}",
            self.divergence_count,
            self.expectation_mean,
            self.expectation_se,
            self.pointwise_pass,
            self.divergence_count
        )
    }
}

/// Runs `m` on the original bidders and `m_prime` on originals plus
/// `extras_prime` using the same value draws.
///
/// Virtual values are those of the component each bidder's coin selected.
pub fn commensurateness_check(
    market: &MarketModel,
    m: &MechanismSpec,
    m_prime: &MechanismSpec,
    extras_prime: &Extras,
    cfg: &EstimatorConfig,
) -> Result<CommensurateReport> {
    cfg.validate()?;
    extras_prime.validate(market)?;
    if extras_prime.mode != ExtrasMode::Compete {
        return Err(Error::InvalidMechanism("extras must compete in M'".into()));
    }
    if extras_prime.bidders.iter().any(|e| matches!(e, ExtraBidder::Value(_))) {
        return Err(Error::InvalidMechanism(
            "virtual values are undefined for deterministic extras".into(),
        ));
    }
    for t in market.used_components() {
        if market.components()[t].is_atomic() {
            return Err(Error::AtomicDistribution);
        }
    }
    let n = market.n();
    let comps = market.components();
    let phi = |p: &ValuationProfile, i: usize| -> Result<f64> {
        let t = p.component(i).expect("sampled bidders carry components");
        comps[t].virtual_value(p.values[i])
    };

    let init = || (ValuationProfile::default(), ValuationProfile::default());
    // NaN marks draws where the winners agree
    let [expect, point] = run_streams(cfg.seed, cfg.n_samples, cfg.n_streams, 0, init, |(full, orig), rng| {
        draw_profile(market, extras_prime, rng, full);
        orig.clear();
        for i in 0..n {
            orig.push(full.values[i], full.origins[i]);
        }
        let out_m = m.run_with(orig, rng)?;
        let out_p = m_prime.run_with(full, rng)?;
        if out_m.winner == out_p.winner {
            return Ok([f64::NAN, f64::NAN]);
        }
        let phi_p = match out_p.winner {
            Some(w) => phi(full, w)?,
            None => 0.0,
        };
        let pass = match out_m.winner {
            Some(w) => out_p.revenue >= phi(orig, w)?,
            None => true,
        };
        Ok([phi_p, f64::from(u8::from(pass))])
    })?;

    let divergence_count = expect.count();
    if divergence_count > 0 && divergence_count < MIN_DIVERGENCE_SAMPLES {
        return Err(Error::InsufficientDivergenceSamples {
            found: divergence_count,
            needed: MIN_DIVERGENCE_SAMPLES,
        });
    }
    let (expectation_mean, expectation_se, pointwise_pass) = if divergence_count == 0 {
        (0.0, 0.0, 0)
    } else {
        (
            expect.mean(),
            expect.std_err(),
            (point.mean() * point.count() as f64).round() as u64,
        )
    };
    Ok(CommensurateReport {
        n_samples: cfg.n_samples,
        divergence_count,
        expectation_mean,
        expectation_se,
        pointwise_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;

    fn hr_market() -> MarketModel {
        MarketModel::iid(
            vec![
                DistributionSpec::uniform(0.0, 1.0).unwrap(),
                DistributionSpec::uniform(0.0, 2.0).unwrap(),
            ],
            vec![0.5, 0.5],
            2,
        )
        .unwrap()
    }

    #[test]
    fn myerson_against_second_price_with_extras() {
        let market = hr_market();
        let m = MechanismSpec::MyersonDiscriminating(market.components().to_vec());
        let cfg = EstimatorConfig::new(21, 100_000);
        let r = commensurateness_check(&market, &m, &MechanismSpec::SecondPrice, &Extras::per_component([0, 1]), &cfg)
            .unwrap();
        assert!(r.divergence_count >= MIN_DIVERGENCE_SAMPLES);
        assert!(r.expectation_holds(4.0), "{r:?}");
        assert_eq!(r.pointwise_rate(), 1.0);
    }

    #[test]
    fn one_extra_from_dominant_component() {
        let market = hr_market();
        let m = MechanismSpec::MyersonDiscriminating(market.components().to_vec());
        let cfg = EstimatorConfig::new(22, 100_000);
        let r = commensurateness_check(&market, &m, &MechanismSpec::SecondPrice, &Extras::per_component([1]), &cfg)
            .unwrap();
        assert!(r.expectation_holds(4.0), "{r:?}");
        assert_eq!(r.pointwise_rate(), 1.0);
    }

    #[test]
    fn identical_mechanisms_never_diverge() {
        let market = hr_market();
        let cfg = EstimatorConfig::new(1, 10_000);
        let sp = MechanismSpec::SecondPrice;
        let r = commensurateness_check(&market, &sp, &sp, &Extras::none(), &cfg).unwrap();
        assert!(r.no_divergence());
        assert_eq!(r.verdict(), "no divergence");
    }

    #[test]
    fn too_few_divergences_is_an_error() {
        let market = hr_market();
        let cfg = EstimatorConfig::new(1, 60);
        let m = MechanismSpec::MyersonDiscriminating(market.components().to_vec());
        let r = commensurateness_check(&market, &m, &MechanismSpec::SecondPrice, &Extras::per_component([0, 1]), &cfg);
        assert!(matches!(r, Err(Error::InsufficientDivergenceSamples { .. })));
    }
}
