//! Expected-revenue estimation: seeded Monte Carlo, quadrature over the
//! second-order statistic, exact evaluation for discrete markets, the
//! coin-observing benchmark and the commensurateness checker.

mod benchmark;
mod commensurate;
mod engine;
mod exact;
mod mc;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixtures::DEFAULT_PROFILE_CAP;

pub use benchmark::{discriminating_benchmark, discriminating_benchmark_posted, horizon_posted_policy, PostedPolicy};
pub use commensurate::{commensurateness_check, CommensurateReport, MIN_DIVERGENCE_SAMPLES};
pub use engine::{Moments, Summary};
pub use exact::{
    expected_revenue_discrete, expected_revenue_quadrature, posted_sequence_revenue, second_price_tail,
    vickrey_revenue_cdf, DEFAULT_QUADRATURE_TOL,
};
pub use mc::{estimate_mc, estimate_with_virtual_surplus, ExtraBidder, Extras, ExtrasMode, VirtualSurplusEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[serde(rename = "mc")]
    MonteCarlo,
    Exact,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub method: Method,
}

impl RevenueEstimate {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            std_err: 0.0,
            n_samples: 0,
            method: Method::Exact,
        }
    }

    /// Standard error of a difference of two independent estimates.
    pub fn combined_se(&self, other: &RevenueEstimate) -> f64 {
        self.std_err.hypot(other.std_err)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub seed: u64,
    pub n_samples: u64,
    pub n_streams: u64,
    pub profile_cap: usize,
    pub quadrature_tol: f64,
}

impl EstimatorConfig {
    pub fn new(seed: u64, n_samples: u64) -> Self {
        Self {
            seed,
            n_samples,
            n_streams: 16,
            profile_cap: DEFAULT_PROFILE_CAP,
            quadrature_tol: DEFAULT_QUADRATURE_TOL,
        }
    }

    pub fn with_streams(mut self, n_streams: u64) -> Self {
        self.n_streams = n_streams;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter {
                family: "estimator",
                reason: "n_samples must be at least 1".into(),
            });
        }
        if self.n_streams == 0 {
            return Err(Error::InvalidParameter {
                family: "estimator",
                reason: "n_streams must be at least 1".into(),
            });
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(Error::InvalidParameter {
                family: "estimator",
                reason: "quadrature tolerance must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub ratio: f64,
    pub std_err: f64,
}

/// `opt.mean / simple.mean` with first-order error propagation.
pub fn approximation_ratio(opt: &RevenueEstimate, simple: &RevenueEstimate) -> Result<Ratio> {
    if !(simple.mean > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let ratio = opt.mean / simple.mean;
    let rel_opt = if opt.mean != 0.0 { opt.std_err / opt.mean } else { 0.0 };
    let rel_simple = simple.std_err / simple.mean;
    Ok(Ratio {
        ratio,
        std_err: ratio.abs() * rel_opt.hypot(rel_simple),
    })
}

/// One estimate row for CSV export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub scenario_id: String,
    pub mechanism: String,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub method: Method,
    pub seed: u64,
}

impl EstimateRecord {
    pub fn new(scenario_id: impl Into<String>, mechanism: impl Into<String>, est: &RevenueEstimate, seed: u64) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            mechanism: mechanism.into(),
            mean: est.mean,
            std_err: est.std_err,
            n_samples: est.n_samples,
            method: est.method,
            seed,
        }
    }
}

pub fn write_estimates_csv<W: Write>(records: &[EstimateRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "mechanism", "mean", "std_err", "n_samples", "method", "seed"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        w.write_record([
            r.scenario_id.clone(),
            r.mechanism.clone(),
            r.mean.to_string(),
            r.std_err.to_string(),
            r.n_samples.to_string(),
            r.method.as_str().to_string(),
            r.seed.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn est(mean: f64, se: f64) -> RevenueEstimate {
        RevenueEstimate {
            mean,
            std_err: se,
            n_samples: 100,
            method: Method::MonteCarlo,
        }
    }

    #[test]
    fn ratio_examples() {
        let r = approximation_ratio(&RevenueEstimate::exact(1.75), &RevenueEstimate::exact(1.55)).unwrap();
        assert_abs_diff_eq!(r.ratio, 1.75 / 1.55, epsilon = 1e-15);
        assert!(r.ratio <= 2.0);
        let r = approximation_ratio(&est(2.0, 0.1), &est(2.0, 0.1)).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(
            approximation_ratio(&est(1.0, 0.1), &est(0.0, 0.0)),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn ratio_error_propagation_matches_delta_method() {
        let (m1, s1, m2, s2) = (3.0, 0.2, 1.5, 0.05);
        let r = approximation_ratio(&est(m1, s1), &est(m2, s2)).unwrap();
        // gradient of m1/m2 is (1/m2, -m1/m2^2)
        let oracle = ((s1 / m2).powi(2) + (m1 * s2 / (m2 * m2)).powi(2)).sqrt();
        assert_abs_diff_eq!(r.std_err, oracle, epsilon = 1e-12);
    }

    #[test]
    fn csv_columns() {
        let rec = EstimateRecord::new("s1", "second_price", &est(0.5, 0.01), 7);
        let mut buf = Vec::new();
        write_estimates_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("scenario_id,mechanism,mean,std_err,n_samples,method,seed"));
        assert_eq!(lines.next(), Some("s1,second_price,0.5,0.01,100,mc,7"));
    }
}
