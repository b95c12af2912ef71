//! Revenue approximation for single-item auctions whose bidders draw values
//! from mixtures of regular distributions.
//!
//! Modules, bottom up: [`dist`] (value distributions), [`mixtures`] (markets
//! and index profiles), [`ironing`], [`mechanisms`], [`revenue_lab`]
//! (estimators and benchmarks), [`planner`] (augmentation recipes) and
//! [`cli`] (scenarios, experiments, reports).

pub mod cli;
pub mod dist;
pub mod error;
pub mod ironing;
pub mod mechanisms;
pub mod mixtures;
pub mod planner;
pub mod revenue_lab;
pub mod stream;

pub use dist::{hr_dominance, hr_dominates, DistributionSpec, HrCertificate, SupportInterval, ValueDistribution};
pub use error::{Error, Result};
pub use ironing::{iron, IronedCurve};
pub use mechanisms::{AuctionOutcome, MechanismSpec, Origin, ValuationProfile};
pub use mixtures::{build_market, IndexProfile, MarketModel, Mixture};
pub use revenue_lab::{approximation_ratio, EstimatorConfig, Method, RevenueEstimate};
pub use planner::{guarantee_factor, AugmentationPlan, Strategy};
