//! Borel–Tanner distribution numerics and empirical Bayes estimation of the
//! reproduction parameter under LINEX loss.
//!
//! The crate provides:
//!
//! - exact log-space pmf, truncation and tail computations plus two
//!   independent samplers ([`borel_tanner`]);
//! - interval-uniform priors with stabilized Gauss–Legendre quadrature for
//!   every marginal and posterior integral ([`prior`], [`quad`]);
//! - the estimator family: maximum likelihood, the Bayes rule under LINEX
//!   loss, nonparametric empirical Bayes plug-in rules and their truncated
//!   variants, and a squared-error plug-in rule ([`estimators`]);
//! - Bayes-risk, minimum-risk and regret evaluation with independent
//!   cross-checking routes ([`risk`]);
//! - a seeded, reproducible replication study harness ([`sim`]).
//!
//! Quick example:
//! ```
//! use borel_eb::estimators::{bayes_linex, mle};
//! use borel_eb::{BtParams, QuadratureSpec, UniformPrior};
//!
//! let params = BtParams::new(0.7, 5)?;
//! let mass = borel_eb::borel_tanner::pmf(&params, 9)?;
//! assert!(mass > 0.0 && mass < 1.0);
//!
//! // Point estimates for an observed total of 12 from 5 ancestors.
//! let prior = UniformPrior::new(0.5, 1.0)?;
//! let quad = QuadratureSpec::default();
//! assert_eq!(mle(5, 12)?, 7.0 / 12.0);
//! let bayes = bayes_linex(&prior, 5, 3, 12, &quad)?;
//! assert!(bayes > 0.5 && bayes < 1.0);
//! # Ok::<(), borel_eb::Error>(())
//! ```

pub mod borel_tanner;
pub mod error;
pub mod estimators;
pub mod prior;
pub mod quad;
pub mod risk;
pub mod sim;

pub use borel_tanner::{BtParams, TruncationSpec};
pub use error::{Error, Result};
pub use estimators::{EstimatorTable, FrequencyTable, MarginalEstimates};
pub use prior::UniformPrior;
pub use quad::QuadratureSpec;
pub use risk::{BayesReference, LinexSpec, RiskReport};
pub use sim::{AggregateReport, PairSample, PlugInEstimator, ReplicationResult, SimConfig, Study};
