//! Seeded replication study of the plug-in NPEB estimators.
//!
//! One replication: draw `n` latent thetas from the prior, simulate the
//! paired branching-process totals `(X_i(r), X_i(gamma))`, tally them into a
//! frequency table, evaluate the plug-in estimator at every support point of
//! the evaluation range, and score its regret against the Bayes rule.
//! Replications use counter-derived random streams, so results are
//! bit-identical regardless of scheduling or worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::borel_tanner::sample_total_progeny;
use crate::error::{Error, Result};
use crate::estimators::{npeb_freq, npeb_linex, EstimatorTable, FrequencyTable};
use crate::prior::UniformPrior;
use crate::quad::QuadratureSpec;
use crate::risk::{BayesReference, LinexSpec};

/// Default seed of the study harness and the CLI.
pub const DEFAULT_SEED: u64 = 42;

/// Which plug-in rule a replication evaluates against the shared frequency
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlugInEstimator {
    /// Marginal estimates `(1 + f_n(x|r))/(n+1)` and `f_n(y|r+g)/(n+1)` with
    /// each evaluation point treated as the present observation. This is the
    /// variant behind the published regret tables.
    #[default]
    MarginalSmoothed,
    /// The raw count ratio `f_n(x|r)/f_n(x+g|r+g)`.
    RawFrequency,
}

/// Full configuration of a replication study.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Ancestor count of the observed process.
    pub r: u64,
    /// LINEX asymmetry and ancestor count of the companion process.
    pub gamma: u64,
    /// Past-sample size (number of observed pairs per replication).
    pub n: u64,
    /// Number of replications.
    pub reps: u64,
    /// Prior on the reproduction parameter.
    pub prior: UniformPrior,
    /// Master seed; each replication derives its own stream from it.
    pub seed: u64,
    /// Evaluation range for the estimator and the regret sum.
    pub x_low: u64,
    pub x_high: u64,
    pub quad: QuadratureSpec,
    /// Plug-in rule evaluated per replication.
    pub estimator: PlugInEstimator,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            r: 5,
            gamma: 3,
            n: 50,
            reps: 100,
            prior: UniformPrior::new(0.5, 1.0).expect("static endpoints"),
            seed: DEFAULT_SEED,
            x_low: 5,
            x_high: 200,
            quad: QuadratureSpec::default(),
            estimator: PlugInEstimator::default(),
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.r == 0 || self.gamma == 0 {
            return Err(Error::InvalidParams(
                "r and gamma must be positive integers".into(),
            ));
        }
        if self.n == 0 || self.reps == 0 {
            return Err(Error::InvalidParams(
                "n and reps must be positive integers".into(),
            ));
        }
        if self.x_low < self.r || self.x_low > self.x_high {
            return Err(Error::InvalidParams(format!(
                "evaluation range [{}, {}] invalid for r = {}",
                self.x_low, self.x_high, self.r
            )));
        }
        Ok(())
    }
}

/// One observed pair of branching-process totals. The latent theta is kept
/// for diagnostics only; the estimation path never sees it (frequency tables
/// are built from the totals alone).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub x_r: u64,
    pub x_gamma: u64,
    theta: f64,
}

impl PairSample {
    /// The latent reproduction parameter behind this pair; diagnostics only.
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Draws `n` pairs: theta_i i.i.d. from the prior, then the two totals
/// independently given theta_i, from `r` and `gamma` ancestors respectively.
pub fn generate_pairs<R: Rng + ?Sized>(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    n: u64,
    rng: &mut R,
) -> Result<Vec<PairSample>> {
    let mut pairs = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let theta = prior.sample(rng);
        let x_r = sample_total_progeny(theta, r, rng)?;
        let x_gamma = sample_total_progeny(theta, gamma, rng)?;
        pairs.push(PairSample {
            x_r,
            x_gamma,
            theta,
        });
    }
    Ok(pairs)
}

/// Tallies observed pairs into a [`FrequencyTable`]: counts of `X_i(r)` and
/// of the pair sums `X_i(r) + X_i(gamma)`.
pub fn build_freq_table(pairs: &[PairSample], r: u64, gamma: u64) -> Result<FrequencyTable> {
    if pairs.is_empty() {
        return Err(Error::InvalidParams("no pairs to tally".into()));
    }
    let mut counts_r = std::collections::BTreeMap::new();
    let mut counts_sum = std::collections::BTreeMap::new();
    for pair in pairs {
        *counts_r.entry(pair.x_r).or_insert(0u64) += 1;
        *counts_sum.entry(pair.x_r + pair.x_gamma).or_insert(0u64) += 1;
    }
    FrequencyTable::from_counts(r, gamma, counts_r, counts_sum)
}

/// The random stream of replication `index` under a master seed. A
/// counter-derived stream rather than a jump or split, so any replication can
/// be reproduced in isolation.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Tabulates the chosen plug-in rule over `[x_low, x_high]` against one
/// frequency table, treating each `x` as the present observation.
pub fn plug_in_table(
    freq: &FrequencyTable,
    estimator: PlugInEstimator,
    x_low: u64,
    x_high: u64,
) -> Result<EstimatorTable> {
    EstimatorTable::from_fn(freq.r(), x_low, x_high, |x| match estimator {
        PlugInEstimator::MarginalSmoothed => npeb_linex(&freq.marginal_estimates(x)?, x),
        PlugInEstimator::RawFrequency => npeb_freq(freq, x),
    })
}

/// Outcome of a single replication.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub replicate_index: u64,
    /// Regret of the realized plug-in estimator.
    pub regret_npeb: f64,
    /// The realized estimator over the evaluation range.
    pub estimator_table: EstimatorTable,
}

/// Aggregate over all replications of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateReport {
    /// Mean regret of the NPEB estimator across replications.
    pub mean_regret: f64,
    /// Standard error of the mean (sample std over sqrt(reps)).
    pub std_of_mean: f64,
    /// Regret of the MLE over the same range (deterministic).
    pub mle_regret: f64,
    pub n: u64,
    pub reps: u64,
    pub x_low: u64,
    pub x_high: u64,
}

/// A configured study with its Bayes-rule reference precomputed.
#[derive(Debug)]
pub struct Study {
    config: SimConfig,
    reference: BayesReference,
}

impl Study {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let spec = LinexSpec::new(config.gamma)?;
        let reference = BayesReference::new(
            &config.prior,
            config.r,
            &spec,
            config.x_low,
            config.x_high,
            &config.quad,
        )?;
        Ok(Self { config, reference })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn reference(&self) -> &BayesReference {
        &self.reference
    }

    /// Regret of the MLE over the evaluation range.
    pub fn mle_regret(&self) -> Result<f64> {
        let table = self.reference.mle_table()?;
        self.reference
            .regret_of(&table, self.config.x_low, self.config.x_high)
    }

    /// Runs replication `replicate_index` in isolation: same result whether
    /// called alone or as part of [`Study::run`], on any number of threads.
    pub fn run_replication(&self, replicate_index: u64) -> Result<ReplicationResult> {
        let cfg = &self.config;
        let mut rng = replication_rng(cfg.seed, replicate_index);
        let pairs = generate_pairs(&cfg.prior, cfg.r, cfg.gamma, cfg.n, &mut rng)?;
        let freq = build_freq_table(&pairs, cfg.r, cfg.gamma)?;
        let estimator_table = plug_in_table(&freq, cfg.estimator, cfg.x_low, cfg.x_high)?;
        let regret_npeb = self
            .reference
            .regret_of(&estimator_table, cfg.x_low, cfg.x_high)?;
        Ok(ReplicationResult {
            replicate_index,
            regret_npeb,
            estimator_table,
        })
    }

    /// Runs all replications (in parallel) and aggregates in index order.
    pub fn run(&self) -> Result<(Vec<ReplicationResult>, AggregateReport)> {
        let results: Vec<ReplicationResult> = (0..self.config.reps)
            .into_par_iter()
            .map(|i| self.run_replication(i))
            .collect::<Result<_>>()?;
        let report = self.aggregate(&results)?;
        Ok((results, report))
    }

    /// Mean and standard error of the replication regrets, plus the
    /// deterministic MLE regret for comparison.
    pub fn aggregate(&self, results: &[ReplicationResult]) -> Result<AggregateReport> {
        if results.is_empty() {
            return Err(Error::InvalidParams("no replications to aggregate".into()));
        }
        let reps = results.len() as f64;
        let mean = results.iter().map(|r| r.regret_npeb).sum::<f64>() / reps;
        let std_of_mean = if results.len() > 1 {
            let var = results
                .iter()
                .map(|r| (r.regret_npeb - mean).powi(2))
                .sum::<f64>()
                / (reps - 1.0);
            (var / reps).sqrt()
        } else {
            0.0
        };
        Ok(AggregateReport {
            mean_regret: mean,
            std_of_mean,
            mle_regret: self.mle_regret()?,
            n: self.config.n,
            reps: results.len() as u64,
            x_low: self.config.x_low,
            x_high: self.config.x_high,
        })
    }
}
