//! LINEX loss, Bayes risk of an estimator table, minimum Bayes risk, and
//! regret.
//!
//! Three independent computation routes are kept deliberately separate so
//! they can check one another:
//!
//! - [`bayes_risk`] integrates the loss against the model directly, one
//!   quadrature per support point;
//! - [`min_bayes_risk`] uses the posterior-mean form
//!   `sum_x gamma (E[theta|x] - theta_G(x)) m_G(x|r)` of the risk attained by
//!   the Bayes rule;
//! - [`regret_via_identity`] uses the fact that the excess risk of any
//!   realized estimator is the LINEX loss *between the estimator and the
//!   Bayes rule*, averaged over the marginal.

use crate::error::{Error, Result};
use crate::estimators::{bayes_linex, mle, EstimatorTable};
use crate::prior::{log_marginal, posterior_mean, UniformPrior};
use crate::quad::{self, QuadratureSpec};

/// Asymmetry parameter of the LINEX loss; positive integer throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinexSpec {
    gamma: u64,
}

impl LinexSpec {
    pub fn new(gamma: u64) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidParams(
                "gamma must be a positive integer".into(),
            ));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn gamma_f(&self) -> f64 {
        self.gamma as f64
    }
}

/// LINEX loss `exp(g d) - g d - 1` with `d = est - theta`; for `g > 0` it
/// penalizes overestimation almost exponentially and underestimation almost
/// linearly. Accepts a real asymmetry parameter so the small-gamma
/// squared-error limit can be examined.
pub fn linex_loss_at(gamma: f64, est: f64, theta: f64) -> f64 {
    let u = gamma * (est - theta);
    if u.abs() < 1e-3 {
        // expm1(u) - u cancels catastrophically here; the series keeps full
        // relative precision down to the loss's quadratic zero.
        return u * u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)));
    }
    u.exp_m1() - u
}

/// LINEX loss under an integer asymmetry spec. Nonnegative, zero only at
/// `est == theta`.
pub fn linex_loss(spec: &LinexSpec, est: f64, theta: f64) -> f64 {
    linex_loss_at(spec.gamma_f(), est, theta)
}

/// Bayes risk of a tabulated estimator over `x in [x_low, x_high]`:
/// `sum_x int L(theta_hat(x), theta) p(x | theta, r) dG(theta)`,
/// each inner integral by stabilized quadrature.
pub fn bayes_risk(
    prior: &UniformPrior,
    r: u64,
    spec: &LinexSpec,
    est: &EstimatorTable,
    x_low: u64,
    x_high: u64,
    quad_spec: &QuadratureSpec,
) -> Result<f64> {
    check_range(r, x_low, x_high)?;
    let gamma = spec.gamma_f();
    let log_width = prior.width().ln();
    let mut total = 0.0;
    for x in x_low..=x_high {
        let estimate = est
            .get(x)
            .ok_or_else(|| Error::Domain(format!("estimator table does not cover x = {x}")))?;
        let coeff = crate::borel_tanner::log_coeff_a(r, x)?;
        let p = (x - r) as f64;
        let q = x as f64;
        let inner = quad::log_integral(
            |t| {
                let loss = linex_loss_at(gamma, estimate, t);
                loss.ln() + p * t.ln() - q * t
            },
            prior.a(),
            prior.b(),
            quad_spec,
        )?;
        total += (coeff - log_width + inner).exp();
    }
    Ok(total)
}

/// The minimum Bayes risk (attained by the Bayes rule), via the
/// posterior-mean form of the risk.
pub fn min_bayes_risk(
    prior: &UniformPrior,
    r: u64,
    spec: &LinexSpec,
    x_low: u64,
    x_high: u64,
    quad_spec: &QuadratureSpec,
) -> Result<f64> {
    let reference = BayesReference::new(prior, r, spec, x_low, x_high, quad_spec)?;
    reference.min_risk(x_low, x_high)
}

/// Regret of a realized estimator table:
/// `sum_x L(theta_hat(x), theta_G(x)) m_G(x|r)`. Equals
/// `bayes_risk(est) - min_bayes_risk` up to quadrature error, but is exact
/// per sample rather than Monte Carlo.
pub fn regret_via_identity(
    prior: &UniformPrior,
    r: u64,
    spec: &LinexSpec,
    est: &EstimatorTable,
    x_low: u64,
    x_high: u64,
    quad_spec: &QuadratureSpec,
) -> Result<f64> {
    let reference = BayesReference::new(prior, r, spec, x_low, x_high, quad_spec)?;
    reference.regret_of(est, x_low, x_high)
}

/// Bayes risk, minimum Bayes risk and regret over the summation range
/// actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub risk: f64,
    pub min_risk: f64,
    pub regret: f64,
    pub x_low: u64,
    pub x_high: u64,
}

/// Full report for one estimator table: direct risk, minimum risk and the
/// identity-route regret.
pub fn risk_report(
    prior: &UniformPrior,
    r: u64,
    spec: &LinexSpec,
    est: &EstimatorTable,
    x_low: u64,
    x_high: u64,
    quad_spec: &QuadratureSpec,
) -> Result<RiskReport> {
    let reference = BayesReference::new(prior, r, spec, x_low, x_high, quad_spec)?;
    let risk = bayes_risk(prior, r, spec, est, x_low, x_high, quad_spec)?;
    let min_risk = reference.min_risk(x_low, x_high)?;
    let regret = reference.regret_of(est, x_low, x_high)?;
    Ok(RiskReport {
        risk,
        min_risk,
        regret,
        x_low,
        x_high,
    })
}

fn check_range(r: u64, x_low: u64, x_high: u64) -> Result<()> {
    if x_low < r {
        return Err(Error::Domain(format!(
            "x_low = {x_low} below the support start r = {r}"
        )));
    }
    if x_low > x_high {
        return Err(Error::Domain(format!(
            "empty summation range [{x_low}, {x_high}]"
        )));
    }
    Ok(())
}

/// Precomputed Bayes rule, posterior mean and marginal over a support range.
///
/// Replication studies evaluate thousands of estimator tables against the
/// same prior; tabulating the per-x quadratures once makes each regret
/// evaluation a cheap weighted sum without touching the identity itself.
#[derive(Debug, Clone)]
pub struct BayesReference {
    r: u64,
    gamma: u64,
    x_low: u64,
    bayes_rule: Vec<f64>,
    post_mean: Vec<f64>,
    marginal: Vec<f64>,
}

impl BayesReference {
    pub fn new(
        prior: &UniformPrior,
        r: u64,
        spec: &LinexSpec,
        x_low: u64,
        x_high: u64,
        quad_spec: &QuadratureSpec,
    ) -> Result<Self> {
        check_range(r, x_low, x_high)?;
        let len = (x_high - x_low + 1) as usize;
        let mut bayes_rule = Vec::with_capacity(len);
        let mut post_mean = Vec::with_capacity(len);
        let mut marginal = Vec::with_capacity(len);
        for x in x_low..=x_high {
            bayes_rule.push(bayes_linex(prior, r, spec.gamma(), x, quad_spec)?);
            post_mean.push(posterior_mean(prior, r, x, quad_spec)?);
            marginal.push(log_marginal(prior, r, x, quad_spec)?.exp());
        }
        Ok(Self {
            r,
            gamma: spec.gamma(),
            x_low,
            bayes_rule,
            post_mean,
            marginal,
        })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn x_low(&self) -> u64 {
        self.x_low
    }

    pub fn x_high(&self) -> u64 {
        self.x_low + (self.bayes_rule.len() - 1) as u64
    }

    fn index(&self, x: u64) -> Result<usize> {
        if x < self.x_low || x > self.x_high() {
            return Err(Error::Domain(format!(
                "x = {x} outside the tabulated range [{}, {}]",
                self.x_low,
                self.x_high()
            )));
        }
        Ok((x - self.x_low) as usize)
    }

    /// The Bayes rule `theta_G(x)`.
    pub fn bayes_rule(&self, x: u64) -> Result<f64> {
        Ok(self.bayes_rule[self.index(x)?])
    }

    /// The marginal `m_G(x | r)`.
    pub fn marginal(&self, x: u64) -> Result<f64> {
        Ok(self.marginal[self.index(x)?])
    }

    /// The Bayes rule as an estimator table over the tabulated range.
    pub fn bayes_rule_table(&self) -> Result<EstimatorTable> {
        EstimatorTable::from_values(self.r, self.x_low, self.bayes_rule.clone())
    }

    /// The MLE as an estimator table over the tabulated range.
    pub fn mle_table(&self) -> Result<EstimatorTable> {
        EstimatorTable::from_fn(self.r, self.x_low, self.x_high(), |x| mle(self.r, x))
    }

    /// Minimum Bayes risk over `[lo, hi]`:
    /// `sum_x gamma (E[theta|x] - theta_G(x)) m_G(x|r)`.
    pub fn min_risk(&self, lo: u64, hi: u64) -> Result<f64> {
        self.index(lo)?;
        self.index(hi)?;
        let gamma = self.gamma as f64;
        let mut total = 0.0;
        for x in lo..=hi {
            let i = (x - self.x_low) as usize;
            total += gamma * (self.post_mean[i] - self.bayes_rule[i]) * self.marginal[i];
        }
        Ok(total)
    }

    /// Regret of a table over `[lo, hi]` through the loss-against-the-rule
    /// identity.
    pub fn regret_of(&self, est: &EstimatorTable, lo: u64, hi: u64) -> Result<f64> {
        self.index(lo)?;
        self.index(hi)?;
        let gamma = self.gamma as f64;
        let mut total = 0.0;
        for x in lo..=hi {
            let i = (x - self.x_low) as usize;
            let estimate = est
                .get(x)
                .ok_or_else(|| Error::Domain(format!("estimator table does not cover x = {x}")))?;
            total += linex_loss_at(gamma, estimate, self.bayes_rule[i]) * self.marginal[i];
        }
        Ok(total)
    }
}
