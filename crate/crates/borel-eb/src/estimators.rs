//! Point estimators for the reproduction parameter: maximum likelihood, the
//! Bayes rule under LINEX loss, the nonparametric empirical Bayes (NPEB)
//! rules that plug estimated marginals into the Bayes rule, their truncated
//! variants, and the squared-error NPEB rule.
//!
//! The central fact the NPEB construction rests on: the LINEX Bayes rule
//! depends on the prior only through the marginal distributions,
//!
//! ```text
//! theta_G(x) = (1/gamma) ln tau_G(x),
//! tau_G(x)   = (r+gamma)/r * ((x+gamma)/x)^(x-r-1) * m_G(x|r) / m_G(x+gamma|r+gamma),
//! ```
//!
//! so estimating the two marginals estimates the rule itself, with no model
//! for the prior. Whenever the plug-in ratio leaves the admissible band
//! `(1, e^gamma)` the estimators fall back to the MLE.

use std::collections::BTreeMap;

use crate::borel_tanner::{log_coeff_a, TruncationSpec};
use crate::error::{Error, Result};
use crate::prior::{
    log_damped_marginal_tail, log_marginal, log_marginal_tail, posterior_exp_neg, UniformPrior,
};
use crate::quad::QuadratureSpec;

/// Maximum likelihood estimator `(x - r) / x` from a single observation.
pub fn mle(r: u64, x: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidParams("r must be positive".into()));
    }
    if x < r {
        return Err(Error::Domain(format!(
            "x = {x} lies below the support start r = {r}"
        )));
    }
    Ok((x - r) as f64 / x as f64)
}

/// `ln[(r+gamma)/r * ((x+gamma)/x)^(x-r-1)]`, the coefficient part of the
/// ratio `tau`.
///
/// Written as a difference of logarithms so that the degenerate case `x = r`
/// (exponent -1) cancels exactly in floating point and boundary inputs land
/// exactly on `ln tau = 0`.
fn log_coeff_ratio(r: u64, gamma: u64, x: u64) -> f64 {
    let ancestors = ((r + gamma) as f64).ln() - (r as f64).ln();
    let exponent = (x - r) as f64 - 1.0;
    ancestors + exponent * (((x + gamma) as f64).ln() - (x as f64).ln())
}

/// The Bayes rule under LINEX loss: `-(1/gamma) ln E[exp(-gamma theta) | x]`.
/// Always inside the prior support.
pub fn bayes_linex(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    x: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let e = posterior_exp_neg(prior, r, gamma, x, spec)?;
    Ok(-e.ln() / gamma as f64)
}

/// The marginal ratio `tau_G(x)`, computed in log space. Lies strictly in
/// `(1, e^gamma)`.
pub fn tau_g(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    x: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if gamma == 0 {
        return Err(Error::InvalidParams(
            "gamma must be a positive integer".into(),
        ));
    }
    if x < r {
        return Err(Error::Domain(format!(
            "x = {x} lies below the support start r = {r}"
        )));
    }
    let log_tau = log_coeff_ratio(r, gamma, x) + log_marginal(prior, r, x, spec)?
        - log_marginal(prior, r + gamma, x + gamma, spec)?;
    Ok(log_tau.exp())
}

/// `tau_G` for the distribution truncated at width `N`: unchanged below
/// `r + N`, and at `x = r + N` the ratio of the plain to the exponentially
/// damped marginal tail mass (a weighted harmonic mean of the tail `tau_G`).
pub fn tau_star_g(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    trunc: &TruncationSpec,
    x: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let top = r + trunc.width();
    if x < r || x > top {
        return Err(Error::Domain(format!(
            "x = {x} outside the truncated support [{r}, {top}]"
        )));
    }
    if x < top {
        return tau_g(prior, r, gamma, x, spec);
    }
    let plain = log_marginal_tail(prior, r, top, spec)?;
    let damped = log_damped_marginal_tail(prior, r, gamma, top, spec)?;
    Ok((plain - damped).exp())
}

/// The Bayes rule for the truncated distribution, `(1/gamma) ln tau*_G(x)`.
pub fn bayes_linex_truncated(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    trunc: &TruncationSpec,
    x: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(tau_star_g(prior, r, gamma, trunc, x, spec)?.ln() / gamma as f64)
}

/// Counts from `n` observed pairs `(X_i(r), X_i(gamma))`: how often each
/// value of `X_i(r)` occurred and how often each pair sum
/// `X_i(r) + X_i(gamma)` occurred. Carries no trace of the latent thetas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    n: u64,
    r: u64,
    gamma: u64,
    counts_r: BTreeMap<u64, u64>,
    counts_sum: BTreeMap<u64, u64>,
}

impl FrequencyTable {
    /// Builds a table from raw counts, checking the support bounds and that
    /// both count families tally the same number of pairs.
    pub fn from_counts(
        r: u64,
        gamma: u64,
        counts_r: BTreeMap<u64, u64>,
        counts_sum: BTreeMap<u64, u64>,
    ) -> Result<Self> {
        if r == 0 || gamma == 0 {
            return Err(Error::InvalidParams(
                "r and gamma must be positive integers".into(),
            ));
        }
        if let Some(&x) = counts_r.keys().find(|&&x| x < r) {
            return Err(Error::InvalidInput(format!(
                "count key {x} below the support start r = {r}"
            )));
        }
        if let Some(&y) = counts_sum.keys().find(|&&y| y < r + gamma) {
            return Err(Error::InvalidInput(format!(
                "pair-sum key {y} below the support start r + gamma = {}",
                r + gamma
            )));
        }
        let total_r: u64 = counts_r.values().sum();
        let total_sum: u64 = counts_sum.values().sum();
        if total_r != total_sum {
            return Err(Error::InvalidInput(format!(
                "count totals disagree: {total_r} observation counts vs {total_sum} pair-sum counts"
            )));
        }
        Ok(Self {
            n: total_r,
            r,
            gamma,
            counts_r,
            counts_sum,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    /// `f_n(x | r)`: number of past pairs with `X_i(r) = x`.
    pub fn count_r(&self, x: u64) -> u64 {
        self.counts_r.get(&x).copied().unwrap_or(0)
    }

    /// `f_n(y | r + gamma)`: number of past pairs with `X_i(r) + X_i(gamma) = y`.
    pub fn count_sum(&self, y: u64) -> u64 {
        self.counts_sum.get(&y).copied().unwrap_or(0)
    }

    pub fn counts_r(&self) -> &BTreeMap<u64, u64> {
        &self.counts_r
    }

    pub fn counts_sum(&self) -> &BTreeMap<u64, u64> {
        &self.counts_sum
    }

    /// Relative-frequency marginal estimates with `present_x` as the current
    /// observation:
    ///
    /// ```text
    /// m_n(y | r+gamma) = f_n(y | r+gamma) / (n+1)
    /// m_n(x | r)       = f_n(x | r) / (n+1),  x != present_x
    /// m_n(present_x|r) = (1 + f_n(present_x | r)) / (n+1)
    /// ```
    pub fn marginal_estimates(&self, present_x: u64) -> Result<MarginalEstimates> {
        if present_x < self.r {
            return Err(Error::Domain(format!(
                "present observation {present_x} below the support start r = {}",
                self.r
            )));
        }
        let denom = (self.n + 1) as f64;
        let mut m_r: BTreeMap<u64, f64> = self
            .counts_r
            .iter()
            .map(|(&x, &c)| (x, c as f64 / denom))
            .collect();
        *m_r.entry(present_x).or_insert(0.0) = (1 + self.count_r(present_x)) as f64 / denom;
        let m_sum = self
            .counts_sum
            .iter()
            .map(|(&y, &c)| (y, c as f64 / denom))
            .collect();
        MarginalEstimates::from_marginals(self.r, self.gamma, self.n, m_r, m_sum)
    }
}

/// Estimated marginals `m(x | r)` and `m(y | r+gamma)` on a finite support.
///
/// Usually produced from a [`FrequencyTable`]; the direct constructor exists
/// so exact marginals can be plugged in (the plug-in rule then reproduces the
/// Bayes rule).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEstimates {
    r: u64,
    gamma: u64,
    n: u64,
    m_r: BTreeMap<u64, f64>,
    m_sum: BTreeMap<u64, f64>,
}

impl MarginalEstimates {
    pub fn from_marginals(
        r: u64,
        gamma: u64,
        n: u64,
        m_r: BTreeMap<u64, f64>,
        m_sum: BTreeMap<u64, f64>,
    ) -> Result<Self> {
        if r == 0 || gamma == 0 {
            return Err(Error::InvalidParams(
                "r and gamma must be positive integers".into(),
            ));
        }
        for (&x, &v) in m_r.iter().chain(m_sum.iter()) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "marginal estimate at {x} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            r,
            gamma,
            n,
            m_r,
            m_sum,
        })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Estimated `m(x | r)`; zero off the stored support.
    pub fn m_r(&self, x: u64) -> f64 {
        self.m_r.get(&x).copied().unwrap_or(0.0)
    }

    /// Estimated `m(y | r+gamma)`; zero off the stored support.
    pub fn m_sum(&self, y: u64) -> f64 {
        self.m_sum.get(&y).copied().unwrap_or(0.0)
    }

    fn m_r_from(&self, from: u64) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.m_r.range(from..).map(|(&x, &v)| (x, v))
    }

    fn m_sum_from(&self, from: u64) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.m_sum.range(from..).map(|(&y, &v)| (y, v))
    }
}

/// The NPEB rule under LINEX loss: `(1/gamma) ln tau_n(x)` when the plug-in
/// ratio lies strictly inside `(1, e^gamma)`, otherwise the MLE.
///
/// `tau_n` substitutes the estimated marginals into `tau_G`; an empty
/// pair-sum cell counts as a ratio outside the band.
pub fn npeb_linex(marg: &MarginalEstimates, x: u64) -> Result<f64> {
    let fallback = mle(marg.r(), x)?;
    let m_r = marg.m_r(x);
    let m_sum = marg.m_sum(x + marg.gamma());
    if m_r <= 0.0 || m_sum <= 0.0 {
        return Ok(fallback);
    }
    let log_tau = log_coeff_ratio(marg.r(), marg.gamma(), x) + m_r.ln() - m_sum.ln();
    Ok(in_band_or(log_tau, marg.gamma(), fallback))
}

/// `(1/gamma) ln tau` if `tau` is strictly inside `(1, e^gamma)`, else the
/// fallback. Working on `ln tau` keeps the boundary checks exact.
fn in_band_or(log_tau: f64, gamma: u64, fallback: f64) -> f64 {
    if log_tau > 0.0 && log_tau < gamma as f64 {
        log_tau / gamma as f64
    } else {
        fallback
    }
}

/// The raw-frequency NPEB rule: the plug-in ratio built directly from counts,
/// `tau^f_n(x) = (r+gamma)/r * ((x+gamma)/x)^(x-r-1) * f_n(x|r) / f_n(x+gamma|r+gamma)`,
/// applied when the pair-sum cell is nonempty and the ratio lies strictly in
/// `(1, e^gamma)`; otherwise the MLE.
pub fn npeb_freq(freq: &FrequencyTable, x: u64) -> Result<f64> {
    let fallback = mle(freq.r(), x)?;
    let f_r = freq.count_r(x);
    let f_sum = freq.count_sum(x + freq.gamma());
    if f_r == 0 || f_sum == 0 {
        return Ok(fallback);
    }
    let log_tau =
        log_coeff_ratio(freq.r(), freq.gamma(), x) + (f_r as f64).ln() - (f_sum as f64).ln();
    Ok(in_band_or(log_tau, freq.gamma(), fallback))
}

/// The truncated NPEB rule: identical to [`npeb_linex`] below `r + N`; at
/// `x = r + N` the ratio is the tail-aggregated
/// `sum_(k>=r+N) m_n(k|r) / sum_(k>=r+N) m_n(k|r)/tau_n(k)` over the observed
/// support, with the same band check and MLE fallback.
pub fn npeb_truncated(marg: &MarginalEstimates, trunc: &TruncationSpec, x: u64) -> Result<f64> {
    let top = marg.r() + trunc.width();
    if x < marg.r() || x > top {
        return Err(Error::Domain(format!(
            "x = {x} outside the truncated support [{}, {top}]",
            marg.r()
        )));
    }
    if x < top {
        return npeb_linex(marg, x);
    }
    let fallback = mle(marg.r(), x)?;
    let numerator: f64 = marg.m_r_from(top).map(|(_, v)| v).sum();
    // In m_n(k)/tau_n(k) the m_n(k|r) factor cancels, leaving
    // m_n(k+gamma | r+gamma) / coeff_ratio(k); sum over the observed
    // pair-sum support (empty cells contribute nothing).
    let denominator: f64 = marg
        .m_sum_from(top + marg.gamma())
        .map(|(y, v)| (v.ln() - log_coeff_ratio(marg.r(), marg.gamma(), y - marg.gamma())).exp())
        .sum();
    if numerator <= 0.0 || denominator <= 0.0 {
        return Ok(fallback);
    }
    let log_tau = numerator.ln() - denominator.ln();
    Ok(in_band_or(log_tau, marg.gamma(), fallback))
}

/// The NPEB rule under squared-error loss: the plug-in posterior-mean series
///
/// ```text
/// kappa_n(x) = a_r(x)/m_n(x) * sum_(j>=0) (j+1)^(j-1)/j! * m_n(x+j+1)/a_r(x+j+1)
/// ```
///
/// reduced to the finite support of the estimated marginal (`m_n` vanishes
/// off the observed values, so the tail of the series is exactly zero).
/// Returns `kappa_n` when it lies strictly in `(0, 1)`, otherwise the MLE.
pub fn npeb_sq_error(marg: &MarginalEstimates, x: u64) -> Result<f64> {
    let r = marg.r();
    let fallback = mle(r, x)?;
    let m_x = marg.m_r(x);
    if m_x <= 0.0 {
        return Ok(fallback);
    }
    let base = log_coeff_a(r, x)? - m_x.ln();
    // (j+1)^(j-1)/j! is a_1(j+1), so every term reuses the coefficient code.
    let mut kappa = 0.0;
    for (y, m_y) in marg.m_r_from(x + 1) {
        if m_y <= 0.0 {
            continue;
        }
        let term = base + log_coeff_a(1, y - x)? + m_y.ln() - log_coeff_a(r, y)?;
        kappa += term.exp();
    }
    if kappa > 0.0 && kappa < 1.0 {
        Ok(kappa)
    } else {
        Ok(fallback)
    }
}

/// A realized estimator `x -> theta_hat(x)` on the contiguous range
/// `[x_low, x_high]`; the unit the risk sums consume. Every value must lie
/// in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTable {
    r: u64,
    x_low: u64,
    values: Vec<f64>,
}

impl EstimatorTable {
    pub fn from_values(r: u64, x_low: u64, values: Vec<f64>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be positive".into()));
        }
        if x_low < r {
            return Err(Error::Domain(format!(
                "table start {x_low} below the support start r = {r}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidParams(
                "estimator table must be nonempty".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "estimate {v} at x = {} outside [0, 1]",
                    x_low + i as u64
                )));
            }
        }
        Ok(Self { r, x_low, values })
    }

    /// Tabulates `f(x)` for `x` in `[x_low, x_high]`.
    pub fn from_fn(
        r: u64,
        x_low: u64,
        x_high: u64,
        mut f: impl FnMut(u64) -> Result<f64>,
    ) -> Result<Self> {
        if x_low > x_high {
            return Err(Error::InvalidParams(format!(
                "empty table range [{x_low}, {x_high}]"
            )));
        }
        let values = (x_low..=x_high).map(&mut f).collect::<Result<Vec<f64>>>()?;
        Self::from_values(r, x_low, values)
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn x_low(&self) -> u64 {
        self.x_low
    }

    pub fn x_high(&self) -> u64 {
        self.x_low + (self.values.len() - 1) as u64
    }

    pub fn get(&self, x: u64) -> Option<f64> {
        if x < self.x_low {
            return None;
        }
        self.values.get((x - self.x_low) as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.x_low + i as u64, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn reference_prior() -> UniformPrior {
        UniformPrior::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn mle_values() {
        assert_eq!(mle(5, 5).unwrap(), 0.0);
        assert_eq!(mle(5, 10).unwrap(), 0.5);
        assert_eq!(mle(5, 20).unwrap(), 0.75);
        assert!(mle(5, 4).is_err());
        assert!(mle(0, 4).is_err());
    }

    #[test]
    fn bayes_rule_matches_tau_route() {
        let prior = reference_prior();
        let q = spec();
        for x in [5u64, 9, 17, 30] {
            let direct = bayes_linex(&prior, 5, 3, x, &q).unwrap();
            let via_tau = tau_g(&prior, 5, 3, x, &q).unwrap().ln() / 3.0;
            assert!(
                (direct - via_tau).abs() <= 1e-10,
                "x={x}: {direct} vs {via_tau}"
            );
        }
    }

    #[test]
    fn tau_band_and_point_mass_limit() {
        let prior = reference_prior();
        let q = spec();
        for x in 5u64..=30 {
            let t = tau_g(&prior, 5, 3, x, &q).unwrap();
            assert!(t > 1.0 && t < 3.0f64.exp(), "tau {t} outside (1, e^3)");
        }
        // Point-mass prior at 0.7: tau -> exp(gamma * 0.7).
        let tight = UniformPrior::new(0.7, 0.7 + 1e-9).unwrap();
        let t = tau_g(&tight, 5, 2, 9, &q).unwrap();
        assert!(((t - 1.4f64.exp()) / 1.4f64.exp()).abs() <= 1e-6);
        // Domain guards, not panics, below the support start.
        assert!(tau_g(&prior, 5, 3, 4, &q).is_err());
        assert!(bayes_linex(&prior, 5, 3, 4, &q).is_err());
    }

    fn freq(r: u64, gamma: u64, xs: &[(u64, u64)], sums: &[(u64, u64)]) -> FrequencyTable {
        FrequencyTable::from_counts(
            r,
            gamma,
            xs.iter().copied().collect(),
            sums.iter().copied().collect(),
        )
        .unwrap()
    }

    #[test]
    fn frequency_table_validation() {
        assert!(FrequencyTable::from_counts(
            5,
            3,
            [(4u64, 1u64)].into_iter().collect(),
            [(8u64, 1u64)].into_iter().collect(),
        )
        .is_err());
        assert!(FrequencyTable::from_counts(
            5,
            3,
            [(5u64, 1u64)].into_iter().collect(),
            [(7u64, 1u64)].into_iter().collect(),
        )
        .is_err());
        assert!(FrequencyTable::from_counts(
            5,
            3,
            [(5u64, 2u64)].into_iter().collect(),
            [(8u64, 1u64)].into_iter().collect(),
        )
        .is_err());
    }

    #[test]
    fn marginal_estimates_hand_cases() {
        // No past data: the present observation carries all the mass.
        let empty = FrequencyTable::from_counts(5, 3, BTreeMap::new(), BTreeMap::new()).unwrap();
        let m = empty.marginal_estimates(7).unwrap();
        assert_eq!(m.m_r(7), 1.0);
        assert_eq!(m.m_sum(10), 0.0);

        // All three past observations at the present point: (1+3)/4 = 1.
        let t = freq(5, 3, &[(7, 3)], &[(10, 2), (12, 1)]);
        let m = t.marginal_estimates(7).unwrap();
        assert_eq!(m.m_r(7), 1.0);
        assert_eq!(m.m_sum(10), 0.5);
        assert_eq!(m.m_sum(12), 0.25);
        assert_eq!(m.m_sum(11), 0.0);
    }

    #[test]
    fn npeb_linex_hand_value() {
        // m_r(6) = 0.25, m_sum(9) = 0.25, r=5, gamma=3, x=6:
        // tau = (8/5) * (9/6)^0 * 1 = 8/5, theta = ln(8/5)/3.
        let t = freq(5, 3, &[(5, 3)], &[(8, 2), (9, 1)]);
        let m = t.marginal_estimates(6).unwrap();
        assert_eq!(m.m_r(6), 0.25);
        assert_eq!(m.m_sum(9), 0.25);
        let got = npeb_linex(&m, 6).unwrap();
        let expect = (8.0f64 / 5.0).ln() / 3.0;
        assert!((got - expect).abs() <= 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn npeb_linex_degenerate_cells_fall_back_to_mle() {
        let t = freq(5, 3, &[(5, 3)], &[(8, 3)]);
        let m = t.marginal_estimates(12).unwrap();
        // m_sum(15) = 0 -> MLE exactly.
        assert_eq!(npeb_linex(&m, 12).unwrap(), mle(5, 12).unwrap());
    }

    #[test]
    fn npeb_linex_boundary_tau_returns_mle() {
        // At x = r the coefficient ratio cancels exactly, and with
        // 1 + f(5) = f_sum(8) = 4 the marginal ratio is exactly 1 too, so
        // tau_n sits on the boundary of the open band: MLE branch.
        let t = freq(5, 3, &[(5, 3), (9, 1)], &[(8, 4)]);
        let m = t.marginal_estimates(5).unwrap();
        assert_eq!(m.m_r(5), m.m_sum(8));
        assert_eq!(npeb_linex(&m, 5).unwrap(), mle(5, 5).unwrap());
    }

    #[test]
    fn npeb_freq_boundary_is_exactly_mle() {
        // f(5|5) = f(8|8) = 10 makes tau exactly 1 (the (8/5) factors cancel
        // against the exponent -1 term); the open band excludes it.
        let t = freq(5, 3, &[(5, 10)], &[(8, 10)]);
        assert_eq!(npeb_freq(&t, 5).unwrap(), 0.0);
        assert_eq!(npeb_freq(&t, 5).unwrap(), mle(5, 5).unwrap());
    }

    #[test]
    fn npeb_freq_hand_value() {
        // f(10|5)=4, f(13|8)=2: tau = 1.6 * 1.3^4 * 2, inside (1, e^3).
        let t = freq(5, 3, &[(10, 4), (5, 1)], &[(13, 2), (8, 3)]);
        let got = npeb_freq(&t, 10).unwrap();
        let expect = (1.6f64 * 1.3f64.powi(4) * 2.0).ln() / 3.0;
        assert!((got - expect).abs() <= 1e-12, "{got} vs {expect}");
        // Empty pair-sum cell -> MLE.
        assert_eq!(npeb_freq(&t, 20).unwrap(), mle(5, 20).unwrap());
    }

    #[test]
    fn npeb_sq_error_hand_value() {
        // Marginal uniform on {5, 6}: kappa = a_5(5)/a_5(6) = 1/5.
        let m = MarginalEstimates::from_marginals(
            5,
            3,
            0,
            [(5u64, 0.5), (6u64, 0.5)].into_iter().collect(),
            BTreeMap::new(),
        )
        .unwrap();
        let got = npeb_sq_error(&m, 5).unwrap();
        assert!((got - 0.2).abs() <= 1e-14, "{got}");
    }

    #[test]
    fn npeb_sq_error_clamps() {
        // Support only at x: empty series, kappa = 0 -> MLE.
        let only_x = MarginalEstimates::from_marginals(
            5,
            3,
            0,
            [(8u64, 1.0)].into_iter().collect(),
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(npeb_sq_error(&only_x, 8).unwrap(), mle(5, 8).unwrap());

        // Heavy mass just above x pushes kappa past 1 -> MLE.
        let lopsided = MarginalEstimates::from_marginals(
            5,
            3,
            0,
            [(5u64, 0.01), (6u64, 0.99)].into_iter().collect(),
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(npeb_sq_error(&lopsided, 5).unwrap(), mle(5, 5).unwrap());
    }

    #[test]
    fn npeb_truncated_matches_plain_rule_below_cutoff() {
        let t = freq(5, 3, &[(6, 2), (9, 1)], &[(9, 1), (12, 2)]);
        let trunc = TruncationSpec::new(10).unwrap();
        for x in 5u64..15 {
            let m = t.marginal_estimates(x).unwrap();
            assert_eq!(
                npeb_truncated(&m, &trunc, x).unwrap(),
                npeb_linex(&m, x).unwrap(),
                "x = {x}"
            );
        }
        let m = t.marginal_estimates(15).unwrap();
        assert!(npeb_truncated(&m, &trunc, 16).is_err());
        assert!(npeb_truncated(&m, &trunc, 4).is_err());
    }

    #[test]
    fn npeb_truncated_single_tail_atom() {
        // A single marginal atom k0 = 16 beyond the cutoff 15 (its pair sum
        // observed too): the tail-aggregated ratio collapses to tau_n(k0).
        let m = MarginalEstimates::from_marginals(
            5,
            3,
            9,
            [(16u64, 0.3)].into_iter().collect(),
            [(19u64, 0.2)].into_iter().collect(),
        )
        .unwrap();
        let trunc = TruncationSpec::new(10).unwrap();
        let log_tau_k0 = log_coeff_ratio(5, 3, 16) + 0.3f64.ln() - 0.2f64.ln();
        assert!(
            log_tau_k0 > 0.0 && log_tau_k0 < 3.0,
            "case must land in band"
        );
        let got = npeb_truncated(&m, &trunc, 15).unwrap();
        assert!(
            (got - log_tau_k0 / 3.0).abs() <= 1e-12,
            "{got} vs {}",
            log_tau_k0 / 3.0
        );
    }

    #[test]
    fn npeb_truncated_empty_tail_falls_back() {
        let t = freq(5, 3, &[(5, 2)], &[(8, 2)]);
        let trunc = TruncationSpec::new(10).unwrap();
        let m = t.marginal_estimates(15).unwrap();
        assert_eq!(npeb_truncated(&m, &trunc, 15).unwrap(), mle(5, 15).unwrap());
    }

    #[test]
    fn estimator_table_contracts() {
        let t = EstimatorTable::from_fn(5, 5, 20, |x| mle(5, x)).unwrap();
        assert_eq!(t.x_low(), 5);
        assert_eq!(t.x_high(), 20);
        assert_eq!(t.get(10), Some(0.5));
        assert_eq!(t.get(4), None);
        assert_eq!(t.get(21), None);
        assert!(EstimatorTable::from_values(5, 5, vec![1.5]).is_err());
        assert!(EstimatorTable::from_values(5, 4, vec![0.5]).is_err());
        assert!(EstimatorTable::from_values(5, 5, vec![]).is_err());
    }
}
