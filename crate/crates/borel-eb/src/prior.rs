//! Interval-uniform priors on theta and the prior/posterior integrals.
//!
//! Everything here reduces to integrals of `theta^p * exp(-q theta)` against
//! the prior density, evaluated in log space through [`quad::log_integral`].

use rand::Rng;

use crate::borel_tanner::log_coeff_a;
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureSpec};

/// The uniform prior G = U(a, b) on the reproduction parameter, with
/// `0 <= a < b <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPrior {
    a: f64,
    b: f64,
}

impl UniformPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > 1.0 || a >= b {
            return Err(Error::InvalidParams(format!(
                "prior endpoints must satisfy 0 <= a < b <= 1, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Density 1/(b-a) on (a, b).
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.a + rng.random::<f64>() * (self.b - self.a)
    }
}

/// `ln int_a^b theta^p exp(-q theta) dtheta` for the prior support.
fn log_power_exp_integral(
    prior: &UniformPrior,
    p: f64,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    quad::log_integral(|t| p * t.ln() - q * t, prior.a, prior.b, spec)
}

/// `ln m_G(x | r)` where `m_G(x|r) = int p(x | theta, r) dG(theta)`.
pub fn log_marginal(prior: &UniformPrior, r: u64, x: u64, spec: &QuadratureSpec) -> Result<f64> {
    let coeff = log_coeff_a(r, x)?;
    let p = (x - r) as f64;
    let integral = log_power_exp_integral(prior, p, x as f64, spec)?;
    Ok(coeff + integral - prior.width().ln())
}

/// The prior-mixed probability of observing total `x` from `r` ancestors.
/// Strictly positive on the support.
pub fn marginal(prior: &UniformPrior, r: u64, x: u64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(log_marginal(prior, r, x, spec)?.exp())
}

/// `ln sum_(k>=from) m_G(k | r)`: the prior-mixed tail mass.
///
/// Computed as a single integral of the conditional tail against the prior
/// rather than by summing marginals; the marginal tail decays only
/// polynomially when the prior support touches 1, so term-by-term summation
/// is not viable.
pub fn log_marginal_tail(
    prior: &UniformPrior,
    r: u64,
    from: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    log_damped_marginal_tail(prior, r, 0, from, spec)
}

/// `ln sum_(k>=from) int exp(-gamma theta) p(k | theta, r) dG(theta)`.
///
/// With `gamma = 0` this is the plain marginal tail; with `gamma > 0` it is
/// the exponentially damped tail that the truncated Bayes rule needs.
pub fn log_damped_marginal_tail(
    prior: &UniformPrior,
    r: u64,
    gamma: u64,
    from: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if from < r {
        return Err(Error::Domain(format!(
            "tail start {from} lies below the support start r = {r}"
        )));
    }
    // Hoist the per-k coefficients out of the quadrature closure.
    let coeffs: Vec<f64> = (r..from)
        .map(|k| log_coeff_a(r, k))
        .collect::<Result<_>>()?;
    let g = gamma as f64;
    let integral = quad::log_integral(
        |t| {
            let ln_t = t.ln();
            let mut prefix = 0.0;
            for (i, &c) in coeffs.iter().enumerate() {
                let k = r + i as u64;
                prefix += (c + (k - r) as f64 * ln_t - t * k as f64).exp();
            }
            (1.0 - prefix).clamp(0.0, 1.0).ln() - g * t
        },
        prior.a,
        prior.b,
        spec,
    )?;
    Ok(integral - prior.width().ln())
}

/// The posterior expectation `E[exp(-gamma theta) | x]`, always inside
/// `(exp(-gamma b), exp(-gamma a))`.
pub fn posterior_exp_neg(
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
            "x = {x} below support start r = {r}"
        )));
    }
    let p = (x - r) as f64;
    let damped = log_power_exp_integral(prior, p, (x + gamma) as f64, spec)?;
    let plain = log_power_exp_integral(prior, p, x as f64, spec)?;
    Ok((damped - plain).exp())
}

/// The posterior mean `E[theta | x]`, always inside `(a, b)`.
pub fn posterior_mean(prior: &UniformPrior, r: u64, x: u64, spec: &QuadratureSpec) -> Result<f64> {
    if x < r {
        return Err(Error::Domain(format!(
            "x = {x} below support start r = {r}"
        )));
    }
    let p = (x - r) as f64;
    let tilted = log_power_exp_integral(prior, p + 1.0, x as f64, spec)?;
    let plain = log_power_exp_integral(prior, p, x as f64, spec)?;
    Ok((tilted - plain).exp())
}
