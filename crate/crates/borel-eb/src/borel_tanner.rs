//! Borel–Tanner distribution numerics and samplers.
//!
//! The Borel–Tanner law with reproduction parameter `theta` in (0,1) and
//! `r >= 1` ancestors is the distribution of the total progeny of a
//! Galton–Watson branching process with Poisson(`theta`) offspring. Its pmf is
//!
//! ```text
//! p(x | theta, r) = a_r(x) * theta^(x-r) * exp(-theta * x),   x = r, r+1, ...
//! a_r(x) = r * x^(x-r-1) / (x-r)!
//! ```
//!
//! All pmf arithmetic is carried out in log space with a log-gamma function
//! for the factorial: `x^(x-r-1)` overflows native floats near `x ~ 150`,
//! well inside the range the risk sums need.

use rand::Rng;

use crate::error::{Error, Result};

/// Population cap for a single branching-process simulation. Subcritical
/// processes terminate almost surely, but draws with `theta` extremely close
/// to 1 can produce astronomically large trees.
pub const PROGENY_CAP: u64 = 10_000_000;

/// The pair `(theta, r)` parameterizing a Borel–Tanner law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtParams {
    theta: f64,
    r: u64,
}

impl BtParams {
    /// Validates `0 < theta < 1` (strict subcriticality) and `r >= 1`.
    pub fn new(theta: f64, r: u64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "theta must lie strictly inside (0, 1), got {theta}"
            )));
        }
        if r == 0 {
            return Err(Error::InvalidParams(
                "r (ancestor count) must be a positive integer".into(),
            ));
        }
        Ok(Self { theta, r })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r(&self) -> u64 {
        self.r
    }
}

/// Truncation width `N`: the truncated law lives on `{r, ..., r+N}` with the
/// whole tail mass collapsed onto the last point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    width: u64,
}

impl TruncationSpec {
    pub fn new(width: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParams(
                "truncation width N must be a positive integer".into(),
            ));
        }
        Ok(Self { width })
    }

    pub fn width(&self) -> u64 {
        self.width
    }
}

/// `ln a_r(x)` where `a_r(x) = r * x^(x-r-1) / (x-r)!`.
///
/// Finite for every `x` up to at least 10^6; `a_r(r) = 1` exactly.
pub fn log_coeff_a(r: u64, x: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidParams("r must be positive".into()));
    }
    if x < r {
        return Err(Error::Domain(format!(
            "x = {x} lies below the support start r = {r}"
        )));
    }
    let k = (x - r) as f64;
    Ok((r as f64).ln() + (k - 1.0) * (x as f64).ln() - libm::lgamma(k + 1.0))
}

/// Log pmf of the Borel–Tanner law at `x >= r`.
pub fn log_pmf(params: &BtParams, x: u64) -> Result<f64> {
    let coeff = log_coeff_a(params.r, x)?;
    let k = (x - params.r) as f64;
    Ok(coeff + k * params.theta.ln() - params.theta * x as f64)
}

/// Pmf of the Borel–Tanner law at `x >= r`.
pub fn pmf(params: &BtParams, x: u64) -> Result<f64> {
    Ok(log_pmf(params, x)?.exp())
}

/// Pmf of the law truncated at width `N`: unchanged on `{r, ..., r+N-1}`,
/// and the whole remaining tail mass at `x = r+N`.
pub fn truncated_pmf(params: &BtParams, trunc: &TruncationSpec, x: u64) -> Result<f64> {
    let top = params.r + trunc.width();
    if x < params.r || x > top {
        return Err(Error::Domain(format!(
            "x = {x} outside the truncated support [{}, {top}]",
            params.r
        )));
    }
    if x < top {
        pmf(params, x)
    } else {
        tail_mass(params, top)
    }
}

/// `P(X >= x0) = 1 - sum_(x=r)^(x0-1) pmf(x)`, clamped to `[0, 1]`.
///
/// The law has no closed-form tail, so the prefix sum is the only route.
pub fn tail_mass(params: &BtParams, x0: u64) -> Result<f64> {
    if x0 < params.r {
        return Err(Error::Domain(format!(
            "x0 = {x0} lies below the support start r = {}",
            params.r
        )));
    }
    let mut prefix = 0.0;
    for x in params.r..x0 {
        prefix += pmf(params, x)?;
    }
    Ok((1.0 - prefix).clamp(0.0, 1.0))
}

/// One Poisson draw by the exponential-product method. Exact, and fast for
/// the small means used here (`mean < 1` always, one offspring law at a time).
fn sample_poisson_unit<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let threshold = (-mean).exp();
    let mut count = 0u64;
    let mut product = 1.0;
    loop {
        product *= rng.random::<f64>();
        if product <= threshold {
            return count;
        }
        count += 1;
    }
}

/// Total progeny of a Galton–Watson process with `r` ancestors and
/// Poisson(`theta`) offspring, simulated generation by generation.
///
/// A pending generation of size `m` produces its children as `m` independent
/// unit Poisson(`theta`) draws, so the cost is linear in the total progeny.
/// The returned total is distributed Borel–Tanner(`theta`, `r`).
pub fn sample_total_progeny<R: Rng + ?Sized>(theta: f64, r: u64, rng: &mut R) -> Result<u64> {
    sample_total_progeny_capped(theta, r, PROGENY_CAP, rng)
}

/// As [`sample_total_progeny`] with an explicit population cap; exceeding the
/// cap is an error rather than a silent truncation.
pub fn sample_total_progeny_capped<R: Rng + ?Sized>(
    theta: f64,
    r: u64,
    cap: u64,
    rng: &mut R,
) -> Result<u64> {
    BtParams::new(theta, r)?;
    let mut total = r;
    let mut pending = r;
    while pending > 0 {
        let mut children = 0u64;
        for _ in 0..pending {
            children += sample_poisson_unit(theta, rng);
            if total + children > cap {
                return Err(Error::SimulationOverflow { cap });
            }
        }
        total += children;
        pending = children;
    }
    Ok(total)
}

/// Inversion sampler: walks the cumulative distribution with on-demand pmf
/// accumulation. Identical in law to [`sample_total_progeny`]; useful as an
/// independent cross-check of the branching simulation.
pub fn sample_inverse<R: Rng + ?Sized>(params: &BtParams, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut x = params.r;
    loop {
        let p = pmf(params, x).expect("x >= r by construction");
        cumulative += p;
        if u < cumulative {
            return x;
        }
        // Past the mode the pmf only decreases, so an underflowed increment
        // means the cumulative sum can never advance; return the current
        // point as the quantile.
        if p == 0.0 && x as f64 >= params.r as f64 / (1.0 - params.theta) {
            return x;
        }
        x += 1;
    }
}
