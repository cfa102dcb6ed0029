//! Gauss–Legendre quadrature with log-space stabilization.
//!
//! Every integral the estimators need has the shape
//! `int_a^b exp(g(theta)) dtheta` with a smooth `g` that can span hundreds of
//! orders of magnitude (e.g. `theta^(x-5) * exp(-200 theta)` for `x` near
//! 200). [`log_integral`] therefore factors out the maximum of `g` over the
//! nodes before exponentiating and returns the logarithm of the integral.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Relative agreement demanded of two successive node-doubling passes.
const REL_TOL: f64 = 1e-12;
/// Doubling passes attempted beyond the base node count.
const MAX_REFINEMENTS: usize = 4;

/// Node budget for the quadrature rules.
///
/// Integration starts at `node_count` nodes and doubles until two successive
/// results agree to `1e-12` relative, up to four doublings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    node_count: usize,
}

impl QuadratureSpec {
    pub const MIN_NODES: usize = 16;

    pub fn new(node_count: usize) -> Result<Self> {
        if node_count < Self::MIN_NODES {
            return Err(Error::InvalidParams(format!(
                "node_count must be at least {}, got {node_count}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { node_count })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { node_count: 128 }
    }
}

/// Nodes and weights on [-1, 1].
struct GlRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule(n: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(build_rule(n)))
        .clone()
}

/// Gauss–Legendre nodes and weights by Newton iteration on the Legendre
/// polynomial roots, seeded with the Chebyshev approximation.
fn build_rule(n: usize) -> GlRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = ((i as f64 + 0.75) / (n as f64 + 0.5) * std::f64::consts::PI).cos();
        loop {
            let (p, dp) = legendre_with_derivative(n, z);
            let next = z - p / dp;
            if (next - z).abs() < 1e-15 {
                z = next;
                break;
            }
            z = next;
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GlRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut curr = x;
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * curr - (k - 1) as f64 * prev) / k as f64;
        prev = curr;
        curr = next;
    }
    let dp = n as f64 * (x * curr - prev) / (x * x - 1.0);
    (curr, dp)
}

/// One quadrature pass of `ln int_a^b exp(g(t)) dt` at `n` nodes.
fn log_pass<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, n: usize) -> f64 {
    let rule = rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let values: Vec<f64> = rule.nodes.iter().map(|&z| g(mid + half * z)).collect();
    let g_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if g_max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values
        .iter()
        .zip(rule.weights.iter())
        .map(|(&v, &w)| w * (v - g_max).exp())
        .sum();
    g_max + sum.ln() + half.ln()
}

fn agreed(previous: f64, current: f64) -> bool {
    (previous == f64::NEG_INFINITY && current == f64::NEG_INFINITY)
        || (previous - current).abs() <= REL_TOL
}

/// `ln int_a^b exp(g(t)) dt` with node doubling until two successive passes
/// agree. `g` may return `-inf` (integrand zeros are fine); it must not
/// return NaN.
pub fn log_integral<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParams(format!(
            "integration interval [{a}, {b}] is not a proper finite interval"
        )));
    }
    let mut previous = log_pass(&g, a, b, spec.node_count);
    for pass in 1..=MAX_REFINEMENTS {
        let current = log_pass(&g, a, b, spec.node_count << pass);
        if agreed(previous, current) {
            return Ok(current);
        }
        if pass == MAX_REFINEMENTS {
            return Err(Error::QuadratureNonConvergence { previous, current });
        }
        previous = current;
    }
    unreachable!("refinement loop always returns");
}

/// Linear-scale convenience wrapper around [`log_integral`].
pub fn integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(log_integral(|t| f(t).ln(), a, b, spec)?.exp())
}
