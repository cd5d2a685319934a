//! Transmission policies for the local-state and genie-aided schemes, and the
//! analytical evaluators of their average transmission probability and
//! throughput.
//!
//! All solvers assume a single channel and no harvesting in the L state.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::markov::{binomial_vector, EhChain};

/// Bisection accuracies for the genie-aided solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Width of the final bracket on the multiplier.
    pub phi: f64,
    /// Width of the final bracket on each per-count probability.
    pub mu: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { phi: 1e-10, mu: 1e-12 }
    }
}

/// Policy using only the node's own harvesting state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalPolicy {
    pub mu_high: f64,
    pub mu_low: f64,
}

impl LocalPolicy {
    /// Long-run per-node transmission probability `pi_H * mu_H`.
    pub fn q_bar(&self, chain: &EhChain) -> f64 {
        chain.pi_high() * self.mu_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Only a lone active node transmits.
    SingleActive,
    /// Power budget binds; probabilities follow the common-multiplier condition.
    Constrained,
    /// Budget is slack; every active node transmits with `1/m`.
    Unconstrained,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SingleActive => "SINGLE_ACTIVE",
            Regime::Constrained => "CONSTRAINED",
            Regime::Unconstrained => "UNCONSTRAINED",
        };
        f.write_str(s)
    }
}

/// Transmission probability of an active node as a function of the number of
/// active nodes `m = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeniePolicy {
    n: usize,
    mu: Vec<f64>,
    regime: Regime,
    phi: f64,
}

impl GeniePolicy {
    /// Builds a policy from `mu[m - 1] = mu_H(m)`.
    ///
    /// Used for arbitrary (possibly suboptimal) policies in evaluation and
    /// search; the regime tag is informational only.
    pub fn from_vec(mu: Vec<f64>, regime: Regime, phi: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("policy needs at least one node"));
        }
        if let Some(bad) = mu.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("policy entry {bad} is not a probability")));
        }
        Ok(Self { n: mu.len(), mu, regime, phi })
    }

    /// Policy that never transmits.
    pub fn silent(n: usize) -> Self {
        Self { n, mu: vec![0.0; n], regime: Regime::SingleActive, phi: 0.0 }
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    /// `mu_H(m)`; zero for `m == 0`.
    pub fn mu(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.mu[m - 1]
        }
    }

    /// `mu_H(1), ..., mu_H(n)`.
    pub fn mu_vec(&self) -> &[f64] {
        &self.mu
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Optimal local-state policy: `mu_H = min{1, lambda_H/P_tx, 1/(n pi_H)}`.
pub fn local_optimal(n: usize, chain: &EhChain) -> Result<LocalPolicy> {
    if n < 1 {
        return Err(invalid("local_optimal requires at least one node"));
    }
    chain.require_silent_low()?;
    let mu_high = 1f64
        .min(chain.lambda_high() / chain.ptx())
        .min(1.0 / (n as f64 * chain.pi_high()));
    Ok(LocalPolicy { mu_high, mu_low: 0.0 })
}

/// `n q (1 - q)^(n-1)`: throughput when every node transmits independently
/// with probability `q_bar`.
pub fn local_throughput(n: usize, q_bar: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * q_bar * (1.0 - q_bar).powi(n as i32 - 1)
}

/// Expected number of successful transmissions in one slot when node `i`
/// transmits with probability `q[i]` on one of `channels` channels chosen
/// uniformly at random.
pub fn instantaneous_throughput(q: &[f64], channels: usize) -> f64 {
    assert!(channels >= 1, "at least one channel is required");
    let b = channels as f64;
    q.iter()
        .enumerate()
        .map(|(i, &qi)| {
            let others: f64 = q
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &qj)| 1.0 - qj / b)
                .product();
            qi * others
        })
        .sum()
}

/// Binomial weights of the number of *other* active nodes seen by an active
/// node: `w[m] = C(n-1, m) pi_H^m pi_L^(n-1-m)`.
fn qbar_weights(n: usize, chain: &EhChain) -> Vec<f64> {
    binomial_vector(n - 1, chain.pi_high())
}

fn qbar_with_weights(weights: &[f64], mu: impl Fn(usize) -> f64) -> f64 {
    weights.iter().enumerate().map(|(m, w)| w * mu(m + 1)).sum()
}

/// Average transmission probability of a node in the H state.
pub fn genie_qbar(policy: &GeniePolicy, chain: &EhChain) -> f64 {
    qbar_with_weights(&qbar_weights(policy.n, chain), |m| policy.mu(m))
}

/// Long-run expected throughput (successes per slot) of a genie policy.
pub fn genie_rbar(policy: &GeniePolicy, chain: &EhChain) -> f64 {
    let weights = binomial_vector(policy.n, chain.pi_high());
    (1..=policy.n)
        .map(|m| {
            let u = policy.mu(m);
            weights[m] * m as f64 * u * (1.0 - u).powi(m as i32 - 1)
        })
        .sum()
}

/// Harvesting level above which the power constraint stops binding:
/// `P_tx / (n pi_H) * (1 - pi_L^n)`.
pub fn lambda_h_max(n: usize, chain: &EhChain) -> f64 {
    let (pi_h, pi_l) = chain.steady_state();
    chain.ptx() / (n as f64 * pi_h) * (1.0 - pi_l.powi(n as i32))
}

/// Harvesting level `P_tx pi_L^(n-1)` below which only a lone active node
/// may transmit.
pub fn single_active_threshold(n: usize, chain: &EhChain) -> f64 {
    chain.ptx() * chain.pi_low().powi(n as i32 - 1)
}

/// Left side of the stationarity condition `(1-u)^(m-2) (1 - m u)`.
pub fn stationarity_lhs(m: usize, u: f64) -> f64 {
    let pow = if m == 2 { 1.0 } else { ((m - 2) as f64 * (-u).ln_1p()).exp() };
    pow * (1.0 - m as f64 * u)
}

/// Solves `(1-u)^(m-2) (1 - m u) = phi` for `u` in `(0, 1/m]` by bisection.
///
/// The left side decreases strictly from 1 at `u = 0` to 0 at `u = 1/m`.
pub fn solve_mu_given_phi(m: usize, phi: f64, eps_mu: f64) -> f64 {
    assert!(m >= 2, "solve_mu_given_phi needs m >= 2");
    debug_assert!((0.0..1.0).contains(&phi));
    if phi == 0.0 {
        return 1.0 / m as f64;
    }
    let (mut lo, mut hi) = (0.0, 1.0 / m as f64);
    while hi - lo >= eps_mu {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stationarity_lhs(m, mid) > phi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn constrained_mu(n: usize, phi: f64, eps_mu: f64) -> Vec<f64> {
    std::iter::once(1.0)
        .chain((2..=n).map(|m| solve_mu_given_phi(m, phi, eps_mu)))
        .collect()
}

/// Finds the multiplier `phi` for which the constrained policy exhausts the
/// power budget exactly, and returns it with the policy vector.
///
/// Only valid strictly inside the constrained regime.
pub fn solve_phi(n: usize, chain: &EhChain, tol: Tolerances) -> Result<(f64, Vec<f64>)> {
    if n < 2 {
        return Err(invalid("the constrained regime needs at least two nodes"));
    }
    let lower = single_active_threshold(n, chain);
    let upper = lambda_h_max(n, chain);
    let lambda = chain.lambda_high();
    if !(lambda > lower && lambda < upper) {
        return Err(invalid(format!(
            "lambda_H = {lambda} is outside the constrained interval ({lower}, {upper})"
        )));
    }
    let budget = 1f64.min(lambda / chain.ptx());
    let weights = qbar_weights(n, chain);

    // the average transmission probability decreases strictly in phi
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo >= tol.phi {
        let mid = 0.5 * (lo + hi);
        let mu = constrained_mu(n, mid, tol.mu);
        if qbar_with_weights(&weights, |m| mu[m - 1]) < budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let mu = constrained_mu(n, phi, tol.mu);
    let residual = (qbar_with_weights(&weights, |m| mu[m - 1]) - budget).abs();
    if !residual.is_finite() || residual > 1e-6 {
        return Err(Error::SolverFailure(format!(
            "multiplier search ended with budget residual {residual:e}"
        )));
    }
    Ok((phi, mu))
}

/// Throughput-optimal policy given the true number of active nodes.
pub fn genie_optimal(n: usize, chain: &EhChain) -> Result<GeniePolicy> {
    genie_optimal_with(n, chain, Tolerances::default())
}

pub fn genie_optimal_with(n: usize, chain: &EhChain, tol: Tolerances) -> Result<GeniePolicy> {
    if n < 1 {
        return Err(invalid("genie_optimal requires at least one node"));
    }
    chain.require_silent_low()?;
    let lambda = chain.lambda_high();
    if lambda <= 0.0 {
        return Err(invalid(format!("lambda_H = {lambda} must be positive")));
    }
    let lower = single_active_threshold(n, chain);
    let upper = lambda_h_max(n, chain);

    // for n = 1 both thresholds equal P_tx up to rounding; no interior regime
    if lambda >= upper || (n == 1 && lambda > lower) {
        let mu = (1..=n).map(|m| 1.0 / m as f64).collect();
        return Ok(GeniePolicy { n, mu, regime: Regime::Unconstrained, phi: 0.0 });
    }
    if lambda <= lower {
        let mut mu = vec![0.0; n];
        mu[0] = (lambda / lower).min(1.0);
        return Ok(GeniePolicy { n, mu, regime: Regime::SingleActive, phi: 0.0 });
    }
    let (phi, mu) = solve_phi(n, chain, tol)?;
    Ok(GeniePolicy { n, mu, regime: Regime::Constrained, phi })
}
