//! Gateway-side belief over the number of active nodes, and the
//! power-matched broadcast transmission probability.
//!
//! The gateway only sees how many nodes transmitted in each slot. Its belief
//! is the posterior over the active count; before each slot it broadcasts the
//! probability that makes the expected network power equal to what the
//! genie-aided policy would spend under that belief.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::markov::{binomial_pmf_unchecked, binomial_vector, count_kernel, CountKernel, EhChain};
use crate::policy::GeniePolicy;

/// Below this the observation is treated as impossible.
pub const ZERO_EVIDENCE_FLOOR: f64 = 1e-300;

/// Probability vector over the active count `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Wraps an arbitrary nonnegative vector, normalizing it.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("belief needs at least one entry"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("belief weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(invalid("belief weights sum to zero"));
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / total).collect() })
    }

    /// All mass on `m` active nodes out of `n`.
    pub fn point_mass(n: usize, m: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[m] = 1.0;
        Self { probs }
    }

    pub fn nodes(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Posterior mean of the active count.
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }
}

/// Stationary prior: the active count is `Binomial(n, pi_H)`.
pub fn belief_init(n: usize, chain: &EhChain) -> Belief {
    Belief { probs: binomial_vector(n, chain.pi_high()) }
}

/// Probability that exactly `t` of `m` active nodes transmit when each does
/// so with probability `mu`.
pub fn obs_likelihood(t: usize, mu: f64, m: usize) -> f64 {
    if t > m {
        0.0
    } else {
        binomial_pmf_unchecked(t, m, mu)
    }
}

/// Fills `out[m] = obs_likelihood(t, mu, m)` for `m = 0..out.len()` using the
/// ratio recurrence in `m`.
fn likelihood_column(t: usize, mu: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    out[..t.min(n + 1)].iter_mut().for_each(|v| *v = 0.0);
    if t > n {
        return;
    }
    let q = 1.0 - mu;
    let mut l = mu.powi(t as i32);
    out[t] = l;
    for m in t + 1..=n {
        l *= q * m as f64 / (m - t) as f64;
        out[m] = l;
    }
}

/// Bayes update on the observed transmitter count `t`, followed by the
/// one-slot prediction through `kernel`.
pub fn belief_update(belief: &Belief, mu: f64, t: usize, kernel: &CountKernel) -> Result<Belief> {
    let mut scratch = vec![0.0; belief.probs.len()];
    let mut out = vec![0.0; belief.probs.len()];
    update_into(&belief.probs, mu, t, kernel, &mut scratch, &mut out)?;
    Ok(Belief { probs: out })
}

fn update_into(
    prior: &[f64],
    mu: f64,
    t: usize,
    kernel: &CountKernel,
    weights: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let n = prior.len() - 1;
    if kernel.nodes() != n {
        return Err(invalid(format!(
            "kernel is for {} nodes, belief for {n}",
            kernel.nodes()
        )));
    }
    if t > n {
        return Err(Error::ZeroEvidence);
    }
    likelihood_column(t, mu, weights);
    let mut evidence = 0.0;
    for (w, p) in weights.iter_mut().zip(prior) {
        *w *= p;
        evidence += *w;
    }
    if !(evidence >= ZERO_EVIDENCE_FLOOR) {
        return Err(Error::ZeroEvidence);
    }
    kernel.propagate_into(weights, out);
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

/// Broadcast probability matching the genie policy's expected network power
/// under `belief`: `sum_m b(m) m mu*(m) / sum_m b(m) m`.
pub fn control_mu(belief: &Belief, genie: &GeniePolicy) -> f64 {
    let (num, den) = belief
        .probs
        .iter()
        .enumerate()
        .skip(1)
        .fold((0.0, 0.0), |(num, den), (m, &b)| {
            let w = b * m as f64;
            (num + w * genie.mu(m), den + w)
        });
    if den < ZERO_EVIDENCE_FLOOR {
        0.0
    } else {
        num / den
    }
}

/// Expected successes in a slot when every active node transmits with `mu`
/// and the active count is distributed as `belief`.
pub fn expected_throughput_belief(belief: &Belief, mu: f64) -> f64 {
    belief
        .probs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, &b)| b * m as f64 * mu * (1.0 - mu).powi(m as i32 - 1))
        .sum()
}

/// Mutable gateway controller: belief, count kernel and the genie policy it
/// imitates.
#[derive(Debug, Clone)]
pub struct ControllerState {
    belief: Belief,
    prior: Belief,
    kernel: CountKernel,
    genie: GeniePolicy,
    last_mu: f64,
    zero_evidence_resets: u64,
    scratch: Vec<f64>,
    next: Vec<f64>,
}

impl ControllerState {
    pub fn new(chain: &EhChain, genie: GeniePolicy) -> Result<Self> {
        let n = genie.nodes();
        let kernel = count_kernel(n, chain)?;
        Ok(Self::with_kernel(belief_init(n, chain), kernel, genie))
    }

    /// Controller starting from an explicit belief and kernel; the belief
    /// also becomes the reset target after an impossible observation.
    pub fn with_kernel(belief: Belief, kernel: CountKernel, genie: GeniePolicy) -> Self {
        let len = belief.probs.len();
        Self {
            prior: belief.clone(),
            belief,
            kernel,
            genie,
            last_mu: 0.0,
            zero_evidence_resets: 0,
            scratch: vec![0.0; len],
            next: vec![0.0; len],
        }
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn kernel(&self) -> &CountKernel {
        &self.kernel
    }

    pub fn genie(&self) -> &GeniePolicy {
        &self.genie
    }

    pub fn last_mu(&self) -> f64 {
        self.last_mu
    }

    pub fn zero_evidence_resets(&self) -> u64 {
        self.zero_evidence_resets
    }

    /// Probability to broadcast for the coming slot.
    pub fn decide(&mut self) -> f64 {
        self.last_mu = control_mu(&self.belief, &self.genie);
        self.last_mu
    }

    /// Folds in the number of transmitters seen in the slot just decided.
    ///
    /// An impossible observation resets the belief to the prior followed by a
    /// prediction step and bumps [`zero_evidence_resets`](Self::zero_evidence_resets).
    pub fn observe(&mut self, t: usize) {
        let ok = update_into(
            &self.belief.probs,
            self.last_mu,
            t,
            &self.kernel,
            &mut self.scratch,
            &mut self.next,
        );
        match ok {
            Ok(()) => std::mem::swap(&mut self.belief.probs, &mut self.next),
            Err(_) => {
                self.zero_evidence_resets += 1;
                self.kernel.propagate_into(&self.prior.probs, &mut self.belief.probs);
            }
        }
    }
}
