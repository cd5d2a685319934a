//! Brute-force ground truth over the joint `2^n` harvesting configuration
//! space. Only for small networks; used by tests and the acceptance suite.
//!
//! Nothing here calls into the closed-form evaluators, the count kernel or
//! the belief recursion it is meant to check.

use crate::error::{invalid, Error, Result};
use crate::markov::EhChain;

pub const MAX_ENUMERATION_NODES: usize = 12;
pub const MAX_FILTER_NODES: usize = 10;
pub const MAX_GRID_NODES: usize = 4;

/// Distribution over joint configurations; bit `i` of the index is set iff
/// node `i` is in H.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    n: usize,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n > MAX_FILTER_NODES {
            return Err(invalid(format!("joint distribution limited to {MAX_FILTER_NODES} nodes")));
        }
        if probs.len() != 1 << n {
            return Err(invalid("joint distribution must have 2^n entries"));
        }
        Ok(Self { n, probs })
    }

    /// Each node independently in H with its stationary probability.
    pub fn stationary(n: usize, chain: &EhChain) -> Result<Self> {
        let (pi_h, pi_l) = chain.steady_state();
        let probs = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { pi_h } else { pi_l })
                    .product()
            })
            .collect();
        Self::new(n, probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, vec![1.0 / (1usize << n) as f64; 1 << n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Distribution of the number of nodes in H.
    pub fn count_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (mask, p) in self.probs.iter().enumerate() {
            out[mask.count_ones() as usize] += p;
        }
        out
    }
}

/// Probability that node `i` in configuration `from` moves to its state in `to`.
fn node_transition(chain: &EhChain, from_high: bool, to_high: bool) -> f64 {
    match (from_high, to_high) {
        (false, true) => chain.p_high(),
        (false, false) => 1.0 - chain.p_high(),
        (true, false) => chain.p_low(),
        (true, true) => 1.0 - chain.p_low(),
    }
}

/// Distribution of the number of successes among `k` independent
/// Bernoulli(`mu`) transmitters, built node by node.
fn transmitter_count_dp(k: usize, mu: f64) -> Vec<f64> {
    let mut dist = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; dist.len() + 1];
        for (j, p) in dist.iter().enumerate() {
            next[j] += p * (1.0 - mu);
            next[j + 1] += p * mu;
        }
        dist = next;
    }
    dist
}

/// Stationary average transmission probability in H and expected throughput
/// of a count-indexed policy, by enumeration of all joint configurations.
///
/// `mu[m - 1]` is the probability used by every active node when `m` nodes
/// are active.
pub fn enumerate_qbar_rbar(n: usize, chain: &EhChain, mu: &[f64]) -> Result<(f64, f64)> {
    if n == 0 || n > MAX_ENUMERATION_NODES {
        return Err(invalid(format!("enumeration supports 1..={MAX_ENUMERATION_NODES} nodes")));
    }
    if mu.len() != n {
        return Err(invalid("policy length must equal the node count"));
    }
    let (pi_h, pi_l) = chain.steady_state();
    let (mut tx_and_node0_high, mut node0_high, mut rbar) = (0.0, 0.0, 0.0);
    for mask in 0usize..1 << n {
        let weight: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { pi_h } else { pi_l }).product();
        let active = mask.count_ones() as usize;
        if active == 0 {
            continue;
        }
        let u = mu[active - 1];
        if mask & 1 == 1 {
            node0_high += weight;
            tx_and_node0_high += weight * u;
        }
        // exactly one of the active nodes transmits
        let mut successes = 0.0;
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            let others: f64 = (0..n)
                .filter(|&j| j != i && mask >> j & 1 == 1)
                .map(|_| 1.0 - u)
                .product();
            successes += u * others;
        }
        rbar += weight * successes;
    }
    Ok((tx_and_node0_high / node0_high, rbar))
}

/// Exact Bayes step on the joint space: condition on `t` transmitters, then
/// apply the per-node independent harvesting transition.
pub fn joint_filter_step(dist: &JointDist, chain: &EhChain, mu: f64, t: usize) -> Result<JointDist> {
    let n = dist.n;
    let likelihood: Vec<f64> = (0..=n)
        .map(|k| transmitter_count_dp(k, mu).get(t).copied().unwrap_or(0.0))
        .collect();
    let mut posterior: Vec<f64> = dist
        .probs
        .iter()
        .enumerate()
        .map(|(mask, p)| p * likelihood[mask.count_ones() as usize])
        .collect();
    let evidence: f64 = posterior.iter().sum();
    if !(evidence >= crate::bayes::ZERO_EVIDENCE_FLOOR) {
        return Err(Error::ZeroEvidence);
    }
    posterior.iter_mut().for_each(|p| *p /= evidence);

    let mut next = vec![0.0; 1 << n];
    for (from, &p) in posterior.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (to, slot) in next.iter_mut().enumerate() {
            let trans: f64 = (0..n)
                .map(|i| node_transition(chain, from >> i & 1 == 1, to >> i & 1 == 1))
                .product();
            *slot += p * trans;
        }
    }
    JointDist::new(n, next)
}

/// Exhaustive search over `mu_H(m)` on the grid `{0, step, ..., 1}` for the
/// best throughput under the average power constraint in H.
///
/// Returns the best policy and its throughput. Feasibility allows `1e-12`
/// slack so grid points on the budget boundary are kept.
pub fn grid_search_genie(n: usize, chain: &EhChain, step: f64) -> Result<(Vec<f64>, f64)> {
    if n == 0 || n > MAX_GRID_NODES {
        return Err(invalid(format!("grid search supports 1..={MAX_GRID_NODES} nodes")));
    }
    if !(0.01..=1.0).contains(&step) {
        return Err(invalid(format!("grid step {step} must lie in [0.01, 1]")));
    }
    let budget = 1f64.min(chain.lambda_high() / chain.ptx()) + 1e-12;
    let points = (1.0 / step).round() as usize;
    let grid: Vec<f64> = (0..=points).map(|i| (i as f64 * step).min(1.0)).collect();

    // per-count contributions to the constraint and to the throughput,
    // obtained by enumerating configurations with m active nodes
    let (pi_h, pi_l) = chain.steady_state();
    let mut p_count = vec![0.0; n + 1];
    let mut p_count_node0 = vec![0.0; n + 1];
    for mask in 0usize..1 << n {
        let w: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { pi_h } else { pi_l }).product();
        let m = mask.count_ones() as usize;
        p_count[m] += w;
        if mask & 1 == 1 {
            p_count_node0[m] += w;
        }
    }
    let q_coef: Vec<f64> = (1..=n).map(|m| p_count_node0[m] / pi_h).collect();
    let q_table: Vec<Vec<f64>> = q_coef.iter().map(|c| grid.iter().map(|u| c * u).collect()).collect();
    let r_table: Vec<Vec<f64>> = (1..=n)
        .map(|m| {
            grid.iter()
                .map(|&u| p_count[m] * transmitter_count_dp(m, u)[1])
                .collect()
        })
        .collect();

    // running argmax over the last coordinate, so the innermost loop becomes
    // a lookup of the largest feasible grid index
    let last = &r_table[n - 1];
    let mut prefix_best = Vec::with_capacity(last.len());
    let mut arg = 0;
    for (i, &r) in last.iter().enumerate() {
        if r > last[arg] {
            arg = i;
        }
        prefix_best.push(arg);
    }

    let ctx = Search { q_table: &q_table, r_table: &r_table, prefix_best: &prefix_best, budget };
    let mut best = (vec![0usize; n], 0.0f64);
    let mut idx = vec![0usize; n];
    ctx.descend(0, 0.0, 0.0, &mut idx, &mut best);
    let mu = best.0.iter().map(|&i| grid[i]).collect();
    Ok((mu, best.1))
}

struct Search<'a> {
    q_table: &'a [Vec<f64>],
    r_table: &'a [Vec<f64>],
    prefix_best: &'a [usize],
    budget: f64,
}

impl Search<'_> {
    fn descend(&self, depth: usize, q: f64, r: f64, idx: &mut Vec<usize>, best: &mut (Vec<usize>, f64)) {
        let row = &self.q_table[depth];
        // the constraint term grows with the grid index
        let feasible = row.partition_point(|&dq| q + dq <= self.budget);
        if feasible == 0 {
            return;
        }
        if depth + 1 == self.q_table.len() {
            let i = self.prefix_best[feasible - 1];
            let total = r + self.r_table[depth][i];
            if total > best.1 {
                idx[depth] = i;
                *best = (idx.clone(), total);
            }
            return;
        }
        for i in 0..feasible {
            idx[depth] = i;
            self.descend(depth + 1, q + row[i], r + self.r_table[depth][i], idx, best);
        }
    }
}
