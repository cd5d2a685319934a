//! Two-state (L/H) energy-harvesting chain and the induced process on the
//! number of active nodes.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Harvesting state of a single node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EhState {
    Low,
    High,
}

/// Parameters of the i.i.d. per-node Markov harvesting process.
///
/// Validated on construction: `0 < p_high`, `0 < p_low`, `p_high + p_low < 1`,
/// `lambda_high >= lambda_low >= 0` and `ptx > 0`. The degenerate
/// `lambda_high == lambda_low == 0` case (no harvesting at all) is accepted so
/// that a silent network can be described and simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhChain {
    p_high: f64,
    p_low: f64,
    lambda_high: f64,
    lambda_low: f64,
    ptx: f64,
}

impl EhChain {
    pub fn new(p_high: f64, p_low: f64, lambda_high: f64, lambda_low: f64, ptx: f64) -> Result<Self> {
        let finite = [p_high, p_low, lambda_high, lambda_low, ptx].iter().all(|v| v.is_finite());
        if !finite {
            return Err(invalid("chain parameters must be finite"));
        }
        if p_high <= 0.0 || p_low <= 0.0 {
            return Err(invalid(format!(
                "transition probabilities must be positive (p_H = {p_high}, p_L = {p_low})"
            )));
        }
        if p_high + p_low >= 1.0 {
            return Err(invalid(format!(
                "chain must have positive memory: p_H + p_L = {} >= 1",
                p_high + p_low
            )));
        }
        if lambda_low < 0.0 {
            return Err(invalid(format!("lambda_L = {lambda_low} is negative")));
        }
        let degenerate = lambda_high == 0.0 && lambda_low == 0.0;
        if lambda_high <= lambda_low && !degenerate {
            return Err(invalid(format!(
                "lambda_H = {lambda_high} must exceed lambda_L = {lambda_low}"
            )));
        }
        if ptx <= 0.0 {
            return Err(invalid(format!("transmission power P_tx = {ptx} must be positive")));
        }
        Ok(Self { p_high, p_low, lambda_high, lambda_low, ptx })
    }

    /// Chain with `lambda_L = 0`, the only case the policy solvers handle.
    pub fn with_silent_low(p_high: f64, p_low: f64, lambda_high: f64, ptx: f64) -> Result<Self> {
        Self::new(p_high, p_low, lambda_high, 0.0, ptx)
    }

    /// Same transition structure with a different harvesting level in H.
    pub fn with_lambda_high(&self, lambda_high: f64) -> Result<Self> {
        Self::new(self.p_high, self.p_low, lambda_high, self.lambda_low, self.ptx)
    }

    pub fn p_high(&self) -> f64 {
        self.p_high
    }

    pub fn p_low(&self) -> f64 {
        self.p_low
    }

    pub fn lambda_high(&self) -> f64 {
        self.lambda_high
    }

    pub fn lambda_low(&self) -> f64 {
        self.lambda_low
    }

    pub fn ptx(&self) -> f64 {
        self.ptx
    }

    /// Stationary probability of the H state.
    pub fn pi_high(&self) -> f64 {
        self.steady_state().0
    }

    /// Stationary probability of the L state, `1 - pi_high()`.
    pub fn pi_low(&self) -> f64 {
        self.steady_state().1
    }

    /// Stationary distribution `(pi_H, pi_L)`; `pi_L` is taken as `1 - pi_H`
    /// so the pair sums to one exactly.
    pub fn steady_state(&self) -> (f64, f64) {
        let pi_h = self.p_high / (self.p_high + self.p_low);
        (pi_h, 1.0 - pi_h)
    }

    /// Fails unless `lambda_L == 0`.
    pub(crate) fn require_silent_low(&self) -> Result<()> {
        if self.lambda_low != 0.0 {
            return Err(invalid(format!(
                "only lambda_L = 0 is supported by the policy solvers (got {})",
                self.lambda_low
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`EhChain::steady_state`].
pub fn steady_state(chain: &EhChain) -> (f64, f64) {
    chain.steady_state()
}

/// One step of a node's harvesting state driven by a uniform draw `u` in `[0, 1)`.
///
/// From L the node moves to H iff `u < p_H`; from H it moves to L iff `u < p_L`.
pub fn sample_next_eh(state: EhState, chain: &EhChain, u: f64) -> EhState {
    match state {
        EhState::Low if u < chain.p_high => EhState::High,
        EhState::Low => EhState::Low,
        EhState::High if u < chain.p_low => EhState::Low,
        EhState::High => EhState::High,
    }
}

/// `ln C(n, k)` by direct summation; exact enough (few ulps per term) for
/// the `n` used here.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// Binomial probability mass `C(n, k) p^k (1-p)^(n-k)`, evaluated in the log
/// domain so it stays finite for `n` in the thousands.
pub fn binomial_pmf(k: usize, n: usize, p: f64) -> Result<f64> {
    if k > n {
        return Err(invalid(format!("binomial_pmf: k = {k} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("binomial_pmf: p = {p} is not a probability")));
    }
    Ok(binomial_pmf_unchecked(k, n, p))
}

pub(crate) fn binomial_pmf_unchecked(k: usize, n: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    ln.exp()
}

/// The full `Binomial(n, p)` probability vector, indices `0..=n`.
pub fn binomial_vector(n: usize, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial_pmf_unchecked(k, n, p)).collect()
}

/// Row-stochastic transition matrix of the active-node count.
///
/// Entry `(from, to)` is `P(N_{H,k+1} = to | N_{H,k} = from)`; it does not
/// depend on the transmission policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CountKernel {
    n: usize,
    matrix: Vec<f64>,
}

impl CountKernel {
    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix[from * (self.n + 1) + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let w = self.n + 1;
        &self.matrix[from * w..(from + 1) * w]
    }

    /// `dist * P`, the one-step prediction of a count distribution.
    pub fn propagate(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        self.propagate_into(dist, &mut out);
        out
    }

    pub(crate) fn propagate_into(&self, dist: &[f64], out: &mut [f64]) {
        debug_assert_eq!(dist.len(), self.n + 1);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (from, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &k) in out.iter_mut().zip(self.row(from)) {
                *o += w * k;
            }
        }
    }
}

/// Builds the count transition kernel for `n` nodes.
///
/// With `m'` currently active, `x` of them switch H→L and `x + m - m'` of the
/// `n - m'` inactive ones switch L→H.
pub fn count_kernel(n: usize, chain: &EhChain) -> Result<CountKernel> {
    if n < 1 {
        return Err(invalid("count_kernel requires at least one node"));
    }
    let (ph, pl) = (chain.p_high(), chain.p_low());
    let (ln_ph, ln_qh) = (ph.ln(), (-ph).ln_1p());
    let (ln_pl, ln_ql) = (pl.ln(), (-pl).ln_1p());
    let w = n + 1;
    let mut matrix = vec![0.0; w * w];
    for from in 0..=n {
        for to in 0..=n {
            let lo = from.saturating_sub(to);
            let hi = from.min(n - to);
            let mut acc = 0.0;
            for x in lo..=hi {
                // x + to - from newly active nodes among the n - from inactive ones
                let y = x + to - from;
                let ln_term = ln_choose(from, x)
                    + ln_choose(n - from, y)
                    + x as f64 * ln_pl
                    + (from - x) as f64 * ln_ql
                    + y as f64 * ln_ph
                    + (n - to - x) as f64 * ln_qh;
                acc += ln_term.exp();
            }
            matrix[from * w + to] = acc;
        }
    }
    Ok(CountKernel { n, matrix })
}
