//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; the page does
//! its own drawing on a canvas.

use ehra::markov::EhChain;
use ehra::policy::{
    genie_optimal, genie_rbar, lambda_h_max, local_optimal, local_throughput, single_active_threshold,
};
use ehra::sim::{trace, Mode, Scheme, SimConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bound on traced slots so the page stays responsive.
pub const MAX_TRACE_SLOTS: u64 = 200_000;

#[derive(Debug, Serialize)]
pub struct PolicyView {
    pub pi_high: f64,
    pub lambda_h_max: f64,
    pub single_active_threshold: f64,
    pub regime: String,
    pub phi: f64,
    pub mu_genie: Vec<f64>,
    pub mu_local: f64,
    pub r_genie: f64,
    pub r_local: f64,
}

#[derive(Debug, Serialize)]
pub struct CurvesView {
    pub lambda_high: Vec<f64>,
    pub avg_harvest: Vec<f64>,
    pub r_local: Vec<f64>,
    pub r_genie: Vec<f64>,
    pub lambda_h_max: f64,
}

#[derive(Debug, Serialize)]
pub struct TraceView {
    pub active: Vec<u32>,
    pub belief_mean: Vec<f64>,
    pub mu: Vec<f64>,
    pub transmissions: Vec<u32>,
    pub throughput: f64,
}

fn chain(p_high: f64, p_low: f64, lambda_high: f64, ptx: f64) -> Result<EhChain, String> {
    EhChain::with_silent_low(p_high, p_low, lambda_high, ptx).map_err(|e| e.to_string())
}

fn nodes(n: u32) -> Result<usize, String> {
    match n {
        1..=200 => Ok(n as usize),
        _ => Err(format!("node count {n} outside 1..=200")),
    }
}

pub fn policy_view(n: u32, p_high: f64, p_low: f64, lambda_high: f64, ptx: f64) -> Result<PolicyView, String> {
    let n = nodes(n)?;
    let c = chain(p_high, p_low, lambda_high, ptx)?;
    let genie = genie_optimal(n, &c).map_err(|e| e.to_string())?;
    let local = local_optimal(n, &c).map_err(|e| e.to_string())?;
    Ok(PolicyView {
        pi_high: c.pi_high(),
        lambda_h_max: lambda_h_max(n, &c),
        single_active_threshold: single_active_threshold(n, &c),
        regime: genie.regime().to_string(),
        phi: genie.phi(),
        mu_genie: genie.mu_vec().to_vec(),
        mu_local: local.mu_high,
        r_genie: genie_rbar(&genie, &c),
        r_local: local_throughput(n, local.q_bar(&c)),
    })
}

/// Analytical throughput of the local and genie-aided schemes for
/// `lambda_H` from `lambda_H,max / points` up to `1.25 lambda_H,max`.
pub fn curves_view(n: u32, p_high: f64, p_low: f64, ptx: f64, points: u32) -> Result<CurvesView, String> {
    let n = nodes(n)?;
    if !(2..=2000).contains(&points) {
        return Err(format!("point count {points} outside 2..=2000"));
    }
    let base = chain(p_high, p_low, 0.0, ptx)?;
    let top = lambda_h_max(n, &base);
    let mut view = CurvesView {
        lambda_high: Vec::new(),
        avg_harvest: Vec::new(),
        r_local: Vec::new(),
        r_genie: Vec::new(),
        lambda_h_max: top,
    };
    for i in 1..=points {
        let lambda = 1.25 * top * i as f64 / points as f64;
        let c = base.with_lambda_high(lambda).map_err(|e| e.to_string())?;
        let genie = genie_optimal(n, &c).map_err(|e| e.to_string())?;
        let local = local_optimal(n, &c).map_err(|e| e.to_string())?;
        view.lambda_high.push(lambda);
        view.avg_harvest.push(c.pi_high() * lambda);
        view.r_local.push(local_throughput(n, local.q_bar(&c)));
        view.r_genie.push(genie_rbar(&genie, &c));
    }
    Ok(view)
}

/// One replication of the Bayesian controller in idealized mode, recording
/// the true active count against the gateway's posterior mean.
pub fn trace_view(
    n: u32,
    p_high: f64,
    p_low: f64,
    lambda_high: f64,
    ptx: f64,
    slots: u32,
    seed: u32,
) -> Result<TraceView, String> {
    let n = nodes(n)?;
    let slots = slots as u64;
    if !(1..=MAX_TRACE_SLOTS).contains(&slots) {
        return Err(format!("slot count {slots} outside 1..={MAX_TRACE_SLOTS}"));
    }
    let c = chain(p_high, p_low, lambda_high, ptx)?;
    let cfg = SimConfig {
        slots,
        burn_in: 0,
        seed: seed as u64,
        replications: 1,
        ..SimConfig::new(n, c, Scheme::Bayesian, Mode::Idealized)
    };
    let records = trace(&cfg).map_err(|e| e.to_string())?;
    let successes = records.iter().filter(|r| r.transmissions == 1).count();
    Ok(TraceView {
        active: records.iter().map(|r| r.active as u32).collect(),
        belief_mean: records.iter().map(|r| r.belief_mean).collect(),
        mu: records.iter().map(|r| r.mu).collect(),
        transmissions: records.iter().map(|r| r.transmissions as u32).collect(),
        throughput: successes as f64 / slots as f64,
    })
}

fn to_json<T: Serialize>(v: Result<T, String>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = geniePolicy)]
pub fn genie_policy(n: u32, p_high: f64, p_low: f64, lambda_high: f64, ptx: f64) -> Result<String, JsError> {
    to_json(policy_view(n, p_high, p_low, lambda_high, ptx))
}

#[wasm_bindgen(js_name = throughputCurves)]
pub fn throughput_curves(n: u32, p_high: f64, p_low: f64, ptx: f64, points: u32) -> Result<String, JsError> {
    to_json(curves_view(n, p_high, p_low, ptx, points))
}

#[wasm_bindgen(js_name = beliefTrace)]
pub fn belief_trace(
    n: u32,
    p_high: f64,
    p_low: f64,
    lambda_high: f64,
    ptx: f64,
    slots: u32,
    seed: u32,
) -> Result<String, JsError> {
    to_json(trace_view(n, p_high, p_low, lambda_high, ptx, slots, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_view_reference_setting() {
        let v = policy_view(20, 0.004, 0.02, 0.15, 1.0).unwrap();
        assert_eq!(v.regime, "CONSTRAINED");
        assert_eq!(v.mu_genie.len(), 20);
        assert_eq!(v.mu_genie[0], 1.0);
        assert!(v.r_genie > v.r_local);
        assert!(policy_view(0, 0.004, 0.02, 0.15, 1.0).is_err());
        assert!(policy_view(20, 0.6, 0.5, 0.15, 1.0).is_err());
    }

    #[test]
    fn curves_flatten_past_lambda_max() {
        let v = curves_view(20, 0.004, 0.02, 1.0, 50).unwrap();
        assert_eq!(v.r_genie.len(), 50);
        assert!(v.r_genie.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let last = *v.r_genie.last().unwrap();
        let flat: Vec<_> = v
            .lambda_high
            .iter()
            .zip(&v.r_genie)
            .filter(|(l, _)| **l >= v.lambda_h_max)
            .map(|(_, r)| *r)
            .collect();
        assert!(flat.iter().all(|r| *r == last));
        assert!(v.r_genie.iter().zip(&v.r_local).all(|(g, l)| g >= l));
    }

    #[test]
    fn trace_is_reproducible() {
        let a = trace_view(10, 0.01, 0.05, 0.2, 1.0, 2000, 3).unwrap();
        let b = trace_view(10, 0.01, 0.05, 0.2, 1.0, 2000, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.active.len(), 2000);
        assert!(trace_view(10, 0.01, 0.05, 0.2, 1.0, 0, 3).is_err());
    }
}
