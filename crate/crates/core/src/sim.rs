//! Slot-by-slot Monte Carlo of the network.
//!
//! Idealized mode drops battery state entirely; battery mode tracks every
//! node's charge in energy quanta (one quantum = one slot of transmission).
//! In H a node harvests one quantum with probability `lambda_H / P_tx`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayes::ControllerState;
use crate::error::{invalid, Result};
use crate::markov::EhChain;
use crate::policy::{genie_optimal, local_optimal, GeniePolicy, LocalPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Local,
    Genie,
    Bayesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Idealized,
    Battery,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub chain: EhChain,
    pub scheme: Scheme,
    pub mode: Mode,
    /// Battery capacity in quanta; ignored in idealized mode.
    pub e_max_quanta: u32,
    /// Slots per replication, burn-in included.
    pub slots: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub replications: u32,
}

/// `ceil(10 / (p_H + p_L))`: a handful of harvesting-state mixing times.
pub fn default_burn_in(chain: &EhChain) -> u64 {
    (10.0 / (chain.p_high() + chain.p_low())).ceil() as u64
}

impl SimConfig {
    /// Config with a million slots, 20 replications, default burn-in and seed 1.
    pub fn new(n: usize, chain: EhChain, scheme: Scheme, mode: Mode) -> Self {
        Self {
            n,
            chain,
            scheme,
            mode,
            e_max_quanta: 100,
            slots: 1_000_000,
            burn_in: default_burn_in(&chain),
            seed: 1,
            replications: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("simulation needs at least one node"));
        }
        if self.slots <= self.burn_in {
            return Err(invalid(format!(
                "slots ({}) must exceed burn-in ({})",
                self.slots, self.burn_in
            )));
        }
        if self.replications < 1 {
            return Err(invalid("at least one replication is required"));
        }
        self.chain.require_silent_low()?;
        if self.mode == Mode::Battery {
            if self.e_max_quanta < 1 {
                return Err(invalid("battery capacity must be at least one quantum"));
            }
            if self.chain.lambda_high() > self.chain.ptx() {
                return Err(invalid(format!(
                    "lambda_H / P_tx = {} exceeds 1; the one-quantum harvest model is undefined",
                    self.chain.lambda_high() / self.chain.ptx()
                )));
            }
        }
        Ok(())
    }

    fn measured_slots(&self) -> u64 {
        self.slots - self.burn_in
    }
}

/// Mean across replications with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// `NaN` with a single replication.
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        if samples.len() < 2 {
            return Self { mean, stderr: f64::NAN };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        Self { mean, stderr: (var / k).sqrt() }
    }

    /// `stderr`, with `NaN` read as zero.
    pub fn stderr_or_zero(&self) -> f64 {
        if self.stderr.is_nan() {
            0.0
        } else {
            self.stderr
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr_or_zero().hypot(other.stderr_or_zero())
    }
}

/// Per-node energy bookkeeping over a whole replication (burn-in included).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EnergyLedger {
    pub initial: u64,
    pub final_level: u64,
    pub harvested: u64,
    pub consumed: u64,
    pub overflow: u64,
}

impl EnergyLedger {
    /// `harvested = consumed + overflow + (final - initial)`.
    pub fn balanced(&self) -> bool {
        self.harvested + self.initial == self.consumed + self.overflow + self.final_level
    }
}

/// Measurements of a single replication, burn-in excluded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationOutcome {
    pub throughput: f64,
    pub power_h: f64,
    pub successes: u64,
    pub high_node_slots: u64,
    pub intents: u64,
    pub transmissions: u64,
    pub outage_events: u64,
    pub harvested_quanta: u64,
    pub overflow_quanta: u64,
    pub zero_evidence_resets: u64,
    /// Empty in idealized mode.
    pub ledgers: Vec<EnergyLedger>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scheme: Scheme,
    pub mode: Mode,
    pub n: usize,
    pub e_max_quanta: Option<u32>,
    pub slots: u64,
    pub burn_in: u64,
    pub replications: u32,
    pub seed: u64,
    /// Successes per slot.
    pub throughput: Estimate,
    /// Average power drawn by a node while in H.
    pub power_h: Estimate,
    pub intents: u64,
    pub transmissions: u64,
    pub outage_events: u64,
    pub harvested_quanta: u64,
    pub overflow_quanta: u64,
    pub zero_evidence_resets: u64,
}

impl SimReport {
    /// Fraction of transmission intents suppressed by an empty battery.
    pub fn outage_rate(&self) -> f64 {
        ratio(self.outage_events, self.intents)
    }

    /// Fraction of harvested quanta lost to a full battery.
    pub fn overflow_rate(&self) -> f64 {
        ratio(self.overflow_quanta, self.harvested_quanta)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// One slot as seen by a trace observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub active: usize,
    pub intents: usize,
    pub transmissions: usize,
    /// Probability used by active nodes this slot (the local or broadcast
    /// value; the genie value for the true count).
    pub mu: f64,
    /// Posterior mean of the active count before this slot's observation;
    /// `NaN` for schemes without a belief.
    pub belief_mean: f64,
}

struct Node {
    high: bool,
    battery: u64,
    /// Slot at whose end the harvesting state flips.
    switch_at: u64,
    ledger: EnergyLedger,
}

/// Slots spent in a state left with probability `p` per slot, at least one.
fn sojourn(rng: &mut ChaCha8Rng, ln_stay: f64) -> u64 {
    let u: f64 = rng.gen();
    let k = ((-u).ln_1p() / ln_stay).floor();
    if k.is_finite() && k < (u64::MAX / 4) as f64 {
        1 + k as u64
    } else {
        u64::MAX / 4
    }
}

/// Policies resolved once per configuration and shared by all replications.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    local: LocalPolicy,
    genie: GeniePolicy,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let local = local_optimal(config.n, &config.chain)?;
        let genie = if config.chain.lambda_high() > 0.0 {
            genie_optimal(config.n, &config.chain)?
        } else {
            GeniePolicy::silent(config.n)
        };
        Ok(Self { config, local, genie })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn local_policy(&self) -> &LocalPolicy {
        &self.local
    }

    pub fn genie_policy(&self) -> &GeniePolicy {
        &self.genie
    }

    fn rng_for(&self, replication: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(replication as u64);
        rng
    }

    /// Runs replication `index`; its random stream depends only on the seed
    /// and the index.
    pub fn replicate(&self, index: u32) -> Result<ReplicationOutcome> {
        self.replicate_observed(index, |_| {})
    }

    /// Like [`replicate`](Self::replicate), calling `observe` after every slot
    /// (burn-in included).
    pub fn replicate_observed<F: FnMut(&SlotRecord)>(
        &self,
        index: u32,
        mut observe: F,
    ) -> Result<ReplicationOutcome> {
        let cfg = &self.config;
        let chain = &cfg.chain;
        let mut rng = self.rng_for(index);
        let battery_mode = cfg.mode == Mode::Battery;
        let harvest_p = chain.lambda_high() / chain.ptx();
        let ln_stay_low = (-chain.p_high()).ln_1p();
        let ln_stay_high = (-chain.p_low()).ln_1p();
        let pi_h = chain.pi_high();
        let initial = if battery_mode { (cfg.e_max_quanta / 2) as u64 } else { 0 };
        let cap = cfg.e_max_quanta as u64;

        let mut controller = match cfg.scheme {
            Scheme::Bayesian => Some(ControllerState::new(chain, self.genie.clone())?),
            _ => None,
        };

        let mut nodes: Vec<Node> = (0..cfg.n)
            .map(|_| {
                let high = rng.gen::<f64>() < pi_h;
                let stay = if high { ln_stay_high } else { ln_stay_low };
                let switch_at = sojourn(&mut rng, stay) - 1;
                Node {
                    high,
                    battery: initial,
                    switch_at,
                    ledger: EnergyLedger { initial, ..Default::default() },
                }
            })
            .collect();
        let mut active = nodes.iter().filter(|n| n.high).count();

        let mut out = ReplicationOutcome {
            throughput: 0.0,
            power_h: 0.0,
            successes: 0,
            high_node_slots: 0,
            intents: 0,
            transmissions: 0,
            outage_events: 0,
            harvested_quanta: 0,
            overflow_quanta: 0,
            zero_evidence_resets: 0,
            ledgers: Vec::new(),
        };

        for slot in 0..cfg.slots {
            let measuring = slot >= cfg.burn_in;
            let (mu, belief_mean) = match cfg.scheme {
                Scheme::Local => (self.local.mu_high, f64::NAN),
                Scheme::Genie => (self.genie.mu(active), f64::NAN),
                Scheme::Bayesian => {
                    let ctl = controller.as_mut().expect("controller");
                    let mu = ctl.decide();
                    (mu, ctl.belief().mean())
                }
            };

            let (mut intents, mut transmissions, mut outages) = (0usize, 0usize, 0u64);
            let (mut harvested, mut overflow) = (0u64, 0u64);
            for node in nodes.iter_mut().filter(|n| n.high) {
                if mu > 0.0 && rng.gen::<f64>() < mu {
                    intents += 1;
                    if battery_mode && node.battery == 0 {
                        outages += 1;
                    } else {
                        transmissions += 1;
                        if battery_mode {
                            node.battery -= 1;
                            node.ledger.consumed += 1;
                        }
                    }
                }
                if battery_mode && rng.gen::<f64>() < harvest_p {
                    harvested += 1;
                    node.ledger.harvested += 1;
                    if node.battery == cap {
                        overflow += 1;
                        node.ledger.overflow += 1;
                    } else {
                        node.battery += 1;
                    }
                }
            }

            observe(&SlotRecord { slot, active, intents, transmissions, mu, belief_mean });

            if measuring {
                out.successes += (transmissions == 1) as u64;
                out.high_node_slots += active as u64;
                out.intents += intents as u64;
                out.transmissions += transmissions as u64;
                out.outage_events += outages;
                out.harvested_quanta += harvested;
                out.overflow_quanta += overflow;
            }

            for node in nodes.iter_mut().filter(|n| n.switch_at == slot) {
                node.high = !node.high;
                if node.high {
                    active += 1;
                } else {
                    active -= 1;
                }
                let stay = if node.high { ln_stay_high } else { ln_stay_low };
                node.switch_at = slot + sojourn(&mut rng, stay);
            }

            if let Some(ctl) = controller.as_mut() {
                ctl.observe(transmissions);
            }
        }

        let measured = cfg.measured_slots() as f64;
        out.throughput = out.successes as f64 / measured;
        out.power_h = if out.high_node_slots == 0 {
            0.0
        } else {
            chain.ptx() * out.transmissions as f64 / out.high_node_slots as f64
        };
        out.zero_evidence_resets = controller.map_or(0, |c| c.zero_evidence_resets());
        if battery_mode {
            out.ledgers = nodes
                .into_iter()
                .map(|n| EnergyLedger { final_level: n.battery, ..n.ledger })
                .collect();
        }
        Ok(out)
    }

    /// All replications, aggregated in replication order.
    pub fn run(&self) -> Result<SimReport> {
        let outcomes = self.replications()?;
        let cfg = &self.config;
        let throughput: Vec<f64> = outcomes.iter().map(|o| o.throughput).collect();
        let power: Vec<f64> = outcomes.iter().map(|o| o.power_h).collect();
        let total = |f: fn(&ReplicationOutcome) -> u64| outcomes.iter().map(f).sum::<u64>();
        Ok(SimReport {
            scheme: cfg.scheme,
            mode: cfg.mode,
            n: cfg.n,
            e_max_quanta: (cfg.mode == Mode::Battery).then_some(cfg.e_max_quanta),
            slots: cfg.slots,
            burn_in: cfg.burn_in,
            replications: cfg.replications,
            seed: cfg.seed,
            throughput: Estimate::from_samples(&throughput),
            power_h: Estimate::from_samples(&power),
            intents: total(|o| o.intents),
            transmissions: total(|o| o.transmissions),
            outage_events: total(|o| o.outage_events),
            harvested_quanta: total(|o| o.harvested_quanta),
            overflow_quanta: total(|o| o.overflow_quanta),
            zero_evidence_resets: total(|o| o.zero_evidence_resets),
        })
    }

    #[cfg(feature = "parallel")]
    fn replications(&self) -> Result<Vec<ReplicationOutcome>> {
        use rayon::prelude::*;
        (0..self.config.replications)
            .into_par_iter()
            .map(|r| self.replicate(r))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn replications(&self) -> Result<Vec<ReplicationOutcome>> {
        (0..self.config.replications).map(|r| self.replicate(r)).collect()
    }
}

/// Runs a full simulation.
pub fn run(config: &SimConfig) -> Result<SimReport> {
    Simulator::new(config.clone())?.run()
}

/// Per-slot record of replication 0, for plotting.
pub fn trace(config: &SimConfig) -> Result<Vec<SlotRecord>> {
    let sim = Simulator::new(config.clone())?;
    let mut records = Vec::with_capacity(config.slots as usize);
    sim.replicate_observed(0, |r| records.push(*r))?;
    Ok(records)
}

/// Whether the measured power in H respects the harvesting budget within
/// three standard errors.
pub fn measure_power_constraint(report: &SimReport, chain: &EhChain) -> bool {
    report.power_h.mean <= chain.lambda_high() + 3.0 * report.power_h.stderr_or_zero()
}
