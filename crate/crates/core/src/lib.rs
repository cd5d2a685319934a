//! Transmission control for slotted random access by energy-harvesting nodes.
//!
//! Each node's harvesting state follows a two-state (L/H) Markov chain and
//! only nodes in H may transmit. The crate provides:
//!
//! - [`markov`]: the harvesting chain and the transition kernel of the number
//!   of active nodes;
//! - [`policy`]: the optimal local-state policy, and the genie-aided policy
//!   that knows the active count, with its analytical throughput;
//! - [`bayes`]: the gateway belief filter over the active count and the
//!   power-matched broadcast probability;
//! - [`sim`]: a Monte Carlo simulator with an idealized and a quantized
//!   battery mode;
//! - [`oracle`]: brute-force references over the joint state space, for tests.

pub mod bayes;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod markov;
pub mod oracle;
pub mod policy;
pub mod sim;

pub use bayes::{
    belief_init, belief_update, control_mu, expected_throughput_belief, obs_likelihood, Belief,
    ControllerState,
};
pub use error::{Error, Result};
pub use markov::{binomial_pmf, count_kernel, sample_next_eh, steady_state, CountKernel, EhChain, EhState};
pub use policy::{
    genie_optimal, genie_qbar, genie_rbar, instantaneous_throughput, lambda_h_max, local_optimal,
    local_throughput, single_active_threshold, solve_mu_given_phi, solve_phi, GeniePolicy, LocalPolicy,
    Regime, Tolerances,
};
pub use sim::{measure_power_constraint, run, Estimate, Mode, Scheme, SimConfig, SimReport, Simulator};
