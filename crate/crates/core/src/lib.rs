//! Joint communication and control over a shared multi-antenna downlink.
//!
//! A base station serves a data user (CU) and a remotely stabilized scalar
//! plant (CD) at the same time. This crate provides the closed-form analysis
//! of that system (steady-state control variance, stability, delay/variance
//! trade-offs under optimal, MRT and ZF beamforming, outage probabilities
//! under Rayleigh fading) together with Monte Carlo estimators that check it.

pub mod channel;
pub mod control;
pub mod error;
pub mod pareto;
pub mod linalg;
pub mod montecarlo;
pub mod outage;
pub mod quadrature;
pub mod rng;
pub mod roots;

pub use error::{Error, Result};
