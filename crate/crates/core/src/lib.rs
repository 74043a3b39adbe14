//! Byzantine-resilient quickest change detection with distributed CUSUM.
//!
//! Sensors observe a common signal whose mean shifts at an unknown time.
//! Each detector runs a CUSUM over a subset of sensors and a fusion rule
//! turns the detectors' alarms into one decision. Up to `n_max` sensors may
//! be compromised and report arbitrary data.
//!
//! The crate provides the detector primitives ([`cusum`]), the sensor models
//! ([`signal`]), attacker strategies ([`adversary`]), fusion rules
//! ([`fusion`]), a seeded trial simulator ([`sim`]), closed-form and series
//! results ([`analytics`]) and the experiment driver behind the
//! `byzcusum` binary ([`experiment`]).

pub mod adversary;
pub mod analytics;
pub mod cusum;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod rng;
pub mod signal;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
