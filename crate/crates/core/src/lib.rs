//! Two-tier mm-wave heterogeneous network with integrated access and
//! backhaul (IAB).
//!
//! The crate has two engines that are meant to be checked against each
//! other:
//!
//! * [`sim`] draws full network snapshots (macro cells, small cells, users
//!   and a germ-grain field of line-segment blockages), performs max biased
//!   power association with spatially correlated LOS/NLOS states and measures
//!   SINR, load and per-user rate for integrated (IRA), orthogonal (ORA) and
//!   fibre-backhauled (WB) resource allocation.
//! * [`analytic`] evaluates the stochastic-geometry expressions for the same
//!   quantities under independent exponential blocking: pathloss processes,
//!   association probabilities, coverage integrals, load PMFs and rate
//!   coverage.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel sweeps live in the `iabsim` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod config;
pub mod geometry;
pub mod numerics;
pub mod sim;

mod error;

pub use config::{interferer_gain_distribution, GainDistribution, LinkType, NetworkConfig, Scheme, Tier};
pub use error::{Error, Result};
