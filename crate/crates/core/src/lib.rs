//! Wardrop equilibria of routing games whose demand polyhedron is uncertain,
//! with scenario-based certificates of probabilistic feasibility for the
//! whole equilibrium set.
//!
//! The usual pipeline is: build a [`network::TrafficNetwork`] and a
//! [`costs::CostModel`], enumerate paths, fix an
//! [`uncertainty::UncertaintyModel`], estimate the nominal equilibrium set
//! with [`equilibrium::estimate_equilibrium_set`], then filter it by sampled
//! scenarios and certify it with [`certificates::certify_k`].

pub mod certificates;
pub mod costs;
pub mod equilibrium;
pub mod error;
pub mod network;
pub mod rng;
pub mod synthetic;
pub mod uncertainty;

pub use error::{Error, Result};
