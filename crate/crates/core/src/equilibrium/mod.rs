//! Equilibrium computation: projection onto the feasible polyhedron,
//! extragradient solves and multi-start set estimates.

mod cloud;
pub mod projection;
mod solver;
mod wardrop;

pub use cloud::{
    cloud_from_csv, cloud_to_csv, dedup_points, estimate_equilibrium_set, filter_cloud, filter_cloud_with_tol,
    hit_and_run, EquilibriumEstimate, Provenance,
};
pub use projection::{Polyhedron, Projection, ProjectionConfig, Projector};
pub use solver::{extragradient, vi_residual, EquilibriumPoint, EquilibriumSolver, SolverConfig};
pub use wardrop::{verify_wardrop, OdWardrop, WardropReport};
