use super::CloudRows;
use crate::equilibrium::EquilibriumEstimate;
use crate::error::{Error, Result};
use crate::network::IncidenceMatrices;
use crate::rng;
use crate::uncertainty::{UncertaintyModel, TOL_FEASIBLE};
use rayon::prelude::*;

/// Monte-Carlo estimate of the violation probability of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub n_test: usize,
    /// Draws for which some cloud point is infeasible.
    pub violations: usize,
    pub v_hat: f64,
    /// Two-sided 95% Hoeffding half-width, `sqrt(ln(2/0.05) / (2 n))`.
    pub half_width: f64,
}

pub fn hoeffding_half_width(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Max and mean of `v_hat` over repeated experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationSummary {
    pub v_max: f64,
    pub v_avg: f64,
}

pub fn summarize(reports: &[ViolationReport]) -> ViolationSummary {
    if reports.is_empty() {
        return ViolationSummary { v_max: 0.0, v_avg: 0.0 };
    }
    let v_max = reports.iter().map(|r| r.v_hat).fold(0.0, f64::max);
    let v_avg = reports.iter().map(|r| r.v_hat).sum::<f64>() / reports.len() as f64;
    ViolationSummary { v_max, v_avg }
}

/// Draws `n_test` fresh realisations and counts those for which at least one
/// cloud point leaves `P_ω`. A draw is a violation iff some row's largest
/// value over the cloud exceeds its perturbed right-hand side.
pub fn empirical_violation(
    cloud: &EquilibriumEstimate,
    model: &UncertaintyModel,
    inc: &IncidenceMatrices,
    n_test: usize,
    seed: u64,
) -> Result<ViolationReport> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if n_test == 0 {
        return Err(Error::InvalidParameter("n_test must be positive".into()));
    }
    let rows = CloudRows::new(cloud, model, inc, false, TOL_FEASIBLE)?;
    let row_max = rows.row_max();
    let b0 = model.b0();
    let violations = (0..n_test)
        .into_par_iter()
        .filter(|&i| {
            let w = model.draw(seed, rng::PURPOSE_TEST, i);
            row_max.iter().enumerate().any(|(j, v)| v - (b0[j] + w[j]) > TOL_FEASIBLE)
        })
        .count();
    Ok(ViolationReport {
        n_test,
        violations,
        v_hat: violations as f64 / n_test as f64,
        half_width: hoeffding_half_width(n_test, 0.95),
    })
}
