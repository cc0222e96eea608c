//! Scenario-approach certificates for the equilibrium set: the wait-and-judge
//! reliability schedule, support subsamples and Monte-Carlo validation.

mod epsilon;
mod support;
mod violation;

pub use epsilon::{epsilon_schedule, ln_binomial, EpsilonSchedule};
pub use support::{support_subsample, support_subsample_by_definition, SupportResult};
pub use violation::{empirical_violation, hoeffding_half_width, summarize, ViolationReport, ViolationSummary};

use crate::equilibrium::{filter_cloud_with_tol, EquilibriumEstimate};
use crate::error::{check_dim, Error, Result};
use crate::network::IncidenceMatrices;
use crate::rng;
use crate::uncertainty::{sample_scenarios, ScenarioSet, UncertaintyModel, TOL_FEASIBLE};
use nalgebra::DVector;
use rayon::prelude::*;

/// Demand-row values `A₀ H x` of every cloud point, plus whether the point
/// passes the sample-independent rows (flow box, and nominal rows if asked).
pub(crate) struct CloudRows {
    values: Vec<DVector<f64>>,
    base: Vec<bool>,
    b0: DVector<f64>,
    tol: f64,
}

impl CloudRows {
    pub(crate) fn new(
        cloud: &EquilibriumEstimate,
        model: &UncertaintyModel,
        inc: &IncidenceMatrices,
        with_nominal: bool,
        tol: f64,
    ) -> Result<Self> {
        let g = model.path_rows(inc)?;
        let upper = model.flow_box().upper();
        let b0 = model.b0().clone();
        let mut values = Vec::with_capacity(cloud.len());
        let mut base = Vec::with_capacity(cloud.len());
        for p in cloud.points() {
            check_dim(upper.len(), p.len())?;
            let v = &g * p;
            let in_box = p.iter().zip(upper.iter()).all(|(x, u)| -x <= tol && x - u <= tol);
            let nominal_ok = !with_nominal || v.iter().zip(b0.iter()).all(|(a, b)| a - b <= tol);
            base.push(in_box && nominal_ok);
            values.push(v);
        }
        Ok(CloudRows { values, base, b0, tol })
    }

    pub(crate) fn len(&self) -> usize {
        self.values.len()
    }

    fn cuts(&self, x: usize, w: &DVector<f64>) -> bool {
        self.values[x].iter().enumerate().any(|(j, v)| v - (self.b0[j] + w[j]) > self.tol)
    }

    /// For each point, the 0-based indices of the samples that cut it.
    pub(crate) fn violated_samples(&self, samples: &[DVector<f64>]) -> Vec<Vec<usize>> {
        (0..self.len())
            .into_par_iter()
            .map(|x| (0..samples.len()).filter(|&i| self.cuts(x, &samples[i])).collect())
            .collect()
    }

    /// For each point, the first sample that cuts it (`samples.len()` if none).
    pub(crate) fn first_cut(&self, samples: &[DVector<f64>]) -> Vec<usize> {
        (0..self.len())
            .into_par_iter()
            .map(|x| (0..samples.len()).find(|&i| self.cuts(x, &samples[i])).unwrap_or(samples.len()))
            .collect()
    }

    pub(crate) fn row_max(&self) -> DVector<f64> {
        let mut out = DVector::from_element(self.b0.len(), f64::NEG_INFINITY);
        for v in &self.values {
            out.zip_apply(v, |m, x| *m = m.max(x));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub k: usize,
    pub iota: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub statement: String,
}

/// The a-posteriori bound `P^K{V(S) > ε(ι)} ≤ β` for an observed support size.
pub fn certificate(iota: usize, sched: &EpsilonSchedule) -> Result<Certificate> {
    let epsilon = sched.epsilon(iota)?;
    let statement = format!(
        "With K = {k} scenarios and {iota} of support, the probability (over the draw of the \
         K scenarios) that the equilibrium set has violation probability above {epsilon:.6} \
         is at most {beta:e}.",
        k = sched.k(),
        beta = sched.beta()
    );
    Ok(Certificate { k: sched.k(), iota, epsilon, beta: sched.beta(), statement })
}

/// One repetition of the certify-and-validate pipeline at a fixed `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedRun {
    pub repeat: usize,
    pub scenario_seed: u64,
    pub iota: usize,
    pub epsilon: f64,
    pub filtered_size: usize,
    pub violation: ViolationReport,
}

/// Repetitions at one `K`, aggregated as a certificate table row.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub k: usize,
    /// Largest support size over the repetitions.
    pub iota: usize,
    /// `ε(iota)`, the least favourable certificate over the repetitions.
    pub epsilon: f64,
    pub beta: f64,
    pub v_max: f64,
    pub v_avg: f64,
    pub n_test: usize,
    pub seed: u64,
    pub runs: Vec<CertifiedRun>,
}

impl CertificateRow {
    /// Whether every run's estimate lies below its own certificate.
    pub fn bound_holds(&self) -> bool {
        self.runs.iter().all(|r| r.violation.v_hat <= r.epsilon)
    }
}

/// Seed of the scenario stream used by repetition `repeat`.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    rng::derive_seed(seed, rng::PURPOSE_REPEAT, repeat as u64)
}

/// For each repetition: draw `K` scenarios, filter the nominal cloud, find
/// the support subsample, certify with `ε(ι)` and validate on `n_test`
/// fresh draws. `K = 0` certifies the nominal cloud itself with `ε = 1`.
#[allow(clippy::too_many_arguments)]
pub fn certify_k(
    nominal_cloud: &EquilibriumEstimate,
    model: &UncertaintyModel,
    inc: &IncidenceMatrices,
    k: usize,
    beta: f64,
    n_test: usize,
    repeats: usize,
    seed: u64,
) -> Result<CertificateRow> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be positive".into()));
    }
    let sched = if k > 0 { Some(epsilon_schedule(k, beta)?) } else { None };
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    let mut runs = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let scenario_seed = repeat_seed(seed, r);
        let set = sample_scenarios(model, k, scenario_seed);
        let filtered = filter_cloud_with_tol(nominal_cloud, &set, inc, TOL_FEASIBLE)?;
        if filtered.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let (iota, epsilon) = match &sched {
            Some(s) => {
                let support = support_subsample(nominal_cloud, &set, inc, TOL_FEASIBLE)?;
                (support.iota, s.epsilon(support.iota)?)
            }
            None => (0, 1.0),
        };
        let violation = empirical_violation(&filtered, model, inc, n_test, scenario_seed)?;
        runs.push(CertifiedRun { repeat: r, scenario_seed, iota, epsilon, filtered_size: filtered.len(), violation });
    }
    let iota = runs.iter().map(|r| r.iota).max().unwrap_or(0);
    let epsilon = match &sched {
        Some(s) => s.epsilon(iota)?,
        None => 1.0,
    };
    let summary = summarize(&runs.iter().map(|r| r.violation.clone()).collect::<Vec<_>>());
    Ok(CertificateRow {
        k,
        iota,
        epsilon,
        beta,
        v_max: summary.v_max,
        v_avg: summary.v_avg,
        n_test,
        seed,
        runs,
    })
}

/// Normalised cardinality `|S̃_{ω_K}| / |S̃_{ω_0}|` at one `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageRow {
    pub k: usize,
    pub mean: f64,
    /// Sample standard deviation over repetitions (0 for a single run).
    pub std: f64,
    /// One ratio per repetition.
    pub runs: Vec<f64>,
}

/// Shrinkage of the filtered cloud as scenarios accumulate. Every
/// repetition uses one scenario stream, so each per-run curve is a prefix
/// sequence and therefore nonincreasing. Points outside the nominal set are
/// ignored.
pub fn shrinkage_curve(
    nominal_cloud: &EquilibriumEstimate,
    model: &UncertaintyModel,
    inc: &IncidenceMatrices,
    k_grid: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ShrinkageRow>> {
    if nominal_cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let rows = CloudRows::new(nominal_cloud, model, inc, true, TOL_FEASIBLE)?;
    let base_count = rows.base.iter().filter(|b| **b).count();
    if base_count == 0 {
        return Err(Error::EmptyCloud);
    }
    let k_max = k_grid.iter().copied().max().unwrap_or(0);
    let per_run: Vec<Vec<f64>> = (0..repeats)
        .map(|r| {
            let set = sample_scenarios(model, k_max, repeat_seed(seed, r));
            let first = rows.first_cut(set.samples());
            k_grid
                .iter()
                .map(|&k| {
                    let alive = (0..rows.len()).filter(|&x| rows.base[x] && first[x] >= k).count();
                    alive as f64 / base_count as f64
                })
                .collect()
        })
        .collect();
    Ok(k_grid
        .iter()
        .enumerate()
        .map(|(g, &k)| {
            let runs: Vec<f64> = per_run.iter().map(|run| run[g]).collect();
            let n = runs.len() as f64;
            let mean = if runs.is_empty() { 0.0 } else { runs.iter().sum::<f64>() / n };
            let std = if runs.len() > 1 {
                (runs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            ShrinkageRow { k, mean, std, runs }
        })
        .collect())
}

/// Scenario set of repetition `repeat` at size `k`, matching [`certify_k`]
/// and [`shrinkage_curve`].
pub fn repeat_scenarios(model: &UncertaintyModel, k: usize, seed: u64, repeat: usize) -> ScenarioSet {
    sample_scenarios(model, k, repeat_seed(seed, repeat))
}
