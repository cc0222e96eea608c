//! Edge cost functions and the induced path cost `C(p) = Bᵀ c(B p)`.

use crate::error::{check_dim, Error, Result};
use crate::network::IncidenceMatrices;
use crate::uncertainty::FlowBox;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Default tolerance on the sampled monotonicity pairing.
pub const TOL_MONOTONE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeCost {
    /// `slope * f + offset`
    Affine { slope: f64, offset: f64 },
    /// `free_flow * (1 + kappa * (f / capacity)^4)`
    Bpr { free_flow: f64, kappa: f64, capacity: f64 },
}

impl EdgeCost {
    pub fn affine(slope: f64, offset: f64) -> Result<Self> {
        if !(slope.is_finite() && offset.is_finite()) || slope < 0.0 || offset < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "affine cost needs finite slope >= 0 and offset >= 0, got ({slope}, {offset})"
            )));
        }
        Ok(EdgeCost::Affine { slope, offset })
    }

    pub fn bpr(free_flow: f64, kappa: f64, capacity: f64) -> Result<Self> {
        let ok = [free_flow, kappa, capacity].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "BPR cost needs positive parameters, got ({free_flow}, {kappa}, {capacity})"
            )));
        }
        Ok(EdgeCost::Bpr { free_flow, kappa, capacity })
    }

    pub fn eval(&self, f: f64) -> f64 {
        match *self {
            EdgeCost::Affine { slope, offset } => slope * f + offset,
            EdgeCost::Bpr { free_flow, kappa, capacity } => {
                free_flow * (1.0 + kappa * (f / capacity).powi(4))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// One independent cost function per edge.
    Separable(Vec<EdgeCost>),
    /// `c(f) = M f + q`. Monotone iff the symmetric part of `M` is PSD.
    Coupled { matrix: DMatrix<f64>, offset: DVector<f64> },
}

impl CostModel {
    pub fn coupled(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("coupling matrix must be square".into()));
        }
        check_dim(matrix.nrows(), offset.len())?;
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("coupling data must be finite".into()));
        }
        Ok(CostModel::Coupled { matrix, offset })
    }

    /// Every edge costs nothing regardless of flow.
    pub fn zero(num_edges: usize) -> Self {
        CostModel::Separable(vec![EdgeCost::Affine { slope: 0.0, offset: 0.0 }; num_edges])
    }

    pub fn num_edges(&self) -> usize {
        match self {
            CostModel::Separable(costs) => costs.len(),
            CostModel::Coupled { offset, .. } => offset.len(),
        }
    }

    /// Edge cost vector `c(f)` for nonnegative edge flows.
    pub fn edge_costs(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.num_edges(), f.len())?;
        if let Some(v) = f.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidFlow(format!("edge flow {v} is negative or non-finite")));
        }
        Ok(self.edge_costs_unchecked(f))
    }

    fn edge_costs_unchecked(&self, f: &DVector<f64>) -> DVector<f64> {
        match self {
            CostModel::Separable(costs) => {
                DVector::from_iterator(f.len(), costs.iter().zip(f.iter()).map(|(c, &x)| c.eval(x)))
            }
            CostModel::Coupled { matrix, offset } => matrix * f + offset,
        }
    }

    /// Path cost vector `C(p) = Bᵀ c(B p)`.
    pub fn path_costs(&self, inc: &IncidenceMatrices, p: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.num_edges(), inc.num_edges())?;
        let f = inc.edge_flows(p)?;
        Ok(inc.b.tr_mul(&self.edge_costs(&f)?))
    }

    /// `path_costs` for flows already known to be valid (solver inner loop).
    pub(crate) fn path_costs_fast(&self, inc: &IncidenceMatrices, p: &DVector<f64>) -> DVector<f64> {
        let f = &inc.b * p;
        inc.b.tr_mul(&self.edge_costs_unchecked(&f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Smallest sampled `(C(p) - C(r))ᵀ (p - r)`.
    pub min_pairing: f64,
    /// The pair that produced `min_pairing`.
    pub witness: Option<(DVector<f64>, DVector<f64>)>,
    pub passed: bool,
}

/// Samples `trials` pairs uniformly in the flow box and checks the
/// monotonicity pairing of the path cost operator.
pub fn check_monotonicity<R: Rng>(
    model: &CostModel,
    inc: &IncidenceMatrices,
    flow_box: &FlowBox,
    trials: usize,
    rng: &mut R,
) -> Result<MonotonicityReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    check_dim(inc.num_paths(), flow_box.dim())?;
    let mut report = MonotonicityReport { min_pairing: f64::INFINITY, witness: None, passed: true };
    for _ in 0..trials {
        let p = flow_box.sample(rng);
        let r = flow_box.sample(rng);
        let pairing = (model.path_costs(inc, &p)? - model.path_costs(inc, &r)?).dot(&(&p - &r));
        if pairing < report.min_pairing {
            report.min_pairing = pairing;
            report.witness = Some((p, r));
        }
    }
    report.passed = report.min_pairing >= -TOL_MONOTONE;
    Ok(report)
}

/// Largest sampled ratio `|c(f) - c(g)| / |f - g|` over the edge-flow box
/// `[0, f_max]`. A smoke estimate, not a bound.
pub fn estimate_lipschitz<R: Rng>(
    model: &CostModel,
    f_max: &DVector<f64>,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    check_dim(model.num_edges(), f_max.len())?;
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let f = f_max.map(|u| rng.random::<f64>() * u);
        let g = f_max.map(|u| rng.random::<f64>() * u);
        let dist = (&f - &g).norm();
        if dist > 0.0 {
            best = best.max((model.edge_costs(&f)? - model.edge_costs(&g)?).norm() / dist);
        }
    }
    Ok(best)
}
