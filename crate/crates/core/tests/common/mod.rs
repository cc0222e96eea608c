#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use wardrop::costs::{CostModel, EdgeCost};
use wardrop::equilibrium::{EquilibriumEstimate, EquilibriumPoint, Provenance};
use wardrop::network::{braess, build_incidence, enumerate_paths, pigou, IncidenceMatrices, PathSet, TrafficNetwork};
use wardrop::uncertainty::{FlowBox, UncertaintyModel};

pub struct Closed {
    pub net: TrafficNetwork,
    pub paths: PathSet,
    pub inc: IncidenceMatrices,
    pub costs: CostModel,
    pub model: UncertaintyModel,
    pub demand: f64,
}

fn affine(a: f64, q: f64) -> EdgeCost {
    EdgeCost::affine(a, q).unwrap()
}

/// Single OD pair with fixed demand `d`, written as `d_1 ≤ d` and `-d_1 ≤ -d`.
fn fixed_demand(net: TrafficNetwork, costs: CostModel, d: f64, p_max: f64) -> Closed {
    let paths = enumerate_paths(&net, 10, 100).unwrap();
    let inc = build_incidence(&net, &paths);
    let model = UncertaintyModel::new(
        DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        DVector::from_vec(vec![d, -d]),
        0.0,
        FlowBox::uniform(paths.len(), p_max).unwrap(),
    )
    .unwrap();
    Closed { net, paths, inc, costs, model, demand: d }
}

/// `c_1 = f`, `c_2 = 1`, unit demand; equilibrium `(1, 0)`.
pub fn pigou_instance() -> Closed {
    fixed_demand(pigou(), CostModel::Separable(vec![affine(1.0, 0.0), affine(0.0, 1.0)]), 1.0, 2.0)
}

/// Affine Braess network with demand 6; every path costs 9.2 at `(2, 2, 2)`.
pub fn braess_instance() -> Closed {
    // Edge order: 1-2, 1-3, 2-4, 3-4, 2-3.
    let costs = CostModel::Separable(vec![
        affine(1.0, 0.0),
        affine(0.1, 5.0),
        affine(0.1, 5.0),
        affine(1.0, 0.0),
        affine(0.1, 1.0),
    ]);
    fixed_demand(braess(), costs, 6.0, 10.0)
}

/// `p C(p) - d min_r C_r(p)` for a single OD pair: zero exactly at Wardrop
/// equilibria with total flow `d`.
pub fn gap(costs: &CostModel, inc: &IncidenceMatrices, p: &DVector<f64>, d: f64) -> f64 {
    let c = costs.path_costs(inc, p).unwrap();
    p.dot(&c) - d * c.min()
}

/// Zooming grid search for the minimiser of [`gap`] over
/// `{p ≥ 0, Σ p = d}`. Independent of the projection and solver code.
pub fn grid_equilibrium(costs: &CostModel, inc: &IncidenceMatrices, d: f64) -> DVector<f64> {
    let m = inc.num_paths();
    let free = m - 1;
    let n = 21usize;
    let mut center = vec![d / m as f64; free];
    let mut width = d;
    let mut best = f64::INFINITY;
    let mut best_point = center.clone();
    for _ in 0..80 {
        let total = n.pow(free as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut q = Vec::with_capacity(free);
            for c in &center {
                let k = rem % n;
                rem /= n;
                q.push(c - width + 2.0 * width * k as f64 / (n - 1) as f64);
            }
            let last = d - q.iter().sum::<f64>();
            if q.iter().any(|v| *v < 0.0) || last < 0.0 {
                continue;
            }
            let mut p = q.clone();
            p.push(last);
            let p = DVector::from_vec(p);
            let g = gap(costs, inc, &p, d);
            if g < best {
                best = g;
                best_point = q;
            }
        }
        center = best_point.clone();
        width *= 0.5;
    }
    let mut p = best_point.clone();
    p.push(d - best_point.iter().sum::<f64>());
    DVector::from_vec(p)
}

/// A solved-looking estimate from raw points.
pub fn estimate(points: Vec<DVector<f64>>) -> EquilibriumEstimate {
    let cloud: Vec<EquilibriumPoint> = points
        .into_iter()
        .map(|p| EquilibriumPoint { p, residual: 0.0, iterations: 0, converged: true })
        .collect();
    EquilibriumEstimate { base_cloud_size: cloud.len(), cloud, provenance: Provenance::Solved }
}

/// Incidence for `m` single-path OD pairs over `m` private edges.
pub fn identity_incidence(m: usize) -> IncidenceMatrices {
    IncidenceMatrices { b: DMatrix::identity(m, m), h: DMatrix::identity(m, m), path_od: (0..m).collect() }
}
