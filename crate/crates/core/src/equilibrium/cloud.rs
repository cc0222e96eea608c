//! Finite point-cloud estimates of the equilibrium set.

use super::projection::Polyhedron;
use super::solver::{EquilibriumPoint, EquilibriumSolver, SolverConfig};
use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::network::IncidenceMatrices;
use crate::rng;
use crate::uncertainty::{ScenarioSet, TOL_FEASIBLE};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Solved,
    FilteredFromNominal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumEstimate {
    /// Distinct equilibria in lexicographic order of `p`.
    pub cloud: Vec<EquilibriumPoint>,
    /// Size of the cloud this one was filtered from (its own size if solved).
    pub base_cloud_size: usize,
    pub provenance: Provenance,
}

impl EquilibriumEstimate {
    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// `|cloud| / base_cloud_size`.
    pub fn normalized_cardinality(&self) -> f64 {
        if self.base_cloud_size == 0 {
            0.0
        } else {
            self.cloud.len() as f64 / self.base_cloud_size as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.cloud.iter().map(|e| &e.p)
    }
}

pub(crate) fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Sorts lexicographically and keeps a point only if it is farther than
/// `radius` from every point already kept.
pub fn dedup_points(mut points: Vec<EquilibriumPoint>, radius: f64) -> Vec<EquilibriumPoint> {
    points.sort_by(|a, b| lex_cmp(&a.p, &b.p));
    let mut kept: Vec<EquilibriumPoint> = Vec::with_capacity(points.len());
    'next: for cand in points {
        // Kept points are sorted on the first coordinate, so only a window
        // within `radius` of it can collide.
        for prev in kept.iter().rev() {
            if !cand.p.is_empty() && cand.p[0] - prev.p[0] > radius {
                break;
            }
            if (&cand.p - &prev.p).norm() <= radius {
                continue 'next;
            }
        }
        kept.push(cand);
    }
    kept
}

/// An approximately uniform point of `region` after `steps` hit-and-run
/// moves from `center`.
pub fn hit_and_run<R: Rng>(region: &Polyhedron, center: &DVector<f64>, steps: usize, rng: &mut R) -> DVector<f64> {
    let n = region.dim();
    let g = region.rows();
    let mut z = center.clone();
    let mut gz = g * &z;
    for _ in 0..steps {
        let d = DVector::<f64>::from_iterator(n, (0..n).map(|_| rng.sample(StandardNormal)));
        let gd = g * &d;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..n {
            let u = region.upper()[j];
            if d[j] > 0.0 {
                hi = hi.min((u - z[j]).max(0.0) / d[j]);
                lo = lo.max(-z[j].max(0.0) / d[j]);
            } else if d[j] < 0.0 {
                hi = hi.min(-z[j].max(0.0) / d[j]);
                lo = lo.max((u - z[j]).max(0.0) / d[j]);
            }
        }
        for i in 0..g.nrows() {
            let slack = (region.rhs()[i] - gz[i]).max(0.0);
            if gd[i] > 0.0 {
                hi = hi.min(slack / gd[i]);
            } else if gd[i] < 0.0 {
                lo = lo.max(slack / gd[i]);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            continue;
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        z.axpy(t, &d, 1.0);
        gz.axpy(t, &gd, 1.0);
    }
    z.map(|v| v.max(0.0)).zip_map(region.upper(), |v, u| v.min(u))
}

/// A feasible point away from the boundary: the mean of projections of a
/// few random box points.
fn interior_point(region: &Polyhedron, seed: u64) -> Result<DVector<f64>> {
    let mut rng = rng::stream(seed, rng::PURPOSE_STARTS, u64::MAX);
    let mut acc = DVector::zeros(region.dim());
    let k = 8;
    for _ in 0..k {
        let x = region.upper().map(|u| rng.random::<f64>() * u);
        acc += region.project(&x)?;
    }
    Ok(acc / k as f64)
}

/// Multi-start equilibrium-set estimate: extragradient from `n_starts`
/// points drawn inside the nominal polyhedron, keeping converged distinct
/// solutions. Deterministic in `seed`.
pub fn estimate_equilibrium_set(
    model: &CostModel,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<EquilibriumEstimate> {
    let solver = EquilibriumSolver::for_scenarios(model, set, inc, *cfg)?;
    let nominal = Polyhedron::from_scenarios(&ScenarioSet::nominal(set.model()), inc)?;
    let center = interior_point(&nominal, seed)?;
    let results: Vec<Result<EquilibriumPoint>> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, rng::PURPOSE_STARTS, i as u64);
            let mut start = hit_and_run(&nominal, &center, cfg.walk_steps, &mut rng);
            if start == center {
                // No chord has positive length: the region is flat (equality
                // rows), so spread the starts by projection instead.
                start = nominal.project(&nominal.upper().map(|u| rng.random::<f64>() * u))?;
            }
            solver.solve_from(&start)
        })
        .collect();
    let mut converged = Vec::new();
    for r in results {
        let point = r?;
        if point.converged {
            converged.push(point);
        }
    }
    if converged.is_empty() {
        return Err(Error::NoConvergedPoints);
    }
    let cloud = dedup_points(converged, cfg.dedup_radius);
    Ok(EquilibriumEstimate { base_cloud_size: cloud.len(), cloud, provenance: Provenance::FilteredFromNominal }
        .with_provenance(Provenance::Solved))
}

impl EquilibriumEstimate {
    fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Subcloud feasible for every row of `set`. Under the filtering identity
/// `S_{ω_{K+1}} = S_{ω_K} ∩ P_{ω⁽ᴷ⁺¹⁾}` this estimates the equilibrium set of
/// the larger sample.
pub fn filter_cloud(
    est: &EquilibriumEstimate,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
) -> Result<EquilibriumEstimate> {
    filter_cloud_with_tol(est, set, inc, TOL_FEASIBLE)
}

pub fn filter_cloud_with_tol(
    est: &EquilibriumEstimate,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    tol: f64,
) -> Result<EquilibriumEstimate> {
    let region = Polyhedron::from_scenarios(set, inc)?;
    let cloud = est.cloud.iter().filter(|e| region.contains(&e.p, tol)).cloned().collect();
    Ok(EquilibriumEstimate { cloud, base_cloud_size: est.base_cloud_size, provenance: Provenance::FilteredFromNominal })
}

/// Cloud CSV: header `idx,converged,residual,p_1,...,p_m`, one row per point.
pub fn cloud_to_csv(est: &EquilibriumEstimate, m: usize) -> String {
    let mut out = String::from("idx,converged,residual");
    for j in 1..=m {
        out.push_str(&format!(",p_{j}"));
    }
    out.push('\n');
    for (i, e) in est.cloud.iter().enumerate() {
        out.push_str(&format!("{i},{},{}", e.converged, e.residual));
        for v in e.p.iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Reads a cloud written by [`cloud_to_csv`] back as a solved estimate.
pub fn cloud_from_csv(text: &str) -> Result<EquilibriumEstimate> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty cloud file".into() })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[..3] != ["idx", "converged", "residual"] {
        return Err(Error::Parse { line: 1, message: "unexpected cloud header".into() });
    }
    let m = cols.len() - 3;
    let mut cloud = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse { line: i + 1, message: message.into() };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 3 {
            return Err(err("wrong number of fields"));
        }
        let converged = fields[1].parse::<bool>().map_err(|_| err("bad converged flag"))?;
        let residual = fields[2].parse::<f64>().map_err(|_| err("bad residual"))?;
        let p = fields[3..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| err("bad flow value")))
            .collect::<Result<Vec<_>>>()?;
        cloud.push(EquilibriumPoint { p: DVector::from_vec(p), residual, iterations: 0, converged });
    }
    Ok(EquilibriumEstimate { base_cloud_size: cloud.len(), cloud, provenance: Provenance::Solved })
}
