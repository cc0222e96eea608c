use super::CloudRows;
use crate::equilibrium::{filter_cloud_with_tol, EquilibriumEstimate};
use crate::error::{Error, Result};
use crate::network::IncidenceMatrices;
use crate::uncertainty::ScenarioSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    /// 1-based sample indices, strictly increasing.
    pub indices: Vec<usize>,
    pub iota: usize,
    pub tol_active: f64,
}

impl SupportResult {
    /// The support samples as a scenario set.
    pub fn subset(&self, set: &ScenarioSet) -> ScenarioSet {
        let zero_based: Vec<usize> = self.indices.iter().map(|i| i - 1).collect();
        set.subset(&zero_based)
    }
}

/// Greedy support subsample in sample order: sample `i` is dropped when the
/// cloud filtered by the remaining retained samples equals the cloud filtered
/// by all of them.
///
/// Uses the irredundancy shortcut: with the retained set always reproducing
/// the full filtered cloud, dropping `i` changes the result exactly when some
/// point is cut by `i` and by no other retained sample.
pub fn support_subsample(
    nominal_cloud: &EquilibriumEstimate,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    tol_active: f64,
) -> Result<SupportResult> {
    if nominal_cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let rows = CloudRows::new(nominal_cloud, set.model(), inc, set.nominal_included(), tol_active)?;
    let k = set.len();
    let mut cut_by: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut count = vec![0usize; rows.len()];
    let violations = rows.violated_samples(set.samples());
    for (x, list) in violations.iter().enumerate() {
        if !rows.base[x] {
            continue;
        }
        count[x] = list.len();
        for &i in list {
            cut_by[i].push(x);
        }
    }
    if (0..rows.len()).all(|x| !rows.base[x] || count[x] > 0) {
        return Err(Error::EmptyCloud);
    }
    let mut indices = Vec::new();
    for (i, points) in cut_by.iter().enumerate() {
        if points.iter().any(|&x| count[x] == 1) {
            indices.push(i + 1);
        } else {
            for &x in points {
                count[x] -= 1;
            }
        }
    }
    Ok(SupportResult { iota: indices.len(), indices, tol_active })
}

/// Greedy support subsample straight from the definition, refiltering the
/// cloud for every candidate removal. Quadratic in `K`; meant for checks.
pub fn support_subsample_by_definition(
    nominal_cloud: &EquilibriumEstimate,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    tol_active: f64,
) -> Result<SupportResult> {
    if nominal_cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let target = filter_cloud_with_tol(nominal_cloud, set, inc, tol_active)?;
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut retained: Vec<usize> = (0..set.len()).collect();
    let mut i = 0;
    while i < retained.len() {
        let mut trial = retained.clone();
        trial.remove(i);
        let filtered = filter_cloud_with_tol(nominal_cloud, &set.subset(&trial), inc, tol_active)?;
        if filtered.cloud == target.cloud {
            retained = trial;
        } else {
            i += 1;
        }
    }
    let indices: Vec<usize> = retained.into_iter().map(|i| i + 1).collect();
    Ok(SupportResult { iota: indices.len(), indices, tol_active })
}
