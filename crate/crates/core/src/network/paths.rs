use super::TrafficNetwork;
use crate::error::{check_dim, Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    /// Index of the OD pair this path serves.
    pub od: usize,
    /// Node indices visited, origin first.
    pub nodes: Vec<usize>,
    /// Edge indices traversed, in order.
    pub edges: Vec<usize>,
}

/// Simple paths of a network ordered by (OD index, node sequence, edge
/// sequence). The position of a path in this list is its path index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    /// Paths discovered after `max_paths` was reached.
    pub dropped: usize,
    /// Some partial path was cut at `max_hops` while it still had an
    /// unvisited successor, so longer paths may exist.
    pub hop_limited: bool,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.dropped > 0 || self.hop_limited
    }

    pub fn count_for_od(&self, od: usize) -> usize {
        self.paths.iter().filter(|p| p.od == od).count()
    }

    pub fn indices_for_od(&self, od: usize) -> impl Iterator<Item = usize> + '_ {
        self.paths.iter().enumerate().filter(move |(_, p)| p.od == od).map(|(i, _)| i)
    }
}

/// All simple directed paths per OD pair with at most `max_hops` edges,
/// keeping at most `max_paths` in total.
pub fn enumerate_paths(net: &TrafficNetwork, max_hops: usize, max_paths: usize) -> Result<PathSet> {
    if max_hops == 0 || max_paths == 0 {
        return Err(Error::InvalidParameter("max_hops and max_paths must be positive".into()));
    }
    let out = net.out_edges();
    let mut set = PathSet { paths: Vec::new(), dropped: 0, hop_limited: false };
    for (k, od) in net.od_pairs().iter().enumerate() {
        let mut search = Search {
            net,
            out: &out,
            destination: od.destination,
            max_hops,
            visited: vec![false; net.num_nodes()],
            nodes: vec![od.origin],
            edges: Vec::new(),
            found: Vec::new(),
            hop_limited: false,
        };
        search.visited[od.origin] = true;
        search.dfs(od.origin);
        set.hop_limited |= search.hop_limited;
        let mut found = search.found;
        found.sort();
        for (nodes, edges) in found {
            if set.paths.len() < max_paths {
                set.paths.push(Path { od: k, nodes, edges });
            } else {
                set.dropped += 1;
            }
        }
        if set.count_for_od(k) == 0 {
            return Err(Error::NoPaths { od: k });
        }
    }
    Ok(set)
}

struct Search<'a> {
    net: &'a TrafficNetwork,
    out: &'a [Vec<usize>],
    destination: usize,
    max_hops: usize,
    visited: Vec<bool>,
    nodes: Vec<usize>,
    edges: Vec<usize>,
    found: Vec<(Vec<usize>, Vec<usize>)>,
    hop_limited: bool,
}

impl Search<'_> {
    fn dfs(&mut self, v: usize) {
        if v == self.destination {
            self.found.push((self.nodes.clone(), self.edges.clone()));
            return;
        }
        for &e in &self.out[v] {
            let w = self.net.edges()[e].head;
            if self.visited[w] {
                continue;
            }
            if self.edges.len() == self.max_hops {
                self.hop_limited = true;
                return;
            }
            self.visited[w] = true;
            self.nodes.push(w);
            self.edges.push(e);
            self.dfs(w);
            self.edges.pop();
            self.nodes.pop();
            self.visited[w] = false;
        }
    }
}

/// Arc-path matrix `b` (e x m) and OD-path matrix `h` (l x m).
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrices {
    pub b: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// OD index of each path, the column-wise argmax of `h`.
    pub path_od: Vec<usize>,
}

impl IncidenceMatrices {
    pub fn num_edges(&self) -> usize {
        self.b.nrows()
    }

    pub fn num_paths(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_od_pairs(&self) -> usize {
        self.h.nrows()
    }

    /// Edge flows `f = B p`.
    pub fn edge_flows(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.num_paths(), p.len())?;
        Ok(&self.b * p)
    }

    /// Aggregate OD demand `H p`.
    pub fn demand(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.num_paths(), p.len())?;
        Ok(&self.h * p)
    }
}

pub fn build_incidence(net: &TrafficNetwork, paths: &PathSet) -> IncidenceMatrices {
    let m = paths.len();
    let mut b = DMatrix::zeros(net.num_edges(), m);
    let mut h = DMatrix::zeros(net.num_od_pairs(), m);
    for (j, path) in paths.paths.iter().enumerate() {
        for &e in &path.edges {
            b[(e, j)] = 1.0;
        }
        h[(path.od, j)] = 1.0;
    }
    let path_od = paths.paths.iter().map(|p| p.od).collect();
    IncidenceMatrices { b, h, path_od }
}
