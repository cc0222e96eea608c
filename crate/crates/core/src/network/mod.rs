//! Directed traffic networks, OD pairs, simple-path enumeration and the
//! arc-path / OD-path incidence matrices.

mod document;
mod paths;

pub use document::{load_network, parse_document, NetworkDocument};
pub use paths::{build_incidence, enumerate_paths, IncidenceMatrices, Path, PathSet};

use crate::error::{Error, Result};
use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    /// Distinguishes parallel arcs between the same pair of nodes.
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
}

/// A directed graph with a list of origin-destination pairs. Edge order is
/// the canonical edge index order used by every downstream vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficNetwork {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    od_pairs: Vec<OdPair>,
}

impl TrafficNetwork {
    /// Builds a validated network. Edge endpoints and OD pairs refer to
    /// positions in `nodes`.
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>, od_pairs: Vec<OdPair>) -> Result<Self> {
        let mut seen_nodes = HashMap::new();
        for (i, id) in nodes.iter().enumerate() {
            if seen_nodes.insert(id.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("node {id} declared twice")));
            }
        }
        let n = nodes.len();
        let mut seen_edges = HashMap::new();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidNetwork("edge endpoint is not a declared node".into()));
            }
            if e.tail == e.head {
                return Err(Error::InvalidNetwork(format!("self-loop at node {}", nodes[e.tail])));
            }
            if seen_edges.insert((e.tail, e.head, e.label.clone()), ()).is_some() {
                return Err(Error::DuplicateEdge {
                    tail: nodes[e.tail].clone(),
                    head: nodes[e.head].clone(),
                });
            }
        }
        if od_pairs.is_empty() {
            return Err(Error::InvalidNetwork("no OD pairs".into()));
        }
        for od in &od_pairs {
            if od.origin >= n || od.destination >= n {
                return Err(Error::InvalidNetwork("OD pair refers to an undeclared node".into()));
            }
            if od.origin == od.destination {
                return Err(Error::InvalidNetwork(format!(
                    "OD pair with identical endpoints {}",
                    nodes[od.origin]
                )));
            }
        }
        let net = TrafficNetwork { nodes, edges, od_pairs };
        for od in &net.od_pairs {
            if !net.reachable_from(od.origin)[od.destination] {
                return Err(Error::UnreachableOd {
                    origin: net.nodes[od.origin].clone(),
                    destination: net.nodes[od.destination].clone(),
                });
            }
        }
        Ok(net)
    }

    /// Convenience constructor from node ids and unlabelled `(tail, head)` id pairs.
    pub fn from_ids(nodes: &[&str], edges: &[(&str, &str)], od_pairs: &[(&str, &str)]) -> Result<Self> {
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown node {id}")))
        };
        let edges = edges
            .iter()
            .map(|(t, h)| Ok(Edge { tail: lookup(t)?, head: lookup(h)?, label: None }))
            .collect::<Result<Vec<_>>>()?;
        let ods = od_pairs
            .iter()
            .map(|(o, d)| Ok(OdPair { origin: lookup(o)?, destination: lookup(d)? }))
            .collect::<Result<Vec<_>>>()?;
        TrafficNetwork::new(nodes.iter().map(|s| s.to_string()).collect(), edges, ods)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn od_pairs(&self) -> &[OdPair] {
        &self.od_pairs
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_od_pairs(&self) -> usize {
        self.od_pairs.len()
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.nodes[index]
    }

    /// Outgoing edge indices per node, sorted by (head, edge index).
    pub(crate) fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.tail].push(i);
        }
        for list in &mut out {
            list.sort_by_key(|&i| (self.edges[i].head, i));
        }
        out
    }

    fn reachable_from(&self, source: usize) -> Vec<bool> {
        let out = self.out_edges();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([source]);
        seen[source] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &out[v] {
                let w = self.edges[e].head;
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkIssue {
    UnreachableOd { od: usize, origin: String, destination: String },
    IsolatedNode { node: String },
}

impl std::fmt::Display for NetworkIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetworkIssue::UnreachableOd { origin, destination, .. } => {
                write!(f, "unreachable OD pair ({origin}, {destination})")
            }
            NetworkIssue::IsolatedNode { node } => write!(f, "isolated node {node}"),
        }
    }
}

/// Report-only diagnostics. Parallel arcs are legal and listed separately.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkDiagnostics {
    pub issues: Vec<NetworkIssue>,
    /// `(tail, head, count)` for every node pair joined by more than one arc.
    pub parallel_edges: Vec<(String, String, usize)>,
}

impl NetworkDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Diagnoses a raw (possibly invalid) graph description. Works on plain
/// index data so that it can report problems `TrafficNetwork::new` rejects.
pub fn validate_network(nodes: &[String], edges: &[Edge], od_pairs: &[OdPair]) -> NetworkDiagnostics {
    let n = nodes.len();
    let mut out = vec![Vec::new(); n];
    let mut degree = vec![0usize; n];
    let mut pair_counts: HashMap<(usize, usize), usize> = HashMap::new();
    for e in edges.iter().filter(|e| e.tail < n && e.head < n) {
        out[e.tail].push(e.head);
        degree[e.tail] += 1;
        degree[e.head] += 1;
        *pair_counts.entry((e.tail, e.head)).or_default() += 1;
    }
    let mut report = NetworkDiagnostics::default();
    for (k, od) in od_pairs.iter().enumerate() {
        if od.origin >= n || od.destination >= n {
            continue;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![od.origin];
        seen[od.origin] = true;
        while let Some(v) = stack.pop() {
            for &w in &out[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !seen[od.destination] {
            report.issues.push(NetworkIssue::UnreachableOd {
                od: k,
                origin: nodes[od.origin].clone(),
                destination: nodes[od.destination].clone(),
            });
        }
    }
    for (i, d) in degree.iter().enumerate() {
        if *d == 0 {
            report.issues.push(NetworkIssue::IsolatedNode { node: nodes[i].clone() });
        }
    }
    let mut parallel: Vec<_> = pair_counts.into_iter().filter(|(_, c)| *c > 1).collect();
    parallel.sort();
    report.parallel_edges = parallel
        .into_iter()
        .map(|((t, h), c)| (nodes[t].clone(), nodes[h].clone(), c))
        .collect();
    report
}

impl TrafficNetwork {
    pub fn diagnostics(&self) -> NetworkDiagnostics {
        validate_network(&self.nodes, &self.edges, &self.od_pairs)
    }
}

/// Two nodes joined by a pair of parallel arcs, one OD pair.
pub fn pigou() -> TrafficNetwork {
    TrafficNetwork::new(
        vec!["1".into(), "2".into()],
        vec![
            Edge { tail: 0, head: 1, label: Some("a".into()) },
            Edge { tail: 0, head: 1, label: Some("b".into()) },
        ],
        vec![OdPair { origin: 0, destination: 1 }],
    )
    .expect("pigou network is valid")
}

/// The four-node Braess layout with the 2 -> 3 shortcut.
pub fn braess() -> TrafficNetwork {
    TrafficNetwork::from_ids(
        &["1", "2", "3", "4"],
        &[("1", "2"), ("1", "3"), ("2", "4"), ("3", "4"), ("2", "3")],
        &[("1", "4")],
    )
    .expect("braess network is valid")
}
