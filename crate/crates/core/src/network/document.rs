//! Line-oriented network description:
//!
//! ```text
//! # Pigou
//! [nodes]
//! 1
//! 2
//! [edges]
//! a: 1 2 affine 1 0
//! b: 1 2 affine 0 1
//! [od]
//! 1 2
//! ```
//!
//! Edge lines are `[label:] tail head kind params...` with kind one of
//! `affine slope offset`, `bpr free_flow kappa capacity` or `coupled`. A
//! network whose edges are `coupled` also carries a `[coupling]` section of
//! `e` rows of `e` numbers and an `[offset]` row of `e` numbers.

use super::{Edge, OdPair, TrafficNetwork};
use crate::costs::{CostModel, EdgeCost};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDocument {
    pub network: TrafficNetwork,
    pub costs: CostModel,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Nodes,
    Edges,
    Od,
    Coupling,
    Offset,
}

enum EdgeKind {
    Separable(EdgeCost),
    Coupled,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("expected a number, found `{tok}`")))
}

/// Parses a network document, returning the validated network and its cost
/// model.
pub fn parse_document(text: &str) -> Result<NetworkDocument> {
    let mut section = Section::None;
    let mut nodes: Vec<String> = Vec::new();
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut kinds = Vec::new();
    let mut ods = Vec::new();
    let mut coupling: Vec<Vec<f64>> = Vec::new();
    let mut offset: Option<Vec<f64>> = None;

    let resolve = |index: &HashMap<String, usize>, id: &str, line: usize| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| parse_err(line, format!("node `{id}` is not declared in [nodes]")))
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[nodes]" => Section::Nodes,
                "[edges]" => Section::Edges,
                "[od]" => Section::Od,
                "[coupling]" => Section::Coupling,
                "[offset]" => Section::Offset,
                other => return Err(parse_err(line, format!("unknown section {other}"))),
            };
            continue;
        }
        let mut tokens: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(parse_err(line, "content before the first section header")),
            Section::Nodes => {
                if tokens.len() != 1 {
                    return Err(parse_err(line, "expected one node id per line"));
                }
                let id = tokens[0].to_string();
                if node_index.insert(id.clone(), nodes.len()).is_some() {
                    return Err(parse_err(line, format!("node `{id}` declared twice")));
                }
                nodes.push(id);
            }
            Section::Edges => {
                let label = match tokens.first() {
                    Some(t) if t.ends_with(':') => {
                        let l = t.trim_end_matches(':').to_string();
                        tokens.remove(0);
                        Some(l)
                    }
                    _ => None,
                };
                if tokens.len() < 3 {
                    return Err(parse_err(line, "expected `tail head cost_kind params...`"));
                }
                let tail = resolve(&node_index, tokens[0], line)?;
                let head = resolve(&node_index, tokens[1], line)?;
                let params = tokens[3..]
                    .iter()
                    .map(|t| number(t, line))
                    .collect::<Result<Vec<_>>>()?;
                let kind = match (tokens[2], params.as_slice()) {
                    ("affine", [a, q]) => EdgeKind::Separable(
                        EdgeCost::affine(*a, *q).map_err(|e| parse_err(line, e.to_string()))?,
                    ),
                    ("bpr", [t, k, g]) => EdgeKind::Separable(
                        EdgeCost::bpr(*t, *k, *g).map_err(|e| parse_err(line, e.to_string()))?,
                    ),
                    ("coupled", []) => EdgeKind::Coupled,
                    ("affine", _) => return Err(parse_err(line, "affine takes 2 parameters")),
                    ("bpr", _) => return Err(parse_err(line, "bpr takes 3 parameters")),
                    ("coupled", _) => return Err(parse_err(line, "coupled takes no parameters")),
                    (other, _) => return Err(parse_err(line, format!("unknown cost kind `{other}`"))),
                };
                edges.push(Edge { tail, head, label });
                kinds.push((line, kind));
            }
            Section::Od => {
                if tokens.len() != 2 {
                    return Err(parse_err(line, "expected `origin destination`"));
                }
                ods.push(OdPair {
                    origin: resolve(&node_index, tokens[0], line)?,
                    destination: resolve(&node_index, tokens[1], line)?,
                });
            }
            Section::Coupling => {
                coupling.push(tokens.iter().map(|t| number(t, line)).collect::<Result<_>>()?);
            }
            Section::Offset => {
                if offset.is_some() {
                    return Err(parse_err(line, "[offset] holds a single row"));
                }
                offset = Some(tokens.iter().map(|t| number(t, line)).collect::<Result<_>>()?);
            }
        }
    }

    let e = edges.len();
    let n_coupled = kinds.iter().filter(|(_, k)| matches!(k, EdgeKind::Coupled)).count();
    let costs = if n_coupled == 0 {
        if !coupling.is_empty() || offset.is_some() {
            return Err(parse_err(0, "[coupling]/[offset] given but no edge is `coupled`"));
        }
        CostModel::Separable(
            kinds
                .into_iter()
                .map(|(_, k)| match k {
                    EdgeKind::Separable(c) => c,
                    EdgeKind::Coupled => unreachable!(),
                })
                .collect(),
        )
    } else {
        if n_coupled != e {
            let line = kinds.iter().find(|(_, k)| !matches!(k, EdgeKind::Coupled)).map_or(0, |(l, _)| *l);
            return Err(parse_err(line, "coupled and separable edge costs cannot be mixed"));
        }
        if coupling.len() != e || coupling.iter().any(|row| row.len() != e) {
            return Err(parse_err(0, format!("[coupling] must have {e} rows of {e} numbers")));
        }
        let offset = offset.ok_or_else(|| parse_err(0, "missing [offset] row"))?;
        if offset.len() != e {
            return Err(parse_err(0, format!("[offset] must have {e} numbers")));
        }
        let matrix = DMatrix::from_fn(e, e, |i, j| coupling[i][j]);
        CostModel::coupled(matrix, DVector::from_vec(offset))?
    };
    let network = TrafficNetwork::new(nodes, edges, ods)?;
    Ok(NetworkDocument { network, costs })
}

/// Parses a network document and returns only the graph.
pub fn load_network(text: &str) -> Result<TrafficNetwork> {
    parse_document(text).map(|d| d.network)
}
