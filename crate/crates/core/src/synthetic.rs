//! Layered test networks: origins feed a first hub layer, which feeds a
//! second hub layer, which feeds destinations. Every origin is paired with
//! every destination of a different index.
//!
//! Hub-to-hub and origin-to-hub arcs cost nothing. A second-layer-to-
//! destination arc `(k, j)` is free when `(k + j) % free_period == 0` and
//! costs `slope · f + offset` otherwise, so each OD pair has a few zero-cost
//! routes and the equilibrium set is a whole face of the feasible region.

use crate::costs::{CostModel, EdgeCost};
use crate::error::{Error, Result};
use crate::network::{build_incidence, enumerate_paths, Edge, IncidenceMatrices, OdPair, PathSet, TrafficNetwork};
use crate::uncertainty::{generate_nominal, FlowBox, NominalContext, NominalSpec, UncertaintyModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSpec {
    pub origins: usize,
    pub first_layer: usize,
    pub second_layer: usize,
    pub destinations: usize,
    pub free_period: usize,
    pub slope: f64,
    pub offset: f64,
}

impl Default for LayeredSpec {
    fn default() -> Self {
        LayeredSpec {
            origins: 4,
            first_layer: 2,
            second_layer: 5,
            destinations: 4,
            free_period: 2,
            slope: 0.05,
            offset: 1.0,
        }
    }
}

pub fn layered_network(spec: &LayeredSpec) -> Result<(TrafficNetwork, CostModel)> {
    let LayeredSpec { origins, first_layer, second_layer, destinations, free_period, slope, offset } = *spec;
    if origins == 0 || first_layer == 0 || second_layer == 0 || destinations == 0 || free_period == 0 {
        return Err(Error::InvalidParameter("layer sizes and free_period must be positive".into()));
    }
    let name = |prefix: &str, i: usize| format!("{prefix}{}", i + 1);
    let mut nodes = Vec::new();
    nodes.extend((0..origins).map(|i| name("o", i)));
    nodes.extend((0..first_layer).map(|i| name("a", i)));
    nodes.extend((0..second_layer).map(|i| name("b", i)));
    nodes.extend((0..destinations).map(|i| name("t", i)));
    let o = |i| i;
    let a = |i| origins + i;
    let b = |i| origins + first_layer + i;
    let t = |i| origins + first_layer + second_layer + i;

    let free = EdgeCost::affine(0.0, 0.0)?;
    let costly = EdgeCost::affine(slope, offset)?;
    let mut edges = Vec::new();
    let mut costs = Vec::new();
    let mut push = |tail: usize, head: usize, cost: EdgeCost| {
        edges.push(Edge { tail, head, label: None });
        costs.push(cost);
    };
    for i in 0..origins {
        for j in 0..first_layer {
            push(o(i), a(j), free);
        }
    }
    for i in 0..first_layer {
        for k in 0..second_layer {
            push(a(i), b(k), free);
        }
    }
    for k in 0..second_layer {
        for j in 0..destinations {
            push(b(k), t(j), if (k + j) % free_period == 0 { free } else { costly });
        }
    }
    let od_pairs = (0..origins)
        .flat_map(|i| (0..destinations).filter(move |&j| j != i).map(move |j| OdPair { origin: o(i), destination: t(j) }))
        .collect();
    Ok((TrafficNetwork::new(nodes, edges, od_pairs)?, CostModel::Separable(costs)))
}

/// The network in the line-oriented document format.
pub fn render_document(net: &TrafficNetwork, costs: &CostModel) -> Result<String> {
    let CostModel::Separable(edge_costs) = costs else {
        return Err(Error::InvalidParameter("only separable costs can be rendered".into()));
    };
    let mut out = String::from("[nodes]\n");
    for n in net.nodes() {
        out.push_str(n);
        out.push('\n');
    }
    out.push_str("[edges]\n");
    for (e, c) in net.edges().iter().zip(edge_costs) {
        if let Some(label) = &e.label {
            out.push_str(&format!("{label}: "));
        }
        let params = match c {
            EdgeCost::Affine { slope, offset } => format!("affine {slope} {offset}"),
            EdgeCost::Bpr { free_flow, kappa, capacity } => format!("bpr {free_flow} {kappa} {capacity}"),
        };
        out.push_str(&format!("{} {} {params}\n", net.node_id(e.tail), net.node_id(e.head)));
    }
    out.push_str("[od]\n");
    for od in net.od_pairs() {
        out.push_str(&format!("{} {}\n", net.node_id(od.origin), net.node_id(od.destination)));
    }
    Ok(out)
}

/// A complete problem: network, costs, paths and uncertain demand polyhedron.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: TrafficNetwork,
    pub costs: CostModel,
    pub paths: PathSet,
    pub incidence: IncidenceMatrices,
    pub model: UncertaintyModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub layers: LayeredSpec,
    pub max_hops: usize,
    pub p_max: f64,
    pub nominal: NominalSpec,
    pub rho: f64,
}

impl Default for InstanceSpec {
    /// 12 OD pairs, 120 paths, 136 sampled demand halfspaces, `ρ = 0.5`.
    fn default() -> Self {
        InstanceSpec {
            layers: LayeredSpec::default(),
            max_hops: 3,
            p_max: 1.0,
            nominal: NominalSpec::HalfspaceSample { rows: 136, margin: 0.05, region_scale: 0.4, anchor_origin: true },
            rho: 0.5,
        }
    }
}

pub fn build_instance(spec: &InstanceSpec, seed: u64) -> Result<Instance> {
    let (network, costs) = layered_network(&spec.layers)?;
    let paths = enumerate_paths(&network, spec.max_hops, usize::MAX)?;
    let incidence = build_incidence(&network, &paths);
    let flow_box = FlowBox::uniform(paths.len(), spec.p_max)?;
    let ctx = NominalContext { od_pairs: network.od_pairs().to_vec(), demand_max: &incidence.h * flow_box.upper() };
    let nominal = generate_nominal(&spec.nominal, &ctx, seed)?;
    let model = UncertaintyModel::new(nominal.a0, nominal.b0, spec.rho, flow_box)?;
    Ok(Instance { network, costs, paths, incidence, model })
}
