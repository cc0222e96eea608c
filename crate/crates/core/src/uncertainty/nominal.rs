//! Generators for the nominal demand polyhedron `(A₀, b₀)`.

use crate::equilibrium::projection::{Polyhedron, ProjectionConfig};
use crate::error::{Error, Result};
use crate::network::OdPair;
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub enum HullPoints {
    Explicit(Vec<[f64; 2]>),
    /// Uniform points in `[0, demand_max]`.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NominalSpec {
    /// `lower ≤ d_l ≤ upper` for every OD pair (2ℓ rows).
    Box { lower: f64, upper: f64 },
    /// Bounds on the total demand leaving each origin and entering each
    /// destination. Lower bounds of zero produce no row.
    Hose { egress_min: f64, egress_max: f64, ingress_min: f64, ingress_max: f64 },
    /// Facets of a planar convex hull; needs exactly two OD pairs.
    Hull2d(HullPoints),
    /// One outer halfspace per sampled demand point: a random unit normal
    /// `g` with offset `max_j gᵀx_j + margin` over all generating points.
    HalfspaceSample { rows: usize, margin: f64, region_scale: f64, anchor_origin: bool },
}

/// What the generators need to know about the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalContext {
    pub od_pairs: Vec<OdPair>,
    /// `H p_max`, the largest demand each OD pair can carry.
    pub demand_max: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NominalSystem {
    pub a0: DMatrix<f64>,
    pub b0: DVector<f64>,
    /// Points the system was generated from, if any.
    pub points: Vec<DVector<f64>>,
}

pub fn generate_nominal(spec: &NominalSpec, ctx: &NominalContext, seed: u64) -> Result<NominalSystem> {
    let l = ctx.od_pairs.len();
    if ctx.demand_max.len() != l || l == 0 {
        return Err(Error::InvalidParameter("demand_max must have one entry per OD pair".into()));
    }
    let mut rng = rng::stream(seed, rng::PURPOSE_NOMINAL, 0);
    let system = match spec {
        NominalSpec::Box { lower, upper } => {
            if !(lower.is_finite() && upper.is_finite()) || lower > upper {
                return Err(Error::InvalidParameter(format!("box bounds [{lower}, {upper}]")));
            }
            let mut a0 = DMatrix::zeros(2 * l, l);
            let mut b0 = DVector::zeros(2 * l);
            for i in 0..l {
                a0[(2 * i, i)] = 1.0;
                b0[2 * i] = *upper;
                a0[(2 * i + 1, i)] = -1.0;
                b0[2 * i + 1] = -lower;
            }
            NominalSystem { a0, b0, points: Vec::new() }
        }
        NominalSpec::Hose { egress_min, egress_max, ingress_min, ingress_max } => {
            hose(ctx, *egress_min, *egress_max, *ingress_min, *ingress_max)?
        }
        NominalSpec::Hull2d(points) => {
            if l != 2 {
                return Err(Error::InvalidParameter(format!("hull2d needs 2 OD pairs, network has {l}")));
            }
            let pts: Vec<[f64; 2]> = match points {
                HullPoints::Explicit(p) => p.clone(),
                HullPoints::Random(n) => (0..*n)
                    .map(|_| {
                        [rng.random::<f64>() * ctx.demand_max[0], rng.random::<f64>() * ctx.demand_max[1]]
                    })
                    .collect(),
            };
            let (a0, b0) = hull_halfspaces(&pts)?;
            NominalSystem { a0, b0, points: pts.iter().map(|p| DVector::from_row_slice(p)).collect() }
        }
        NominalSpec::HalfspaceSample { rows, margin, region_scale, anchor_origin } => {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if *rows == 0 || !(*margin >= 0.0) || !(*region_scale > 0.0) {
                return Err(Error::InvalidParameter(
                    "halfspace-sample needs rows > 0, margin >= 0, region_scale > 0".into(),
                ));
            }
            let region = &ctx.demand_max * *region_scale;
            let mut points: Vec<DVector<f64>> =
                (0..*rows).map(|_| region.map(|u| rng.random::<f64>() * u)).collect();
            if *anchor_origin {
                points.push(DVector::zeros(l));
            }
            let mut a0 = DMatrix::zeros(*rows, l);
            let mut b0 = DVector::zeros(*rows);
            for k in 0..*rows {
                let g = loop {
                    let g = DVector::<f64>::from_iterator(l, (0..l).map(|_| rng.sample(StandardNormal)));
                    let n = g.norm();
                    if n > 1e-12 {
                        break g / n;
                    }
                };
                let support = points.iter().map(|x| g.dot(x)).fold(f64::NEG_INFINITY, f64::max);
                a0.row_mut(k).copy_from(&g.transpose());
                b0[k] = support + margin;
            }
            NominalSystem { a0, b0, points }
        }
    };
    probe_nonempty(&system, &ctx.demand_max)?;
    Ok(system)
}

fn hose(ctx: &NominalContext, emin: f64, emax: f64, imin: f64, imax: f64) -> Result<NominalSystem> {
    if [emin, emax, imin, imax].iter().any(|v| !v.is_finite() || *v < 0.0) || emin > emax || imin > imax {
        return Err(Error::InvalidParameter("hose bounds must satisfy 0 <= min <= max".into()));
    }
    let l = ctx.od_pairs.len();
    let mut groups: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    let mut push_groups = |key: fn(&OdPair) -> usize, lo: f64, hi: f64| {
        let mut keys: Vec<usize> = Vec::new();
        for od in &ctx.od_pairs {
            if !keys.contains(&key(od)) {
                keys.push(key(od));
            }
        }
        for k in keys {
            let members = (0..l).filter(|&i| key(&ctx.od_pairs[i]) == k).collect();
            groups.push((members, lo, hi));
        }
    };
    push_groups(|od| od.origin, emin, emax);
    push_groups(|od| od.destination, imin, imax);
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for (members, lo, hi) in groups {
        let mut a = DVector::zeros(l);
        for i in members {
            a[i] = 1.0;
        }
        rows.push((a.clone(), hi));
        if lo > 0.0 {
            rows.push((-a, -lo));
        }
    }
    let a0 = DMatrix::from_fn(rows.len(), l, |i, j| rows[i].0[j]);
    let b0 = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    Ok(NominalSystem { a0, b0, points: Vec::new() })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertices by the monotone chain, collinear points
/// dropped.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// H-representation (unit outward normals) of the hull of planar points.
pub(crate) fn hull_halfspaces(points: &[[f64; 2]]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("hull points must be finite".into()));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateHull(format!(
            "{} points span fewer than 3 hull vertices (collinear or repeated)",
            points.len()
        )));
    }
    let k = hull.len();
    let mut a0 = DMatrix::zeros(k, 2);
    let mut b0 = DVector::zeros(k);
    for i in 0..k {
        let (p, q) = (hull[i], hull[(i + 1) % k]);
        let (nx, ny) = (q[1] - p[1], p[0] - q[0]);
        let norm = nx.hypot(ny);
        a0[(i, 0)] = nx / norm;
        a0[(i, 1)] = ny / norm;
        b0[i] = (nx * p[0] + ny * p[1]) / norm;
    }
    Ok((a0, b0))
}

fn probe_nonempty(system: &NominalSystem, demand_max: &DVector<f64>) -> Result<()> {
    let poly = Polyhedron::new(system.a0.clone(), system.b0.clone(), demand_max.clone())?;
    let center = demand_max * 0.5;
    poly.projector(ProjectionConfig::default()).project(&center).map(|_| ())
}

/// Reads a dense nominal system, one row `a_1 ... a_l | b` per line.
pub fn parse_nominal_matrix(text: &str) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, b) = content
            .split_once('|')
            .ok_or_else(|| Error::Parse { line, message: "expected `a_1 ... a_l | b`".into() })?;
        let parse = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line, message: format!("expected a number, found `{t}`") })
        };
        let a = lhs.split_whitespace().map(parse).collect::<Result<Vec<_>>>()?;
        let b: Vec<f64> = b.split_whitespace().map(parse).collect::<Result<_>>()?;
        if b.len() != 1 {
            return Err(Error::Parse { line, message: "expected exactly one number after `|`".into() });
        }
        if let Some(first) = rows.first() {
            if first.len() != a.len() {
                return Err(Error::Parse { line, message: "rows have different lengths".into() });
            }
        }
        rows.push(a);
        rhs.push(b[0]);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse { line: 0, message: "empty nominal matrix".into() });
    }
    let a0 = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    Ok((a0, DVector::from_vec(rhs)))
}
