//! The uncertain demand polyhedron `{p : A(ω) H p ≤ b(ω)} ∩ [0, p_max]`,
//! scenario sampling and feasibility queries.

mod nominal;

pub use nominal::{generate_nominal, parse_nominal_matrix, HullPoints, NominalContext, NominalSpec};

use crate::error::{check_dim, Error, Result};
use crate::network::IncidenceMatrices;
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Default absolute tolerance on constraint slack.
pub const TOL_FEASIBLE: f64 = 1e-9;

/// The path-flow box `[0, p_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowBox {
    upper: DVector<f64>,
}

impl FlowBox {
    pub fn new(upper: DVector<f64>) -> Result<Self> {
        if upper.is_empty() || upper.iter().any(|u| !u.is_finite() || *u <= 0.0) {
            return Err(Error::InvalidParameter("p_max must be positive and finite".into()));
        }
        Ok(FlowBox { upper })
    }

    pub fn uniform(m: usize, p_max: f64) -> Result<Self> {
        FlowBox::new(DVector::from_element(m, p_max))
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        self.upper.map(|u| rng.random::<f64>() * u)
    }

    pub fn contains(&self, p: &DVector<f64>, tol: f64) -> bool {
        p.len() == self.dim() && p.iter().zip(self.upper.iter()).all(|(x, u)| *x >= -tol && *x <= u + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncertaintyMode {
    /// `A(ω) = A₀`, `b(ω) = b₀ + ω`.
    AdditiveB,
}

/// A realised constraint block `(A(ω), b(ω))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Nominal demand polyhedron `(A₀, b₀)` with additive uniform perturbation
/// of `b` on `Ω_i = |b₀_i| · [-ρ, ρ]`, plus the path-flow box.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyModel {
    a0: DMatrix<f64>,
    b0: DVector<f64>,
    rho: f64,
    mode: UncertaintyMode,
    flow_box: FlowBox,
}

impl UncertaintyModel {
    pub fn new(a0: DMatrix<f64>, b0: DVector<f64>, rho: f64, flow_box: FlowBox) -> Result<Self> {
        if a0.nrows() == 0 || a0.ncols() == 0 {
            return Err(Error::InvalidParameter("nominal system needs at least one row".into()));
        }
        check_dim(a0.nrows(), b0.len())?;
        if a0.iter().chain(b0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("nominal system must be finite".into()));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
        }
        Ok(UncertaintyModel { a0, b0, rho, mode: UncertaintyMode::AdditiveB, flow_box })
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.a0
    }

    pub fn b0(&self) -> &DVector<f64> {
        &self.b0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mode(&self) -> UncertaintyMode {
        self.mode
    }

    pub fn flow_box(&self) -> &FlowBox {
        &self.flow_box
    }

    /// Number of demand rows `s`.
    pub fn num_rows(&self) -> usize {
        self.a0.nrows()
    }

    /// Dimension `d` of the uncertain parameter, equal to `s`.
    pub fn dim(&self) -> usize {
        self.b0.len()
    }

    pub fn num_od_pairs(&self) -> usize {
        self.a0.ncols()
    }

    /// Support interval of coordinate `i`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        let half = self.b0[i].abs() * self.rho;
        (-half, half)
    }

    pub fn realize(&self, omega: &DVector<f64>) -> Result<ConstraintBlock> {
        check_dim(self.dim(), omega.len())?;
        Ok(ConstraintBlock { a: self.a0.clone(), b: &self.b0 + omega })
    }

    /// One uniform draw from the support.
    pub fn sample_omega<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.b0.iter().map(|b| {
                let half = b.abs() * self.rho;
                if half == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half..=half)
                }
            }),
        )
    }

    /// Draw `index` of the sample stream identified by `seed`. Independent of
    /// how many other draws are taken.
    pub fn draw(&self, seed: u64, purpose: u64, index: usize) -> DVector<f64> {
        self.sample_omega(&mut rng::stream(seed, purpose, index as u64))
    }

    /// `A₀ H`, the demand rows expressed on path flows.
    pub fn path_rows(&self, inc: &IncidenceMatrices) -> Result<DMatrix<f64>> {
        check_dim(self.num_od_pairs(), inc.num_od_pairs())?;
        check_dim(inc.num_paths(), self.flow_box.dim())?;
        Ok(&self.a0 * &inc.h)
    }
}

/// Where a violated row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSource {
    /// `p_path ≥ 0`
    BoxLower { path: usize },
    /// `p_path ≤ p_max`
    BoxUpper { path: usize },
    /// Row `row` of the nominal system `(A₀, b₀)`.
    Nominal { row: usize },
    /// Row `row` of the block contributed by sample `sample` (0-based).
    Sample { sample: usize, row: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub source: RowSource,
    /// Amount by which the row is exceeded.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violated: Vec<RowViolation>,
}

/// A K-multisample together with the model that generated it. Samples form
/// a prefix of the stream `seed`, so a set with `K' ≤ K` and the same seed
/// holds the first `K'` samples of the larger one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    model: UncertaintyModel,
    samples: Vec<DVector<f64>>,
    seed: u64,
    include_nominal: bool,
}

/// Draws `k` i.i.d. samples from the model's support.
pub fn sample_scenarios(model: &UncertaintyModel, k: usize, seed: u64) -> ScenarioSet {
    let samples = (0..k).map(|i| model.draw(seed, rng::PURPOSE_SCENARIOS, i)).collect();
    ScenarioSet { model: model.clone(), samples, seed, include_nominal: false }
}

impl ScenarioSet {
    /// Builds a set from explicit samples (no stream identity).
    pub fn from_samples(model: &UncertaintyModel, samples: Vec<DVector<f64>>) -> Result<Self> {
        for s in &samples {
            check_dim(model.dim(), s.len())?;
        }
        Ok(ScenarioSet { model: model.clone(), samples, seed: 0, include_nominal: false })
    }

    /// The `K = 0` set: nominal rows plus box.
    pub fn nominal(model: &UncertaintyModel) -> Self {
        ScenarioSet { model: model.clone(), samples: Vec::new(), seed: 0, include_nominal: true }
    }

    /// Also intersect with the nominal polyhedron when `K > 0`.
    pub fn with_nominal(mut self, include: bool) -> Self {
        self.include_nominal = include;
        self
    }

    pub fn model(&self) -> &UncertaintyModel {
        &self.model
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Whether the nominal rows are part of the intersection.
    pub fn nominal_included(&self) -> bool {
        self.include_nominal || self.samples.is_empty()
    }

    /// The first `k` samples.
    pub fn prefix(&self, k: usize) -> ScenarioSet {
        ScenarioSet {
            model: self.model.clone(),
            samples: self.samples[..k.min(self.len())].to_vec(),
            seed: self.seed,
            include_nominal: self.include_nominal,
        }
    }

    /// A set holding only the samples at `indices` (0-based, in given order).
    pub fn subset(&self, indices: &[usize]) -> ScenarioSet {
        ScenarioSet {
            model: self.model.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            seed: self.seed,
            include_nominal: self.include_nominal,
        }
    }

    /// This set plus `extra` further samples of the same stream.
    pub fn extend(&self, extra: usize) -> ScenarioSet {
        let mut out = self.clone();
        let start = self.len();
        out.samples
            .extend((start..start + extra).map(|i| self.model.draw(self.seed, rng::PURPOSE_SCENARIOS, i)));
        out
    }

    /// The stacked system `{A(ω⁽ⁱ⁾) p_demand ≤ b(ω⁽ⁱ⁾)}` in sample order,
    /// preceded by the nominal block when it is part of the set.
    pub fn stacked(&self) -> ConstraintBlock {
        let s = self.model.num_rows();
        let l = self.model.num_od_pairs();
        let blocks = usize::from(self.nominal_included()) + self.len();
        let mut a = DMatrix::zeros(blocks * s, l);
        let mut b = DVector::zeros(blocks * s);
        let mut offset = 0;
        let mut push = |rhs: DVector<f64>| {
            a.view_mut((offset, 0), (s, l)).copy_from(&self.model.a0);
            b.rows_mut(offset, s).copy_from(&rhs);
            offset += s;
        };
        if self.nominal_included() {
            push(self.model.b0.clone());
        }
        for w in &self.samples {
            push(&self.model.b0 + w);
        }
        ConstraintBlock { a, b }
    }

    /// Tightest right-hand side per nominal row. Because only `b` is
    /// perturbed, this single block describes the same polyhedron as the
    /// full stack.
    pub fn effective_rhs(&self) -> DVector<f64> {
        let mut rhs = if self.nominal_included() {
            self.model.b0.clone()
        } else {
            DVector::from_element(self.model.num_rows(), f64::INFINITY)
        };
        for w in &self.samples {
            for (i, r) in rhs.iter_mut().enumerate() {
                *r = r.min(self.model.b0[i] + w[i]);
            }
        }
        rhs
    }

    /// Checks `0 ≤ p ≤ p_max` and every stacked row, listing all failures.
    pub fn is_feasible(&self, inc: &IncidenceMatrices, p: &DVector<f64>, tol: f64) -> Result<FeasibilityReport> {
        check_dim(self.model.flow_box.dim(), p.len())?;
        let mut violated = Vec::new();
        for (j, (x, u)) in p.iter().zip(self.model.flow_box.upper.iter()).enumerate() {
            if *x < -tol {
                violated.push(RowViolation { source: RowSource::BoxLower { path: j }, excess: -x });
            }
            if *x > u + tol {
                violated.push(RowViolation { source: RowSource::BoxUpper { path: j }, excess: x - u });
            }
        }
        let lhs = &self.model.a0 * inc.demand(p)?;
        let mut check = |rhs: &DVector<f64>, source: &dyn Fn(usize) -> RowSource| {
            for i in 0..lhs.len() {
                let excess = lhs[i] - rhs[i];
                if excess > tol {
                    violated.push(RowViolation { source: source(i), excess });
                }
            }
        };
        if self.nominal_included() {
            check(&self.model.b0, &|row| RowSource::Nominal { row });
        }
        for (k, w) in self.samples.iter().enumerate() {
            check(&(&self.model.b0 + w), &|row| RowSource::Sample { sample: k, row });
        }
        Ok(FeasibilityReport { feasible: violated.is_empty(), violated })
    }
}
