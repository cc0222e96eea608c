//! Extragradient iteration for `VI(P, C)` and the natural-map residual.

use super::projection::{Polyhedron, ProjectionConfig, Projector};
use crate::costs::CostModel;
use crate::error::{check_dim, Error, Result};
use crate::network::IncidenceMatrices;
use crate::uncertainty::ScenarioSet;
use nalgebra::DVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Fixed extragradient step.
    pub alpha: f64,
    /// Stop when the natural-map residual drops to this value.
    pub tol_res: f64,
    pub max_iter: usize,
    pub tol_proj: f64,
    /// Number of multi-start runs used to estimate the equilibrium set.
    pub n_starts: usize,
    /// Points closer than this are the same equilibrium.
    pub dedup_radius: f64,
    /// Halve the step after this many consecutive residual increases.
    pub divergence_window: usize,
    /// Hit-and-run steps used to draw each start inside the nominal set.
    pub walk_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.3,
            tol_res: 1e-8,
            max_iter: 50_000,
            tol_proj: 1e-10,
            n_starts: 10_000,
            dedup_radius: 1e-6,
            divergence_window: 50,
            walk_steps: 30,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.alpha, self.tol_res, self.tol_proj, self.dedup_radius]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_iter == 0 || self.n_starts == 0 {
            return Err(Error::InvalidParameter(
                "solver step, tolerances, iteration cap and start count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn projection(&self) -> ProjectionConfig {
        ProjectionConfig { tol: self.tol_proj, ..ProjectionConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub p: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Cost model, incidence and feasible region bundled for repeated solves.
#[derive(Debug, Clone)]
pub struct EquilibriumSolver<'a> {
    model: &'a CostModel,
    inc: &'a IncidenceMatrices,
    region: Polyhedron,
    cfg: SolverConfig,
}

impl<'a> EquilibriumSolver<'a> {
    pub fn new(
        model: &'a CostModel,
        inc: &'a IncidenceMatrices,
        region: Polyhedron,
        cfg: SolverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        check_dim(model.num_edges(), inc.num_edges())?;
        check_dim(inc.num_paths(), region.dim())?;
        Ok(EquilibriumSolver { model, inc, region, cfg })
    }

    pub fn for_scenarios(
        model: &'a CostModel,
        set: &ScenarioSet,
        inc: &'a IncidenceMatrices,
        cfg: SolverConfig,
    ) -> Result<Self> {
        EquilibriumSolver::new(model, inc, Polyhedron::from_scenarios(set, inc)?, cfg)
    }

    pub fn region(&self) -> &Polyhedron {
        &self.region
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn path_costs(&self, p: &DVector<f64>) -> DVector<f64> {
        self.model.path_costs_fast(self.inc, p)
    }

    fn natural_residual(&self, proj: &mut Projector<'_>, p: &DVector<f64>, alpha: f64) -> Result<f64> {
        let step = p - self.path_costs(p) * alpha;
        Ok((p - proj.project(&step)?).norm())
    }

    /// `‖p − Π(p − α C(p))‖` at the configured step.
    pub fn residual(&self, p: &DVector<f64>) -> Result<f64> {
        check_dim(self.region.dim(), p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFlow("non-finite path flow".into()));
        }
        let mut proj = self.region.projector(self.cfg.projection());
        // Costs are defined on the nonnegative orthant.
        let q = p.map(|v| v.max(0.0));
        let step = p - self.path_costs(&q) * self.cfg.alpha;
        Ok((p - proj.project(&step)?).norm())
    }

    /// Extragradient from `p0`, which is projected first.
    pub fn solve_from(&self, p0: &DVector<f64>) -> Result<EquilibriumPoint> {
        check_dim(self.region.dim(), p0.len())?;
        let cfg = &self.cfg;
        let mut proj = self.region.projector(cfg.projection());
        let mut check = self.region.projector(cfg.projection());
        let mut p = proj.project(p0)?;
        let mut alpha = cfg.alpha;
        let mut last = f64::INFINITY;
        let mut rising = 0;
        for it in 0..cfg.max_iter {
            let pbar = proj.project(&(&p - self.path_costs(&p) * alpha))?;
            let residual = if alpha == cfg.alpha {
                (&p - &pbar).norm()
            } else {
                self.natural_residual(&mut check, &p, cfg.alpha)?
            };
            if residual <= cfg.tol_res && self.region.max_violation(&p) <= cfg.tol_proj {
                return Ok(EquilibriumPoint { p, residual, iterations: it, converged: true });
            }
            if residual > last {
                rising += 1;
                if cfg.divergence_window > 0 && rising >= cfg.divergence_window {
                    alpha *= 0.5;
                    rising = 0;
                }
            } else {
                rising = 0;
            }
            last = residual;
            p = proj.project(&(&p - self.path_costs(&pbar) * alpha))?;
        }
        let residual = self.natural_residual(&mut check, &p, cfg.alpha)?;
        let converged = residual <= cfg.tol_res && self.region.max_violation(&p) <= cfg.tol_proj;
        Ok(EquilibriumPoint { p, residual, iterations: cfg.max_iter, converged })
    }
}

/// Runs extragradient on `VI(P_{ω_K}, C)` from `p0`.
pub fn extragradient(
    model: &CostModel,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    p0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<EquilibriumPoint> {
    EquilibriumSolver::for_scenarios(model, set, inc, *cfg)?.solve_from(p0)
}

/// Natural-map residual of `p` for `VI(P_{ω_K}, C)`.
pub fn vi_residual(
    model: &CostModel,
    set: &ScenarioSet,
    inc: &IncidenceMatrices,
    p: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<f64> {
    EquilibriumSolver::for_scenarios(model, set, inc, *cfg)?.residual(p)
}
