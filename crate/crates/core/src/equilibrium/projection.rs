//! Euclidean projection onto `{y : G y ≤ h, 0 ≤ y ≤ u}`.
//!
//! The dual `max_{λ ≥ 0} min_{0 ≤ y ≤ u} ½‖y − x‖² + λᵀ(G y − h)` is solved by
//! accelerated projected gradient ascent; the inner minimiser is a clamp.
//! Every few iterations the support of `λ` seeds a small active-set solve on
//! the free coordinates. When that solve satisfies the KKT conditions the
//! result is the exact projection and the iteration stops.

use crate::error::{check_dim, Error, Result};
use crate::network::IncidenceMatrices;
use crate::uncertainty::ScenarioSet;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    /// Feasibility and complementarity tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig { tol: 1e-10, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    g: DMatrix<f64>,
    h: DVector<f64>,
    upper: DVector<f64>,
    /// Upper bound on ‖G‖₂², the Lipschitz constant of the dual gradient.
    lipschitz: f64,
}

impl Polyhedron {
    pub fn new(g: DMatrix<f64>, h: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        check_dim(g.nrows(), h.len())?;
        check_dim(g.ncols(), upper.len())?;
        if g.iter().chain(h.iter()).chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("polyhedron data must be finite".into()));
        }
        if upper.iter().any(|u| *u < 0.0) {
            return Err(Error::InvalidParameter("box upper bounds must be nonnegative".into()));
        }
        let lipschitz = spectral_norm_sq(&g) * 1.05 + 1e-12;
        Ok(Polyhedron { g, h, upper, lipschitz })
    }

    /// `P_{ω_K}` on path flows: `A₀ H p ≤ min_i b(ω⁽ⁱ⁾)` and the flow box.
    pub fn from_scenarios(set: &ScenarioSet, inc: &IncidenceMatrices) -> Result<Self> {
        let model = set.model();
        Polyhedron::new(model.path_rows(inc)?, set.effective_rhs(), model.flow_box().upper().clone())
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn num_rows(&self) -> usize {
        self.h.len()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.h
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    /// Largest constraint excess, 0 when feasible.
    pub fn max_violation(&self, y: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, u) in y.iter().zip(self.upper.iter()) {
            worst = worst.max(-v).max(v - u);
        }
        if self.num_rows() > 0 {
            let lhs = &self.g * y;
            for (a, b) in lhs.iter().zip(self.h.iter()) {
                worst = worst.max(a - b);
            }
        }
        worst
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        y.len() == self.dim() && self.max_violation(y) <= tol
    }

    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        x.zip_map(&self.upper, |v, u| v.clamp(0.0, u))
    }

    pub fn projector(&self, cfg: ProjectionConfig) -> Projector<'_> {
        Projector { poly: self, cfg, multipliers: DVector::zeros(self.num_rows()) }
    }

    /// One-off projection with default settings.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.projector(ProjectionConfig::default()).project(x)
    }
}

fn spectral_norm_sq(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 || g.ncols() == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(g.ncols(), |i, _| 1.0 + (i as f64 * 0.618_034).fract());
    let mut est = 0.0;
    for _ in 0..200 {
        let w = g.tr_mul(&(g * &v));
        let n = w.norm();
        if n == 0.0 {
            return g.norm_squared();
        }
        let next = n / v.norm();
        v = w / n;
        if (next - est).abs() <= 1e-10 * next {
            est = next;
            break;
        }
        est = next;
    }
    // Power iteration approaches from below; never exceed the Frobenius bound.
    est.max(1e-300).min(g.norm_squared())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: DVector<f64>,
    /// KKT conditions verified on an identified active set.
    pub exact: bool,
    pub converged: bool,
    pub iterations: usize,
}

/// Reusable projector that warm-starts from the previous multipliers.
#[derive(Debug, Clone)]
pub struct Projector<'a> {
    poly: &'a Polyhedron,
    cfg: ProjectionConfig,
    multipliers: DVector<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Bound {
    Lower,
    Free,
    Upper,
}

impl Projector<'_> {
    pub fn polyhedron(&self) -> &Polyhedron {
        self.poly
    }

    pub fn project(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.project_detailed(x).map(|p| p.point)
    }

    pub fn project_detailed(&mut self, x: &DVector<f64>) -> Result<Projection> {
        let poly = self.poly;
        check_dim(poly.dim(), x.len())?;
        let tol = self.cfg.tol;
        let clamped = poly.clamp(x);
        if poly.num_rows() == 0 || poly.max_violation(&clamped) <= tol {
            return Ok(Projection { point: clamped, exact: true, converged: true, iterations: 0 });
        }
        if self.multipliers.iter().any(|l| *l > 0.0) {
            let warm = self.multipliers.clone();
            if let Some(y) = self.polish(x, &warm) {
                return Ok(Projection { point: y, exact: true, converged: true, iterations: 0 });
            }
        }

        let (g, h, l_inv) = (&poly.g, &poly.h, 1.0 / poly.lipschitz);
        let upper_bound = 0.5
            * x.iter()
                .zip(poly.upper.iter())
                .map(|(v, u)| v.powi(2).max((v - u).powi(2)))
                .sum::<f64>();
        let mut lambda = self.multipliers.map(|v| v.max(0.0));
        let mut mom = lambda.clone();
        let mut t: f64 = 1.0;
        for k in 1..=self.cfg.max_iter {
            let y = poly.clamp(&(x - g.tr_mul(&mom)));
            let grad = g * &y - h;
            let next = (&mom + grad * l_inv).map(|v| v.max(0.0));
            // Gradient-mapping restart keeps the ascent monotone in practice.
            if (&mom - &next).dot(&(&next - &lambda)) > 0.0 {
                t = 1.0;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            mom = &next + (&next - &lambda) * ((t - 1.0) / t_next);
            lambda = next;
            t = t_next;

            if k <= 3 || k % 10 == 0 {
                let y = poly.clamp(&(x - g.tr_mul(&lambda)));
                let slack = g * &y - h;
                let dual = 0.5 * (&y - x).norm_squared() + lambda.dot(&slack);
                if dual > upper_bound + 1e-9 * (1.0 + upper_bound) {
                    self.multipliers.fill(0.0);
                    return Err(Error::Infeasible);
                }
                if let Some(p) = self.polish(x, &lambda) {
                    return Ok(Projection { point: p, exact: true, converged: true, iterations: k });
                }
                let viol = slack.iter().fold(0.0_f64, |a, s| a.max(*s));
                if viol <= tol && lambda.dot(&slack).abs() <= tol {
                    self.multipliers = lambda;
                    return Ok(Projection { point: y, exact: false, converged: true, iterations: k });
                }
            }
        }
        let y = poly.clamp(&(x - g.tr_mul(&lambda)));
        self.multipliers = lambda;
        Ok(Projection { point: y, exact: false, converged: false, iterations: self.cfg.max_iter })
    }

    /// Active-set refinement seeded by `lambda`. Returns the exact projection
    /// when the KKT conditions are met.
    fn polish(&mut self, x: &DVector<f64>, lambda: &DVector<f64>) -> Option<DVector<f64>> {
        let poly = self.poly;
        let (g, h, u) = (&poly.g, &poly.h, &poly.upper);
        let n = poly.dim();
        let tol = self.cfg.tol;

        let mut active: Vec<usize> = (0..poly.num_rows()).filter(|&i| lambda[i] > 0.0).collect();
        active.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]).then(a.cmp(&b)));
        let status_of = |r: &DVector<f64>| -> Vec<Bound> {
            r.iter()
                .zip(u.iter())
                .map(|(v, ub)| if *v < 0.0 { Bound::Lower } else if *v > *ub { Bound::Upper } else { Bound::Free })
                .collect()
        };
        let mut status = status_of(&(x - g.tr_mul(lambda)));

        for _ in 0..4 * (poly.num_rows() + n) + 10 {
            let free: Vec<usize> = (0..n).filter(|&j| status[j] == Bound::Free).collect();
            active = independent_rows(g, &active, &free);
            let k = active.len();
            let fixed = DVector::from_fn(n, |j, _| match status[j] {
                Bound::Lower | Bound::Free => 0.0,
                Bound::Upper => u[j],
            });
            let mu = if k == 0 {
                DVector::zeros(0)
            } else {
                let grf = DMatrix::from_fn(k, free.len(), |a, b| g[(active[a], free[b])]);
                let xf = DVector::from_fn(free.len(), |b, _| x[free[b]]);
                let rhs = DVector::from_fn(k, |a, _| {
                    let row = active[a];
                    let fixed_part: f64 = (0..n).filter(|&j| status[j] == Bound::Upper).map(|j| g[(row, j)] * fixed[j]).sum();
                    h[row] - fixed_part
                });
                let gram = &grf * grf.transpose();
                let chol = gram.cholesky()?;
                chol.solve(&(&grf * &xf - rhs))
            };
            let mut r = x.clone();
            for (a, &row) in active.iter().enumerate() {
                for j in 0..n {
                    r[j] -= g[(row, j)] * mu[a];
                }
            }
            let next_status = status_of(&r);
            if next_status != status {
                status = next_status;
                continue;
            }
            if let Some((a, _)) = mu.iter().enumerate().filter(|(_, m)| **m < -tol).min_by(|p, q| p.1.total_cmp(q.1)) {
                active.remove(a);
                continue;
            }
            let y = poly.clamp(&r);
            let slack = g * &y - h;
            let (worst, _) = slack
                .iter()
                .enumerate()
                .fold((usize::MAX, tol), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc });
            if worst != usize::MAX {
                if active.contains(&worst) {
                    return None;
                }
                let before = active.len();
                active.push(worst);
                let free: Vec<usize> = (0..n).filter(|&j| status[j] == Bound::Free).collect();
                if independent_rows(g, &active, &free).len() == before {
                    return None;
                }
                continue;
            }
            let mut multipliers = DVector::zeros(poly.num_rows());
            for (a, &row) in active.iter().enumerate() {
                multipliers[row] = mu[a].max(0.0);
            }
            self.multipliers = multipliers;
            return Some(y);
        }
        None
    }
}

/// Greedy subset of `rows` (kept in order) whose restrictions to `cols` are
/// linearly independent.
fn independent_rows(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for &row in rows {
        let v = DVector::from_fn(cols.len(), |b, _| g[(row, cols[b])]);
        let norm = v.norm();
        if norm <= 1e-12 {
            continue;
        }
        let mut w = v;
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let rn = w.norm();
        if rn > 1e-9 * norm {
            basis.push(w / rn);
            kept.push(row);
        }
    }
    kept
}
