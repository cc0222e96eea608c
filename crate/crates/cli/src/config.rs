//! The experiment configuration document (TOML).
//!
//! ```toml
//! network = "braess.net"   # relative to this file
//! seed = 7
//! out = "out"
//!
//! [box]
//! p_max = 10.0
//!
//! [uncertainty]
//! rho = 0.5
//!
//! [nominal]
//! kind = "halfspace-sample"
//! rows = 136
//!
//! [certificate]
//! beta = 1e-6
//! k_list = [0, 100, 1000]
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use wardrop::equilibrium::SolverConfig;
use wardrop::uncertainty::{HullPoints, NominalSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Network document, relative to the config file.
    pub network: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub enumeration: EnumerationSection,
    #[serde(rename = "box")]
    pub flow_box: BoxSection,
    #[serde(default)]
    pub uncertainty: UncertaintySection,
    pub nominal: NominalSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub certificate: CertificateSection,
    #[serde(default)]
    pub shrinkage: ShrinkageSection,
    #[serde(default)]
    pub monotonicity: MonotonicitySection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnumerationSection {
    pub max_hops: usize,
    pub max_paths: usize,
}

impl Default for EnumerationSection {
    fn default() -> Self {
        EnumerationSection { max_hops: 12, max_paths: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintySection {
    /// Only `additive-b` is supported.
    pub mode: String,
    pub rho: f64,
}

impl Default for UncertaintySection {
    fn default() -> Self {
        UncertaintySection { mode: "additive-b".into(), rho: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NominalSection {
    Box {
        lower: f64,
        upper: f64,
    },
    Hose {
        #[serde(default)]
        egress_min: f64,
        egress_max: f64,
        #[serde(default)]
        ingress_min: f64,
        ingress_max: f64,
    },
    Hull2d {
        #[serde(default)]
        points: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        random: Option<usize>,
    },
    HalfspaceSample {
        rows: usize,
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default = "default_region_scale")]
        region_scale: f64,
        #[serde(default = "default_true")]
        anchor_origin: bool,
    },
    /// Rows `a_1 ... a_l | b` read from a file relative to the config.
    Matrix {
        file: PathBuf,
    },
}

fn default_margin() -> f64 {
    0.05
}

fn default_region_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl NominalSection {
    /// The generator spec, or `None` for an explicit matrix file.
    pub fn spec(&self) -> Result<Option<NominalSpec>, String> {
        Ok(Some(match self {
            NominalSection::Box { lower, upper } => NominalSpec::Box { lower: *lower, upper: *upper },
            NominalSection::Hose { egress_min, egress_max, ingress_min, ingress_max } => NominalSpec::Hose {
                egress_min: *egress_min,
                egress_max: *egress_max,
                ingress_min: *ingress_min,
                ingress_max: *ingress_max,
            },
            NominalSection::Hull2d { points, random } => match (points, random) {
                (Some(p), None) => NominalSpec::Hull2d(HullPoints::Explicit(p.clone())),
                (None, Some(n)) => NominalSpec::Hull2d(HullPoints::Random(*n)),
                _ => return Err("hull2d needs exactly one of `points` and `random`".into()),
            },
            NominalSection::HalfspaceSample { rows, margin, region_scale, anchor_origin } => {
                NominalSpec::HalfspaceSample {
                    rows: *rows,
                    margin: *margin,
                    region_scale: *region_scale,
                    anchor_origin: *anchor_origin,
                }
            }
            NominalSection::Matrix { .. } => return Ok(None),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub alpha: f64,
    pub tol_res: f64,
    pub max_iter: usize,
    pub tol_proj: f64,
    pub n_starts: usize,
    pub dedup_radius: f64,
    pub divergence_window: usize,
    pub walk_steps: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            alpha: d.alpha,
            tol_res: d.tol_res,
            max_iter: d.max_iter,
            tol_proj: d.tol_proj,
            n_starts: d.n_starts,
            dedup_radius: d.dedup_radius,
            divergence_window: d.divergence_window,
            walk_steps: d.walk_steps,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            tol_res: self.tol_res,
            max_iter: self.max_iter,
            tol_proj: self.tol_proj,
            n_starts: self.n_starts,
            dedup_radius: self.dedup_radius,
            divergence_window: self.divergence_window,
            walk_steps: self.walk_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateSection {
    pub beta: f64,
    pub k_list: Vec<usize>,
    pub n_test: usize,
    pub repeats: usize,
    /// Precomputed nominal cloud CSV, relative to the config.
    pub cloud: Option<PathBuf>,
}

impl Default for CertificateSection {
    fn default() -> Self {
        CertificateSection { beta: 1e-6, k_list: vec![0, 100, 1000], n_test: 10_000, repeats: 10, cloud: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShrinkageSection {
    pub k_grid: Vec<usize>,
    pub repeats: usize,
}

impl Default for ShrinkageSection {
    fn default() -> Self {
        ShrinkageSection { k_grid: vec![0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000], repeats: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonotonicitySection {
    pub trials: usize,
}

impl Default for MonotonicitySection {
    fn default() -> Self {
        MonotonicitySection { trials: 500 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.uncertainty.mode != "additive-b" {
            return Err(format!("unsupported uncertainty mode `{}`", self.uncertainty.mode));
        }
        if !(0.0..1.0).contains(&self.uncertainty.rho) {
            return Err(format!("rho must lie in [0, 1), got {}", self.uncertainty.rho));
        }
        if !(self.flow_box.p_max.is_finite() && self.flow_box.p_max > 0.0) {
            return Err("p_max must be positive".into());
        }
        let c = &self.certificate;
        if !(c.beta > 0.0 && c.beta < 1.0) {
            return Err(format!("beta must lie in (0, 1), got {}", c.beta));
        }
        if c.n_test == 0 || c.repeats == 0 || c.k_list.is_empty() {
            return Err("certificate needs n_test > 0, repeats > 0 and a nonempty k_list".into());
        }
        if self.shrinkage.repeats == 0 || self.shrinkage.k_grid.is_empty() {
            return Err("shrinkage needs repeats > 0 and a nonempty k_grid".into());
        }
        if self.monotonicity.trials == 0 {
            return Err("monotonicity trials must be positive".into());
        }
        self.solver.to_config().validate().map_err(|e| e.to_string())?;
        self.nominal.spec()?;
        Ok(())
    }

    /// Resolves a path given in the config against the config's directory.
    pub fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}
