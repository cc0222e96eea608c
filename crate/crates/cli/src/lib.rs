//! Batch runner: loads a network and an experiment config, solves for the
//! equilibrium set, certifies it and writes CSV tables.

pub mod config;

pub use config::ExperimentConfig;

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;
use wardrop::certificates::{certificate, certify_k, epsilon_schedule, repeat_scenarios, shrinkage_curve, CertificateRow};
use wardrop::costs::check_monotonicity;
use wardrop::equilibrium::{cloud_from_csv, cloud_to_csv, estimate_equilibrium_set, filter_cloud, EquilibriumEstimate};
use wardrop::network::{build_incidence, enumerate_paths, parse_document, IncidenceMatrices, NetworkDocument, PathSet};
use wardrop::rng;
use wardrop::uncertainty::{
    generate_nominal, parse_nominal_matrix, FlowBox, NominalContext, ScenarioSet, UncertaintyModel,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wardrop::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 config, 3 infeasible scenario system, 4 no converged start, 5 empty
    /// equilibrium cloud, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        use wardrop::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(E::Infeasible) => 3,
            CliError::Core(E::NoConvergedPoints) => 4,
            CliError::Core(E::EmptyCloud) => 5,
            CliError::Core(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Command-line overrides of scalar config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: bool,
}

/// A loaded and validated problem.
pub struct Problem {
    pub config: ExperimentConfig,
    pub doc: NetworkDocument,
    pub paths: PathSet,
    pub inc: IncidenceMatrices,
    pub model: UncertaintyModel,
    pub seed: u64,
    pub out: PathBuf,
    /// SHA-256 over the config, network and nominal-matrix bytes.
    pub config_digest: String,
    base: PathBuf,
    force: bool,
}

pub fn load(config_path: &Path, overrides: &Overrides) -> Result<Problem> {
    let config_bytes = read(config_path)?;
    let text = String::from_utf8(config_bytes.clone()).map_err(|_| CliError::Config("config is not UTF-8".into()))?;
    let config = ExperimentConfig::parse(&text).map_err(CliError::Config)?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut hasher = Sha256::new();
    hasher.update(&config_bytes);
    let net_path = ExperimentConfig::resolve(&base, &config.network);
    let net_bytes = read(&net_path)?;
    hasher.update(&net_bytes);
    let doc = parse_document(
        std::str::from_utf8(&net_bytes).map_err(|_| CliError::Config("network file is not UTF-8".into()))?,
    )?;

    let seed = overrides.seed.unwrap_or(config.seed);
    let paths = enumerate_paths(&doc.network, config.enumeration.max_hops, config.enumeration.max_paths)?;
    let inc = build_incidence(&doc.network, &paths);
    let flow_box = FlowBox::uniform(paths.len(), config.flow_box.p_max)?;
    let (a0, b0) = match config.nominal.spec().map_err(CliError::Config)? {
        Some(spec) => {
            let ctx =
                NominalContext { od_pairs: doc.network.od_pairs().to_vec(), demand_max: &inc.h * flow_box.upper() };
            let sys = generate_nominal(&spec, &ctx, seed)?;
            (sys.a0, sys.b0)
        }
        None => {
            let config::NominalSection::Matrix { file } = &config.nominal else { unreachable!() };
            let bytes = read(&ExperimentConfig::resolve(&base, file))?;
            hasher.update(&bytes);
            let (a0, b0) = parse_nominal_matrix(
                std::str::from_utf8(&bytes).map_err(|_| CliError::Config("nominal file is not UTF-8".into()))?,
            )?;
            if a0.ncols() != doc.network.num_od_pairs() {
                return Err(CliError::Config(format!(
                    "nominal matrix has {} columns, network has {} OD pairs",
                    a0.ncols(),
                    doc.network.num_od_pairs()
                )));
            }
            (a0, b0)
        }
    };
    let model = UncertaintyModel::new(a0, b0, config.uncertainty.rho, flow_box)?;
    let out = overrides.out.clone().unwrap_or_else(|| ExperimentConfig::resolve(&base, &config.out));
    Ok(Problem {
        config,
        doc,
        paths,
        inc,
        model,
        seed,
        out,
        config_digest: hex::encode(hasher.finalize()),
        base,
        force: overrides.force,
    })
}

/// SHA-256 of the stacked right-hand sides of a scenario set.
pub fn scenario_digest(set: &ScenarioSet) -> String {
    let mut h = Sha256::new();
    for v in set.stacked().b.iter() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Files written by a command, removable as a unit.
#[derive(Default)]
struct Written {
    files: Vec<PathBuf>,
}

impl Written {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(path.clone());
        Ok(path)
    }

    fn remove_all(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

impl Problem {
    /// Refuses cost models that fail a sampled monotonicity check unless
    /// `--force` was given.
    pub fn check_costs(&self) -> Result<()> {
        let mut rng = rng::stream(self.seed, rng::PURPOSE_TEST, u64::MAX);
        let report = check_monotonicity(
            &self.doc.costs,
            &self.inc,
            self.model.flow_box(),
            self.config.monotonicity.trials,
            &mut rng,
        )?;
        if !report.passed && !self.force {
            return Err(CliError::Core(wardrop::Error::NotMonotone { min_pairing: report.min_pairing }));
        }
        Ok(())
    }

    fn node(&self, i: usize) -> String {
        self.doc.network.node_id(i).to_string()
    }

    /// The nominal cloud from `certificate.cloud` if set, else solved.
    pub fn nominal_cloud(&self) -> Result<EquilibriumEstimate> {
        if let Some(p) = &self.config.certificate.cloud {
            let path = ExperimentConfig::resolve(&self.base, p);
            let text = String::from_utf8(read(&path)?).map_err(|_| CliError::Config("cloud is not UTF-8".into()))?;
            let est = cloud_from_csv(&text)?;
            if est.cloud.iter().any(|e| e.p.len() != self.paths.len()) {
                return Err(CliError::Config(format!("cloud {} does not match the path count", path.display())));
            }
            if est.is_empty() {
                return Err(CliError::Core(wardrop::Error::EmptyCloud));
            }
            return Ok(est);
        }
        self.solve(0)
    }

    /// Equilibrium-set estimate for `VI(P_{ω_K}, C)`, with the `K` samples
    /// of repetition 0.
    pub fn solve(&self, k: usize) -> Result<EquilibriumEstimate> {
        self.check_costs()?;
        let set = self.scenarios(k);
        Ok(estimate_equilibrium_set(&self.doc.costs, &set, &self.inc, &self.config.solver.to_config(), self.seed)?)
    }

    pub fn scenarios(&self, k: usize) -> ScenarioSet {
        if k == 0 {
            ScenarioSet::nominal(&self.model)
        } else {
            repeat_scenarios(&self.model, k, self.seed, 0)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OdSummary {
    pub origin: String,
    pub destination: String,
    pub paths: usize,
}

#[derive(Debug, Serialize)]
pub struct EnumerationSummary {
    pub m: usize,
    pub l: usize,
    pub e: usize,
    pub truncated: bool,
    pub dropped: usize,
    pub hop_limited: bool,
    pub per_od: Vec<OdSummary>,
    pub paths: Vec<Vec<String>>,
}

pub fn cmd_enumerate(p: &Problem) -> Result<EnumerationSummary> {
    let net = &p.doc.network;
    let summary = EnumerationSummary {
        m: p.paths.len(),
        l: net.num_od_pairs(),
        e: net.num_edges(),
        truncated: p.paths.truncated(),
        dropped: p.paths.dropped,
        hop_limited: p.paths.hop_limited,
        per_od: net
            .od_pairs()
            .iter()
            .enumerate()
            .map(|(k, od)| OdSummary {
                origin: p.node(od.origin),
                destination: p.node(od.destination),
                paths: p.paths.count_for_od(k),
            })
            .collect(),
        paths: p.paths.paths.iter().map(|path| path.nodes.iter().map(|&n| p.node(n)).collect()).collect(),
    };
    Written::default().write(&p.out, "enumerate.json", &to_json(&summary))?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct CloudMeta {
    k: usize,
    seed: u64,
    n_starts: usize,
    cloud_size: usize,
    max_residual: f64,
    scenario_digest: String,
    config_digest: String,
    note: &'static str,
}

const CLOUD_NOTE: &str = "The cloud is a finite under-approximation of the equilibrium set; \
violation frequencies measured on it can underestimate the true violation probability.";

/// Solves at `K` and writes `cloud_k{K}.csv` with a JSON sidecar.
pub fn cmd_solve(p: &Problem, k: usize) -> Result<EquilibriumEstimate> {
    let est = p.solve(k)?;
    let meta = CloudMeta {
        k,
        seed: p.seed,
        n_starts: p.config.solver.n_starts,
        cloud_size: est.len(),
        max_residual: est.cloud.iter().map(|e| e.residual).fold(0.0, f64::max),
        scenario_digest: scenario_digest(&p.scenarios(k)),
        config_digest: p.config_digest.clone(),
        note: CLOUD_NOTE,
    };
    let mut w = Written::default();
    w.write(&p.out, &format!("cloud_k{k}.csv"), &cloud_to_csv(&est, p.paths.len()))?;
    w.write(&p.out, &format!("cloud_k{k}.json"), &to_json(&meta))?;
    Ok(est)
}

/// Certificate table rows; `None` where the filtered cloud was empty.
pub struct CertifyOutcome {
    pub rows: Vec<(usize, Option<CertificateRow>)>,
}

impl CertifyOutcome {
    pub fn empty_ks(&self) -> Vec<usize> {
        self.rows.iter().filter(|(_, r)| r.is_none()).map(|(k, _)| *k).collect()
    }
}

fn certify_rows(p: &Problem, cloud: &EquilibriumEstimate) -> Result<CertifyOutcome> {
    let c = &p.config.certificate;
    let mut rows = Vec::new();
    for &k in &c.k_list {
        match certify_k(cloud, &p.model, &p.inc, k, c.beta, c.n_test, c.repeats, p.seed) {
            Ok(row) => rows.push((k, Some(row))),
            Err(wardrop::Error::EmptyCloud) => rows.push((k, None)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(CertifyOutcome { rows })
}

fn certificate_csv(p: &Problem, outcome: &CertifyOutcome) -> String {
    let c = &p.config.certificate;
    let mut out = String::from("K,iota,epsilon,beta,v_max,v_avg,n_test,seed\n");
    for (k, row) in &outcome.rows {
        match row {
            Some(r) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.k, r.iota, r.epsilon, r.beta, r.v_max, r.v_avg, r.n_test, r.seed
            )),
            None => out.push_str(&format!("{k},,,{},,,{},{}\n", c.beta, c.n_test, p.seed)),
        }
    }
    out
}

fn certificate_statements(p: &Problem, outcome: &CertifyOutcome) -> Result<String> {
    let c = &p.config.certificate;
    let mut out = String::new();
    for (k, row) in &outcome.rows {
        let Some(r) = row else {
            out.push_str(&format!("K = {k}: the filtered equilibrium cloud is empty; no certificate.\n\n"));
            continue;
        };
        if *k == 0 {
            out.push_str("K = 0: no scenarios, the certificate is vacuous (epsilon = 1).\n");
        } else {
            out.push_str(&certificate(r.iota, &epsilon_schedule(*k, c.beta)?)?.statement);
            out.push('\n');
        }
        out.push_str(&format!(
            "Largest support size over {} repetitions: {}. Empirical violation over {} fresh draws: max {}, mean {}.\n",
            r.runs.len(),
            r.iota,
            r.n_test,
            r.v_max,
            r.v_avg
        ));
        out.push_str(CLOUD_NOTE);
        out.push_str("\n\n");
    }
    Ok(out)
}

/// Writes `certificate.csv` and `certificate.txt`. Empty filtered clouds are
/// reported per `K` in both files.
pub fn cmd_certify(p: &Problem) -> Result<CertifyOutcome> {
    let cloud = p.nominal_cloud()?;
    let outcome = certify_rows(p, &cloud)?;
    let mut w = Written::default();
    w.write(&p.out, "certificate.csv", &certificate_csv(p, &outcome))?;
    w.write(&p.out, "certificate.txt", &certificate_statements(p, &outcome)?)?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    config_digest: String,
    seed: u64,
    scenario_seeds: Vec<u64>,
    nominal_cloud_size: usize,
    files: Vec<(String, String)>,
    wall_seconds: WallTimes,
    note: &'static str,
}

#[derive(Debug, Serialize)]
struct WallTimes {
    solve: f64,
    certify: f64,
    shrinkage: f64,
    total: f64,
}

fn shrinkage_csv(rows: &[wardrop::certificates::ShrinkageRow], repeats: usize) -> String {
    let mut out = String::from("K,mean,std");
    for r in 1..=repeats {
        out.push_str(&format!(",run_{r}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{},{}", row.k, row.mean, row.std));
        for v in &row.runs {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Full pipeline: nominal cloud, filtered clouds per `K`, certificate table,
/// shrinkage curve, then `manifest.json`. A run without a manifest is
/// incomplete; on error every file written by this run is removed.
pub fn cmd_experiment(p: &Problem) -> Result<CertifyOutcome> {
    let manifest_path = p.out.join("manifest.json");
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(io_err(&manifest_path))?;
    }
    let mut w = Written::default();
    let result = experiment_inner(p, &mut w);
    if result.is_err() {
        w.remove_all();
    }
    result
}

fn experiment_inner(p: &Problem, w: &mut Written) -> Result<CertifyOutcome> {
    let start = Instant::now();
    let cloud = p.nominal_cloud()?;
    w.write(&p.out, "cloud_k0.csv", &cloud_to_csv(&cloud, p.paths.len()))?;
    for &k in p.config.certificate.k_list.iter().filter(|&&k| k > 0) {
        let filtered = filter_cloud(&cloud, &p.scenarios(k), &p.inc)?;
        w.write(&p.out, &format!("cloud_k{k}.csv"), &cloud_to_csv(&filtered, p.paths.len()))?;
    }
    let solve = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let outcome = certify_rows(p, &cloud)?;
    w.write(&p.out, "certificate.csv", &certificate_csv(p, &outcome))?;
    w.write(&p.out, "certificate.txt", &certificate_statements(p, &outcome)?)?;
    let certify = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let s = &p.config.shrinkage;
    let rows = shrinkage_curve(&cloud, &p.model, &p.inc, &s.k_grid, s.repeats, p.seed)?;
    w.write(&p.out, "shrinkage.csv", &shrinkage_csv(&rows, s.repeats))?;
    let shrinkage = t.elapsed().as_secs_f64();

    let repeats = p.config.certificate.repeats.max(s.repeats);
    let files = w
        .files
        .iter()
        .map(|f| {
            let bytes = fs::read(f).map_err(io_err(f))?;
            let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, hex::encode(Sha256::digest(&bytes))))
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_digest: p.config_digest.clone(),
        seed: p.seed,
        scenario_seeds: (0..repeats).map(|r| wardrop::certificates::repeat_seed(p.seed, r)).collect(),
        nominal_cloud_size: cloud.len(),
        files,
        wall_seconds: WallTimes { solve, certify, shrinkage, total: start.elapsed().as_secs_f64() },
        note: CLOUD_NOTE,
    };
    w.write(&p.out, "manifest.json", &to_json(&manifest))?;
    Ok(outcome)
}
