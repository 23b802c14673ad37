//! End-to-end experiment harness: configuration, the train/decode procedure,
//! parameter sweeps, strategy comparison, persistence (CSV + JSON manifest +
//! line-delimited traces), and chart emission.

pub mod chart;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    propagate, ControlSchedule, SpinChainSystem, DEFAULT_BOUNDS, DEFAULT_PIECES,
    DEFAULT_TOTAL_TIME,
};
use crate::es::{train, EsConfig, TrainingTrace};
use crate::qae::{
    compress, grid_search_pr, qae_pure_bound, PrSource, QaeProblem, ReferenceStrategy,
};
use crate::qinfo::FidelityConvention;
use crate::states::StateFamilySpec;
use crate::{Error, Result};

/// CSV schema version, embedded in the `# schema=` header line.
pub const CSV_SCHEMA_VERSION: u32 = 1;
/// Manifest schema version.
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
/// How often J_d is probed during training (observational only).
pub const JD_PROBE_PERIOD: usize = 25;

/// Pulse-shape portion of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleShape {
    pub total_time: f64,
    pub pieces: usize,
    pub bounds: (f64, f64),
}

impl Default for ScheduleShape {
    fn default() -> Self {
        Self {
            total_time: DEFAULT_TOTAL_TIME,
            pieces: DEFAULT_PIECES,
            bounds: DEFAULT_BOUNDS,
        }
    }
}

/// Full experiment description; serializable as the config file and into
/// run manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: StateFamilySpec,
    /// Swept parameter values (beta / alpha / p0). Empty means "run the
    /// family as configured" (a single point).
    #[serde(default)]
    pub grid: Vec<f64>,
    pub n_a: usize,
    pub n_b: usize,
    pub w: f64,
    pub strategy: ReferenceStrategy,
    pub es: EsConfig,
    #[serde(default)]
    pub schedule: ScheduleShape,
    #[serde(default)]
    pub fidelity: FidelityConvention,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_replicates() -> usize {
    3
}

impl ExperimentConfig {
    pub fn n_qubits(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_b == 0 {
            return Err(Error::Config("n_a and n_b must both be positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicate count must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::Config(format!("w {} outside [0, 1]", self.w)));
        }
        self.es.validate()
    }
}

/// One row of sweep output; the CSV schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub family: String,
    pub parameter: Option<f64>,
    pub n_qubits: usize,
    pub w: f64,
    pub strategy: String,
    pub replicate: String,
    pub p_r_used: Option<f64>,
    pub j_pure: f64,
    pub j_qmi: f64,
    pub j_e: f64,
    pub j_d: f64,
    pub bound: f64,
    pub seed: u64,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub status: String,
}

/// Everything needed to replay a run: config snapshot, resolved seed, and
/// the trained control parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub theta: Vec<f64>,
    pub record: ResultRecord,
    pub wall_seconds: f64,
}

/// Outcome of a single training run.
#[derive(Debug)]
pub struct RunOutcome {
    pub record: ResultRecord,
    pub trace: TrainingTrace,
    pub theta: Vec<f64>,
    pub manifest: RunManifest,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Per-point seed from (master seed, family, grid value, replicate), so
/// extending a sweep never changes existing points.
pub fn derive_seed(master: u64, family: &str, value: f64, replicate: usize) -> u64 {
    let mut h = splitmix64(master);
    for b in family.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    h = splitmix64(h ^ value.to_bits());
    splitmix64(h ^ replicate as u64)
}

fn schedule_from_theta(shape: &ScheduleShape, n_controls: usize, theta: &[f64]) -> Result<ControlSchedule> {
    ControlSchedule::new(
        shape.total_time,
        shape.pieces,
        n_controls,
        shape.bounds,
        theta.to_vec(),
    )
}

/// Steps 1-8 of the procedure: build rho0, train the encoder by maximizing
/// Phi(w), resolve the reference, decode, and report all metrics.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    config.validate()?;
    let started = Instant::now();
    let rho0 = config.family.build()?;
    let problem = QaeProblem::new(config.n_a, config.n_b, rho0, config.w)?;
    let system = SpinChainSystem::new(config.n_qubits())?;
    let convention = config.fidelity;
    let shape = config.schedule.clone();
    let dim = shape.pieces * system.n_controls();
    let mut es = config.es.clone().with_seed(seed);
    es.bounds = shape.bounds;

    let objective = {
        let problem = problem.clone();
        let system = system.clone();
        let shape = shape.clone();
        move |theta: &[f64]| -> f64 {
            schedule_from_theta(&shape, system.n_controls(), theta)
                .and_then(|s| propagate(&system, &s))
                .and_then(|u| crate::qae::phi(&problem, &u, convention))
                .unwrap_or(f64::NAN)
        }
    };

    let probe_problem = problem.clone();
    let probe_system = system.clone();
    let probe_shape = shape.clone();
    let probe_strategy = config.strategy.clone();
    let probe = move |iteration: usize, theta: &[f64], _phi: f64| {
        if iteration % JD_PROBE_PERIOD != 0 {
            return (None, None, None);
        }
        let metrics = schedule_from_theta(&probe_shape, probe_system.n_controls(), theta)
            .and_then(|s| propagate(&probe_system, &s))
            .and_then(|u| compress(&probe_problem, &u, &probe_strategy, convention));
        match metrics {
            Ok(r) => (Some(r.j_pure), Some(r.j_qmi), Some(r.j_d)),
            Err(_) => (None, None, None),
        }
    };

    let run = train(objective, &es, dim, probe)?;

    let schedule = schedule_from_theta(&shape, system.n_controls(), &run.theta)?;
    let u_e = propagate(&system, &schedule)?;
    let result = compress(&problem, &u_e, &config.strategy, convention)?;
    let wall_seconds = started.elapsed().as_secs_f64();

    let record = ResultRecord {
        family: config.family.label().to_string(),
        parameter: config.family.parameter(),
        n_qubits: config.n_qubits(),
        w: config.w,
        strategy: config.strategy.label().to_string(),
        replicate: "0".to_string(),
        p_r_used: result.p_r_used,
        j_pure: result.j_pure,
        j_qmi: result.j_qmi,
        j_e: result.j_e,
        j_d: result.j_d,
        bound: result.bound,
        seed,
        iterations: run.trace.iterations,
        wall_seconds,
        status: "ok".to_string(),
    };
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seed,
        theta: run.theta.clone(),
        record: record.clone(),
        wall_seconds,
    };
    Ok(RunOutcome {
        record,
        trace: run.trace,
        theta: run.theta,
        manifest,
    })
}

/// Recomputes J_d from a manifest's stored parameters. The result must match
/// the recorded value to 1e-9 for the manifest to be considered replayable.
pub fn replay_manifest(manifest: &RunManifest) -> Result<f64> {
    let config = &manifest.config;
    let rho0 = config.family.build()?;
    let problem = QaeProblem::new(config.n_a, config.n_b, rho0, config.w)?;
    let system = SpinChainSystem::new(config.n_qubits())?;
    let schedule = schedule_from_theta(&config.schedule, system.n_controls(), &manifest.theta)?;
    let u_e = propagate(&system, &schedule)?;
    let result = compress(&problem, &u_e, &config.strategy, config.fidelity)?;
    Ok(result.j_d)
}

fn run_point(
    config: &ExperimentConfig,
    value: Option<f64>,
    replicate: usize,
) -> (ResultRecord, Option<RunOutcome>) {
    let mut point = config.clone();
    if let Some(v) = value {
        point.family = config.family.with_parameter(v);
    }
    let seed = derive_seed(
        config.master_seed,
        point.family.label(),
        value.unwrap_or(0.0),
        replicate,
    );
    match run_single(&point, seed) {
        Ok(mut outcome) => {
            outcome.record.replicate = replicate.to_string();
            outcome.manifest.record.replicate = replicate.to_string();
            (outcome.record.clone(), Some(outcome))
        }
        Err(e) => (
            ResultRecord {
                family: point.family.label().to_string(),
                parameter: point.family.parameter(),
                n_qubits: point.n_qubits(),
                w: point.w,
                strategy: point.strategy.label().to_string(),
                replicate: replicate.to_string(),
                p_r_used: None,
                j_pure: f64::NAN,
                j_qmi: f64::NAN,
                j_e: f64::NAN,
                j_d: f64::NAN,
                bound: f64::NAN,
                seed,
                iterations: 0,
                wall_seconds: 0.0,
                status: format!("failed: {e}"),
            },
            None,
        ),
    }
}

fn aggregate_rows(records: &[ResultRecord]) -> Vec<ResultRecord> {
    let ok: Vec<&ResultRecord> = records.iter().filter(|r| r.status == "ok").collect();
    if ok.len() < 2 {
        return Vec::new();
    }
    let pick = |label: &str, f: &dyn Fn(&dyn Fn(&ResultRecord) -> f64) -> f64| {
        let mut row = ok[0].clone();
        row.replicate = label.to_string();
        row.seed = 0;
        row.iterations = 0;
        row.p_r_used = None;
        row.j_pure = f(&|r| r.j_pure);
        row.j_qmi = f(&|r| r.j_qmi);
        row.j_e = f(&|r| r.j_e);
        row.j_d = f(&|r| r.j_d);
        row.wall_seconds = f(&|r| r.wall_seconds);
        row
    };
    let mean = |get: &dyn Fn(&ResultRecord) -> f64| {
        ok.iter().map(|r| get(r)).sum::<f64>() / ok.len() as f64
    };
    let min =
        |get: &dyn Fn(&ResultRecord) -> f64| ok.iter().map(|r| get(r)).fold(f64::INFINITY, f64::min);
    let max = |get: &dyn Fn(&ResultRecord) -> f64| {
        ok.iter().map(|r| get(r)).fold(f64::NEG_INFINITY, f64::max)
    };
    vec![pick("mean", &mean), pick("min", &min), pick("max", &max)]
}

fn with_worker_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    }
}

/// Output of a sweep: every per-replicate row plus aggregate rows, in grid
/// order.
#[derive(Debug)]
pub struct SweepOutput {
    pub records: Vec<ResultRecord>,
    pub outcomes: Vec<RunOutcome>,
}

/// One `run_single` per grid point and replicate. Failed points are flagged
/// in their rows; the sweep continues.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let values: Vec<Option<f64>> = if config.grid.is_empty() {
        vec![config.family.parameter()]
    } else {
        config.grid.iter().map(|&v| Some(v)).collect()
    };
    let jobs: Vec<(Option<f64>, usize)> = values
        .iter()
        .flat_map(|&v| (0..config.replicates).map(move |r| (v, r)))
        .collect();
    let results: Vec<(ResultRecord, Option<RunOutcome>)> = with_worker_pool(config.workers, || {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(v, r)| run_point(config, v, r))
            .collect()
    });

    let mut records = Vec::new();
    let mut outcomes = Vec::new();
    for chunk in results.chunks(config.replicates) {
        let rows: Vec<ResultRecord> = chunk.iter().map(|(r, _)| r.clone()).collect();
        let aggregates = aggregate_rows(&rows);
        records.extend(rows);
        records.extend(aggregates);
        outcomes.extend(chunk.iter().filter_map(|(_, o)| o.as_ref()).map(|o| RunOutcome {
            record: o.record.clone(),
            trace: o.trace.clone(),
            theta: o.theta.clone(),
            manifest: o.manifest.clone(),
        }));
    }
    Ok(SweepOutput { records, outcomes })
}

/// One row of strategy-comparison output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub family: String,
    pub parameter: Option<f64>,
    pub n_qubits: usize,
    pub w: f64,
    pub strategy: String,
    pub p_r: f64,
    pub j_d: f64,
    pub bound: f64,
    pub seed: u64,
}

/// For each grid point: trains once, then resolves Grid, Bound, and Guess
/// blend ratios on the same trained encoder.
pub fn compare_strategies(config: &ExperimentConfig) -> Result<Vec<StrategyRecord>> {
    config.validate()?;
    let values: Vec<f64> = if config.grid.is_empty() {
        config.family.parameter().into_iter().collect()
    } else {
        config.grid.clone()
    };
    if values.is_empty() {
        return Err(Error::Config("no grid values for comparison".into()));
    }
    let points: Vec<Vec<StrategyRecord>> = with_worker_pool(config.workers, || {
        use rayon::prelude::*;
        values
            .par_iter()
            .map(|&v| -> Result<Vec<StrategyRecord>> {
                let mut point = config.clone();
                point.family = config.family.with_parameter(v);
                let seed = derive_seed(config.master_seed, point.family.label(), v, 0);
                // The training objective does not depend on the reference
                // strategy, so one trained encoder serves all three.
                point.strategy = ReferenceStrategy::MixBlend {
                    p_source: PrSource::Guess,
                };
                let outcome = run_single(&point, seed)?;
                let system = SpinChainSystem::new(point.n_qubits())?;
                let schedule =
                    schedule_from_theta(&point.schedule, system.n_controls(), &outcome.theta)?;
                let u_e = propagate(&system, &schedule)?;
                let rho0 = point.family.build()?;
                let problem = QaeProblem::new(point.n_a, point.n_b, rho0, point.w)?;
                let bound = qae_pure_bound(&problem.rho0, point.n_b)?;
                let mut rows = Vec::new();
                // Grid search over the candidate set.
                let grid = grid_search_pr(
                    &problem,
                    &u_e,
                    &PrSource::default_grid(),
                    point.fidelity,
                )?;
                rows.push(StrategyRecord {
                    family: point.family.label().to_string(),
                    parameter: Some(v),
                    n_qubits: point.n_qubits(),
                    w: point.w,
                    strategy: "grid".into(),
                    p_r: grid.best_p_r,
                    j_d: grid.best_j_d,
                    bound,
                    seed,
                });
                for (name, source) in [("bound", PrSource::Bound), ("guess", PrSource::Guess)] {
                    let mut strat_point = point.clone();
                    strat_point.strategy = ReferenceStrategy::MixBlend { p_source: source };
                    let result =
                        compress(&problem, &u_e, &strat_point.strategy, point.fidelity)?;
                    rows.push(StrategyRecord {
                        family: point.family.label().to_string(),
                        parameter: Some(v),
                        n_qubits: point.n_qubits(),
                        w: point.w,
                        strategy: name.into(),
                        p_r: result.p_r_used.unwrap_or(f64::NAN),
                        j_d: result.j_d,
                        bound,
                        seed,
                    });
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(points.into_iter().flatten().collect())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    writeln!(file, "# schema={CSV_SCHEMA_VERSION}")?;
    let mut writer = csv::Writer::from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes sweep rows to a UTF-8 CSV with a `# schema=N` comment line and a
/// header row.
pub fn write_sweep_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_csv(path, records)
}

pub fn write_strategy_csv(path: &Path, records: &[StrategyRecord]) -> Result<()> {
    write_csv(path, records)
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One JSON record per line, one line per iteration.
pub fn write_trace(path: &Path, trace: &TrainingTrace) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    for record in &trace.records {
        writeln!(file, "{}", serde_json::to_string(record)?)?;
    }
    Ok(())
}

/// Standard artifact paths inside an output directory.
pub fn artifact_paths(out_dir: &Path, stem: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        out_dir.join(format!("{stem}.csv")),
        out_dir.join(format!("{stem}_manifest.json")),
        out_dir.join(format!("{stem}_trace.jsonl")),
    )
}
