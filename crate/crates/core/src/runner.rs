//! End-to-end runs, grid sweeps, artifact directories and the graph cache.
//!
//! A run directory is built under a temporary name and renamed into place,
//! so `runs/<fingerprint>/` either holds every artifact or does not exist.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ndarray::{Array2, Axis};
use serde::Serialize;

use crate::config::{validate, ExperimentConfig, Issue, Task};
use crate::data::{load_dataset, Dataset};
use crate::graph::{build_graph, graph_cache_key, load_graph, save_graph, Builder, GraphError, SparseGraph};
use crate::inductive::{default_learners, BaseLearnerSpec, Classifier, SslData, StrategyRegistry};
use crate::metrics::{evaluate, metrics_json, MetricsReport, SolverSummary};
use crate::params::ParamValue;
use crate::rng::sub_seed;
use crate::sampling::{apply_imbalance, make_split, Role, SplitAssignment};
use crate::scalar::argmax_rows;
use crate::transductive::{LabelMatrix, Method};

pub const ARTIFACT_FILES: [&str; 5] = [
    "config.yaml",
    "splits.csv",
    "predictions.csv",
    "metrics.json",
    "run.log",
];

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
    #[error("config has no sweep block")]
    NoSweep,
    /// A module error, tagged with the config section that caused it.
    #[error("{context}: {source}")]
    Stage {
        context: &'static str,
        #[source]
        source: BoxError,
    },
    #[error("artifact i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;

fn stage<E: Into<BoxError>>(context: &'static str) -> impl FnOnce(E) -> RunError {
    move |e| RunError::Stage {
        context,
        source: e.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Overrides of the config's `output` block plus the parallelism hint.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub run_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the global rayon pool. Never affects results.
    pub threads: Option<usize>,
}

impl RunOptions {
    fn run_root(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.run_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.output.run_dir))
    }

    fn cache_root(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(&cfg.output.cache_dir))
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub fingerprint: String,
    pub report: MetricsReport,
    pub split: SplitAssignment,
    pub predictions: Vec<usize>,
    /// Largest soft score per sample.
    pub max_soft: Vec<f64>,
    pub solver: Option<SolverSummary>,
    /// `Some(true)` on a graph cache hit, `None` if no cache was consulted.
    pub cache_hit: Option<bool>,
}

/// Collected run log. Timestamps are the only nondeterministic bytes.
struct RunLog {
    lines: Vec<String>,
}

impl RunLog {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn push(&mut self, level: log::Level, msg: String) {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        log::log!(level, "{msg}");
        self.lines
            .push(format!("{}.{:03} {:<5} {msg}", t.as_secs(), t.subsec_millis(), level));
    }

    fn info(&mut self, msg: impl Into<String>) {
        self.push(log::Level::Info, msg.into());
    }

    fn warn(&mut self, msg: impl Into<String>) {
        self.push(log::Level::Warn, msg.into());
    }

    fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Artifact file names and their rendered contents.
type Files = Vec<(&'static str, String)>;

// In-memory result of one pipeline execution.
struct Outcome {
    artifacts: RunArtifacts,
    files: Files,
}

fn load_split(cfg: &ExperimentConfig, log: &mut RunLog) -> Result<(Dataset<f64>, SplitAssignment)> {
    let mut ds: Dataset<f64> =
        load_dataset(&cfg.dataset, &cfg.base_dir, sub_seed(cfg.seed, "dataset")).map_err(stage("dataset"))?;
    if cfg.dataset.standardize && ds.features().is_some() {
        ds = ds.standardized().map_err(stage("dataset"))?;
    }
    log.info(format!(
        "dataset: n = {}, k = {}, features = {}, native graph = {}, source fingerprint {}",
        ds.n(),
        ds.n_classes(),
        ds.features().map_or(0, |x| x.ncols()),
        ds.native_graph().is_some(),
        ds.source_fingerprint()
    ));
    let k = ds.n_classes();
    let split_seed = sub_seed(cfg.seed, "sampling");
    let mut split = make_split(ds.labels(), k, &cfg.sampling, split_seed).map_err(stage("sampling"))?;
    if let Some(im) = &cfg.sampling.imbalance {
        split = apply_imbalance(&split, ds.labels(), k, im, split_seed).map_err(stage("sampling.imbalance"))?;
    }
    log.info(format!(
        "split: {} labeled, {} unlabeled, {} validation, {} test",
        split.count(Role::TrainLabeled),
        split.count(Role::TrainUnlabeled),
        split.count(Role::Validation),
        split.count(Role::Test)
    ));
    Ok((ds, split))
}

/// The dataset and split a run of `cfg` would use, with the same sub-seeds.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<(Dataset<f64>, SplitAssignment)> {
    load_split(cfg, &mut RunLog::new())
}

fn obtain_graph(
    cfg: &ExperimentConfig,
    ds: &Dataset<f64>,
    cache_root: &Path,
    log: &mut RunLog,
) -> Result<(SparseGraph<f64>, Option<bool>)> {
    let spec = match &cfg.graph {
        Some(spec) if spec.builder != Builder::Native => spec,
        _ => {
            let g = ds
                .native_graph()
                .ok_or(GraphError::MissingNativeGraph)
                .map_err(stage("graph"))?;
            log.info(format!("graph: native, {} nonzeros", g.nnz()));
            return Ok((g.clone(), None));
        }
    };
    let key = graph_cache_key(ds.source_fingerprint(), spec);
    let path = cache_root.join("graphs").join(format!("{key}.bin"));
    if path.is_file() {
        match load_graph::<f64>(&path) {
            Ok(g) if g.n() == ds.n() => {
                log.info(format!("graph cache hit: {key} ({} nonzeros)", g.nnz()));
                return Ok((g, Some(true)));
            }
            Ok(g) => log.warn(format!(
                "graph cache entry {key} has n = {}, expected {}; rebuilding",
                g.n(),
                ds.n()
            )),
            Err(e) => log.warn(format!("graph cache entry unreadable ({e}); rebuilding")),
        }
    }
    let g = build_graph(ds.features(), ds.native_graph(), spec).map_err(stage("graph"))?;
    save_graph(&g, &path).map_err(stage("output.cache_dir"))?;
    log.info(format!("graph cache miss: built {key} ({} nonzeros)", g.nnz()));
    Ok((g, Some(false)))
}

fn row_max(m: &Array2<f64>) -> Vec<f64> {
    m.rows()
        .into_iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

fn predictions_csv(split: &SplitAssignment, labels: &[usize], pred: &[usize], max_soft: &[f64]) -> String {
    let mut s = String::from("index,role,true_label,predicted_label,max_soft\n");
    for (i, role) in split.roles().iter().enumerate() {
        let _ = writeln!(s, "{i},{role},{},{},{}", labels[i], pred[i], max_soft[i]);
    }
    s
}

/// Runs the pipeline and renders every artifact in memory.
fn execute(
    cfg: &ExperimentConfig,
    fingerprint: &str,
    extra_split: Option<Role>,
    cache_root: &Path,
    mut log: RunLog,
) -> Result<Outcome> {
    log.info(format!(
        "run {fingerprint}: task {}, method {}, seed {}",
        cfg.task.as_str(),
        cfg.method.name,
        cfg.seed
    ));
    let (ds, split) = load_split(cfg, &mut log)?;
    let k = ds.n_classes();
    let labels = ds.labels();
    let (soft, solver, cache_hit) = match cfg.task {
        Task::Transductive => {
            let (graph, hit) = obtain_graph(cfg, &ds, cache_root, &mut log)?;
            let mask: Vec<bool> = split.roles().iter().map(|&r| r == Role::TrainLabeled).collect();
            let y = LabelMatrix::new(labels, &mask, k).map_err(stage("sampling"))?;
            let method = Method::from_params(&cfg.method.name, &cfg.method.params).map_err(|errs| {
                RunError::Invalid(
                    errs.into_iter()
                        .map(|(p, m)| Issue {
                            path: format!("method.params.{p}"),
                            message: m,
                        })
                        .collect(),
                )
            })?;
            let res = method.run(&graph, &y, ds.features()).map_err(stage("method"))?;
            for d in &res.diagnostics {
                log.warn(d.clone());
            }
            log.info(format!(
                "{}: {} iterations, residual {:e}, converged {}",
                method.name(),
                res.iterations,
                res.residual,
                res.converged
            ));
            if !res.converged {
                log.warn("solver stopped at its iteration cap before reaching tolerance");
            }
            let summary = SolverSummary {
                iterations: res.iterations,
                residual: res.residual,
                converged: res.converged,
            };
            (res.soft, Some(summary), hit)
        }
        Task::Inductive => (fit_inductive(cfg, &ds, &split, &mut log)?, None, None),
    };
    let predictions = argmax_rows(&soft);
    let max_soft = row_max(&soft);
    let mut splits = cfg.evaluation.splits.clone();
    if let Some(r) = extra_split.filter(|r| !splits.contains(r)) {
        splits.push(r);
    }
    let report =
        evaluate(&predictions, labels, k, &split, &cfg.evaluation.metrics, &splits).map_err(stage("evaluation"))?;
    for (name, scores) in &report.splits {
        let desc: Vec<String> = scores.iter().map(|(m, v)| format!("{m} = {v:.4}")).collect();
        log.info(format!("{name}: {}", desc.join(", ")));
    }
    let config_yaml = format!("# fingerprint: {fingerprint}\n{}", cfg.render());
    let files = vec![
        ("config.yaml", config_yaml),
        ("splits.csv", split.to_csv()),
        (
            "predictions.csv",
            predictions_csv(&split, labels, &predictions, &max_soft),
        ),
        (
            "metrics.json",
            metrics_json(&report, fingerprint, &cfg.method.name, solver),
        ),
    ];
    log.info("artifacts rendered");
    let mut files = files;
    files.push(("run.log", log.render()));
    Ok(Outcome {
        artifacts: RunArtifacts {
            dir: PathBuf::new(),
            fingerprint: fingerprint.to_string(),
            report,
            split,
            predictions,
            max_soft,
            solver,
            cache_hit,
        },
        files,
    })
}

fn fit_inductive(
    cfg: &ExperimentConfig,
    ds: &Dataset<f64>,
    split: &SplitAssignment,
    log: &mut RunLog,
) -> Result<Array2<f64>> {
    let x = ds
        .features()
        .ok_or_else(|| stage::<&str>("dataset")("inductive task requires a feature matrix"))?;
    let li = split.indices(Role::TrainLabeled);
    let ui = split.indices(Role::TrainUnlabeled);
    let x_l = x.select(Axis(0), &li);
    let x_u = x.select(Axis(0), &ui);
    let y_l: Vec<usize> = li.iter().map(|&i| ds.labels()[i]).collect();
    let base = cfg.method.base.clone().unwrap_or_else(BaseLearnerSpec::default_knn);
    let learners = cfg.method.learners.clone().unwrap_or_else(default_learners);
    let strategy = StrategyRegistry::<f64>::builtin()
        .build(&cfg.method.name, &cfg.method.params, &base, &learners)
        .map_err(stage("method"))?;
    let data = SslData {
        x_labeled: x_l.view(),
        y_labeled: &y_l,
        x_unlabeled: x_u.view(),
        n_classes: ds.n_classes(),
    };
    let fitted = strategy
        .fit(&data, sub_seed(cfg.seed, "strategy"))
        .map_err(stage("method"))?;
    log.info(format!(
        "{}: {} rounds, training sizes {:?}, model {}",
        strategy.name(),
        fitted.rounds,
        fitted.train_sizes,
        fitted.model.spec()
    ));
    Ok(fitted.model.predict_proba(x))
}

fn write_files(dir: &Path, files: &[(&'static str, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(io_err(&p))?;
    }
    Ok(())
}

/// Builds a directory with `fill` under a temporary name next to `dest`,
/// then swaps it into place. Nothing is left behind on failure.
fn build_atomically<R>(dest: &Path, fill: impl FnOnce(&Path) -> Result<R>) -> Result<R> {
    let parent = dest.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(io_err(parent))?;
    let name = dest.file_name().and_then(|n| n.to_str()).unwrap_or("run");
    let tmp = parent.join(format!(".{name}.tmp{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
    }
    let filled = fill(&tmp).and_then(|r| {
        if dest.exists() {
            fs::remove_dir_all(dest).map_err(io_err(dest))?;
        }
        fs::rename(&tmp, dest).map_err(io_err(dest))?;
        Ok(r)
    });
    if filled.is_err() && tmp.exists() {
        let _ = fs::remove_dir_all(&tmp);
    }
    filled
}

fn ensure_valid(cfg: &ExperimentConfig) -> Result<()> {
    let issues = validate(cfg);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(RunError::Invalid(issues))
    }
}

/// Runs one experiment into `<run_dir>/<fingerprint>/`. A `sweep` block is
/// ignored and does not enter the fingerprint.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunArtifacts> {
    let cfg = config.without_sweep();
    ensure_valid(&cfg)?;
    let fp = cfg.fingerprint();
    let dest = opts.run_root(&cfg).join(&fp);
    let cache_root = opts.cache_root(&cfg);
    let mut log = RunLog::new();
    if config.sweep.is_some() {
        log.info("sweep block ignored by a plain run");
    }
    let outcome = with_threads(opts.threads, || execute(&cfg, &fp, None, &cache_root, log))??;
    let Outcome { mut artifacts, files } = outcome;
    build_atomically(&dest, |tmp| write_files(tmp, &files))?;
    artifacts.dir = dest;
    Ok(artifacts)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub params: Vec<(String, ParamValue)>,
    pub fingerprint: String,
    pub report: MetricsReport,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub fingerprint: String,
    /// Rows in grid declaration order.
    pub trials: Vec<TrialRow>,
    pub best_index: usize,
    /// Artifacts of the best trial; its `dir` is the trial subdirectory.
    pub best: RunArtifacts,
}

#[derive(Serialize)]
struct BestTrialJson<'a> {
    fingerprint: &'a str,
    params: BTreeMap<&'a str, &'a ParamValue>,
    score: f64,
    select_metric: &'a str,
    select_split: &'a str,
    trial: usize,
}

fn sweep_csv(rows: &[TrialRow]) -> String {
    let columns: Vec<(String, String)> = rows
        .first()
        .map(|r| {
            r.report
                .splits
                .iter()
                .flat_map(|(s, m)| m.keys().map(move |m| (s.clone(), m.clone())))
                .collect()
        })
        .unwrap_or_default();
    let mut s = String::from("trial,fingerprint");
    if let Some(r) = rows.first() {
        for (name, _) in &r.params {
            let _ = write!(s, ",{name}");
        }
    }
    for (split, metric) in &columns {
        let _ = write!(s, ",{split}.{metric}");
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(s, "{i},{}", r.fingerprint);
        for (_, v) in &r.params {
            let _ = write!(s, ",{v}");
        }
        for (split, metric) in &columns {
            let _ = write!(s, ",{}", r.report.splits[split][metric]);
        }
        s.push('\n');
    }
    s
}

/// Exhaustive grid search. Trials run in grid declaration order and land
/// in `<run_dir>/<sweep fingerprint>/trials/<trial fingerprint>/`; the best
/// trial's artifacts are also copied to the sweep root. Ties keep the
/// earlier trial.
pub fn grid_sweep(config: &ExperimentConfig, opts: &RunOptions) -> Result<SweepOutcome> {
    ensure_valid(config)?;
    let sweep = config.sweep.as_ref().ok_or(RunError::NoSweep)?;
    let fp = config.fingerprint();
    let dest = opts.run_root(config).join(&fp);
    let cache_root = opts.cache_root(config);
    let metric = sweep.select_metric;
    let split = sweep.select_split;
    let run = |tmp: &Path| -> Result<(Vec<TrialRow>, usize, RunArtifacts)> {
        let mut rows = Vec::new();
        let mut best: Option<(usize, RunArtifacts, Files)> = None;
        for (i, overrides) in sweep.trials().into_iter().enumerate() {
            let trial = config.with_overrides(&overrides);
            let tfp = trial.fingerprint();
            let mut log = RunLog::new();
            let desc: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
            log.info(format!("sweep {fp} trial {i}: {}", desc.join(", ")));
            let Outcome { mut artifacts, files } =
                with_threads(opts.threads, || execute(&trial, &tfp, Some(split), &cache_root, log))??;
            let tdir = tmp.join("trials").join(&tfp);
            write_files(&tdir, &files)?;
            artifacts.dir = dest.join("trials").join(&tfp);
            let score = artifacts
                .report
                .get(split, metric)
                .ok_or_else(|| stage::<&str>("sweep.select_split")("selection split was not scored"))?;
            log::info!("trial {i} ({}): {} = {score}", desc.join(", "), metric.as_str());
            rows.push(TrialRow {
                params: overrides,
                fingerprint: tfp,
                report: artifacts.report.clone(),
                score,
            });
            if best.as_ref().is_none_or(|(b, _, _)| score > rows[*b].score) {
                best = Some((i, artifacts, files));
            }
        }
        let (bi, best, files) = best.expect("validated grids are non-empty");
        write_files(tmp, &files)?;
        let p = tmp.join("sweep.csv");
        fs::write(&p, sweep_csv(&rows)).map_err(io_err(&p))?;
        let row = &rows[bi];
        let doc = BestTrialJson {
            fingerprint: &row.fingerprint,
            params: row.params.iter().map(|(k, v)| (k.as_str(), v)).collect(),
            score: row.score,
            select_metric: metric.as_str(),
            select_split: split.as_str(),
            trial: bi,
        };
        let mut body = serde_json::to_string_pretty(&doc).expect("best trial serializes");
        body.push('\n');
        let p = tmp.join("best_trial.json");
        fs::write(&p, body).map_err(io_err(&p))?;
        Ok((rows, bi, best))
    };
    let (trials, best_index, best) = build_atomically(&dest, run)?;
    Ok(SweepOutcome {
        dir: dest,
        fingerprint: fp,
        trials,
        best_index,
        best,
    })
}

/// One file in the graph cache.
#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub key: String,
    pub bytes: u64,
    /// `(n, nnz)` of a readable entry, or why it is unreadable.
    pub status: std::result::Result<(usize, usize), String>,
}

fn graphs_dir(dir: &Path) -> PathBuf {
    let sub = dir.join("graphs");
    if sub.is_dir() {
        sub
    } else {
        dir.to_path_buf()
    }
}

/// Lists cache files under `dir` (a cache root or its `graphs/`), sorted by
/// name. Temporary files from interrupted writes are reported as unreadable.
pub fn cache_ls(dir: &Path) -> Result<Vec<CacheEntry>> {
    let gdir = graphs_dir(dir);
    let mut out = Vec::new();
    if !gdir.is_dir() {
        return Ok(out);
    }
    for entry in fs::read_dir(&gdir).map_err(io_err(&gdir))? {
        let entry = entry.map_err(io_err(&gdir))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let bytes = entry.metadata().map_err(io_err(&path))?.len();
        let status = match name.strip_suffix(".bin") {
            Some(_) => load_graph::<f64>(&path)
                .map(|g| (g.n(), g.nnz()))
                .map_err(|e| e.to_string()),
            None => Err("not a cache entry (interrupted write?)".to_string()),
        };
        let key = name.strip_suffix(".bin").unwrap_or(&name).to_string();
        out.push(CacheEntry {
            path,
            key,
            bytes,
            status,
        });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

/// Deletes unreadable entries, or every entry when `all` is set. Returns the
/// removed paths.
pub fn cache_gc(dir: &Path, all: bool) -> Result<Vec<PathBuf>> {
    let mut removed = Vec::new();
    for e in cache_ls(dir)? {
        if all || e.status.is_err() {
            fs::remove_file(&e.path).map_err(io_err(&e.path))?;
            removed.push(e.path);
        }
    }
    Ok(removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const MOONS: &str = "
seed: 5
task: transductive
dataset: {source: synthetic, synthetic: {name: two_moons, n: 60}}
sampling: {labeled_per_class: 3, val_fraction: 0.2}
graph: {k: 6}
method: {name: laplace}
evaluation: {splits: [test, validation]}
";

    fn opts(dir: &Path) -> RunOptions {
        RunOptions {
            run_dir: Some(dir.join("runs")),
            cache_dir: Some(dir.join("cache")),
            threads: None,
        }
    }

    #[test]
    fn run_writes_layout_and_hits_cache() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config(MOONS).unwrap();
        let a = run_experiment(&cfg, &opts(tmp.path())).unwrap();
        assert_eq!(a.dir, tmp.path().join("runs").join(cfg.fingerprint()));
        for f in ARTIFACT_FILES {
            assert!(a.dir.join(f).is_file(), "{f}");
        }
        assert_eq!(a.cache_hit, Some(false));
        let metrics = fs::read(a.dir.join("metrics.json")).unwrap();
        let b = run_experiment(&cfg, &opts(tmp.path())).unwrap();
        assert_eq!(b.cache_hit, Some(true));
        assert_eq!(fs::read(b.dir.join("metrics.json")).unwrap(), metrics);
        let log = fs::read_to_string(b.dir.join("run.log")).unwrap();
        assert!(log.contains("graph cache hit"));
        let leftovers: Vec<_> = fs::read_dir(tmp.path().join("runs")).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn failed_run_leaves_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        // k exceeds the sample count, which only loading can reveal.
        fs::write(tmp.path().join("d.csv"), "a,y\n0,p\n1,p\n5,q\n6,q\n7,q\n").unwrap();
        let mut cfg = parse_config(
            "
seed: 1
task: transductive
dataset: {source: csv, path: d.csv, label_column: y}
sampling: {labeled_per_class: 1, test_fraction: 0.2}
graph: {k: 10}
method: {name: laplace}
",
        )
        .unwrap();
        cfg.base_dir = tmp.path().to_path_buf();
        let err = run_experiment(&cfg, &opts(tmp.path())).unwrap_err();
        assert!(matches!(err, RunError::Stage { context: "graph", .. }), "{err}");
        let runs = tmp.path().join("runs");
        assert!(!runs.exists() || fs::read_dir(&runs).unwrap().next().is_none());
    }

    #[test]
    fn invalid_config_is_rejected_before_running() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config(&MOONS.replace("graph: {k: 6}\n", "")).unwrap();
        assert!(matches!(
            run_experiment(&cfg, &opts(tmp.path())),
            Err(RunError::Invalid(_))
        ));
    }

    #[test]
    fn sweep_picks_earliest_of_ties_and_matches_standalone() {
        let tmp = tempfile::tempdir().unwrap();
        // Class mass normalization does not change which class wins on a
        // well-separated toy problem, so both trials tie.
        let text =
            format!("{MOONS}sweep: {{grid: {{class_mass_normalization: [false, true]}}, select_metric: accuracy}}\n");
        let cfg = parse_config(&text).unwrap();
        let out = grid_sweep(&cfg, &opts(tmp.path())).unwrap();
        assert_eq!(out.trials.len(), 2);
        let best_score = out.trials[out.best_index].score;
        assert!(out.trials[..out.best_index].iter().all(|t| t.score < best_score));
        assert!(out.trials[out.best_index..].iter().all(|t| t.score <= best_score));
        for f in ["sweep.csv", "best_trial.json", "metrics.json", "predictions.csv"] {
            assert!(out.dir.join(f).is_file(), "{f}");
        }
        let csv = fs::read_to_string(out.dir.join("sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        let standalone = cfg.with_overrides(&out.trials[out.best_index].params);
        let run = run_experiment(&standalone, &opts(&tmp.path().join("alone"))).unwrap();
        assert_eq!(run.fingerprint, out.best.fingerprint);
        assert_eq!(
            fs::read(run.dir.join("metrics.json")).unwrap(),
            fs::read(out.dir.join("metrics.json")).unwrap()
        );
    }

    #[test]
    fn cache_gc_removes_corrupt_entries() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config(MOONS).unwrap();
        run_experiment(&cfg, &opts(tmp.path())).unwrap();
        let cache = tmp.path().join("cache");
        fs::write(cache.join("graphs").join("deadbeefdeadbeef.bin"), b"MSSCGRPH").unwrap();
        let entries = cache_ls(&cache).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries.iter().filter(|e| e.status.is_err()).count(), 1);
        assert_eq!(cache_gc(&cache, false).unwrap().len(), 1);
        assert_eq!(cache_ls(&cache).unwrap().len(), 1);
        assert_eq!(cache_gc(&cache, true).unwrap().len(), 1);
        assert!(cache_ls(&cache).unwrap().is_empty());
    }
}
