//! Experiment declarations: strict YAML parsing, cross-field validation,
//! canonical bytes and fingerprints.

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::canon::{short_hash, to_canonical_bytes};
use crate::data::{DatasetSpec, Source};
use crate::graph::{Builder, GraphSpec};
use crate::inductive::{self, BaseLearnerSpec, STRATEGY_NAMES};
use crate::metrics::{EvalSpec, MetricName};
use crate::params::{self, ParamDef, ParamMap, ParamValue};
use crate::sampling::{Role, SamplingSpec};
use crate::transductive::{self, METHOD_NAMES};

/// Largest admissible Cartesian grid.
pub const MAX_GRID_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Inductive,
    Transductive,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Inductive => "inductive",
            Task::Transductive => "transductive",
        }
    }

    /// Method names the registry of this task accepts.
    pub fn method_names(self) -> &'static [&'static str] {
        match self {
            Task::Inductive => &STRATEGY_NAMES,
            Task::Transductive => &METHOD_NAMES,
        }
    }

    pub fn schema(self, method: &str) -> Option<&'static [ParamDef]> {
        match self {
            Task::Inductive => inductive::strategy_schema(method),
            Task::Transductive => transductive::method_schema(method),
        }
    }
}

/// Method name plus flat parameters. `base` and `learners` apply to
/// inductive strategies only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,
    #[serde(default)]
    pub params: ParamMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseLearnerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learners: Option<Vec<BaseLearnerSpec>>,
}

fn validation_role() -> Role {
    Role::Validation
}

/// Exhaustive grid over method parameters. Declaration order of `grid` is
/// significant: it fixes trial order and the tie rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub grid: IndexMap<String, Vec<ParamValue>>,
    pub select_metric: MetricName,
    #[serde(default = "validation_role")]
    pub select_split: Role,
}

impl SweepSpec {
    pub fn n_trials(&self) -> usize {
        self.grid.values().map(Vec::len).product()
    }

    /// Trial overrides in odometer order, last parameter fastest.
    pub fn trials(&self) -> Vec<Vec<(String, ParamValue)>> {
        let mut out = vec![Vec::new()];
        for (name, values) in &self.grid {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut t = prefix.clone();
                        t.push((name.clone(), v.clone()));
                        t
                    })
                })
                .collect();
        }
        out
    }
}

fn default_run_dir() -> String {
    "runs".into()
}

fn default_cache_dir() -> String {
    "cache".into()
}

/// Where artifacts go. Not part of the fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_run_dir")]
    pub run_dir: String,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            run_dir: default_run_dir(),
            cache_dir: default_cache_dir(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub task: Task,
    pub dataset: DatasetSpec,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    pub method: MethodSpec,
    #[serde(default)]
    pub evaluation: EvalSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory relative dataset paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("YAML syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key `{key}` at `{}`; {expected}", display_path(.path))]
    UnknownKey {
        path: String,
        key: String,
        expected: String,
    },
    #[error("missing required key `{key}` at `{}`", display_path(.path))]
    MissingKey { path: String, key: String },
    #[error("type mismatch at `{}`: {message}", display_path(.path))]
    TypeMismatch { path: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn display_path(p: &str) -> &str {
    if p.is_empty() {
        "<root>"
    } else {
        p
    }
}

/// One validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// Dotted config path, e.g. `method.params.alpha`.
    pub path: String,
    pub message: String,
}

impl Issue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", display_path(&self.path), self.message)
    }
}

fn backticked(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

/// Parses a YAML experiment declaration in strict mode and materializes
/// every default. Well-formed but inconsistent configs parse; see
/// [`validate`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| {
        let (line, column) = e.location().map_or((0, 0), |l| (l.line(), l.column()));
        ConfigError::Syntax {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = match e.path().to_string() {
            p if p == "." => String::new(),
            p => p,
        };
        let msg = e.inner().to_string();
        if msg.starts_with("unknown field") {
            let key = backticked(&msg).unwrap_or_default().to_string();
            let expected = msg.split_once(", ").map_or("", |(_, r)| r).to_string();
            // The path already names the offending key.
            let parent = match path.rsplit_once('.') {
                Some((p, last)) if last == key => p.to_string(),
                _ if path == key => String::new(),
                _ => path,
            };
            ConfigError::UnknownKey {
                path: parent,
                key,
                expected,
            }
        } else if msg.starts_with("missing field") {
            ConfigError::MissingKey {
                path,
                key: backticked(&msg).unwrap_or_default().to_string(),
            }
        } else {
            ConfigError::TypeMismatch { path, message: msg }
        }
    })?;
    cfg.materialize();
    Ok(cfg)
}

/// Reads and parses `path`; relative dataset paths resolve against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

// Canonical view: everything except `output` and `base_dir`. The grid is a
// map in the bytes, so its declaration order is carried separately.
#[derive(Serialize)]
struct CanonicalConfig<'a> {
    seed: u64,
    task: Task,
    dataset: &'a DatasetSpec,
    sampling: &'a SamplingSpec,
    graph: &'a Option<GraphSpec>,
    method: &'a MethodSpec,
    evaluation: &'a EvalSpec,
    sweep: Option<CanonicalSweep<'a>>,
}

#[derive(Serialize)]
struct CanonicalSweep<'a> {
    grid: &'a IndexMap<String, Vec<ParamValue>>,
    grid_order: Vec<&'a str>,
    select_metric: MetricName,
    select_split: Role,
}

impl ExperimentConfig {
    /// Fills method parameter, base learner and grid defaults in place.
    /// Entries that do not resolve are left as written for [`validate`] to
    /// report.
    pub fn materialize(&mut self) {
        let schema = self.task.schema(&self.method.name);
        if let Some(schema) = schema {
            if let Ok(p) = params::resolve(schema, &self.method.params) {
                self.method.params = p;
            }
        }
        if self.task == Task::Inductive {
            let base = self.method.base.get_or_insert_with(BaseLearnerSpec::default_knn);
            if let Ok(b) = base.with_defaults() {
                *base = b;
            }
            if inductive::uses_learner_list(&self.method.name) {
                let list = self.method.learners.get_or_insert_with(inductive::default_learners);
                for l in list.iter_mut() {
                    if let Ok(full) = l.with_defaults() {
                        *l = full;
                    }
                }
            }
        }
        if let (Some(sweep), Some(schema)) = (&mut self.sweep, schema) {
            for (name, values) in sweep.grid.iter_mut() {
                if let Some(def) = schema.iter().find(|d| d.name == name) {
                    for v in values.iter_mut() {
                        if let Ok(c) = params::coerce(def, v) {
                            *v = c;
                        }
                    }
                }
            }
        }
    }

    /// Deterministic bytes: sorted keys, shortest round-trip floats, no
    /// whitespace. Excludes `output`.
    pub fn canonicalize(&self) -> Vec<u8> {
        let view = CanonicalConfig {
            seed: self.seed,
            task: self.task,
            dataset: &self.dataset,
            sampling: &self.sampling,
            graph: &self.graph,
            method: &self.method,
            evaluation: &self.evaluation,
            sweep: self.sweep.as_ref().map(|s| CanonicalSweep {
                grid: &s.grid,
                grid_order: s.grid.keys().map(String::as_str).collect(),
                select_metric: s.select_metric,
                select_split: s.select_split,
            }),
        };
        to_canonical_bytes(&view)
    }

    /// 16 lowercase hex characters of SHA-256 over [`Self::canonicalize`].
    pub fn fingerprint(&self) -> String {
        short_hash(&self.canonicalize())
    }

    /// YAML that parses back to an equal config.
    pub fn render(&self) -> String {
        serde_yaml::to_string(self).expect("config serializes to YAML")
    }

    /// The config a single trial runs: grid values override method
    /// parameters and the sweep block is dropped.
    pub fn with_overrides(&self, overrides: &[(String, ParamValue)]) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        for (k, v) in overrides {
            c.method.params.insert(k.clone(), v.clone());
        }
        c.materialize();
        c
    }

    /// Copy with the sweep block removed, which is what a plain run executes.
    pub fn without_sweep(&self) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        c
    }
}

/// Free-function form of [`ExperimentConfig::canonicalize`].
pub fn canonicalize(config: &ExperimentConfig) -> Vec<u8> {
    config.canonicalize()
}

/// Free-function form of [`ExperimentConfig::fingerprint`].
pub fn fingerprint(config: &ExperimentConfig) -> String {
    config.fingerprint()
}

fn prefixed(prefix: &str, errs: Vec<(String, String)>) -> impl Iterator<Item = Issue> + '_ {
    errs.into_iter().map(move |(p, m)| {
        if p.is_empty() {
            Issue::new(prefix, m)
        } else {
            Issue::new(format!("{prefix}.{p}"), m)
        }
    })
}

/// Cross-field checks. Empty iff the config can be run.
pub fn validate(config: &ExperimentConfig) -> Vec<Issue> {
    let mut issues = Vec::new();
    check_dataset(config, &mut issues);
    issues.extend(config.sampling.check().into_iter().map(|(p, m)| Issue::new(p, m)));
    check_graph(config, &mut issues);
    check_method(config, &mut issues);
    check_evaluation(config, &mut issues);
    check_sweep(config, &mut issues);
    issues
}

fn check_dataset(cfg: &ExperimentConfig, issues: &mut Vec<Issue>) {
    let ds = &cfg.dataset;
    issues.extend(ds.check_fields().into_iter().map(|(p, m)| Issue::new(p, m)));
    for (field, p) in ds.file_paths() {
        let full = cfg.base_dir.join(p);
        if !full.is_file() {
            issues.push(Issue::new(field, format!("file `{}` does not exist", full.display())));
        }
    }
    if ds.source == Source::Synthetic {
        if let Some(syn) = &ds.synthetic {
            if let Err(e) = syn.check() {
                issues.push(Issue::new("dataset.synthetic", e.to_string()));
            }
        }
    }
    if cfg.task == Task::Inductive && !ds.has_features() {
        issues.push(Issue::new("dataset", "inductive task requires a feature matrix"));
    }
}

fn check_graph(cfg: &ExperimentConfig, issues: &mut Vec<Issue>) {
    let ds = &cfg.dataset;
    match (cfg.task, &cfg.graph) {
        (Task::Transductive, None) if !ds.has_native_graph() => {
            issues.push(Issue::new("graph", "transductive task requires graph spec"))
        }
        (Task::Inductive, Some(_)) => issues.push(Issue::new(
            "graph",
            "inductive tasks do not use a graph; remove the block",
        )),
        (_, Some(g)) => {
            match g.builder {
                Builder::Native if !ds.has_native_graph() => issues.push(Issue::new(
                    "graph.builder",
                    "builder `native` requires a dataset with a native graph",
                )),
                Builder::Knn | Builder::Epsilon if !ds.has_features() => issues.push(Issue::new(
                    "graph.builder",
                    "feature-based builders require a dataset with features",
                )),
                _ => {}
            }
            if g.builder == Builder::Knn {
                let n = ds
                    .synthetic
                    .as_ref()
                    .filter(|_| ds.source == Source::Synthetic)
                    .map(|s| s.n());
                match n {
                    _ if g.k == 0 => issues.push(Issue::new("graph.k", "must be at least 1")),
                    Some(n) if g.k >= n => {
                        issues.push(Issue::new("graph.k", format!("k = {} must be below n = {n}", g.k)))
                    }
                    _ => {}
                }
            }
            if g.builder == Builder::Epsilon && !g.eps.is_some_and(|e| e > 0.0 && e.is_finite()) {
                issues.push(Issue::new("graph.eps", "epsilon builder requires a positive `eps`"));
            }
        }
        _ => {}
    }
}

fn check_method(cfg: &ExperimentConfig, issues: &mut Vec<Issue>) {
    let m = &cfg.method;
    let Some(schema) = cfg.task.schema(&m.name) else {
        issues.push(Issue::new(
            "method.name",
            format!(
                "`{}` is not a {} method; expected one of {:?}",
                m.name,
                cfg.task.as_str(),
                cfg.task.method_names()
            ),
        ));
        return;
    };
    match params::resolve(schema, &m.params) {
        Err(errs) => issues.extend(prefixed("method.params", errs)),
        Ok(_) => match cfg.task {
            Task::Transductive => {
                if let Err(errs) = transductive::Method::from_params(&m.name, &m.params) {
                    issues.extend(prefixed("method.params", errs));
                }
            }
            Task::Inductive => issues.extend(prefixed("method.params", params::check_ranges(schema, &m.params))),
        },
    }
    match cfg.task {
        Task::Transductive => {
            if transductive::needs_features(&m.name) && !cfg.dataset.has_features() {
                issues.push(Issue::new(
                    "method.name",
                    format!("`{}` requires a dataset with features", m.name),
                ));
            }
            if m.base.is_some() {
                issues.push(Issue::new("method.base", "transductive methods take no base learner"));
            }
            if m.learners.is_some() {
                issues.push(Issue::new(
                    "method.learners",
                    "transductive methods take no learner list",
                ));
            }
        }
        Task::Inductive => {
            if let Some(base) = &m.base {
                if let Err(errs) = base.with_defaults() {
                    issues.extend(prefixed("method.base", errs));
                }
            }
            match (&m.learners, inductive::uses_learner_list(&m.name)) {
                (Some(_), false) => issues.push(Issue::new(
                    "method.learners",
                    format!("`{}` uses `base`, not a learner list", m.name),
                )),
                (Some(list), true) => check_learner_list(list, issues),
                _ => {}
            }
        }
    }
}

fn check_learner_list(list: &[BaseLearnerSpec], issues: &mut Vec<Issue>) {
    let mut full = Vec::with_capacity(list.len());
    for (i, l) in list.iter().enumerate() {
        match l.with_defaults() {
            Ok(l) => full.push(l),
            Err(errs) => issues.extend(prefixed(&format!("method.learners.{i}"), errs)),
        }
    }
    if list.len() < 3 {
        issues.push(Issue::new(
            "method.learners",
            format!("democratic co-learning needs at least 3 learners, got {}", list.len()),
        ));
    }
    for i in 0..full.len() {
        for j in i + 1..full.len() {
            if full[i] == full[j] {
                issues.push(Issue::new(
                    "method.learners",
                    format!("learners {i} and {j} are identical"),
                ));
            }
        }
    }
}

fn split_nonempty(cfg: &ExperimentConfig, role: Role) -> bool {
    match role {
        Role::Validation => cfg.sampling.val_fraction > 0.0,
        _ => true,
    }
}

fn check_evaluation(cfg: &ExperimentConfig, issues: &mut Vec<Issue>) {
    let ev = &cfg.evaluation;
    if ev.metrics.is_empty() {
        issues.push(Issue::new("evaluation.metrics", "at least one metric is required"));
    }
    if ev.splits.is_empty() {
        issues.push(Issue::new("evaluation.splits", "at least one split is required"));
    }
    for (i, &role) in ev.splits.iter().enumerate() {
        if ev.splits[..i].contains(&role) {
            issues.push(Issue::new("evaluation.splits", format!("`{role}` listed twice")));
        }
        if role == Role::TrainLabeled {
            issues.push(Issue::new(
                "evaluation.splits",
                "`train_labeled` is not scored; its labels are inputs",
            ));
        } else if !split_nonempty(cfg, role) {
            issues.push(Issue::new(
                "evaluation.splits",
                format!("`{role}` is empty because sampling.val_fraction is 0"),
            ));
        }
    }
    for (i, m) in ev.metrics.iter().enumerate() {
        if ev.metrics[..i].contains(m) {
            issues.push(Issue::new(
                "evaluation.metrics",
                format!("`{}` listed twice", m.as_str()),
            ));
        }
    }
}

fn check_sweep(cfg: &ExperimentConfig, issues: &mut Vec<Issue>) {
    let Some(sweep) = &cfg.sweep else { return };
    if sweep.grid.is_empty() {
        issues.push(Issue::new("sweep.grid", "grid must name at least one parameter"));
    }
    let size = sweep.grid.values().try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
    if size.is_none_or(|s| s > MAX_GRID_SIZE) {
        issues.push(Issue::new("sweep.grid", format!("grid exceeds {MAX_GRID_SIZE} trials")));
    }
    if sweep.select_split == Role::TrainLabeled {
        issues.push(Issue::new("sweep.select_split", "`train_labeled` is not scored"));
    } else if !split_nonempty(cfg, sweep.select_split) {
        issues.push(Issue::new(
            "sweep.select_split",
            "empty validation split: set sampling.val_fraction > 0 or select on another split",
        ));
    }
    let Some(schema) = cfg.task.schema(&cfg.method.name) else {
        return;
    };
    for (name, values) in &sweep.grid {
        let path = format!("sweep.grid.{name}");
        let Some(def) = schema.iter().find(|d| d.name == name) else {
            let known: Vec<&str> = schema.iter().map(|d| d.name).collect();
            issues.push(Issue::new(
                path,
                format!(
                    "`{name}` is not a parameter of `{}`; expected one of {known:?}",
                    cfg.method.name
                ),
            ));
            continue;
        };
        if values.is_empty() {
            issues.push(Issue::new(path.clone(), "candidate list is empty"));
        }
        for v in values {
            let mut one = ParamMap::new();
            match params::coerce(def, v) {
                Ok(c) => {
                    one.insert(name.clone(), c);
                    let range = params::check_ranges(std::slice::from_ref(def), &one);
                    issues.extend(range.into_iter().map(|(_, m)| Issue::new(path.clone(), m)));
                }
                Err(m) => issues.push(Issue::new(path.clone(), m)),
            }
        }
    }
    // Cross-parameter constraints hold for every trial.
    if issues.is_empty() && cfg.task == Task::Transductive {
        for trial in sweep.trials() {
            let t = cfg.with_overrides(&trial);
            if let Err(errs) = transductive::Method::from_params(&t.method.name, &t.method.params) {
                let desc: Vec<String> = trial.iter().map(|(k, v)| format!("{k}={v}")).collect();
                for (p, m) in errs {
                    issues.push(Issue::new("sweep.grid", format!("trial {}: {p}: {m}", desc.join(", "))));
                }
                break;
            }
        }
    }
}
