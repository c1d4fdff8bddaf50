//! Wrapper strategies over pluggable base learners.
//!
//! A strategy consumes labeled features `X_l, y_l` and unlabeled features
//! `X_u` and returns a [`TrainedModel`]. Base learners are named in configs
//! as `knn`, `logreg` or `stump_boost`; strategies as listed in
//! [`STRATEGY_NAMES`]. Further strategies attach through
//! [`StrategyRegistry::register`].

mod learners;
mod strategies;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::graph::Metric;
use crate::params::{self, at_least_one, non_negative, positive, ParamDef, ParamMap, Params};
use crate::scalar::{argmax_rows, Scalar};

pub use learners::{
    best_stump, KnnModel, KnnParams, LogRegModel, LogRegParams, Stump, StumpBoostModel, StumpBoostParams,
};
pub use strategies::{
    bootstrap_vote, labeled_boosting, weighted_committee, wilson_lower_bound, Assemble, Democratic, SelfTraining,
    Setred, TriTraining,
};

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("cannot fit on an empty training set")]
    EmptyTrainingSet,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("unknown base learner `{0}`; expected one of knn, logreg, stump_boost")]
    UnknownLearner(String),
    #[error("unknown inductive strategy `{0}`")]
    UnknownStrategy(String),
    #[error("bootstrap resample {model} missed a class after {attempts} attempts")]
    Bootstrap { model: usize, attempts: usize },
    #[error("weak learner error {error} >= 0.5 on the first boosting round")]
    Unlearnable { error: f64 },
    #[error("democratic co-learning needs at least 3 learners, got {0}")]
    TooFewLearners(usize),
    #[error("learners {0} and {1} are identical")]
    DuplicateLearners(usize, usize),
    #[error("{}", format_param_errors(.0))]
    Params(Vec<(String, String)>),
}

fn format_param_errors(errs: &[(String, String)]) -> String {
    errs.iter()
        .map(|(p, m)| format!("{p}: {m}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, LearnerError>;

pub const KNN_SCHEMA: &[ParamDef] = &[
    ParamDef::int("k", 5, at_least_one, "[1, inf)"),
    ParamDef::choice("metric", "euclidean", &["euclidean", "cosine"]),
];

pub const LOGREG_SCHEMA: &[ParamDef] = &[
    ParamDef::float("l2", 1e-4, non_negative, "[0, inf)"),
    ParamDef::float("learning_rate", 0.1, positive, "(0, inf)"),
    ParamDef::int("epochs", 200, non_negative, "[0, inf)"),
];

pub const STUMP_BOOST_SCHEMA: &[ParamDef] = &[ParamDef::int("rounds", 50, at_least_one, "[1, inf)")];

pub const LEARNER_NAMES: [&str; 3] = ["knn", "logreg", "stump_boost"];

pub fn learner_schema(name: &str) -> Option<&'static [ParamDef]> {
    match name {
        "knn" => Some(KNN_SCHEMA),
        "logreg" => Some(LOGREG_SCHEMA),
        "stump_boost" => Some(STUMP_BOOST_SCHEMA),
        _ => None,
    }
}

/// A base learner as declared in a config: a name plus a flat parameter map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseLearnerSpec {
    pub name: String,
    #[serde(default)]
    pub params: ParamMap,
}

impl BaseLearnerSpec {
    /// The default base learner, `knn` with default parameters.
    pub fn default_knn() -> Self {
        Self::named("knn")
    }

    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: ParamMap::new(),
        }
    }

    /// Defaults materialized; errors are `(path relative to this learner entry, message)`.
    pub fn with_defaults(&self) -> std::result::Result<Self, Vec<(String, String)>> {
        let schema = learner_schema(&self.name).ok_or_else(|| {
            vec![(
                "name".to_string(),
                format!(
                    "unknown base learner `{}`; expected one of {LEARNER_NAMES:?}",
                    self.name
                ),
            )]
        })?;
        let resolved = params::resolve(schema, &self.params).map_err(|e| {
            e.into_iter()
                .map(|(p, m)| (format!("params.{p}"), m))
                .collect::<Vec<_>>()
        })?;
        let range = params::check_ranges(schema, &resolved);
        if !range.is_empty() {
            return Err(range.into_iter().map(|(p, m)| (format!("params.{p}"), m)).collect());
        }
        Ok(Self {
            name: self.name.clone(),
            params: resolved,
        })
    }

    pub fn resolve(&self) -> Result<LearnerConfig> {
        let full = self.with_defaults().map_err(|e| {
            if e.len() == 1 && e[0].0 == "name" {
                LearnerError::UnknownLearner(self.name.clone())
            } else {
                LearnerError::Params(e)
            }
        })?;
        let schema = learner_schema(&full.name).expect("checked above");
        let p = Params::new(schema, &full.params);
        Ok(match full.name.as_str() {
            "knn" => LearnerConfig::Knn(KnnParams {
                k: p.usize("k"),
                metric: if p.str("metric") == "cosine" {
                    Metric::Cosine
                } else {
                    Metric::Euclidean
                },
            }),
            "logreg" => LearnerConfig::LogReg(LogRegParams {
                l2: p.f64("l2"),
                learning_rate: p.f64("learning_rate"),
                epochs: p.usize("epochs"),
            }),
            _ => LearnerConfig::StumpBoost(StumpBoostParams {
                rounds: p.usize("rounds"),
            }),
        })
    }
}

/// A resolved base learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerConfig {
    Knn(KnnParams),
    LogReg(LogRegParams),
    StumpBoost(StumpBoostParams),
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig::Knn(KnnParams::default())
    }
}

impl fmt::Display for LearnerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerConfig::Knn(p) => {
                let metric = match p.metric {
                    Metric::Euclidean => "euclidean",
                    Metric::Cosine => "cosine",
                };
                write!(f, "knn(k={}, metric={metric})", p.k)
            }
            LearnerConfig::LogReg(p) => write!(
                f,
                "logreg(l2={}, learning_rate={}, epochs={})",
                p.l2, p.learning_rate, p.epochs
            ),
            LearnerConfig::StumpBoost(p) => write!(f, "stump_boost(rounds={})", p.rounds),
        }
    }
}

impl LearnerConfig {
    pub fn fit<T: Scalar>(&self, x: ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize) -> Result<TrainedModel<T>> {
        let kind = match *self {
            LearnerConfig::Knn(p) => ModelKind::Knn(KnnModel::fit(x, y, w, k, p)?),
            LearnerConfig::LogReg(p) => ModelKind::LogReg(LogRegModel::fit(x, y, w, k, p)?),
            LearnerConfig::StumpBoost(p) => ModelKind::StumpBoost(StumpBoostModel::fit(x, y, w, k, p)?),
        };
        Ok(TrainedModel::new(
            kind,
            self.to_string(),
            training_fingerprint(x, y, w),
            k,
        ))
    }

    /// Fit with unit sample weights.
    pub fn fit_unweighted<T: Scalar>(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize) -> Result<TrainedModel<T>> {
        self.fit(x, y, &vec![T::one(); y.len()], k)
    }
}

/// Hash of the training inputs a model was fitted on.
pub fn training_fingerprint<T: Scalar>(x: ArrayView2<'_, T>, y: &[usize], w: &[T]) -> String {
    let mut h = Sha256::new();
    h.update((x.nrows() as u64).to_le_bytes());
    h.update((x.ncols() as u64).to_le_bytes());
    for &v in x.iter() {
        h.update(v.as_f64().to_le_bytes());
    }
    for &c in y {
        h.update((c as u64).to_le_bytes());
    }
    for &v in w {
        h.update(v.as_f64().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Anything that maps a feature matrix to class probabilities.
pub trait Classifier<T: Scalar>: Send + Sync {
    fn n_classes(&self) -> usize;
    /// Rows sum to one.
    fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T>;

    fn predict(&self, x: ArrayView2<'_, T>) -> Vec<usize> {
        argmax_rows(&self.predict_proba(x))
    }
}

#[derive(Clone)]
pub enum ModelKind<T: Scalar> {
    Knn(KnnModel<T>),
    LogReg(LogRegModel<T>),
    StumpBoost(StumpBoostModel<T>),
    /// Unweighted majority vote over hard predictions.
    Vote(Vec<TrainedModel<T>>),
    /// Weighted vote over hard predictions; all-zero weights vote uniformly.
    Committee(Vec<(T, TrainedModel<T>)>),
    /// Additive ensemble `f = Σ α_t · onehot(h_t)`.
    Boosted(Vec<(T, TrainedModel<T>)>),
    Custom(Arc<dyn Classifier<T>>),
}

impl<T: Scalar> fmt::Debug for ModelKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, members) = match self {
            ModelKind::Knn(_) => ("knn", 1),
            ModelKind::LogReg(_) => ("logreg", 1),
            ModelKind::StumpBoost(_) => ("stump_boost", 1),
            ModelKind::Vote(m) => ("vote", m.len()),
            ModelKind::Committee(m) => ("committee", m.len()),
            ModelKind::Boosted(m) => ("boosted", m.len()),
            ModelKind::Custom(_) => ("custom", 1),
        };
        write!(f, "{name}[{members}]")
    }
}

/// A fitted model together with the learner settings that produced it and
/// a hash of its training inputs.
#[derive(Debug, Clone)]
pub struct TrainedModel<T: Scalar> {
    kind: ModelKind<T>,
    spec: String,
    training_fingerprint: String,
    n_classes: usize,
}

fn vote_rows<T: Scalar>(x: ArrayView2<'_, T>, k: usize, members: &[(T, &TrainedModel<T>)]) -> Array2<T> {
    let mut out = Array2::zeros((x.nrows(), k));
    let total: T = members.iter().map(|m| m.0).sum();
    let uniform = total <= T::zero();
    for (w, m) in members {
        let w = if uniform { T::one() } else { *w };
        for (i, c) in m.predict(x).into_iter().enumerate() {
            out[[i, c]] += w;
        }
    }
    let total = if uniform { T::of_usize(members.len()) } else { total };
    out.mapv_inplace(|v| v / total);
    out
}

impl<T: Scalar> TrainedModel<T> {
    pub fn new(kind: ModelKind<T>, spec: String, training_fingerprint: String, n_classes: usize) -> Self {
        Self {
            kind,
            spec,
            training_fingerprint,
            n_classes,
        }
    }

    pub fn kind(&self) -> &ModelKind<T> {
        &self.kind
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn training_fingerprint(&self) -> &str {
        &self.training_fingerprint
    }
}

impl<T: Scalar> Classifier<T> for TrainedModel<T> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let k = self.n_classes;
        match &self.kind {
            ModelKind::Knn(m) => m.predict_proba(x),
            ModelKind::LogReg(m) => m.predict_proba(x),
            ModelKind::StumpBoost(m) => m.predict_proba(x),
            ModelKind::Vote(ms) => {
                let members: Vec<_> = ms.iter().map(|m| (T::one(), m)).collect();
                vote_rows(x, k, &members)
            }
            ModelKind::Committee(ms) | ModelKind::Boosted(ms) => {
                let members: Vec<_> = ms.iter().map(|(w, m)| (*w, m)).collect();
                vote_rows(x, k, &members)
            }
            ModelKind::Custom(c) => c.predict_proba(x),
        }
    }
}

/// Training inputs for a strategy.
#[derive(Debug, Clone, Copy)]
pub struct SslData<'a, T> {
    pub x_labeled: ArrayView2<'a, T>,
    pub y_labeled: &'a [usize],
    pub x_unlabeled: ArrayView2<'a, T>,
    pub n_classes: usize,
}

impl<T: Scalar> SslData<'_, T> {
    pub fn n_labeled(&self) -> usize {
        self.y_labeled.len()
    }

    pub fn n_unlabeled(&self) -> usize {
        self.x_unlabeled.nrows()
    }
}

/// A fitted strategy plus its training trace.
#[derive(Debug, Clone)]
pub struct Fitted<T: Scalar> {
    pub model: TrainedModel<T>,
    /// Rounds of the outer loop that were executed.
    pub rounds: usize,
    /// Training-set size (summed over members for ensembles) after each
    /// fit, starting with the initial fit.
    pub train_sizes: Vec<usize>,
}

/// A semi-supervised wrapper strategy.
pub trait Strategy<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;
    fn fit(&self, data: &SslData<'_, T>, seed: u64) -> Result<Fitted<T>>;
    /// The purely supervised model this strategy reduces to without
    /// unlabeled data.
    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, seed: u64) -> Result<TrainedModel<T>>;
}

pub const STRATEGY_NAMES: [&str; 5] = ["self_training", "tri_training", "setred", "democratic", "assemble"];

pub const SELF_TRAINING_SCHEMA: &[ParamDef] = &[
    ParamDef::float("tau", 0.95, |t| t > 0.5 && t <= 1.01, "(0.5, 1.01]"),
    ParamDef::int("max_rounds", 10, non_negative, "[0, inf)"),
];

pub const TRI_TRAINING_SCHEMA: &[ParamDef] = &[ParamDef::int("max_rounds", 100, non_negative, "[0, inf)")];

pub const SETRED_SCHEMA: &[ParamDef] = &[
    ParamDef::float("theta", 0.1, params::open_unit, "(0, 1)"),
    ParamDef::int("max_rounds", 10, non_negative, "[0, inf)"),
    ParamDef::int("edit_k", 3, at_least_one, "[1, inf)"),
    ParamDef::int("per_round", 10, at_least_one, "[1, inf)"),
];

pub const DEMOCRATIC_SCHEMA: &[ParamDef] = &[ParamDef::int("max_rounds", 100, non_negative, "[0, inf)")];

pub const ASSEMBLE_SCHEMA: &[ParamDef] = &[
    ParamDef::int("T", 20, at_least_one, "[1, inf)"),
    ParamDef::float("beta", 0.9, params::half_open_unit, "(0, 1]"),
];

pub fn strategy_schema(name: &str) -> Option<&'static [ParamDef]> {
    match name {
        "self_training" => Some(SELF_TRAINING_SCHEMA),
        "tri_training" => Some(TRI_TRAINING_SCHEMA),
        "setred" => Some(SETRED_SCHEMA),
        "democratic" => Some(DEMOCRATIC_SCHEMA),
        "assemble" => Some(ASSEMBLE_SCHEMA),
        _ => None,
    }
}

/// Whether the strategy is driven by a committee of learners rather than a
/// single base learner.
pub fn uses_learner_list(name: &str) -> bool {
    name == "democratic"
}

/// Default committee for democratic co-learning.
pub fn default_learners() -> Vec<BaseLearnerSpec> {
    LEARNER_NAMES.iter().map(|n| BaseLearnerSpec::named(n)).collect()
}

/// Inputs from which a strategy is constructed.
#[derive(Debug, Clone)]
pub struct StrategyArgs {
    /// Strategy parameters with defaults materialized.
    pub params: ParamMap,
    pub base: LearnerConfig,
    pub learners: Vec<LearnerConfig>,
}

pub type StrategyFactory<T> = Box<dyn Fn(&StrategyArgs) -> Result<Box<dyn Strategy<T>>> + Send + Sync>;

struct Entry<T: Scalar> {
    name: String,
    schema: &'static [ParamDef],
    factory: StrategyFactory<T>,
}

/// Name-to-constructor table of strategies.
pub struct StrategyRegistry<T: Scalar> {
    entries: Vec<Entry<T>>,
}

impl<T: Scalar> Default for StrategyRegistry<T> {
    fn default() -> Self {
        Self::builtin()
    }
}

impl<T: Scalar> StrategyRegistry<T> {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("self_training", SELF_TRAINING_SCHEMA, |a| {
            let p = Params::new(SELF_TRAINING_SCHEMA, &a.params);
            Ok(Box::new(SelfTraining {
                base: a.base,
                tau: p.f64("tau"),
                max_rounds: p.usize("max_rounds"),
            }))
        });
        r.register("tri_training", TRI_TRAINING_SCHEMA, |a| {
            let p = Params::new(TRI_TRAINING_SCHEMA, &a.params);
            Ok(Box::new(TriTraining {
                base: a.base,
                max_rounds: p.usize("max_rounds"),
            }))
        });
        r.register("setred", SETRED_SCHEMA, |a| {
            let p = Params::new(SETRED_SCHEMA, &a.params);
            Ok(Box::new(Setred {
                base: a.base,
                theta: p.f64("theta"),
                max_rounds: p.usize("max_rounds"),
                edit_k: p.usize("edit_k"),
                per_round: p.usize("per_round"),
            }))
        });
        r.register("democratic", DEMOCRATIC_SCHEMA, |a| {
            let p = Params::new(DEMOCRATIC_SCHEMA, &a.params);
            Ok(Box::new(Democratic::new(a.learners.clone(), p.usize("max_rounds"))?))
        });
        r.register("assemble", ASSEMBLE_SCHEMA, |a| {
            let p = Params::new(ASSEMBLE_SCHEMA, &a.params);
            Ok(Box::new(Assemble {
                base: a.base,
                rounds: p.usize("T"),
                beta: p.f64("beta"),
            }))
        });
        r
    }

    /// Adds or replaces a strategy.
    pub fn register(
        &mut self,
        name: impl Into<String>,
        schema: &'static [ParamDef],
        factory: impl Fn(&StrategyArgs) -> Result<Box<dyn Strategy<T>>> + Send + Sync + 'static,
    ) {
        let name = name.into();
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry {
            name,
            schema,
            factory: Box::new(factory),
        });
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn schema(&self, name: &str) -> Option<&'static [ParamDef]> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.schema)
    }

    /// Resolves parameters against the schema and constructs the strategy.
    pub fn build(
        &self,
        name: &str,
        params: &ParamMap,
        base: &BaseLearnerSpec,
        learners: &[BaseLearnerSpec],
    ) -> Result<Box<dyn Strategy<T>>> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| LearnerError::UnknownStrategy(name.to_string()))?;
        let resolved = params::resolve(entry.schema, params).map_err(LearnerError::Params)?;
        let range = params::check_ranges(entry.schema, &resolved);
        if !range.is_empty() {
            return Err(LearnerError::Params(range));
        }
        let args = StrategyArgs {
            params: resolved,
            base: base.resolve()?,
            learners: learners.iter().map(BaseLearnerSpec::resolve).collect::<Result<_>>()?,
        };
        (entry.factory)(&args)
    }
}

/// Convenience for a strategy with every parameter at its default.
pub fn default_strategy<T: Scalar>(name: &str, base: &BaseLearnerSpec) -> Result<Box<dyn Strategy<T>>> {
    StrategyRegistry::builtin().build(name, &ParamMap::new(), base, &default_learners())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn learner_spec_resolution() {
        let spec: BaseLearnerSpec = serde_yaml::from_str("name: knn\nparams: {k: 3}\n").unwrap();
        assert_eq!(
            spec.resolve().unwrap(),
            LearnerConfig::Knn(KnnParams {
                k: 3,
                metric: Metric::Euclidean
            })
        );
        assert!(matches!(
            BaseLearnerSpec::named("svm").resolve(),
            Err(LearnerError::UnknownLearner(_))
        ));
        let bad: BaseLearnerSpec = serde_yaml::from_str("name: logreg\nparams: {epochs: -1}\n").unwrap();
        assert!(matches!(bad.resolve(), Err(LearnerError::Params(_))));
        assert!(serde_yaml::from_str::<BaseLearnerSpec>("name: knn\nextra: 1\n").is_err());
    }

    #[test]
    fn registry_has_the_five_builtins() {
        let r = StrategyRegistry::<f64>::builtin();
        assert_eq!(r.names(), STRATEGY_NAMES.to_vec());
        for name in STRATEGY_NAMES {
            assert!(
                default_strategy::<f64>(name, &BaseLearnerSpec::named("knn")).is_ok(),
                "{name}"
            );
        }
        assert!(matches!(
            r.build("mssboost", &ParamMap::new(), &BaseLearnerSpec::named("knn"), &[]),
            Err(LearnerError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn plugin_registration() {
        struct Constant;
        impl Strategy<f64> for Constant {
            fn name(&self) -> &str {
                "constant"
            }
            fn fit(&self, d: &SslData<'_, f64>, s: u64) -> Result<Fitted<f64>> {
                let model = self.fit_supervised(d.x_labeled, d.y_labeled, d.n_classes, s)?;
                Ok(Fitted {
                    model,
                    rounds: 0,
                    train_sizes: vec![d.n_labeled()],
                })
            }
            fn fit_supervised(
                &self,
                x: ArrayView2<'_, f64>,
                y: &[usize],
                k: usize,
                _: u64,
            ) -> Result<TrainedModel<f64>> {
                LearnerConfig::default().fit_unweighted(x, y, k)
            }
        }
        let mut r = StrategyRegistry::<f64>::builtin();
        r.register("constant", &[], |_| Ok(Box::new(Constant)));
        let s = r
            .build("constant", &ParamMap::new(), &BaseLearnerSpec::named("knn"), &[])
            .unwrap();
        let x = array![[0.0], [1.0]];
        let empty = Array2::<f64>::zeros((0, 1));
        let data = SslData {
            x_labeled: x.view(),
            y_labeled: &[0, 1],
            x_unlabeled: empty.view(),
            n_classes: 2,
        };
        assert_eq!(s.fit(&data, 0).unwrap().model.predict(x.view()), vec![0, 0]);
    }

    #[test]
    fn committee_rows_sum_to_one() {
        let x = array![[0.0f64], [1.0], [5.0], [6.0]];
        let y = [0, 0, 1, 1];
        let members: Vec<_> = [
            LearnerConfig::default(),
            LearnerConfig::LogReg(LogRegParams::default()),
            LearnerConfig::StumpBoost(StumpBoostParams::default()),
        ]
        .iter()
        .map(|c| (0.5, c.fit_unweighted(x.view(), &y, 2).unwrap()))
        .collect();
        let m = TrainedModel::new(ModelKind::Committee(members), "c".into(), String::new(), 2);
        let p = m.predict_proba(x.view());
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        assert_eq!(m.predict(x.view()), y.to_vec());
    }

    #[test]
    fn fingerprint_tracks_inputs() {
        let x = array![[0.0], [1.0]];
        let a = LearnerConfig::default().fit_unweighted(x.view(), &[0, 1], 2).unwrap();
        let b = LearnerConfig::default().fit_unweighted(x.view(), &[1, 0], 2).unwrap();
        assert_ne!(a.training_fingerprint(), b.training_fingerprint());
        assert_eq!(a.training_fingerprint().len(), 16);
        assert_eq!(a.spec(), "knn(k=5, metric=euclidean)");
    }
}
