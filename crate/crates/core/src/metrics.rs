//! Accuracy, macro-F1 and confusion matrices over configured splits.
//!
//! Macro-F1 averages per-class F1 over all `k` classes. A class that is
//! neither present nor predicted in a split contributes F1 = 0, which pulls
//! macro-F1 down at low label rates and under class imbalance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sampling::{Role, SplitAssignment};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {truth} true labels vs {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {label} outside [0, {k})")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("requested split `{0}` is empty")]
    EmptySplit(Role),
    #[error("split `{0}` cannot be evaluated")]
    UnsupportedSplit(Role),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Accuracy,
    MacroF1,
}

impl MetricName {
    pub const ALL: [MetricName; 2] = [MetricName::Accuracy, MetricName::MacroF1];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::MacroF1 => "macro_f1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

fn default_metrics() -> Vec<MetricName> {
    MetricName::ALL.to_vec()
}

fn default_splits() -> Vec<Role> {
    vec![Role::Test]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
    #[serde(default = "default_splits")]
    pub splits: Vec<Role>,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            metrics: default_metrics(),
            splits: default_splits(),
        }
    }
}

fn check(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    if let Some(&label) = y_true.iter().chain(y_pred).find(|&&y| y >= k) {
        return Err(MetricsError::LabelOutOfRange { label, k });
    }
    Ok(())
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Ok(0.0);
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// `confusion[i][j]` counts samples with true class `i` predicted as `j`.
pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<Vec<Vec<u64>>> {
    check(y_true, y_pred, k)?;
    let mut m = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        m[t][p] += 1;
    }
    Ok(m)
}

pub fn macro_f1(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<f64> {
    let m = confusion_matrix(y_true, y_pred, k)?;
    Ok(macro_f1_from_confusion(&m))
}

fn macro_f1_from_confusion(m: &[Vec<u64>]) -> f64 {
    let k = m.len();
    if k == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (c, row) in m.iter().enumerate() {
        let tp = row[c] as f64;
        let fp = m.iter().map(|r| r[c]).sum::<u64>() as f64 - tp;
        let fn_ = row.iter().sum::<u64>() as f64 - tp;
        let denom = 2.0 * tp + fp + fn_;
        if denom > 0.0 {
            total += 2.0 * tp / denom;
        }
    }
    total / k as f64
}

/// Scores per split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    /// split name → metric name → value
    pub splits: BTreeMap<String, BTreeMap<String, f64>>,
    pub confusion: BTreeMap<String, Vec<Vec<u64>>>,
    pub n_per_split: BTreeMap<String, usize>,
}

impl MetricsReport {
    pub fn get(&self, split: Role, metric: MetricName) -> Option<f64> {
        self.splits.get(split.as_str())?.get(metric.as_str()).copied()
    }
}

/// Computes each metric restricted to each requested split.
pub fn evaluate(
    predictions: &[usize],
    labels: &[usize],
    k: usize,
    split: &SplitAssignment,
    metrics: &[MetricName],
    splits: &[Role],
) -> Result<MetricsReport> {
    check(labels, predictions, k)?;
    if split.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            truth: labels.len(),
            pred: split.len(),
        });
    }
    let mut report = MetricsReport::default();
    for &role in splits {
        if role == Role::TrainLabeled {
            return Err(MetricsError::UnsupportedSplit(role));
        }
        let idx = split.indices(role);
        if idx.is_empty() {
            return Err(MetricsError::EmptySplit(role));
        }
        let t: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let p: Vec<usize> = idx.iter().map(|&i| predictions[i]).collect();
        let conf = confusion_matrix(&t, &p, k)?;
        let mut scores = BTreeMap::new();
        for &m in metrics {
            let v = match m {
                MetricName::Accuracy => accuracy(&t, &p)?,
                MetricName::MacroF1 => macro_f1_from_confusion(&conf),
            };
            scores.insert(m.as_str().to_string(), v);
        }
        report.splits.insert(role.as_str().to_string(), scores);
        report.confusion.insert(role.as_str().to_string(), conf);
        report.n_per_split.insert(role.as_str().to_string(), idx.len());
    }
    Ok(report)
}

/// Solver diagnostics carried into `metrics.json` for transductive runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSummary {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

// Field order is alphabetical so the emitted keys are sorted.
#[derive(Serialize)]
struct MetricsJson<'a> {
    confusion: &'a BTreeMap<String, Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    fingerprint: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    method: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    splits: &'a BTreeMap<String, BTreeMap<String, f64>>,
}

/// `metrics.json` body with sorted keys and a trailing newline.
pub fn metrics_json(report: &MetricsReport, fingerprint: &str, method: &str, solver: Option<SolverSummary>) -> String {
    let doc = MetricsJson {
        confusion: &report.confusion,
        converged: solver.map(|s| s.converged),
        fingerprint,
        iterations: solver.map(|s| s.iterations),
        method,
        residual: solver.map(|s| s.residual),
        splits: &report.splits,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("metrics serialize");
    s.push('\n');
    s
}
