//! Deterministic train/validation/test splits with low-label-rate and
//! imbalanced labeled subsets.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::stream;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SplitError {
    #[error("infeasible split: {0}")]
    Infeasible(String),
    #[error("invalid sampling spec: {0}")]
    Spec(String),
}

pub type Result<T, E = SplitError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    TrainLabeled,
    TrainUnlabeled,
    Validation,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::TrainLabeled => "train_labeled",
            Role::TrainUnlabeled => "train_unlabeled",
            Role::Validation => "validation",
            Role::Test => "test",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImbalanceKind {
    Exponential,
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImbalanceSpec {
    pub kind: ImbalanceKind,
    pub ratio: f64,
}

fn default_test_fraction() -> f64 {
    0.2
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default)]
    pub labeled_per_class: Option<usize>,
    #[serde(default)]
    pub labeled_fraction: Option<f64>,
    #[serde(default)]
    pub val_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "yes")]
    pub stratified: bool,
    #[serde(default)]
    pub imbalance: Option<ImbalanceSpec>,
}

impl SamplingSpec {
    /// Cross-field checks, as `(config path, message)` pairs.
    pub fn check(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        let mut err = |path: &str, msg: String| errs.push((path.to_string(), msg));
        match (self.labeled_per_class, self.labeled_fraction) {
            (Some(_), Some(_)) | (None, None) => err(
                "sampling",
                "exactly one of labeled_per_class and labeled_fraction must be set".into(),
            ),
            (Some(0), None) => err("sampling.labeled_per_class", "must be positive".into()),
            (None, Some(f)) if !(f > 0.0 && f <= 1.0) => {
                err("sampling.labeled_fraction", format!("{f} outside (0, 1]"))
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            err("sampling.val_fraction", format!("{} outside [0, 1)", self.val_fraction));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            err(
                "sampling.test_fraction",
                format!("{} outside (0, 1)", self.test_fraction),
            );
        }
        if self.val_fraction + self.test_fraction >= 1.0 {
            err(
                "sampling",
                format!(
                    "val_fraction + test_fraction = {} must be < 1",
                    self.val_fraction + self.test_fraction
                ),
            );
        }
        if let Some(im) = &self.imbalance {
            if !(im.ratio >= 1.0) || !im.ratio.is_finite() {
                err("sampling.imbalance.ratio", format!("{} must be >= 1", im.ratio));
            }
        }
        errs
    }
}

/// Role of every sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    roles: Vec<Role>,
}

impl SplitAssignment {
    pub fn from_roles(roles: Vec<Role>) -> Self {
        Self { roles }
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    /// Indices with role `role`, ascending.
    pub fn indices(&self, role: Role) -> Vec<usize> {
        (0..self.roles.len()).filter(|&i| self.roles[i] == role).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    /// Labeled count per class.
    pub fn labeled_counts(&self, labels: &[usize], k: usize) -> Vec<usize> {
        let mut counts = vec![0; k];
        for (i, &r) in self.roles.iter().enumerate() {
            if r == Role::TrainLabeled {
                counts[labels[i]] += 1;
            }
        }
        counts
    }

    /// `splits.csv` body: `index,role` header and one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,role\n");
        for (i, r) in self.roles.iter().enumerate() {
            out.push_str(&format!("{i},{r}\n"));
        }
        out
    }
}

/// Hamilton apportionment: floors of `fraction × size`, then the
/// `round(fraction × Σ size)` total is reached by handing one extra unit to
/// the largest remainders (lower class first on ties).
pub fn largest_remainder(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total_size: usize = sizes.iter().sum();
    let target = ((fraction * total_size as f64).round() as usize).min(total_size);
    let quotas: Vec<f64> = sizes.iter().map(|&s| fraction * s as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).expect("finite quotas").then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(assigned);
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if remaining == 0 {
            break;
        }
        if counts[c] < sizes[c] {
            counts[c] += 1;
            remaining -= 1;
        }
    }
    counts
}

/// Splits `total` units in proportion to `weights` (which sum to one) by
/// largest remainders, lower index first on ties.
pub fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|&w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).expect("finite quotas").then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &c in order.iter().take(total.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

/// Shuffles with the `(seed, "split")` stream, carves test then validation
/// (per class when stratified), then marks the labeled subset of the
/// remaining training pool.
pub fn make_split(labels: &[usize], k: usize, spec: &SamplingSpec, seed: u64) -> Result<SplitAssignment> {
    if let Some((_, msg)) = spec.check().into_iter().next() {
        return Err(SplitError::Spec(msg));
    }
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, "split"));
    let mut roles = vec![Role::TrainUnlabeled; n];

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &i in &order {
        by_class[labels[i]].push(i);
    }
    let pool: Vec<Vec<usize>> = if spec.stratified {
        if let Some(c) = by_class.iter().position(|m| m.len() < 2) {
            return Err(SplitError::Infeasible(format!(
                "stratified split needs >= 2 samples in class {c}"
            )));
        }
        let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
        let test = largest_remainder(&sizes, spec.test_fraction);
        let val = largest_remainder(&sizes, spec.val_fraction);
        by_class
            .iter()
            .enumerate()
            .map(|(c, members)| {
                let (t, v) = (test[c], val[c].min(members.len() - test[c]));
                for &i in &members[..t] {
                    roles[i] = Role::Test;
                }
                for &i in &members[t..t + v] {
                    roles[i] = Role::Validation;
                }
                members[t + v..].to_vec()
            })
            .collect()
    } else {
        let t = ((spec.test_fraction * n as f64).round() as usize).min(n);
        let v = ((spec.val_fraction * n as f64).round() as usize).min(n - t);
        for &i in &order[..t] {
            roles[i] = Role::Test;
        }
        for &i in &order[t..t + v] {
            roles[i] = Role::Validation;
        }
        let mut pool = vec![Vec::new(); k];
        for &i in &order[t + v..] {
            pool[labels[i]].push(i);
        }
        pool
    };
    if !roles.contains(&Role::Test) {
        return Err(SplitError::Infeasible("test split is empty".into()));
    }

    match (spec.labeled_per_class, spec.labeled_fraction) {
        (Some(m), _) => {
            for (c, members) in pool.iter().enumerate() {
                if members.len() < m {
                    return Err(SplitError::Infeasible(format!(
                        "labeled_per_class = {m} exceeds the {} training samples of class {c}",
                        members.len()
                    )));
                }
                for &i in &members[..m] {
                    roles[i] = Role::TrainLabeled;
                }
            }
        }
        (None, Some(f)) => {
            if spec.stratified {
                let sizes: Vec<usize> = pool.iter().map(Vec::len).collect();
                let counts = largest_remainder(&sizes, f);
                for (members, &m) in pool.iter().zip(&counts) {
                    for &i in &members[..m] {
                        roles[i] = Role::TrainLabeled;
                    }
                }
            } else {
                let train: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&i| roles[i] == Role::TrainUnlabeled)
                    .collect();
                let m = ((f * train.len() as f64).round() as usize).min(train.len());
                for &i in &train[..m] {
                    roles[i] = Role::TrainLabeled;
                }
            }
        }
        (None, None) => unreachable!("checked by spec validation"),
    }

    let split = SplitAssignment { roles };
    if let Some(c) = split.labeled_counts(labels, k).iter().position(|&m| m == 0) {
        return Err(SplitError::Infeasible(format!(
            "class {c} has no labeled training sample"
        )));
    }
    Ok(split)
}

/// Per-class labeled target counts for an imbalance profile.
pub fn imbalance_targets(n_max: usize, k: usize, spec: &ImbalanceSpec) -> Vec<usize> {
    // Guard against values like 10 · 10^-1 landing a hair above an integer.
    let ceil = |x: f64| (x - 1e-9).ceil().max(0.0) as usize;
    (0..k)
        .map(|c| match spec.kind {
            ImbalanceKind::Exponential => {
                let e = if k > 1 { -(c as f64) / (k - 1) as f64 } else { 0.0 };
                ceil(n_max as f64 * spec.ratio.powf(e))
            }
            ImbalanceKind::Step => {
                if c < k / 2 {
                    n_max
                } else {
                    ceil(n_max as f64 / spec.ratio)
                }
            }
        })
        .collect()
}

/// Demotes labeled samples to `train_unlabeled` so class `c` keeps at most
/// its imbalance target. Which samples are demoted is drawn from the
/// `(seed, "imbalance")` stream.
pub fn apply_imbalance(
    split: &SplitAssignment,
    labels: &[usize],
    k: usize,
    spec: &ImbalanceSpec,
    seed: u64,
) -> Result<SplitAssignment> {
    if !(spec.ratio >= 1.0) {
        return Err(SplitError::Spec(format!("imbalance ratio {} must be >= 1", spec.ratio)));
    }
    let counts = split.labeled_counts(labels, k);
    let n_max = counts.iter().copied().max().unwrap_or(0);
    let targets = imbalance_targets(n_max, k, spec);
    if let Some(c) = targets.iter().position(|&t| t < 1) {
        return Err(SplitError::Infeasible(format!(
            "class {c} would keep no labeled sample"
        )));
    }
    let mut roles = split.roles.clone();
    let mut rng = stream(seed, "imbalance");
    for c in 0..k {
        let mut members: Vec<usize> = (0..roles.len())
            .filter(|&i| roles[i] == Role::TrainLabeled && labels[i] == c)
            .collect();
        if members.len() <= targets[c] {
            continue;
        }
        members.shuffle(&mut rng);
        for &i in &members[..members.len() - targets[c]] {
            roles[i] = Role::TrainUnlabeled;
        }
    }
    Ok(SplitAssignment { roles })
}
