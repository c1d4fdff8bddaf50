//! Dataset interface: tabular CSV, precomputed feature matrices, native
//! graphs given as edge lists, and synthetic generators.

mod load;
mod synth;

pub use load::{load_edge_list, load_matrix, load_tabular_csv};
pub use synth::{gen_blobs, gen_sbm, gen_two_moons};

use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::canon::{short_hash, to_canonical_bytes};
use crate::graph::SparseGraph;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: column `{column}` not found in header")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: line {line}, column `{column}`: `{value}` is not a finite number")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        column: String,
        value: String,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("edge list references node {node} but only {n} labels were given")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge ({src}, {dst}) has negative weight {weight}")]
    NegativeWeight { src: usize, dst: usize, weight: f64 },
    #[error("label count {labels} does not match sample count {samples}")]
    LabelCount { labels: usize, samples: usize },
    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("dataset has neither features nor a native graph")]
    NoInputs,
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error("dataset spec: {0}")]
    Spec(String),
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Csv,
    Matrix,
    Edgelist,
    Synthetic,
}

fn default_noise() -> f64 {
    0.1
}

fn default_blob_std() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SyntheticSpec {
    TwoMoons {
        n: usize,
        #[serde(default = "default_noise")]
        noise_std: f64,
    },
    Blobs {
        n: usize,
        centers: Vec<Vec<f64>>,
        #[serde(default = "default_blob_std")]
        std: f64,
        #[serde(default)]
        k: Option<usize>,
    },
    Sbm {
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
}

impl SyntheticSpec {
    /// The generator's argument checks, without generating.
    pub fn check(&self) -> Result<()> {
        match self {
            SyntheticSpec::TwoMoons { n, noise_std } => synth::check_two_moons(*n, *noise_std),
            SyntheticSpec::Blobs { n, centers, std, k } => {
                synth::check_blobs(*n, k.unwrap_or(centers.len()), centers, *std)
            }
            SyntheticSpec::Sbm {
                block_sizes,
                p_in,
                p_out,
            } => synth::check_sbm(block_sizes, *p_in, *p_out),
        }
    }

    /// Sample count the generator will produce.
    pub fn n(&self) -> usize {
        match self {
            SyntheticSpec::TwoMoons { n, .. } | SyntheticSpec::Blobs { n, .. } => *n,
            SyntheticSpec::Sbm { block_sizes, .. } => block_sizes.iter().sum(),
        }
    }
}

fn yes() -> bool {
    true
}

/// Where a dataset comes from. Which path fields are required depends on
/// `source`: `csv` uses `path` and `label_column`; `matrix` uses
/// `features_path` and `labels_path`; `edgelist` uses `edges_path`,
/// `labels_path` and optionally `features_path`; `synthetic` uses
/// `synthetic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub source: Source,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub label_column: Option<String>,
    #[serde(default)]
    pub features_path: Option<String>,
    #[serde(default)]
    pub labels_path: Option<String>,
    #[serde(default)]
    pub edges_path: Option<String>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default = "yes")]
    pub standardize: bool,
}

impl DatasetSpec {
    /// `(config path, file path)` of every file this dataset names.
    pub fn file_paths(&self) -> Vec<(&'static str, &str)> {
        let mut out = Vec::new();
        let fields: [(&'static str, &Option<String>); 4] = [
            ("dataset.path", &self.path),
            ("dataset.features_path", &self.features_path),
            ("dataset.labels_path", &self.labels_path),
            ("dataset.edges_path", &self.edges_path),
        ];
        for (name, v) in fields {
            if let Some(p) = v {
                out.push((name, p.as_str()));
            }
        }
        out
    }

    /// Required-field check per source; returns `(config path, message)` pairs.
    pub fn check_fields(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        let mut need = |field: &str, present: bool| {
            if !present {
                errs.push((
                    format!("dataset.{field}"),
                    format!("source `{}` requires `{field}`", self.source_name()),
                ));
            }
        };
        match self.source {
            Source::Csv => {
                need("path", self.path.is_some());
                need("label_column", self.label_column.is_some());
            }
            Source::Matrix => {
                need("features_path", self.features_path.is_some());
                need("labels_path", self.labels_path.is_some());
            }
            Source::Edgelist => {
                need("edges_path", self.edges_path.is_some());
                need("labels_path", self.labels_path.is_some());
            }
            Source::Synthetic => need("synthetic", self.synthetic.is_some()),
        }
        errs
    }

    fn source_name(&self) -> &'static str {
        match self.source {
            Source::Csv => "csv",
            Source::Matrix => "matrix",
            Source::Edgelist => "edgelist",
            Source::Synthetic => "synthetic",
        }
    }

    /// Whether a loaded dataset will carry a feature matrix.
    pub fn has_features(&self) -> bool {
        match self.source {
            Source::Edgelist => self.features_path.is_some(),
            Source::Synthetic => !matches!(self.synthetic, Some(SyntheticSpec::Sbm { .. })),
            _ => true,
        }
    }

    pub fn has_native_graph(&self) -> bool {
        match self.source {
            Source::Edgelist => true,
            Source::Synthetic => matches!(self.synthetic, Some(SyntheticSpec::Sbm { .. })),
            _ => false,
        }
    }
}

/// Samples with integer labels in `[0, k)`, plus features and/or a native
/// graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: Option<Array2<T>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    native_graph: Option<SparseGraph<T>>,
    source_fingerprint: String,
}

impl<T: Scalar> Dataset<T> {
    /// Validates the dataset invariants: matching sizes, finite features,
    /// at least two classes, every class present.
    pub fn new(
        features: Option<Array2<T>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        native_graph: Option<SparseGraph<T>>,
        source_fingerprint: String,
    ) -> Result<Self> {
        let n = labels.len();
        if features.is_none() && native_graph.is_none() {
            return Err(DataError::NoInputs);
        }
        if let Some(x) = &features {
            if x.nrows() != n {
                return Err(DataError::LabelCount {
                    labels: n,
                    samples: x.nrows(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(DataError::Spec("features contain NaN or Inf".into()));
            }
        }
        if let Some(g) = &native_graph {
            if g.n() != n {
                return Err(DataError::LabelCount {
                    labels: n,
                    samples: g.n(),
                });
            }
        }
        let k = class_names.len();
        if k < 2 {
            return Err(DataError::TooFewClasses(k));
        }
        let mut seen = vec![false; k];
        for &y in &labels {
            if y >= k {
                return Err(DataError::Spec(format!("label {y} outside [0, {k})")));
            }
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(DataError::EmptyClass(c));
        }
        Ok(Self {
            features,
            labels,
            class_names,
            native_graph,
            source_fingerprint,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> Option<ArrayView2<'_, T>> {
        self.features.as_ref().map(|x| x.view())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn native_graph(&self) -> Option<&SparseGraph<T>> {
        self.native_graph.as_ref()
    }

    /// Content hash of the inputs this dataset was built from.
    pub fn source_fingerprint(&self) -> &str {
        &self.source_fingerprint
    }

    /// Per-sample counts of each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Standardized copy (see [`standardize_matrix`]). The fingerprint is
    /// extended so that cached graphs of raw and standardized data differ.
    pub fn standardized(&self) -> Result<Self> {
        let x = self
            .features
            .as_ref()
            .ok_or_else(|| DataError::Spec("standardization requires features".into()))?;
        let mut fp = self.source_fingerprint.clone().into_bytes();
        fp.extend_from_slice(b"|standardized");
        Ok(Self {
            features: Some(standardize_matrix(x)),
            source_fingerprint: short_hash(&fp),
            ..self.clone()
        })
    }
}

/// Per-column zero mean and unit population variance. Constant columns
/// become all zeros.
pub fn standardize_matrix<T: Scalar>(x: &Array2<T>) -> Array2<T> {
    let n = x.nrows();
    let mut out = x.clone();
    if n == 0 {
        return out;
    }
    let nt = T::of_usize(n);
    for mut col in out.columns_mut() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            col.fill(T::zero());
            continue;
        }
        let mean = col.iter().copied().sum::<T>() / nt;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nt;
        let std = var.sqrt();
        col.mapv_inplace(|v| (v - mean) / std);
    }
    out
}

/// Loads the dataset described by `spec`, resolving relative paths against
/// `base_dir`. `seed` drives synthetic generators only.
pub fn load_dataset<T: Scalar>(spec: &DatasetSpec, base_dir: &Path, seed: u64) -> Result<Dataset<T>> {
    let resolve = |p: &Option<String>, field: &str| -> Result<PathBuf> {
        let p = p
            .as_deref()
            .ok_or_else(|| DataError::Spec(format!("missing `{field}`")))?;
        Ok(base_dir.join(p))
    };
    match spec.source {
        Source::Csv => {
            let col = spec
                .label_column
                .as_deref()
                .ok_or_else(|| DataError::Spec("missing `label_column`".into()))?;
            load_tabular_csv(&resolve(&spec.path, "path")?, col)
        }
        Source::Matrix => load_matrix(
            &resolve(&spec.features_path, "features_path")?,
            &resolve(&spec.labels_path, "labels_path")?,
        ),
        Source::Edgelist => {
            let features = match &spec.features_path {
                Some(_) => Some(resolve(&spec.features_path, "features_path")?),
                None => None,
            };
            load_edge_list(
                &resolve(&spec.edges_path, "edges_path")?,
                features.as_deref(),
                &resolve(&spec.labels_path, "labels_path")?,
            )
        }
        Source::Synthetic => {
            let syn = spec
                .synthetic
                .as_ref()
                .ok_or_else(|| DataError::Spec("missing `synthetic`".into()))?;
            generate(syn, seed)
        }
    }
}

/// Runs the generator named in `spec`.
pub fn generate<T: Scalar>(spec: &SyntheticSpec, seed: u64) -> Result<Dataset<T>> {
    let tag = synthetic_fingerprint(spec, seed);
    let mut ds = match spec {
        SyntheticSpec::TwoMoons { n, noise_std } => gen_two_moons(*n, *noise_std, seed)?,
        SyntheticSpec::Blobs { n, centers, std, k } => gen_blobs(*n, k.unwrap_or(centers.len()), centers, *std, seed)?,
        SyntheticSpec::Sbm {
            block_sizes,
            p_in,
            p_out,
        } => gen_sbm(block_sizes, *p_in, *p_out, seed)?,
    };
    ds.source_fingerprint = tag;
    Ok(ds)
}

pub(crate) fn synthetic_fingerprint(spec: &SyntheticSpec, seed: u64) -> String {
    let mut bytes = to_canonical_bytes(spec);
    bytes.extend_from_slice(b"|seed=");
    bytes.extend_from_slice(seed.to_string().as_bytes());
    short_hash(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn constant_column_maps_to_zeros() {
        let x = array![[0.1, 0.0], [0.1, 2.0], [0.1, 4.0]];
        let s = standardize_matrix(&x);
        assert!(s.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_values_become_plus_minus_one() {
        let x = array![[0.0], [2.0]];
        let s = standardize_matrix(&x);
        assert_eq!(s.column(0).to_vec(), vec![-1.0, 1.0]);
    }

    #[test]
    fn standardize_is_idempotent() {
        let x = array![[1.0f64, 5.0], [2.0, -3.0], [7.5, 0.25], [3.0, 3.0]];
        let once = standardize_matrix(&x);
        let twice = standardize_matrix(&once);
        for (a, b) in once.iter().zip(twice.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for col in once.columns() {
            let mean = col.sum() / 4.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() <= 1e-10);
            assert!((var.sqrt() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn dataset_invariants() {
        let x = array![[0.0], [1.0]];
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::new(Some(x.clone()), vec![0, 1], names.clone(), None, String::new()).is_ok());
        assert!(matches!(
            Dataset::new(Some(x.clone()), vec![0, 0], names.clone(), None, String::new()),
            Err(DataError::EmptyClass(1))
        ));
        assert!(matches!(
            Dataset::<f64>::new(None, vec![0, 1], names.clone(), None, String::new()),
            Err(DataError::NoInputs)
        ));
        let bad = array![[f64::NAN], [1.0]];
        assert!(Dataset::new(Some(bad), vec![0, 1], names, None, String::new()).is_err());
    }

    #[test]
    fn synthetic_spec_yaml() {
        let s: SyntheticSpec = serde_yaml::from_str("name: two_moons\nn: 10\n").unwrap();
        assert_eq!(s, SyntheticSpec::TwoMoons { n: 10, noise_std: 0.1 });
        assert!(serde_yaml::from_str::<SyntheticSpec>("name: two_moons\nn: 10\nnoize: 1\n").is_err());
        assert!(serde_yaml::from_str::<SyntheticSpec>("name: spirals\nn: 10\n").is_err());
    }
}
