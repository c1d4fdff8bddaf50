//! Weighted undirected graphs: construction from features, normalization
//! operators, and the on-disk cache.

mod build;
mod cache;
mod csr;

pub use build::{
    auto_sigma, binary_weights, build_graph, epsilon_neighbors, gaussian_weights, knn_graph, symmetrize, NeighborLists,
};
pub use cache::{graph_cache_key, load_graph, save_graph, CACHE_MAGIC, CACHE_VERSION};
pub use csr::CsrMatrix;

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("k = {k} must satisfy 1 <= k < n = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("sample {0} has zero norm; cosine distance is undefined")]
    ZeroNorm(usize),
    #[error("automatic sigma is zero: all neighbor distances vanish")]
    ZeroSigma,
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("graph has isolated nodes {0:?}; propagation is undefined on them")]
    IsolatedNodes(Vec<usize>),
    #[error("epsilon builder requires a positive `eps`")]
    MissingEps,
    #[error("graph builder `{0}` requires a feature matrix")]
    MissingFeatures(&'static str),
    #[error("builder `native` requires a dataset with a native graph")]
    MissingNativeGraph,
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("corrupt graph file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("graph cache i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    #[default]
    Knn,
    Epsilon,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Binary,
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrizeMode {
    #[default]
    Union,
    Intersection,
}

/// Gaussian bandwidth: a fixed value or the mean distance to each node's
/// farthest retained neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Sigma {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for Sigma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sigma::Auto => s.serialize_str("auto"),
            Sigma::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Sigma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Sigma;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive number or \"auto\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Sigma, E> {
                if v == "auto" {
                    Ok(Sigma::Auto)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Sigma, E> {
                Ok(Sigma::Fixed(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Sigma, E> {
                Ok(Sigma::Fixed(v as f64))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Sigma, E> {
                Ok(Sigma::Fixed(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

fn default_k() -> usize {
    10
}

/// How to obtain the graph for a transductive run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default)]
    pub builder: Builder,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub sigma: Sigma,
    #[serde(default)]
    pub symmetrize: SymmetrizeMode,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            builder: Builder::Knn,
            k: default_k(),
            eps: None,
            metric: Metric::Euclidean,
            weighting: Weighting::Gaussian,
            sigma: Sigma::Auto,
            symmetrize: SymmetrizeMode::Union,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `L = D − W`
    Unnormalized,
    /// `L_sym = I − D^{-1/2} W D^{-1/2}`
    Symmetric,
    /// `L_rw = I − D^{-1} W`
    RandomWalk,
}

/// Symmetric weighted graph without self-loops, stored as CSR.
///
/// Invariants: column indices strictly increase within each row, weights are
/// positive and finite, and `(i, j)` is stored iff `(j, i)` is, with equal
/// weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph<T> {
    adj: CsrMatrix<T>,
}

impl<T: Scalar> SparseGraph<T> {
    /// Builds and validates a graph from raw CSR arrays.
    pub fn from_csr(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, weights: Vec<T>) -> Result<Self> {
        check_layout(n, &row_offsets, &col_indices, &weights)?;
        let g = Self {
            adj: CsrMatrix::from_parts(n, row_offsets, col_indices, weights),
        };
        if !g.is_symmetric() {
            return Err(GraphError::Invalid("adjacency is not symmetric".into()));
        }
        Ok(g)
    }

    /// Undirected graph from an edge list. Self-loops are dropped and every
    /// unordered pair listed more than once gets the mean of its weights.
    pub fn from_undirected_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize, T)> = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(GraphError::Invalid(format!(
                    "edge ({a}, {b}) references a node >= n = {n}"
                )));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(GraphError::Invalid(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            if a != b {
                pairs.push((a.min(b), a.max(b), w));
            }
        }
        Ok(Self::from_pair_means(n, pairs))
    }

    /// Pairs must have `a < b`; repeated pairs are averaged.
    pub(crate) fn from_pair_means(n: usize, mut pairs: Vec<(usize, usize, T)>) -> Self {
        pairs.sort_by_key(|x| (x.0, x.1));
        let mut triplets = Vec::with_capacity(pairs.len() * 2);
        let mut i = 0;
        while i < pairs.len() {
            let (a, b, _) = pairs[i];
            let mut sum = T::zero();
            let mut count = 0usize;
            while i < pairs.len() && pairs[i].0 == a && pairs[i].1 == b {
                sum += pairs[i].2;
                count += 1;
                i += 1;
            }
            let w = sum / T::of_usize(count);
            triplets.push((a, b, w));
            triplets.push((b, a, w));
        }
        Self {
            adj: CsrMatrix::from_triplets(n, triplets),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    /// Number of stored directed entries (twice the undirected edge count).
    pub fn nnz(&self) -> usize {
        self.adj.nnz()
    }

    pub fn row_offsets(&self) -> &[usize] {
        self.adj.row_offsets()
    }

    pub fn col_indices(&self) -> &[usize] {
        self.adj.col_indices()
    }

    pub fn weights(&self) -> &[T] {
        self.adj.values()
    }

    /// Weighted adjacency `W` as a sparse matrix.
    pub fn adjacency(&self) -> &CsrMatrix<T> {
        &self.adj
    }

    /// Neighbor ids and edge weights of node `i`.
    pub fn neighbors(&self, i: usize) -> (&[usize], &[T]) {
        self.adj.row(i)
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.adj.get(i, j)
    }

    pub fn degree_vector(&self) -> Vec<T> {
        self.adj.row_sums()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n()).all(|i| {
            let (cols, vals) = self.adj.row(i);
            cols.iter().zip(vals).all(|(&j, &w)| self.adj.get(j, i) == w && j != i)
        })
    }

    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.adj.row(i).0.is_empty()).collect()
    }

    pub fn ensure_no_isolated(&self) -> Result<()> {
        let iso = self.isolated_nodes();
        if iso.is_empty() {
            Ok(())
        } else {
            Err(GraphError::IsolatedNodes(iso))
        }
    }

    /// Component id per node, numbered in order of each component's lowest node.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in self.adj.row(u).0 {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Row-stochastic transition operator `P = D^{-1} W`.
    pub fn transition_row_stochastic(&self) -> Result<CsrMatrix<T>> {
        let d = self.checked_degrees()?;
        Ok(self.adj.map_values(|i, _, w| w / d[i]))
    }

    /// Symmetrically normalized adjacency `S = D^{-1/2} W D^{-1/2}`.
    pub fn normalized_adjacency(&self) -> Result<CsrMatrix<T>> {
        let d = self.checked_degrees()?;
        let inv_sqrt: Vec<T> = d.iter().map(|&x| T::one() / x.sqrt()).collect();
        Ok(self.adj.map_values(|i, j, w| w * inv_sqrt[i] * inv_sqrt[j]))
    }

    pub fn laplacian(&self, kind: LaplacianKind) -> Result<CsrMatrix<T>> {
        let (off, diag) = match kind {
            LaplacianKind::Unnormalized => (self.adj.clone(), self.checked_degrees()?),
            LaplacianKind::Symmetric => (self.normalized_adjacency()?, vec![T::one(); self.n()]),
            LaplacianKind::RandomWalk => (self.transition_row_stochastic()?, vec![T::one(); self.n()]),
        };
        let mut triplets = Vec::with_capacity(off.nnz() + self.n());
        for (i, &d) in diag.iter().enumerate() {
            triplets.push((i, i, d));
            let (cols, vals) = off.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, -v));
            }
        }
        Ok(CsrMatrix::from_triplets(self.n(), triplets))
    }

    /// Same structure with new edge weights computed from `(i, j, w)`.
    ///
    /// `f` must be symmetric in `(i, j)` and return positive values.
    pub fn reweighted(&self, f: impl FnMut(usize, usize, T) -> T) -> Self {
        Self {
            adj: self.adj.map_values(f),
        }
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n() {
            let (cols, vals) = self.adj.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                triplets.push((perm[i], perm[j], w));
            }
        }
        Self {
            adj: CsrMatrix::from_triplets(self.n(), triplets),
        }
    }

    fn checked_degrees(&self) -> Result<Vec<T>> {
        self.ensure_no_isolated()?;
        Ok(self.degree_vector())
    }
}

fn check_layout<T: Scalar>(n: usize, row_offsets: &[usize], col_indices: &[usize], weights: &[T]) -> Result<()> {
    let bad = |m: String| Err(GraphError::Invalid(m));
    if row_offsets.len() != n + 1 {
        return bad(format!(
            "row_offsets has length {}, expected {}",
            row_offsets.len(),
            n + 1
        ));
    }
    if row_offsets[0] != 0 || row_offsets[n] != col_indices.len() {
        return bad("row_offsets do not span col_indices".into());
    }
    if col_indices.len() != weights.len() {
        return bad("col_indices and weights differ in length".into());
    }
    for i in 0..n {
        let (a, b) = (row_offsets[i], row_offsets[i + 1]);
        if a > b {
            return bad(format!("row_offsets decrease at row {i}"));
        }
        let cols = &col_indices[a..b];
        for (p, &c) in cols.iter().enumerate() {
            if c >= n {
                return bad(format!("column {c} out of range in row {i}"));
            }
            if c == i {
                return bad(format!("self-loop at node {i}"));
            }
            if p > 0 && cols[p - 1] >= c {
                return bad(format!("columns not strictly increasing in row {i}"));
            }
        }
        if let Some(w) = weights[a..b].iter().find(|w| !(**w > T::zero()) || !w.is_finite()) {
            return bad(format!("non-positive weight {w} in row {i}"));
        }
    }
    Ok(())
}
