use ndarray::ArrayView2;
use rayon::prelude::*;

use super::{Builder, GraphError, GraphSpec, Metric, Result, Sigma, SparseGraph, SymmetrizeMode, Weighting};
use crate::scalar::Scalar;

/// Directed neighbor lists. Each entry is `(neighbor, value)` where the value
/// is a distance straight out of [`knn_graph`] and a weight after weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborLists<T> {
    pub lists: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> NeighborLists<T> {
    pub fn n(&self) -> usize {
        self.lists.len()
    }
}

struct Distances<'a, T> {
    x: ArrayView2<'a, T>,
    metric: Metric,
    norms: Vec<T>,
}

impl<'a, T: Scalar> Distances<'a, T> {
    fn new(x: ArrayView2<'a, T>, metric: Metric) -> Result<Self> {
        let norms = match metric {
            Metric::Euclidean => Vec::new(),
            Metric::Cosine => {
                let norms: Vec<T> = x
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().map(|&v| v * v).sum::<T>().sqrt())
                    .collect();
                if let Some(i) = norms.iter().position(|&v| v == T::zero()) {
                    return Err(GraphError::ZeroNorm(i));
                }
                norms
            }
        };
        Ok(Self { x, metric, norms })
    }

    fn between(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.x.row(i), self.x.row(j));
        match self.metric {
            Metric::Euclidean => a
                .iter()
                .zip(b.iter())
                .map(|(&p, &q)| (p - q) * (p - q))
                .sum::<T>()
                .sqrt(),
            Metric::Cosine => {
                let dot: T = a.iter().zip(b.iter()).map(|(&p, &q)| p * q).sum();
                (T::one() - dot / (self.norms[i] * self.norms[j])).max(T::zero())
            }
        }
    }
}

/// Exact k nearest neighbors of every row of `features` (self excluded).
///
/// Distance ties break toward the lower node index. Rows are computed in
/// parallel into fixed slots, so the output does not depend on thread count.
/// Cost is `O(n² d)`.
pub fn knn_graph<T: Scalar>(features: ArrayView2<'_, T>, k: usize, metric: Metric) -> Result<NeighborLists<T>> {
    let n = features.nrows();
    if k == 0 || k >= n {
        return Err(GraphError::InvalidK { k, n });
    }
    let dist = Distances::new(features, metric)?;
    let lists = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(usize, T)> = (0..n).filter(|&j| j != i).map(|j| (j, dist.between(i, j))).collect();
            row.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances").then(a.0.cmp(&b.0)));
            row.truncate(k);
            row
        })
        .collect();
    Ok(NeighborLists { lists })
}

/// All other nodes within distance `eps`, in index order.
pub fn epsilon_neighbors<T: Scalar>(features: ArrayView2<'_, T>, eps: T, metric: Metric) -> Result<NeighborLists<T>> {
    let n = features.nrows();
    let dist = Distances::new(features, metric)?;
    let lists = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, dist.between(i, j)))
                .filter(|&(_, d)| d <= eps)
                .collect()
        })
        .collect();
    Ok(NeighborLists { lists })
}

/// Mean over nodes of the distance to the farthest retained neighbor; for a
/// k-NN structure that is the k-th neighbor distance. Nodes without any
/// neighbor are skipped.
pub fn auto_sigma<T: Scalar>(distances: &NeighborLists<T>) -> Result<T> {
    let mut sum = T::zero();
    let mut count = 0usize;
    for row in &distances.lists {
        if let Some(&(_, d)) = row.iter().max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite")) {
            sum += d;
            count += 1;
        }
    }
    if count == 0 || sum == T::zero() {
        return Err(GraphError::ZeroSigma);
    }
    Ok(sum / T::of_usize(count))
}

/// `w = exp(−d² / (2σ²))`, floored at the smallest positive normal value so
/// that retained edges keep a positive weight.
pub fn gaussian_weights<T: Scalar>(distances: &NeighborLists<T>, sigma: T) -> Result<NeighborLists<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(GraphError::InvalidSigma(sigma.as_f64()));
    }
    let two_s2 = T::of(2.0) * sigma * sigma;
    let lists = distances
        .lists
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(j, d)| (j, (-(d * d) / two_s2).exp().max(T::min_positive_value())))
                .collect()
        })
        .collect();
    Ok(NeighborLists { lists })
}

pub fn binary_weights<T: Scalar>(distances: &NeighborLists<T>) -> NeighborLists<T> {
    NeighborLists {
        lists: distances
            .lists
            .iter()
            .map(|row| row.iter().map(|&(j, _)| (j, T::one())).collect())
            .collect(),
    }
}

/// Turns directed weighted neighbors into an undirected [`SparseGraph`].
///
/// `Union` keeps an edge present in either direction, `Intersection` only
/// those present in both. When both directions exist their weights are
/// averaged. Any node left without edges is an error.
pub fn symmetrize<T: Scalar>(neighbors: &NeighborLists<T>, mode: SymmetrizeMode) -> Result<SparseGraph<T>> {
    let n = neighbors.n();
    // (low, high, weight, direction bit)
    let mut entries: Vec<(usize, usize, T, u8)> = Vec::new();
    for (i, row) in neighbors.lists.iter().enumerate() {
        for &(j, w) in row {
            if i == j {
                continue;
            }
            let bit = if i < j { 1 } else { 2 };
            entries.push((i.min(j), i.max(j), w, bit));
        }
    }
    entries.sort_by_key(|a| (a.0, a.1, a.3));
    let mut pairs = Vec::with_capacity(entries.len());
    let mut p = 0;
    while p < entries.len() {
        let (a, b) = (entries[p].0, entries[p].1);
        let mut q = p;
        let mut mask = 0u8;
        while q < entries.len() && entries[q].0 == a && entries[q].1 == b {
            mask |= entries[q].3;
            q += 1;
        }
        let keep = match mode {
            SymmetrizeMode::Union => true,
            SymmetrizeMode::Intersection => mask == 3,
        };
        if keep {
            pairs.extend(entries[p..q].iter().map(|e| (e.0, e.1, e.2)));
        }
        p = q;
    }
    let g = SparseGraph::from_pair_means(n, pairs);
    g.ensure_no_isolated()?;
    Ok(g)
}

/// Builds the graph described by `spec` from features, or passes through the
/// dataset's native graph.
pub fn build_graph<T: Scalar>(
    features: Option<ArrayView2<'_, T>>,
    native: Option<&SparseGraph<T>>,
    spec: &GraphSpec,
) -> Result<SparseGraph<T>> {
    let distances = match spec.builder {
        Builder::Native => {
            let g = native.ok_or(GraphError::MissingNativeGraph)?;
            g.ensure_no_isolated()?;
            return Ok(g.clone());
        }
        Builder::Knn => {
            let x = features.ok_or(GraphError::MissingFeatures("knn"))?;
            knn_graph(x, spec.k, spec.metric)?
        }
        Builder::Epsilon => {
            let x = features.ok_or(GraphError::MissingFeatures("epsilon"))?;
            let eps = spec.eps.filter(|e| *e > 0.0).ok_or(GraphError::MissingEps)?;
            epsilon_neighbors(x, T::of(eps), spec.metric)?
        }
    };
    let weighted = match spec.weighting {
        Weighting::Binary => binary_weights(&distances),
        Weighting::Gaussian => {
            let sigma = match spec.sigma {
                Sigma::Auto => auto_sigma(&distances)?,
                Sigma::Fixed(s) => T::of(s),
            };
            gaussian_weights(&distances, sigma)?
        }
    };
    symmetrize(&weighted, spec.symmetrize)
}
