//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semisup_core::transductive::LabelMatrix;
use semisup_core::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn fixture(name: &str) -> PathBuf {
    configs_dir().join(name)
}

pub const FIXTURE_CONFIGS: [&str; 4] = [
    "two_moons_ls.yaml",
    "sbm_poisson.yaml",
    "iris_self_training.yaml",
    "blobs_sweep.yaml",
];

/// Connected weighted graph: a random spanning tree plus extra edges with
/// probability `p_extra`. Weights are uniform in [0.1, 2).
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, p_extra: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((i, j, rng.random_range(0.1..2.0)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_extra) {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    Graph::from_undirected_edges(n, edges).unwrap()
}

/// Labels with every class present among the labeled nodes and at least one
/// unlabeled node. Returns `(labels, mask)`.
pub fn random_labeling(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Vec<usize>, Vec<bool>) {
    assert!(n > k);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut labels = vec![0; n];
    let mut mask = vec![false; n];
    let extra = rng.random_range(0..=(n - k - 1) / 3);
    for (pos, &i) in order.iter().take(k + extra).enumerate() {
        labels[i] = if pos < k { pos } else { rng.random_range(0..k) };
        mask[i] = true;
    }
    (labels, mask)
}

pub struct Instance {
    pub graph: Graph,
    pub labels: LabelMatrix<f64>,
    pub k: usize,
}

/// The 100-instance family used by the oracle and conservation checks.
pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(4..=30);
            let k = r.random_range(2..=3);
            let p = r.random_range(0.0..0.3);
            let graph = random_connected_graph(&mut r, n, p);
            let (labels, mask) = random_labeling(&mut r, n, k);
            Instance {
                graph,
                labels: LabelMatrix::new(&labels, &mask, k).unwrap(),
                k,
            }
        })
        .collect()
}

/// Path graph 0 - 1 - ... - (n-1) with unit weights.
pub fn path(n: usize) -> Graph {
    Graph::from_undirected_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
}

/// Node 0 labeled class 0, node n-1 labeled class 1.
pub fn ends(n: usize) -> LabelMatrix<f64> {
    LabelMatrix::from_pairs(n, 2, &[(0, 0), (n - 1, 1)]).unwrap()
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gaussian clusters around `k` random centers in `d` dimensions.
pub fn random_blobs(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize, spread: f64) -> (Array2<f64>, Vec<usize>) {
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = if i < k { i } else { rng.random_range(0..k) };
        for j in 0..d {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            x[[i, j]] = centers[c][j] + spread * z;
        }
        y.push(c);
    }
    (x, y)
}
