mod common;

use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use semisup_core::graph::{
    build_graph, knn_graph, load_graph, save_graph, symmetrize, GraphSpec, Metric, Sigma, SymmetrizeMode, Weighting,
};
use semisup_core::Graph;

fn points(seed: u64, n: usize, d: usize) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_fn((n, d), |_| r.random_range(-3.0..3.0))
}

/// All-pairs reference: distances sorted ascending, ties toward the lower
/// index, self excluded.
fn brute_force(x: &Array2<f64>, k: usize, metric: Metric) -> Vec<Vec<(usize, f64)>> {
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let (a, b) = (x.row(i), x.row(j));
                    let d = match metric {
                        Metric::Euclidean => a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
                        Metric::Cosine => {
                            let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
                            let na = a.dot(&a).sqrt();
                            let nb = b.dot(&b).sqrt();
                            (1.0 - dot / (na * nb)).max(0.0)
                        }
                    };
                    (j, d)
                })
                .collect();
            row.sort_by(|p, q| p.1.partial_cmp(&q.1).unwrap().then(p.0.cmp(&q.0)));
            row.truncate(k);
            row
        })
        .collect()
}

fn spec(k: usize, weighting: Weighting, symmetrize: SymmetrizeMode) -> GraphSpec {
    GraphSpec {
        k,
        weighting,
        symmetrize,
        ..GraphSpec::default()
    }
}

fn is_symmetric(g: &Graph) -> bool {
    (0..g.n()).all(|i| {
        let (cols, ws) = g.neighbors(i);
        cols.iter()
            .zip(ws)
            .all(|(&j, &w)| j != i && w > 0.0 && g.weight(j, i) == w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn knn_matches_brute_force(seed in any::<u64>(), n in 2usize..=200, d in 1usize..=5, cosine in any::<bool>()) {
        let x = points(seed, n, d);
        let k = 1 + (seed as usize % (n - 1)).min(15);
        let metric = if cosine { Metric::Cosine } else { Metric::Euclidean };
        let lists = knn_graph(x.view(), k, metric).unwrap();
        prop_assert_eq!(lists.lists, brute_force(&x, k, metric));
    }

    #[test]
    fn built_graphs_are_symmetric(seed in any::<u64>(), n in 3usize..=80, k in 1usize..=8, binary in any::<bool>(), union in any::<bool>()) {
        let k = k.min(n - 1);
        let x = points(seed, n, 2);
        let weighting = if binary { Weighting::Binary } else { Weighting::Gaussian };
        let mode = if union { SymmetrizeMode::Union } else { SymmetrizeMode::Intersection };
        // Intersection can legitimately isolate a node; that is an error, not
        // an asymmetric graph.
        if let Ok(g) = build_graph(Some(x.view()), None, &spec(k, weighting, mode)) {
            prop_assert!(is_symmetric(&g));
            prop_assert!(g.is_symmetric());
        } else {
            prop_assert!(!union);
        }
    }

    #[test]
    fn union_contains_intersection(seed in any::<u64>(), n in 3usize..=60, k in 1usize..=6) {
        let k = k.min(n - 1);
        let x = points(seed, n, 3);
        let lists = knn_graph(x.view(), k, Metric::Euclidean).unwrap();
        let union = symmetrize(&lists, SymmetrizeMode::Union).unwrap();
        if let Ok(inter) = symmetrize(&lists, SymmetrizeMode::Intersection) {
            for i in 0..n {
                for &j in inter.neighbors(i).0 {
                    prop_assert!(union.weight(i, j) > 0.0);
                }
            }
            prop_assert!(inter.nnz() <= union.nnz());
        }
    }

    #[test]
    fn building_is_permutation_equivariant(seed in any::<u64>(), n in 3usize..=60, k in 1usize..=6) {
        let k = k.min(n - 1);
        let x = points(seed, n, 2);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed ^ 1));
        let mut y = x.clone();
        for (i, &p) in perm.iter().enumerate() {
            y.row_mut(p).assign(&x.row(i));
        }
        // A fixed sigma keeps the weights free of order-dependent sums.
        let s = GraphSpec { sigma: Sigma::Fixed(1.0), ..spec(k, Weighting::Gaussian, SymmetrizeMode::Union) };
        let g = build_graph(Some(x.view()), None, &s).unwrap();
        let h = build_graph(Some(y.view()), None, &s).unwrap();
        prop_assert_eq!(g.permuted(&perm), h);
    }
}

#[test]
fn cache_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(2024);
    for case in 0..100 {
        let n = r.random_range(1..=60);
        let g = if n == 1 {
            Graph::from_undirected_edges(1, Vec::<(usize, usize, f64)>::new()).unwrap()
        } else {
            let p = r.random_range(0.0..0.4);
            random_connected_graph(&mut r, n, p)
        };
        let path = dir.path().join(format!("{case}.bin"));
        save_graph(&g, &path).unwrap();
        let back: Graph = load_graph(&path).unwrap();
        assert_eq!(back.row_offsets(), g.row_offsets(), "case {case}");
        assert_eq!(back.col_indices(), g.col_indices(), "case {case}");
        let bits = |h: &Graph| h.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&g), "case {case}");
    }
}

#[test]
fn corrupted_cache_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_connected_graph(&mut rng(5), 12, 0.3);
    let path = dir.path().join("g.bin");
    save_graph(&g, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], b"MSSCGRPH");
    for cut in [0, 7, 8, bytes.len() / 2, bytes.len() - 1] {
        std::fs::write(&path, &bytes[..cut]).unwrap();
        assert!(load_graph::<f64>(&path).is_err(), "truncated at {cut}");
    }
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    std::fs::write(&path, &bad).unwrap();
    assert!(load_graph::<f64>(&path).is_err());
}
