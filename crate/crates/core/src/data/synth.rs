use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DataError, Dataset, Result};
use crate::graph::SparseGraph;
use crate::rng::stream;
use crate::scalar::Scalar;

fn class_names(k: usize) -> Vec<String> {
    (0..k).map(|c| c.to_string()).collect()
}

/// Two interleaved half circles of radius 1, `n / 2` points each.
///
/// Moon 0 is `(cos t, sin t)`; moon 1 is `(1 − cos t, 0.5 − sin t)`, with
/// `t` evenly spaced over `[0, π]`. Isotropic Gaussian noise of standard
/// deviation `noise_std` is added to every coordinate.
pub fn gen_two_moons<T: Scalar>(n: usize, noise_std: f64, seed: u64) -> Result<Dataset<T>> {
    check_two_moons(n, noise_std)?;
    let half = n / 2;
    let mut rng = stream(seed, "two_moons");
    let mut x = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for moon in 0..2 {
        for i in 0..half {
            let t = if half == 1 {
                0.0
            } else {
                PI * i as f64 / (half - 1) as f64
            };
            let (px, py) = if moon == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            let r = moon * half + i;
            let nx: f64 = StandardNormal.sample(&mut rng);
            let ny: f64 = StandardNormal.sample(&mut rng);
            x[[r, 0]] = T::of(px + noise_std * nx);
            x[[r, 1]] = T::of(py + noise_std * ny);
            labels.push(moon);
        }
    }
    Dataset::new(Some(x), labels, class_names(2), None, String::new())
}

/// Isotropic Gaussian blobs, one per center. Class `c` receives
/// `n / k` points, plus one for the first `n % k` classes.
pub fn gen_blobs<T: Scalar>(n: usize, k: usize, centers: &[Vec<f64>], std: f64, seed: u64) -> Result<Dataset<T>> {
    check_blobs(n, k, centers, std)?;
    let d = centers[0].len();
    let mut rng = stream(seed, "blobs");
    let mut x = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut r = 0;
    for (c, center) in centers.iter().enumerate() {
        let count = n / k + usize::from(c < n % k);
        for _ in 0..count {
            for (j, &m) in center.iter().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[r, j]] = T::of(m + std * z);
            }
            labels.push(c);
            r += 1;
        }
    }
    Dataset::new(Some(x), labels, class_names(k), None, String::new())
}

/// Stochastic block model: nodes are numbered block by block and every pair
/// `i < j` is joined independently with probability `p_in` (same block) or
/// `p_out`. Unit weights; labels are block ids; no features.
pub fn gen_sbm<T: Scalar>(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Dataset<T>> {
    check_sbm(block_sizes, p_in, p_out)?;
    let labels: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect();
    let n = labels.len();
    let mut rng = stream(seed, "sbm");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            let u: f64 = rng.random();
            if u < p {
                edges.push((i, j, T::one()));
            }
        }
    }
    let g = SparseGraph::from_undirected_edges(n, edges).map_err(|e| DataError::Generator(e.to_string()))?;
    Dataset::new(None, labels, class_names(block_sizes.len()), Some(g), String::new())
}

pub(crate) fn check_two_moons(n: usize, noise_std: f64) -> Result<()> {
    if !n.is_multiple_of(2) || n == 0 {
        return Err(DataError::Generator(format!(
            "two_moons needs a positive even n, got {n}"
        )));
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(DataError::Generator(format!("noise_std must be >= 0, got {noise_std}")));
    }
    Ok(())
}

pub(crate) fn check_blobs(n: usize, k: usize, centers: &[Vec<f64>], std: f64) -> Result<()> {
    if k != centers.len() {
        return Err(DataError::Generator(format!(
            "k = {k} but {} centers given",
            centers.len()
        )));
    }
    if k < 2 {
        return Err(DataError::Generator("blobs need at least 2 centers".into()));
    }
    if n < k {
        return Err(DataError::Generator(format!("n = {n} leaves some blob empty")));
    }
    let d = centers.first().map_or(0, Vec::len);
    if d == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(DataError::Generator("centers must share a positive dimension".into()));
    }
    if !(std >= 0.0) || !std.is_finite() {
        return Err(DataError::Generator(format!("std must be >= 0, got {std}")));
    }
    Ok(())
}

pub(crate) fn check_sbm(block_sizes: &[usize], p_in: f64, p_out: f64) -> Result<()> {
    if block_sizes.contains(&0) {
        return Err(DataError::Generator("empty block".into()));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(DataError::Generator(format!("{name} = {p} outside [0, 1]")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_moons_lie_on_arcs() {
        let ds: Dataset<f64> = gen_two_moons(4, 0.0, 3).unwrap();
        let x = ds.features().unwrap();
        let expected = [[1.0, 0.0], [-1.0, 0.0], [0.0, 0.5], [2.0, 0.5]];
        for (r, e) in expected.iter().enumerate() {
            assert!((x[[r, 0]] - e[0]).abs() < 1e-12);
            assert!((x[[r, 1]] - e[1]).abs() < 1e-12);
        }
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn moons_deterministic_and_odd_rejected() {
        let a: Dataset<f64> = gen_two_moons(50, 0.1, 9).unwrap();
        let b: Dataset<f64> = gen_two_moons(50, 0.1, 9).unwrap();
        assert_eq!(a.features().unwrap(), b.features().unwrap());
        let c: Dataset<f64> = gen_two_moons(50, 0.1, 10).unwrap();
        assert_ne!(a.features().unwrap(), c.features().unwrap());
        assert!(gen_two_moons::<f64>(5, 0.1, 1).is_err());
    }

    #[test]
    fn moon_centroids_separate_vertically() {
        let ds: Dataset<f64> = gen_two_moons(600, 0.1, 1).unwrap();
        let x = ds.features().unwrap();
        let mean_y = |c| {
            let ys: Vec<f64> = (0..600).filter(|&i| ds.labels()[i] == c).map(|i| x[[i, 1]]).collect();
            ys.iter().sum::<f64>() / ys.len() as f64
        };
        assert!(mean_y(0) - mean_y(1) > 0.5);
    }

    #[test]
    fn zero_std_blobs_sit_on_centers() {
        let centers = vec![vec![0.0, 1.0], vec![5.0, -2.0], vec![3.0, 3.0]];
        let ds: Dataset<f64> = gen_blobs(7, 3, &centers, 0.0, 1).unwrap();
        assert_eq!(ds.class_counts(), vec![3, 2, 2]);
        let x = ds.features().unwrap();
        for i in 0..7 {
            let c = &centers[ds.labels()[i]];
            assert_eq!(x[[i, 0]], c[0]);
            assert_eq!(x[[i, 1]], c[1]);
        }
        assert!(gen_blobs::<f64>(7, 2, &centers, 0.0, 1).is_err());
    }

    #[test]
    fn degenerate_sbm_is_two_triangles() {
        let ds: Dataset<f64> = gen_sbm(&[3, 3], 1.0, 0.0, 5).unwrap();
        let g = ds.native_graph().unwrap();
        assert_eq!(g.nnz(), 12);
        assert_eq!(g.degree_vector(), vec![2.0; 6]);
        assert_eq!(g.connected_components(), vec![0, 0, 0, 1, 1, 1]);
        assert!(gen_sbm::<f64>(&[3, 0], 0.5, 0.5, 1).is_err());
        assert!(gen_sbm::<f64>(&[3, 3], 1.5, 0.5, 1).is_err());
    }

    #[test]
    fn sbm_edge_counts_near_expectation() {
        let ds: Dataset<f64> = gen_sbm(&[50, 50], 0.2, 0.01, 1).unwrap();
        let g = ds.native_graph().unwrap();
        let labels = ds.labels();
        let mut within = [0usize; 2];
        for i in 0..100 {
            for &j in g.neighbors(i).0 {
                if i < j && labels[i] == labels[j] {
                    within[labels[i]] += 1;
                }
            }
        }
        let expected = 0.2 * (50.0 * 49.0 / 2.0);
        for w in within {
            assert!((w as f64 - expected).abs() <= 0.25 * expected, "{w} vs {expected}");
        }
    }
}
