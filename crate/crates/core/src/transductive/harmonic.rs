use ndarray::Array2;
use rayon::prelude::*;

use super::{check_inputs, max_abs_diff, IterParams, LabelMatrix, PropagationError, PropagationResult, Result};
use crate::graph::SparseGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceParams {
    pub iter: IterParams,
    pub class_mass_normalization: bool,
}

impl Default for LaplaceParams {
    fn default() -> Self {
        Self {
            iter: IterParams {
                tol: 1e-8,
                max_iter: 1000,
            },
            class_mass_normalization: false,
        }
    }
}

/// The unlabeled block `L_uu = D_uu − W_uu` in local numbering.
struct Block<'a, T> {
    g: &'a SparseGraph<T>,
    nodes: Vec<usize>,
    /// Local position of each node, `usize::MAX` for labeled nodes.
    local: Vec<usize>,
    degree: Vec<T>,
}

impl<'a, T: Scalar> Block<'a, T> {
    fn new(g: &'a SparseGraph<T>, labels: &LabelMatrix<T>) -> Self {
        let nodes = labels.unlabeled();
        let mut local = vec![usize::MAX; g.n()];
        for (p, &i) in nodes.iter().enumerate() {
            local[i] = p;
        }
        let deg = g.degree_vector();
        let degree = nodes.iter().map(|&i| deg[i]).collect();
        Self {
            g,
            nodes,
            local,
            degree,
        }
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        for (p, &i) in self.nodes.iter().enumerate() {
            let (cols, ws) = self.g.neighbors(i);
            let mut acc = self.degree[p] * x[p];
            for (&j, &w) in cols.iter().zip(ws) {
                let q = self.local[j];
                if q != usize::MAX {
                    acc -= w * x[q];
                }
            }
            out[p] = acc;
        }
    }

    /// `W_ul Y_l`, one vector per class.
    fn rhs(&self, labels: &LabelMatrix<T>, f: &Array2<T>, class: usize) -> Vec<T> {
        self.nodes
            .iter()
            .map(|&i| {
                let (cols, ws) = self.g.neighbors(i);
                cols.iter()
                    .zip(ws)
                    .filter(|(&j, _)| labels.mask()[j])
                    .map(|(&j, &w)| w * f[[j, class]])
                    .sum()
            })
            .collect()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient from `x = 0`. Returns the
/// solution, iterations, and final relative residual `‖b − Ax‖/‖b‖`.
fn conjugate_gradient<T: Scalar>(block: &Block<'_, T>, b: &[T], tol: f64, max_iter: usize) -> (Vec<T>, usize, f64) {
    let m = b.len();
    let mut x = vec![T::zero(); m];
    let b_norm = dot(b, b).sqrt().as_f64();
    if b_norm == 0.0 {
        return (x, 0, 0.0);
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&block.degree).map(|(&v, &d)| v / d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); m];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    let mut it = 0;
    while it < max_iter {
        block.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for q in 0..m {
            x[q] += alpha * p[q];
            r[q] -= alpha * ap[q];
        }
        it += 1;
        rel = dot(&r, &r).sqrt().as_f64() / b_norm;
        if rel <= tol {
            break;
        }
        for q in 0..m {
            z[q] = r[q] / block.degree[q];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for q in 0..m {
            p[q] = z[q] + beta * p[q];
        }
    }
    (x, it, rel)
}

/// Errors when a connected component holds no labeled node; its unlabeled
/// block would be singular.
fn check_components<T: Scalar>(g: &SparseGraph<T>, labels: &LabelMatrix<T>) -> Result<()> {
    let comp = g.connected_components();
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut has_label = vec![false; count];
    for i in labels.labeled() {
        has_label[comp[i]] = true;
    }
    if let Some(c) = has_label.iter().position(|&h| !h) {
        let nodes = (0..g.n()).filter(|&i| comp[i] == c).collect();
        return Err(PropagationError::UnlabeledComponent { nodes });
    }
    Ok(())
}

/// Harmonic extension of the labels, per class, with labeled rows fixed.
fn harmonic<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    tol: f64,
    max_iter: usize,
) -> (Array2<T>, usize, f64) {
    let block = Block::new(g, labels);
    let mut f = labels.y().clone();
    if block.nodes.is_empty() {
        return (f, 0, 0.0);
    }
    let solutions: Vec<(Vec<T>, usize, f64)> = (0..labels.k())
        .into_par_iter()
        .map(|c| conjugate_gradient(&block, &block.rhs(labels, &f, c), tol, max_iter))
        .collect();
    let (mut iterations, mut residual) = (0, 0.0f64);
    for (c, (x, it, rel)) in solutions.into_iter().enumerate() {
        for (p, &i) in block.nodes.iter().enumerate() {
            f[[i, c]] = x[p];
        }
        iterations = iterations.max(it);
        residual = residual.max(rel);
    }
    (f, iterations, residual)
}

/// Harmonic solution: labeled rows one-hot, unlabeled rows solve
/// `(D_uu − W_uu) F_u = W_ul Y_l` to relative residual `tol`. With
/// `class_mass_normalization` each unlabeled column is rescaled so its mass
/// is proportional to the labeled class frequency.
pub fn laplace_learning<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &LaplaceParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    check_components(g, labels)?;
    let (mut f, iterations, residual) = harmonic(g, labels, p.iter.tol, p.iter.max_iter);
    if p.class_mass_normalization {
        let counts = labels.class_counts();
        let total: usize = counts.iter().sum();
        let unl = labels.unlabeled();
        for c in 0..labels.k() {
            let mass: T = unl.iter().map(|&i| f[[i, c]]).sum();
            if mass > T::zero() {
                let scale = T::of(counts[c] as f64 / total as f64) / mass;
                unl.iter().for_each(|&i| f[[i, c]] *= scale);
            }
        }
    }
    Ok(PropagationResult::from_soft(
        f,
        iterations,
        residual,
        residual <= p.iter.tol,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PLaplaceParams {
    pub p: f64,
    pub outer: usize,
    pub eps: f64,
    pub iter: IterParams,
}

impl Default for PLaplaceParams {
    fn default() -> Self {
        Self {
            p: 3.0,
            outer: 50,
            eps: 1e-8,
            iter: IterParams::default(),
        }
    }
}

/// Tolerance of the inner harmonic solves.
const INNER_TOL: f64 = 1e-8;

/// Iteratively reweighted harmonic solves with
/// `w̃_ij = w_ij (‖u_i − u_j‖² + eps)^((p−2)/2)`, starting from the Laplace
/// solution. Stops when the max-norm change of `u` falls below `tol`.
pub fn p_laplace<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &PLaplaceParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    check_components(g, labels)?;
    if !(p.p >= 2.0) || !(p.eps > 0.0) {
        return Err(PropagationError::InvalidParam(format!(
            "p = {} must be >= 2 and eps > 0",
            p.p
        )));
    }
    if p.outer > p.iter.max_iter {
        return Err(PropagationError::InvalidParam(format!(
            "outer = {} exceeds max_iter = {}",
            p.outer, p.iter.max_iter
        )));
    }
    let inner_tol = INNER_TOL.min(p.iter.tol);
    let (mut u, _, _) = harmonic(g, labels, inner_tol, p.iter.max_iter);
    let exponent = T::of((p.p - 2.0) / 2.0);
    let eps = T::of(p.eps);
    let mut change = 0.0;
    let mut iterations = 0;
    let mut converged = p.outer == 0;
    while iterations < p.outer {
        let reweighted = g.reweighted(|i, j, w| {
            let d2: T = u
                .row(i)
                .iter()
                .zip(u.row(j).iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            (w * (d2 + eps).powf(exponent)).max(T::min_positive_value())
        });
        let (next, _, _) = harmonic(&reweighted, labels, inner_tol, p.iter.max_iter);
        change = max_abs_diff(&next, &u);
        u = next;
        iterations += 1;
        if change < p.iter.tol {
            converged = true;
            break;
        }
    }
    Ok(PropagationResult::from_soft(u, iterations, change, converged))
}
