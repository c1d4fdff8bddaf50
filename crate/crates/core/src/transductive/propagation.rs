use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::{check_inputs, max_abs_diff, LabelMatrix, PropagationError, PropagationResult, Result};
use crate::graph::SparseGraph;
use crate::scalar::Scalar;

/// Stopping controls shared by the iterative methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterParams {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

/// `F ← D⁻¹W F` with labeled rows clamped after every step, from `F⁰ = Y`.
/// Stops when the max-norm change falls below `tol`.
pub fn label_propagation<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &IterParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    let transition = g.transition_row_stochastic()?;
    let mut f = labels.y().clone();
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < p.max_iter {
        let mut next = transition.mul_dense(&f);
        labels.clamp(&mut next);
        change = max_abs_diff(&next, &f);
        f = next;
        iterations += 1;
        if change < p.tol {
            break;
        }
    }
    Ok(PropagationResult::from_soft(f, iterations, change, change < p.tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingParams {
    pub alpha: f64,
    pub iter: IterParams,
}

impl Default for SpreadingParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            iter: IterParams::default(),
        }
    }
}

/// Largest column 2-norm of `a − b`.
fn max_column_norm<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> f64 {
    (a - b)
        .axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `F ← αSF + (1−α)Y` with `S = D^-1/2 W D^-1/2`, from `F⁰ = Y`.
///
/// `S` has spectral norm at most one, so the step is an α-contraction per
/// column in the 2-norm and `‖F_t − F*‖ ≤ α/(1−α)·‖F_t − F_{t−1}‖`. The loop
/// stops once that bound is below `tol`; the reported residual is
/// `‖F − αSF − (1−α)Y‖_max` at the returned `F`.
pub fn label_spreading<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &SpreadingParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(PropagationError::InvalidParam(format!(
            "alpha = {} outside (0, 1)",
            p.alpha
        )));
    }
    let s = g.normalized_adjacency()?;
    let alpha = T::of(p.alpha);
    let base = labels.y().mapv(|v| v * (T::one() - alpha));
    let step = |f: &Array2<T>| {
        let mut next = s.mul_dense(f);
        next.zip_mut_with(&base, |a, &b| *a = alpha * *a + b);
        next
    };
    let ratio = p.alpha / (1.0 - p.alpha);
    let mut f = labels.y().clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < p.iter.max_iter {
        let next = step(&f);
        let bound = ratio * max_column_norm(&next, &f);
        f = next;
        iterations += 1;
        if bound < p.iter.tol {
            converged = true;
            break;
        }
    }
    let residual = max_abs_diff(&step(&f), &f);
    Ok(PropagationResult::from_soft(f, iterations, residual, converged))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LazyWalkParams {
    pub gamma: f64,
    pub steps: usize,
    pub iter: IterParams,
}

impl Default for LazyWalkParams {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            steps: 50,
            iter: IterParams::default(),
        }
    }
}

/// Per-class walk distributions `q_c ← q_c((1−γ)I + γD⁻¹W)`, each started
/// uniform over the nodes labeled `c`, run for exactly `steps` steps. Soft
/// scores are `q_c[i]` normalized over classes. The residual is the
/// max-norm change of the last step.
pub fn lazy_random_walk<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &LazyWalkParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    if !(p.gamma > 0.0 && p.gamma <= 1.0) {
        return Err(PropagationError::InvalidParam(format!(
            "gamma = {} outside (0, 1]",
            p.gamma
        )));
    }
    if p.steps > p.iter.max_iter {
        return Err(PropagationError::InvalidParam(format!(
            "steps = {} exceeds max_iter = {}",
            p.steps, p.iter.max_iter
        )));
    }
    let (n, k) = (labels.n(), labels.k());
    let counts = labels.class_counts();
    let mut q = Array2::<T>::zeros((n, k));
    for i in labels.labeled() {
        let c = labels.class_of(i).expect("labeled");
        q[[i, c]] = T::one() / T::of_usize(counts[c]);
    }
    let inv_deg: Vec<T> = g.degree_vector().iter().map(|&d| T::one() / d).collect();
    let gamma = T::of(p.gamma);
    let stay = T::one() - gamma;
    let mut residual = 0.0;
    for _ in 0..p.steps {
        let mut scaled = q.clone();
        for (mut row, &s) in scaled.rows_mut().into_iter().zip(&inv_deg) {
            row.mapv_inplace(|v| v * s);
        }
        // W is symmetric, so (q P)ᵀ = W (D⁻¹ q).
        let mut next = g.adjacency().mul_dense(&scaled);
        next.zip_mut_with(&q, |a, &b| *a = gamma * *a + stay * b);
        residual = max_abs_diff(&next, &q);
        q = next;
    }
    let mut soft = q;
    let mut unreachable = Vec::new();
    for (i, mut row) in soft.rows_mut().into_iter().enumerate() {
        let s: T = row.iter().copied().sum();
        if s > T::zero() {
            row.mapv_inplace(|v| v / s);
        } else {
            row.fill(T::zero());
            unreachable.push(i);
        }
    }
    let mut r = PropagationResult::from_soft(soft, p.steps, residual, residual < p.iter.tol);
    if !unreachable.is_empty() && labels.unlabeled().iter().any(|u| unreachable.contains(u)) {
        r.diagnostics.push(format!(
            "{} nodes carry no walk mass after {} steps and tie at zero: {:?}",
            unreachable.len(),
            p.steps,
            &unreachable[..unreachable.len().min(20)]
        ));
    }
    Ok(r)
}

/// Largest node count accepted by [`dynamic_label_propagation`].
pub const DLP_MAX_NODES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlpParams {
    pub alpha: f64,
    pub knn_k: usize,
    pub rounds: usize,
    pub iter: IterParams,
}

impl Default for DlpParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            knn_k: 5,
            rounds: 20,
            iter: IterParams::default(),
        }
    }
}

/// Row-stochastic transition over each node's `k` heaviest edges (ties to
/// the lower neighbor index), as sparse rows.
fn sparsified_transition<T: Scalar>(g: &SparseGraph<T>, k: usize) -> Vec<Vec<(usize, T)>> {
    (0..g.n())
        .map(|i| {
            let (cols, ws) = g.neighbors(i);
            let mut row: Vec<(usize, T)> = cols.iter().copied().zip(ws.iter().copied()).collect();
            row.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
            row.truncate(k);
            row.sort_by_key(|e| e.0);
            let s: T = row.iter().map(|e| e.1).sum();
            row.into_iter().map(|(j, w)| (j, w / s)).collect()
        })
        .collect()
}

/// Dense dynamic propagation: `Y_{t+1} = T_t Y_t` with labeled rows
/// clamped, then `T_{t+1} = P_K T_t P_Kᵀ + α Y_t Y_tᵀ` renormalized to be
/// row-stochastic, from `T_0 = D⁻¹W`. A row of `T_{t+1}` with zero mass
/// keeps its previous value. Runs exactly `rounds` rounds; the residual is
/// the max-norm change of `Y` in the last round.
pub fn dynamic_label_propagation<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &DlpParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    let n = g.n();
    if n > DLP_MAX_NODES {
        return Err(PropagationError::TooLarge {
            n,
            limit: DLP_MAX_NODES,
        });
    }
    if p.rounds > p.iter.max_iter {
        return Err(PropagationError::InvalidParam(format!(
            "T = {} exceeds max_iter = {}",
            p.rounds, p.iter.max_iter
        )));
    }
    if p.knn_k == 0 || p.alpha < 0.0 {
        return Err(PropagationError::InvalidParam(
            "knn_k must be >= 1 and alpha >= 0".into(),
        ));
    }
    let mut t = g.transition_row_stochastic()?.to_dense();
    let pk = sparsified_transition(g, p.knn_k);
    let alpha = T::of(p.alpha);
    let mut y = labels.y().clone();
    let mut residual = 0.0;
    for round in 0..p.rounds {
        let mut next = t.dot(&y);
        labels.clamp(&mut next);
        residual = max_abs_diff(&next, &y);
        if round + 1 < p.rounds {
            // A = P_K T, then B = A P_Kᵀ with B[i][j] = Σ_l A[i][l] P_K[j][l].
            let a_rows: Vec<Vec<T>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![T::zero(); n];
                    for &(l, w) in &pk[i] {
                        for (dst, &src) in acc.iter_mut().zip(t.row(l).iter()) {
                            *dst += w * src;
                        }
                    }
                    acc
                })
                .collect();
            let new_rows: Vec<Vec<T>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let a = &a_rows[i];
                    let yi = y.row(i);
                    let mut row: Vec<T> = (0..n)
                        .map(|j| {
                            let smooth: T = pk[j].iter().map(|&(l, w)| a[l] * w).sum();
                            let sim: T = yi.iter().zip(y.row(j).iter()).map(|(&u, &v)| u * v).sum();
                            smooth + alpha * sim
                        })
                        .collect();
                    let s: T = row.iter().copied().sum();
                    if s > T::zero() {
                        row.iter_mut().for_each(|v| *v /= s);
                        row
                    } else {
                        t.row(i).to_vec()
                    }
                })
                .collect();
            t = Array2::from_shape_vec((n, n), new_rows.into_iter().flatten().collect()).expect("n×n");
        }
        y = next;
    }
    Ok(PropagationResult::from_soft(
        y,
        p.rounds,
        residual,
        residual < p.iter.tol,
    ))
}
