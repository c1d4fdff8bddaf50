use ndarray::Array2;

use super::{check_inputs, IterParams, LabelMatrix, PropagationError, PropagationResult, Result};
use crate::graph::{CsrMatrix, LaplacianKind, SparseGraph};
use crate::sampling::apportion;
use crate::scalar::{argmax_rows, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    pub iter: IterParams,
    pub prior_reweighting: bool,
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self {
            iter: IterParams {
                tol: 1e-8,
                max_iter: 2000,
            },
            prior_reweighting: false,
        }
    }
}

/// Sources `b_j = y_j − ȳ` on labeled rows, zero elsewhere. Columns sum to
/// zero.
pub(crate) fn poisson_sources<T: Scalar>(labels: &LabelMatrix<T>) -> Array2<T> {
    let labeled = labels.labeled();
    let m = T::of_usize(labeled.len());
    let counts = labels.class_counts();
    let mean: Vec<T> = counts.iter().map(|&c| T::of_usize(c) / m).collect();
    let mut b = Array2::zeros((labels.n(), labels.k()));
    for &j in &labeled {
        for c in 0..labels.k() {
            b[[j, c]] = labels.y()[[j, c]] - mean[c];
        }
    }
    b
}

fn frobenius<T: Scalar>(a: &Array2<T>) -> f64 {
    a.iter().map(|&v| v.as_f64() * v.as_f64()).sum::<f64>().sqrt()
}

/// Subtracts the degree-weighted mean from each column.
fn recenter<T: Scalar>(u: &mut Array2<T>, degree: &[T], total: T) {
    for mut col in u.columns_mut() {
        let mean = col.iter().zip(degree).map(|(&v, &d)| v * d).sum::<T>() / total;
        col.mapv_inplace(|v| v - mean);
    }
}

/// Rejects graphs on which some component has a nonzero source sum.
fn check_component_sums<T: Scalar>(g: &SparseGraph<T>, b: &Array2<T>) -> Result<()> {
    let comp = g.connected_components();
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    if count <= 1 {
        return Ok(());
    }
    let scale: f64 = b.iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max);
    for c in 0..count {
        let nodes: Vec<usize> = (0..g.n()).filter(|&i| comp[i] == c).collect();
        for col in b.columns() {
            let s: f64 = nodes.iter().map(|&i| col[i].as_f64()).sum();
            if s.abs() > 1e-9 * scale.max(1.0) {
                return Err(PropagationError::ComponentConstraint { component: c, nodes });
            }
        }
    }
    Ok(())
}

struct PoissonState<T> {
    u: Array2<T>,
    b: Array2<T>,
    laplacian: CsrMatrix<T>,
    degree: Vec<T>,
    total_degree: T,
}

impl<T: Scalar> PoissonState<T> {
    fn new(g: &SparseGraph<T>, labels: &LabelMatrix<T>) -> Result<Self> {
        let m = labels.labeled().len();
        if m < labels.k() {
            return Err(PropagationError::TooFewLabeled {
                needed: labels.k(),
                got: m,
            });
        }
        let b = poisson_sources(labels);
        check_component_sums(g, &b)?;
        let degree = g.degree_vector();
        let total_degree = degree.iter().copied().sum();
        Ok(Self {
            u: Array2::zeros(b.raw_dim()),
            b,
            laplacian: g.laplacian(LaplacianKind::Unnormalized)?,
            degree,
            total_degree,
        })
    }

    /// `u ← u + D⁻¹(B − Lu)` with re-centering until
    /// `‖B − Lu‖_F / ‖B‖_F ≤ tol`. Returns iterations and final residual.
    fn solve(&mut self, p: &IterParams) -> (usize, f64) {
        let b_norm = frobenius(&self.b);
        let mut iterations = 0;
        loop {
            let mut r = self.b.clone();
            r -= &self.laplacian.mul_dense(&self.u);
            let rel = frobenius(&r) / b_norm;
            if rel <= p.tol || iterations >= p.max_iter {
                return (iterations, rel);
            }
            for (mut row, &d) in r.rows_mut().into_iter().zip(&self.degree) {
                row.mapv_inplace(|v| v / d);
            }
            self.u += &r;
            recenter(&mut self.u, &self.degree, self.total_degree);
            iterations += 1;
        }
    }
}

/// Solves `L u = B` under the degree-weighted zero-mean constraint by
/// re-centered Jacobi iteration. With `prior_reweighting` column `c` is
/// divided by the labeled frequency of class `c` before the argmax.
pub fn poisson_learning<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &PoissonParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    let mut state = PoissonState::new(g, labels)?;
    let (iterations, residual) = state.solve(&p.iter);
    let mut u = state.u;
    if p.prior_reweighting {
        let counts = labels.class_counts();
        let m: usize = counts.iter().sum();
        for (c, mut col) in u.columns_mut().into_iter().enumerate() {
            let prior = T::of(counts[c] as f64 / m as f64);
            col.mapv_inplace(|v| v / prior);
        }
    }
    Ok(PropagationResult::from_soft(
        u,
        iterations,
        residual,
        residual <= p.iter.tol,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonMboParams {
    pub outer: usize,
    pub inner: usize,
    pub dt: f64,
    pub mu: f64,
    pub iter: IterParams,
}

impl Default for PoissonMboParams {
    fn default() -> Self {
        Self {
            outer: 20,
            inner: 40,
            dt: 0.5,
            mu: 1.0,
            iter: IterParams {
                tol: 1e-8,
                max_iter: 2000,
            },
        }
    }
}

const BALANCE_SWEEPS: usize = 100;

fn assign<T: Scalar>(u: &Array2<T>, offsets: &[T]) -> Vec<usize> {
    u.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] - offsets[c] > row[best] - offsets[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn class_counts(assignment: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    assignment.iter().for_each(|&c| counts[c] += 1);
    counts
}

/// Labels `argmax_c (u_ic − s_c)` with offsets tuned so every class count is
/// within one of `targets`. Offsets are updated one class at a time, each to
/// the midpoint between the `t_c`-th and `(t_c+1)`-th largest margin
/// `u_ic − max_{c'≠c}(u_ic' − s_c')`. `None` when no balanced offsets are
/// found in the sweep budget.
pub(crate) fn balanced_threshold<T: Scalar>(u: &Array2<T>, targets: &[usize]) -> Option<Vec<usize>> {
    let (n, k) = u.dim();
    let mut s = vec![T::zero(); k];
    let within = |a: &[usize]| {
        class_counts(a, k)
            .iter()
            .zip(targets)
            .all(|(&c, &t)| c.abs_diff(t) <= 1)
    };
    for _ in 0..BALANCE_SWEEPS {
        let a = assign(u, &s);
        if within(&a) {
            return Some(a);
        }
        for c in 0..k {
            let mut margins: Vec<T> = u
                .rows()
                .into_iter()
                .map(|row| {
                    let other = (0..k)
                        .filter(|&o| o != c)
                        .map(|o| row[o] - s[o])
                        .fold(T::neg_infinity(), T::max);
                    row[c] - other
                })
                .collect();
            margins.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            let t = targets[c];
            s[c] = if t == 0 {
                margins[0] + T::one()
            } else if t >= n {
                margins[n - 1] - T::one()
            } else {
                (margins[t - 1] + margins[t]) / T::of(2.0)
            };
        }
    }
    let a = assign(u, &s);
    within(&a).then_some(a)
}

/// Poisson learning followed by `outer` rounds of `inner` steps
/// `u ← u − dt·D⁻¹(Lu − μB)` and a prior-balanced threshold to one-hot
/// rows. Priors are the labeled class frequencies. The residual is the
/// fraction of nodes whose label changed in the last round.
pub fn poisson_mbo<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    p: &PoissonMboParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    if p.outer > p.iter.max_iter {
        return Err(PropagationError::InvalidParam(format!(
            "outer = {} exceeds max_iter = {}",
            p.outer, p.iter.max_iter
        )));
    }
    let mut state = PoissonState::new(g, labels)?;
    let (init_iters, init_residual) = state.solve(&p.iter);
    if p.outer == 0 {
        return Ok(PropagationResult::from_soft(
            state.u,
            init_iters,
            init_residual,
            init_residual <= p.iter.tol,
        ));
    }
    let n = g.n();
    let counts = labels.class_counts();
    let m: usize = counts.iter().sum();
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
    let targets = apportion(&priors, n);
    let dt = T::of(p.dt);
    let mu = T::of(p.mu);
    let mut u = state.u;
    let mut hard = argmax_rows(&u);
    let mut diagnostics = Vec::new();
    let mut changed = 0;
    let mut fallback = false;
    for round in 0..p.outer {
        for _ in 0..p.inner {
            let mut step = state.laplacian.mul_dense(&u);
            step.zip_mut_with(&state.b, |a, &b| *a -= mu * b);
            for ((mut row, &d), mut target) in step.rows_mut().into_iter().zip(&state.degree).zip(u.rows_mut()) {
                row.mapv_inplace(|v| v * dt / d);
                target -= &row;
            }
        }
        let next = match balanced_threshold(&u, &targets) {
            Some(a) => a,
            None => {
                if !fallback {
                    diagnostics.push(format!(
                        "round {round}: could not balance class counts; used plain argmax"
                    ));
                }
                fallback = true;
                argmax_rows(&u)
            }
        };
        changed = next.iter().zip(&hard).filter(|(a, b)| a != b).count();
        hard = next;
        u.fill(T::zero());
        for (i, &c) in hard.iter().enumerate() {
            u[[i, c]] = T::one();
        }
    }
    let residual = changed as f64 / n as f64;
    let mut r = PropagationResult::from_soft(u, p.outer, residual, !fallback && residual <= p.iter.tol);
    debug_assert_eq!(r.hard, hard);
    r.diagnostics = diagnostics;
    Ok(r)
}
