//! Deterministic base learners: exact k-NN, zero-initialized softmax
//! regression, and SAMME over axis-aligned stumps. All accept per-sample
//! weights.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::{LearnerError, Result};
use crate::graph::Metric;
use crate::scalar::{argmax, Scalar};

fn check_fit_inputs<T: Scalar>(x: &ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize) -> Result<()> {
    if x.nrows() == 0 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    if x.nrows() != y.len() || y.len() != w.len() {
        return Err(LearnerError::Shape(format!(
            "{} rows, {} labels, {} weights",
            x.nrows(),
            y.len(),
            w.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= k) {
        return Err(LearnerError::Shape(format!("label {bad} outside [0, {k})")));
    }
    if w.iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return Err(LearnerError::Shape("sample weights must be finite and >= 0".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    pub metric: Metric,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 5,
            metric: Metric::Euclidean,
        }
    }
}

/// Stored training set; prediction is the weighted vote fraction among the
/// `k` nearest training points, distance ties toward the lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel<T> {
    params: KnnParams,
    x: Array2<T>,
    y: Vec<usize>,
    w: Vec<T>,
    n_classes: usize,
}

impl<T: Scalar> KnnModel<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize, params: KnnParams) -> Result<Self> {
        check_fit_inputs(&x, y, w, k)?;
        if params.k == 0 {
            return Err(LearnerError::InvalidParam("knn k must be >= 1".into()));
        }
        Ok(Self {
            params,
            x: x.to_owned(),
            y: y.to_vec(),
            w: w.to_vec(),
            n_classes: k,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn distance(&self, q: ndarray::ArrayView1<'_, T>, j: usize) -> T {
        let r = self.x.row(j);
        match self.params.metric {
            Metric::Euclidean => q
                .iter()
                .zip(r.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt(),
            Metric::Cosine => {
                let dot: T = q.iter().zip(r.iter()).map(|(&a, &b)| a * b).sum();
                let nq = q.iter().map(|&a| a * a).sum::<T>().sqrt();
                let nr = r.iter().map(|&a| a * a).sum::<T>().sqrt();
                if nq == T::zero() || nr == T::zero() {
                    T::one()
                } else {
                    (T::one() - dot / (nq * nr)).max(T::zero())
                }
            }
        }
    }

    /// Indices of the `k` nearest training points to `q`.
    pub(crate) fn neighbors(&self, q: ndarray::ArrayView1<'_, T>, k: usize) -> Vec<(usize, T)> {
        let mut d: Vec<(usize, T)> = (0..self.x.nrows()).map(|j| (j, self.distance(q, j))).collect();
        d.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances").then(a.0.cmp(&b.0)));
        d.truncate(k.min(d.len()));
        d
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let k = self.n_classes;
        let rows: Vec<Vec<T>> = (0..x.nrows())
            .into_par_iter()
            .map(|i| {
                let mut votes = vec![T::zero(); k];
                let nb = self.neighbors(x.row(i), self.params.k);
                for &(j, _) in &nb {
                    votes[self.y[j]] += self.w[j];
                }
                let total: T = votes.iter().copied().sum();
                if total > T::zero() {
                    votes.iter_mut().for_each(|v| *v /= total);
                } else {
                    // All neighbor weights are zero: fall back to unweighted votes.
                    votes.iter_mut().for_each(|v| *v = T::zero());
                    for &(j, _) in &nb {
                        votes[self.y[j]] += T::one();
                    }
                    let m = T::of_usize(nb.len());
                    votes.iter_mut().for_each(|v| *v /= m);
                }
                votes
            })
            .collect();
        rows_to_array(rows, k)
    }
}

fn rows_to_array<T: Scalar>(rows: Vec<Vec<T>>, k: usize) -> Array2<T> {
    let n = rows.len();
    Array2::from_shape_vec((n, k), rows.into_iter().flatten().collect()).expect("k columns per row")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegParams {
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            learning_rate: 0.1,
            epochs: 200,
        }
    }
}

/// Multinomial logistic regression trained by full-batch gradient descent
/// on weighted softmax cross-entropy plus `l2/2 · ‖W‖²` (bias unpenalized),
/// from all-zero parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel<T> {
    weights: Array2<T>,
    bias: Array1<T>,
}

fn softmax_rows<T: Scalar>(logits: &mut Array2<T>) {
    for mut row in logits.rows_mut() {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s: T = row.iter().copied().sum();
        row.mapv_inplace(|v| v / s);
    }
}

impl<T: Scalar> LogRegModel<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize, params: LogRegParams) -> Result<Self> {
        check_fit_inputs(&x, y, w, k)?;
        let (n, d) = x.dim();
        let total: T = w.iter().copied().sum();
        let sw: Vec<T> = if total > T::zero() {
            w.iter().map(|&v| v / total).collect()
        } else {
            vec![T::one() / T::of_usize(n); n]
        };
        let lr = T::of(params.learning_rate);
        let l2 = T::of(params.l2);
        let mut weights = Array2::<T>::zeros((d, k));
        let mut bias = Array1::<T>::zeros(k);
        for _ in 0..params.epochs {
            let mut p = x.dot(&weights) + &bias;
            softmax_rows(&mut p);
            for (i, mut row) in p.rows_mut().into_iter().enumerate() {
                row[y[i]] -= T::one();
                row.mapv_inplace(|v| v * sw[i]);
            }
            let grad_w = x.t().dot(&p) + &weights * l2;
            let grad_b = p.sum_axis(Axis(0));
            weights.scaled_add(-lr, &grad_w);
            bias.scaled_add(-lr, &grad_b);
        }
        Ok(Self { weights, bias })
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let mut p = x.dot(&self.weights) + &self.bias;
        softmax_rows(&mut p);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpBoostParams {
    pub rounds: usize,
}

impl Default for StumpBoostParams {
    fn default() -> Self {
        Self { rounds: 50 }
    }
}

/// `x[feature] <= threshold → left, else right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump<T> {
    pub feature: usize,
    pub threshold: T,
    pub left: usize,
    pub right: usize,
}

impl<T: Scalar> Stump<T> {
    #[inline]
    pub fn predict_row(&self, row: ndarray::ArrayView1<'_, T>) -> usize {
        if row[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

/// Exhaustive search for the stump of minimum weighted error. Candidate
/// thresholds per feature are midpoints between consecutive distinct values
/// plus the maximum value (everything left). Ties go to the lower feature
/// index, then the lower threshold. Returns the stump and its weighted error.
pub fn best_stump<T: Scalar>(x: ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize) -> (Stump<T>, T) {
    let (n, d) = x.dim();
    let mut totals = vec![T::zero(); k];
    for i in 0..n {
        totals[y[i]] += w[i];
    }
    let total: T = totals.iter().copied().sum();
    let mut best: Option<(Stump<T>, T)> = None;
    let mut left = vec![T::zero(); k];
    let mut order: Vec<usize> = (0..n).collect();
    for f in 0..d {
        order.sort_by(|&a, &b| x[[a, f]].partial_cmp(&x[[b, f]]).expect("finite").then(a.cmp(&b)));
        left.iter_mut().for_each(|v| *v = T::zero());
        for p in 0..n {
            let i = order[p];
            left[y[i]] += w[i];
            let v = x[[i, f]];
            let threshold = if p + 1 < n {
                let next = x[[order[p + 1], f]];
                if next == v {
                    continue;
                }
                (v + next) / T::of(2.0)
            } else {
                v
            };
            let right: Vec<T> = totals.iter().zip(&left).map(|(&t, &l)| t - l).collect();
            let (lc, rc) = (argmax(&left), argmax(&right));
            let err = total - left[lc] - right[rc];
            let better = match &best {
                None => true,
                Some((_, e)) => err < *e,
            };
            if better {
                best = Some((
                    Stump {
                        feature: f,
                        threshold,
                        left: lc,
                        right: rc,
                    },
                    err,
                ));
            }
        }
    }
    let (stump, err) = best.expect("at least one feature and sample");
    (stump, err.max(T::zero()))
}

/// AdaBoost-SAMME ensemble of stumps.
#[derive(Debug, Clone, PartialEq)]
pub struct StumpBoostModel<T> {
    stumps: Vec<(T, Stump<T>)>,
    n_classes: usize,
}

impl<T: Scalar> StumpBoostModel<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], w: &[T], k: usize, params: StumpBoostParams) -> Result<Self> {
        check_fit_inputs(&x, y, w, k)?;
        if x.ncols() == 0 {
            return Err(LearnerError::Shape("stump_boost needs at least one feature".into()));
        }
        let n = x.nrows();
        let total: T = w.iter().copied().sum();
        let mut sw: Vec<T> = if total > T::zero() {
            w.iter().map(|&v| v / total).collect()
        } else {
            vec![T::one() / T::of_usize(n); n]
        };
        let chance = T::one() - T::one() / T::of_usize(k);
        let floor = T::of(1e-10);
        let extra = T::of_usize(k - 1).ln();
        let mut stumps = Vec::new();
        for round in 0..params.rounds.max(1) {
            let (stump, err) = best_stump(x, y, &sw, k);
            let sum: T = sw.iter().copied().sum();
            let err = err / sum;
            if err >= chance {
                if round == 0 {
                    stumps.push((T::one(), stump));
                }
                break;
            }
            let e = err.max(floor);
            let alpha = ((T::one() - e) / e).ln() + extra;
            stumps.push((alpha, stump));
            if err == T::zero() {
                break;
            }
            for i in 0..n {
                if stump.predict_row(x.row(i)) != y[i] {
                    sw[i] *= alpha.exp();
                }
            }
            let s: T = sw.iter().copied().sum();
            sw.iter_mut().for_each(|v| *v /= s);
        }
        Ok(Self { stumps, n_classes: k })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn stumps(&self) -> &[(T, Stump<T>)] {
        &self.stumps
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let k = self.n_classes;
        let total: T = self.stumps.iter().map(|s| s.0).sum();
        let mut out = Array2::zeros((x.nrows(), k));
        for (i, row) in x.rows().into_iter().enumerate() {
            for (alpha, s) in &self.stumps {
                out[[i, s.predict_row(row)]] += *alpha;
            }
            for c in 0..k {
                out[[i, c]] /= total;
            }
        }
        out
    }
}
