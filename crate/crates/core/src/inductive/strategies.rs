use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Classifier, Fitted, LearnerConfig, LearnerError, ModelKind, Result, SslData, Strategy, TrainedModel};
use crate::graph::{auto_sigma, binary_weights, gaussian_weights, knn_graph, Metric};
use crate::rng::stream_indexed;
use crate::scalar::{argmax, Scalar};

fn check_data<T: Scalar>(d: &SslData<'_, T>) -> Result<()> {
    if d.n_labeled() == 0 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    if d.x_labeled.nrows() != d.n_labeled() {
        return Err(LearnerError::Shape(format!(
            "{} labeled rows, {} labels",
            d.x_labeled.nrows(),
            d.n_labeled()
        )));
    }
    if d.x_unlabeled.ncols() != d.x_labeled.ncols() {
        return Err(LearnerError::Shape(format!(
            "labeled data has {} features, unlabeled {}",
            d.x_labeled.ncols(),
            d.x_unlabeled.ncols()
        )));
    }
    if let Some(&c) = d.y_labeled.iter().find(|&&c| c >= d.n_classes) {
        return Err(LearnerError::Shape(format!("label {c} outside [0, {})", d.n_classes)));
    }
    Ok(())
}

fn append_rows<T: Scalar>(a: ArrayView2<'_, T>, src: ArrayView2<'_, T>, rows: &[usize]) -> Array2<T> {
    let extra = src.select(Axis(0), rows);
    concatenate(Axis(0), &[a, extra.view()]).expect("equal column counts")
}

fn renamed<T: Scalar>(model: TrainedModel<T>, spec: String) -> TrainedModel<T> {
    TrainedModel { spec, ..model }
}

/// Iterative pseudo-labeling of points the current model is confident about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTraining {
    pub base: LearnerConfig,
    pub tau: f64,
    pub max_rounds: usize,
}

impl<T: Scalar> Strategy<T> for SelfTraining {
    fn name(&self) -> &str {
        "self_training"
    }

    fn fit(&self, d: &SslData<'_, T>, _seed: u64) -> Result<Fitted<T>> {
        check_data(d)?;
        let k = d.n_classes;
        let tau = T::of(self.tau);
        let mut x_train = d.x_labeled.to_owned();
        let mut y_train = d.y_labeled.to_vec();
        let mut pool: Vec<usize> = (0..d.n_unlabeled()).collect();
        let mut model = self.base.fit_unweighted(x_train.view(), &y_train, k)?;
        let mut sizes = vec![y_train.len()];
        let mut rounds = 0;
        while rounds < self.max_rounds && !pool.is_empty() {
            let proba = model.predict_proba(d.x_unlabeled.select(Axis(0), &pool).view());
            let (mut keep, mut add) = (Vec::new(), Vec::new());
            for (r, &u) in pool.iter().enumerate() {
                let row = proba.row(r).to_vec();
                let c = argmax(&row);
                if row[c] >= tau {
                    add.push(u);
                    y_train.push(c);
                } else {
                    keep.push(u);
                }
            }
            if add.is_empty() {
                break;
            }
            x_train = append_rows(x_train.view(), d.x_unlabeled, &add);
            pool = keep;
            model = self.base.fit_unweighted(x_train.view(), &y_train, k)?;
            rounds += 1;
            sizes.push(y_train.len());
        }
        let spec = format!(
            "self_training(tau={}, max_rounds={}) over {}",
            self.tau, self.max_rounds, self.base
        );
        Ok(Fitted {
            model: renamed(model, spec),
            rounds,
            train_sizes: sizes,
        })
    }

    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, _seed: u64) -> Result<TrainedModel<T>> {
        self.base.fit_unweighted(x, y, k)
    }
}

const BOOTSTRAP_ATTEMPTS: usize = 100;

/// Bootstrap resample of `y` for ensemble member `member`. Attempt `a` draws
/// from the sub-stream `member + 3a`; a resample must contain every class
/// that occurs in `y`.
fn bootstrap_indices(y: &[usize], k: usize, seed: u64, member: usize) -> Result<Vec<usize>> {
    let n = y.len();
    let mut present = vec![false; k];
    y.iter().for_each(|&c| present[c] = true);
    for attempt in 0..BOOTSTRAP_ATTEMPTS {
        let mut rng = stream_indexed(seed, "tri", (member + 3 * attempt) as u64);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut seen = vec![false; k];
        idx.iter().for_each(|&i| seen[y[i]] = true);
        if seen == present {
            return Ok(idx);
        }
    }
    Err(LearnerError::Bootstrap {
        model: member,
        attempts: BOOTSTRAP_ATTEMPTS,
    })
}

fn bootstrap_members<T: Scalar>(
    base: &LearnerConfig,
    x: ArrayView2<'_, T>,
    y: &[usize],
    k: usize,
    seed: u64,
) -> Result<Vec<TrainedModel<T>>> {
    (0..3)
        .into_par_iter()
        .map(|i| {
            let idx = bootstrap_indices(y, k, seed, i)?;
            let yb: Vec<usize> = idx.iter().map(|&j| y[j]).collect();
            base.fit_unweighted(x.select(Axis(0), &idx).view(), &yb, k)
        })
        .collect()
}

/// Majority vote of three models fitted on bootstrap resamples.
pub fn bootstrap_vote<T: Scalar>(
    base: &LearnerConfig,
    x: ArrayView2<'_, T>,
    y: &[usize],
    k: usize,
    seed: u64,
) -> Result<TrainedModel<T>> {
    let members = bootstrap_members(base, x, y, k, seed)?;
    Ok(TrainedModel::new(
        ModelKind::Vote(members),
        format!("bootstrap_vote over {base}"),
        super::training_fingerprint(x, y, &vec![T::one(); y.len()]),
        k,
    ))
}

/// Error of the pair on the labeled points where the pair agrees; 0.5 when
/// it never agrees.
fn pair_error(a: &[usize], b: &[usize], y: &[usize]) -> f64 {
    let (mut agree, mut wrong) = (0usize, 0usize);
    for i in 0..y.len() {
        if a[i] == b[i] {
            agree += 1;
            if a[i] != y[i] {
                wrong += 1;
            }
        }
    }
    if agree == 0 {
        0.5
    } else {
        wrong as f64 / agree as f64
    }
}

/// Three-model co-training where each model is taught by the agreement of
/// the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriTraining {
    pub base: LearnerConfig,
    pub max_rounds: usize,
}

/// One learner's round: pseudo-labeled pool indices, their labels, and the
/// new error estimate.
type TriUpdate = (Vec<usize>, Vec<usize>, f64);

impl<T: Scalar> Strategy<T> for TriTraining {
    fn name(&self) -> &str {
        "tri_training"
    }

    fn fit(&self, d: &SslData<'_, T>, seed: u64) -> Result<Fitted<T>> {
        check_data(d)?;
        let k = d.n_classes;
        let y_l = d.y_labeled;
        let mut models = bootstrap_members(&self.base, d.x_labeled, y_l, k, seed)?;
        let mut sizes_per = [y_l.len(); 3];
        let mut sizes = vec![3 * y_l.len()];
        let mut e_prev = [0.5f64; 3];
        let mut l_prev = [0usize; 3];
        let mut rounds = 0;
        while rounds < self.max_rounds && d.n_unlabeled() > 0 {
            let pred_l: Vec<Vec<usize>> = models.iter().map(|m| m.predict(d.x_labeled)).collect();
            let pred_u: Vec<Vec<usize>> = models.iter().map(|m| m.predict(d.x_unlabeled)).collect();
            let mut updates: [Option<TriUpdate>; 3] = [None, None, None];
            for i in 0..3 {
                let (j, h) = ((i + 1) % 3, (i + 2) % 3);
                let e = pair_error(&pred_l[j], &pred_l[h], y_l);
                if e >= e_prev[i] {
                    continue;
                }
                let mut cand: Vec<usize> = (0..d.n_unlabeled()).filter(|&u| pred_u[j][u] == pred_u[h][u]).collect();
                if l_prev[i] == 0 {
                    l_prev[i] = (e / (e_prev[i] - e) + 1.0).floor() as usize;
                }
                if l_prev[i] >= cand.len() {
                    continue;
                }
                let bound = e_prev[i] * l_prev[i] as f64;
                if e * (cand.len() as f64) < bound {
                    // accept everything
                } else if l_prev[i] as f64 > e / (e_prev[i] - e) {
                    let keep = (bound / e).ceil() as usize - 1;
                    if keep == 0 {
                        continue;
                    }
                    let mut rng = stream_indexed(seed, "tri_subsample", (3 * rounds + i) as u64);
                    cand.shuffle(&mut rng);
                    cand.truncate(keep);
                    cand.sort_unstable();
                } else {
                    continue;
                }
                let labels = cand.iter().map(|&u| pred_u[j][u]).collect();
                updates[i] = Some((cand, labels, e));
            }
            if updates.iter().all(Option::is_none) {
                break;
            }
            let refits: Vec<Option<TrainedModel<T>>> = updates
                .par_iter()
                .map(|u| {
                    u.as_ref()
                        .map(|(cand, labels, _)| {
                            let x = append_rows(d.x_labeled, d.x_unlabeled, cand);
                            let y: Vec<usize> = y_l.iter().chain(labels.iter()).copied().collect();
                            self.base.fit_unweighted(x.view(), &y, k)
                        })
                        .transpose()
                })
                .collect::<Result<_>>()?;
            for (i, m) in refits.into_iter().enumerate() {
                if let (Some(m), Some((cand, _, e))) = (m, &updates[i]) {
                    models[i] = m;
                    e_prev[i] = *e;
                    l_prev[i] = cand.len();
                    sizes_per[i] = y_l.len() + cand.len();
                }
            }
            rounds += 1;
            sizes.push(sizes_per.iter().sum());
        }
        let model = TrainedModel::new(
            ModelKind::Vote(models),
            format!("tri_training(max_rounds={}) over {}", self.max_rounds, self.base),
            super::training_fingerprint(d.x_labeled, y_l, &vec![T::one(); y_l.len()]),
            k,
        );
        Ok(Fitted {
            model,
            rounds,
            train_sizes: sizes,
        })
    }

    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, seed: u64) -> Result<TrainedModel<T>> {
        bootstrap_vote(&self.base, x, y, k, seed)
    }
}

/// Self-training whose candidates must pass a neighborhood cut-edge test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setred {
    pub base: LearnerConfig,
    pub theta: f64,
    pub max_rounds: usize,
    pub edit_k: usize,
    pub per_round: usize,
}

impl Setred {
    /// Indices (into `cand_labels`) of candidates that pass the test.
    /// Rows `0..y_train.len()` of `x` are the training set, the rest the
    /// candidates.
    fn edit<T: Scalar>(&self, x: ArrayView2<'_, T>, y_train: &[usize], cand_labels: &[usize], k: usize) -> Vec<usize> {
        let m = x.nrows();
        let n_train = y_train.len();
        let all: Vec<usize> = (0..cand_labels.len()).collect();
        if m < 2 {
            return all;
        }
        let lists = knn_graph(x, self.edit_k.min(m - 1), Metric::Euclidean).expect("k < m");
        let weighted = match auto_sigma(&lists) {
            Ok(s) => gaussian_weights(&lists, s).expect("positive sigma"),
            Err(_) => binary_weights(&lists),
        };
        let mut counts = vec![0usize; k];
        y_train.iter().for_each(|&c| counts[c] += 1);
        let z = Normal::new(0.0, 1.0)
            .expect("standard normal")
            .inverse_cdf(1.0 - self.theta);
        let label = |j: usize| {
            if j < n_train {
                y_train[j]
            } else {
                cand_labels[j - n_train]
            }
        };
        all.into_iter()
            .filter(|&c| {
                let node = n_train + c;
                let yhat = cand_labels[c];
                let prior = counts[yhat] as f64 / n_train as f64;
                let (mut cut, mut sw, mut sw2) = (0.0, 0.0, 0.0);
                for &(j, w) in &weighted.lists[node] {
                    let w = w.as_f64();
                    sw += w;
                    sw2 += w * w;
                    if label(j) != yhat {
                        cut += w;
                    }
                }
                let mean = sw * (1.0 - prior);
                let sd = (sw2 * prior * (1.0 - prior)).sqrt();
                if sd > 0.0 {
                    cut <= mean + z * sd
                } else {
                    cut <= mean
                }
            })
            .collect()
    }
}

impl<T: Scalar> Strategy<T> for Setred {
    fn name(&self) -> &str {
        "setred"
    }

    fn fit(&self, d: &SslData<'_, T>, _seed: u64) -> Result<Fitted<T>> {
        check_data(d)?;
        let k = d.n_classes;
        let mut x_train = d.x_labeled.to_owned();
        let mut y_train = d.y_labeled.to_vec();
        let mut pool: Vec<usize> = (0..d.n_unlabeled()).collect();
        let mut model = self.base.fit_unweighted(x_train.view(), &y_train, k)?;
        let mut sizes = vec![y_train.len()];
        let mut rounds = 0;
        while rounds < self.max_rounds && !pool.is_empty() {
            let proba = model.predict_proba(d.x_unlabeled.select(Axis(0), &pool).view());
            let mut ranked: Vec<(usize, T, usize)> = pool
                .iter()
                .enumerate()
                .map(|(r, &u)| {
                    let row = proba.row(r).to_vec();
                    let c = argmax(&row);
                    (u, row[c], c)
                })
                .collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
            ranked.truncate(self.per_round);
            let cand: Vec<usize> = ranked.iter().map(|r| r.0).collect();
            let labels: Vec<usize> = ranked.iter().map(|r| r.2).collect();
            let x_all = append_rows(x_train.view(), d.x_unlabeled, &cand);
            let accepted = self.edit(x_all.view(), &y_train, &labels, k);
            if accepted.is_empty() {
                break;
            }
            let add: Vec<usize> = accepted.iter().map(|&c| cand[c]).collect();
            x_train = append_rows(x_train.view(), d.x_unlabeled, &add);
            y_train.extend(accepted.iter().map(|&c| labels[c]));
            pool.retain(|u| !add.contains(u));
            model = self.base.fit_unweighted(x_train.view(), &y_train, k)?;
            rounds += 1;
            sizes.push(y_train.len());
        }
        let spec = format!(
            "setred(theta={}, max_rounds={}, edit_k={}, per_round={}) over {}",
            self.theta, self.max_rounds, self.edit_k, self.per_round, self.base
        );
        Ok(Fitted {
            model: renamed(model, spec),
            rounds,
            train_sizes: sizes,
        })
    }

    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, _seed: u64) -> Result<TrainedModel<T>> {
        self.base.fit_unweighted(x, y, k)
    }
}

/// Lower end of the 95% Wilson score interval for `correct / n`.
pub fn wilson_lower_bound(correct: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.96f64;
    let nf = n as f64;
    let p = correct as f64 / nf;
    let z2 = z * z;
    let center = p + z2 / (2.0 * nf);
    let spread = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - spread) / (1.0 + z2 / nf)).max(0.0)
}

/// Committee weights: Wilson lower bounds of labeled-set accuracy, zeroed
/// when ≤ 0.5.
fn committee_weights<T: Scalar>(models: &[TrainedModel<T>], x: ArrayView2<'_, T>, y: &[usize]) -> Vec<f64> {
    models
        .iter()
        .map(|m| {
            let correct = m.predict(x).iter().zip(y).filter(|(a, b)| a == b).count();
            let w = wilson_lower_bound(correct, y.len());
            if w > 0.5 {
                w
            } else {
                0.0
            }
        })
        .collect()
}

fn committee<T: Scalar>(
    models: Vec<TrainedModel<T>>,
    weights: &[f64],
    spec: String,
    fp: String,
    k: usize,
) -> TrainedModel<T> {
    let members = weights.iter().map(|&w| T::of(w)).zip(models).collect();
    TrainedModel::new(ModelKind::Committee(members), spec, fp, k)
}

fn check_committee(learners: &[LearnerConfig]) -> Result<()> {
    if learners.len() < 3 {
        return Err(LearnerError::TooFewLearners(learners.len()));
    }
    for i in 0..learners.len() {
        for j in i + 1..learners.len() {
            if learners[i] == learners[j] {
                return Err(LearnerError::DuplicateLearners(i, j));
            }
        }
    }
    Ok(())
}

/// Weighted vote of learners fitted independently on the labeled data.
pub fn weighted_committee<T: Scalar>(
    learners: &[LearnerConfig],
    x: ArrayView2<'_, T>,
    y: &[usize],
    k: usize,
) -> Result<TrainedModel<T>> {
    check_committee(learners)?;
    let models: Vec<TrainedModel<T>> = learners
        .par_iter()
        .map(|l| l.fit_unweighted(x, y, k))
        .collect::<Result<_>>()?;
    let weights = committee_weights(&models, x, y);
    let names: Vec<String> = learners.iter().map(|l| l.to_string()).collect();
    Ok(committee(
        models,
        &weights,
        format!("weighted_committee[{}]", names.join(", ")),
        super::training_fingerprint(x, y, &vec![T::one(); y.len()]),
        k,
    ))
}

/// Committee co-learning: each learner is taught the weighted majority label
/// wherever the majority outweighs the learner's own side.
#[derive(Debug, Clone, PartialEq)]
pub struct Democratic {
    learners: Vec<LearnerConfig>,
    pub max_rounds: usize,
}

impl Democratic {
    pub fn new(learners: Vec<LearnerConfig>, max_rounds: usize) -> Result<Self> {
        check_committee(&learners)?;
        Ok(Self { learners, max_rounds })
    }

    pub fn learners(&self) -> &[LearnerConfig] {
        &self.learners
    }
}

impl<T: Scalar> Strategy<T> for Democratic {
    fn name(&self) -> &str {
        "democratic"
    }

    fn fit(&self, d: &SslData<'_, T>, _seed: u64) -> Result<Fitted<T>> {
        check_data(d)?;
        let k = d.n_classes;
        let y_l = d.y_labeled;
        let n_u = d.n_unlabeled();
        let fit_member = |l: &LearnerConfig, extra: &[(usize, usize)]| {
            let rows: Vec<usize> = extra.iter().map(|e| e.0).collect();
            let x = append_rows(d.x_labeled, d.x_unlabeled, &rows);
            let y: Vec<usize> = y_l.iter().copied().chain(extra.iter().map(|e| e.1)).collect();
            l.fit_unweighted(x.view(), &y, k)
        };
        let mut added: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.learners.len()];
        let mut models: Vec<TrainedModel<T>> = self
            .learners
            .par_iter()
            .map(|l| fit_member(l, &[]))
            .collect::<Result<_>>()?;
        let mut sizes = vec![y_l.len() * self.learners.len()];
        let mut rounds = 0;
        while rounds < self.max_rounds && n_u > 0 {
            let mut weights = committee_weights(&models, d.x_labeled, y_l);
            if weights.iter().all(|&w| w == 0.0) {
                weights.iter_mut().for_each(|w| *w = 1.0);
            }
            let preds: Vec<Vec<usize>> = models.iter().map(|m| m.predict(d.x_unlabeled)).collect();
            let mut changed = vec![false; self.learners.len()];
            for u in 0..n_u {
                let mut votes = vec![0.0f64; k];
                for (i, p) in preds.iter().enumerate() {
                    votes[p[u]] += weights[i];
                }
                let major = argmax(&votes);
                for i in 0..self.learners.len() {
                    let own = preds[i][u];
                    if own != major && votes[major] > votes[own] && !added[i].iter().any(|e| e.0 == u) {
                        added[i].push((u, major));
                        changed[i] = true;
                    }
                }
            }
            if !changed.iter().any(|&c| c) {
                break;
            }
            let refits: Vec<Option<TrainedModel<T>>> = (0..self.learners.len())
                .into_par_iter()
                .map(|i| changed[i].then(|| fit_member(&self.learners[i], &added[i])).transpose())
                .collect::<Result<_>>()?;
            for (i, m) in refits.into_iter().enumerate() {
                if let Some(m) = m {
                    models[i] = m;
                }
            }
            rounds += 1;
            sizes.push(added.iter().map(|a| y_l.len() + a.len()).sum());
        }
        let mut weights = committee_weights(&models, d.x_labeled, y_l);
        if n_u > 0 && weights.iter().all(|&w| w == 0.0) {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let names: Vec<String> = self.learners.iter().map(|l| l.to_string()).collect();
        let model = committee(
            models,
            &weights,
            format!("democratic(max_rounds={})[{}]", self.max_rounds, names.join(", ")),
            super::training_fingerprint(d.x_labeled, y_l, &vec![T::one(); y_l.len()]),
            k,
        );
        Ok(Fitted {
            model,
            rounds,
            train_sizes: sizes,
        })
    }

    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, _seed: u64) -> Result<TrainedModel<T>> {
        weighted_committee(&self.learners, x, y, k)
    }
}

const EPS_FLOOR: f64 = 1e-10;

/// `w_i ∝ exp(log_mass_i − margin_i)`, normalized; computed relative to the
/// largest exponent.
fn boost_weights<T: Scalar>(log_mass: &[f64], margins: &[f64]) -> Vec<T> {
    let e: Vec<f64> = log_mass.iter().zip(margins).map(|(c, m)| c - m).collect();
    let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|v| (v - top).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| T::of(v / s)).collect()
}

/// `f[y] − max_{c≠y} f[c]` for each row.
fn ensemble_margins(f: &Array2<f64>, z: &[usize]) -> Vec<f64> {
    f.rows()
        .into_iter()
        .zip(z)
        .map(|(row, &y)| {
            let other = row
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != y)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            row[y] - other
        })
        .collect()
}

fn weighted_error<T: Scalar>(pred: &[usize], z: &[usize], w: &[T]) -> f64 {
    let total: f64 = w.iter().map(|v| v.as_f64()).sum();
    let wrong: f64 = (0..z.len()).filter(|&i| pred[i] != z[i]).map(|i| w[i].as_f64()).sum();
    wrong / total
}

fn boost_alpha(eps: f64) -> f64 {
    let e = eps.max(EPS_FLOOR);
    0.5 * ((1.0 - e) / e).ln()
}

/// AdaBoost on labeled data only: `rounds` weighted fits with
/// `α = ½ ln((1−ε)/ε)` and weights `∝ exp(−margin)`.
pub fn labeled_boosting<T: Scalar>(
    base: &LearnerConfig,
    x: ArrayView2<'_, T>,
    y: &[usize],
    k: usize,
    rounds: usize,
) -> Result<TrainedModel<T>> {
    if y.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    let n = y.len();
    let zeros = vec![0.0; n];
    let mut w: Vec<T> = boost_weights(&zeros, &zeros);
    let mut f = Array2::<f64>::zeros((n, k));
    let mut members = Vec::new();
    for t in 0..rounds {
        let h = base.fit(x, y, &w, k)?;
        let pred = h.predict(x);
        let eps = weighted_error(&pred, y, &w);
        if eps >= 0.5 {
            if t == 0 {
                return Err(LearnerError::Unlearnable { error: eps });
            }
            break;
        }
        let alpha = boost_alpha(eps);
        for (i, &c) in pred.iter().enumerate() {
            f[[i, c]] += alpha;
        }
        members.push((T::of(alpha), h));
        w = boost_weights(&zeros, &ensemble_margins(&f, y));
    }
    Ok(TrainedModel::new(
        ModelKind::Boosted(members),
        format!("labeled_boosting(T={rounds}) over {base}"),
        super::training_fingerprint(x, y, &vec![T::one(); n]),
        k,
    ))
}

/// Semi-supervised boosting with pseudo-labels for the unlabeled points,
/// initialized from the nearest labeled point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assemble {
    pub base: LearnerConfig,
    pub rounds: usize,
    pub beta: f64,
}

fn nearest_labeled<T: Scalar>(x_l: ArrayView2<'_, T>, y_l: &[usize], x_u: ArrayView2<'_, T>) -> Vec<usize> {
    x_u.rows()
        .into_iter()
        .map(|q| {
            let mut best = (0usize, T::infinity());
            for (j, r) in x_l.rows().into_iter().enumerate() {
                let d: T = q.iter().zip(r.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
                if d < best.1 {
                    best = (j, d);
                }
            }
            y_l[best.0]
        })
        .collect()
}

impl<T: Scalar> Strategy<T> for Assemble {
    fn name(&self) -> &str {
        "assemble"
    }

    fn fit(&self, d: &SslData<'_, T>, _seed: u64) -> Result<Fitted<T>> {
        check_data(d)?;
        let k = d.n_classes;
        let (n_l, n_u) = (d.n_labeled(), d.n_unlabeled());
        let n = n_l + n_u;
        let x = concatenate(Axis(0), &[d.x_labeled, d.x_unlabeled]).expect("equal column counts");
        let mut z: Vec<usize> = d.y_labeled.to_vec();
        z.extend(nearest_labeled(d.x_labeled, d.y_labeled, d.x_unlabeled));
        // Labeled points share mass beta, unlabeled 1 − beta; only the
        // difference of the log masses matters after normalization.
        let mut log_mass = vec![0.0; n];
        if n_u > 0 {
            let ll = (self.beta / n_l as f64).ln();
            let lu = ((1.0 - self.beta) / n_u as f64).ln();
            let top = ll.max(lu);
            log_mass[..n_l].iter_mut().for_each(|v| *v = ll - top);
            log_mass[n_l..].iter_mut().for_each(|v| *v = lu - top);
        }
        let mut w: Vec<T> = boost_weights(&log_mass, &vec![0.0; n]);
        let mut f = Array2::<f64>::zeros((n, k));
        let mut members = Vec::new();
        let mut sizes = Vec::new();
        for t in 0..self.rounds {
            let h = self.base.fit(x.view(), &z, &w, k)?;
            let pred = h.predict(x.view());
            let eps = weighted_error(&pred, &z, &w);
            if eps >= 0.5 {
                if t == 0 {
                    return Err(LearnerError::Unlearnable { error: eps });
                }
                break;
            }
            let alpha = boost_alpha(eps);
            for (i, &c) in pred.iter().enumerate() {
                f[[i, c]] += alpha;
            }
            members.push((T::of(alpha), h));
            sizes.push(n);
            for (i, zi) in z.iter_mut().enumerate().skip(n_l) {
                *zi = argmax(&f.row(i).to_vec());
            }
            w = boost_weights(&log_mass, &ensemble_margins(&f, &z));
        }
        let rounds = members.len();
        let model = TrainedModel::new(
            ModelKind::Boosted(members),
            format!("assemble(T={}, beta={}) over {}", self.rounds, self.beta, self.base),
            super::training_fingerprint(d.x_labeled, d.y_labeled, &vec![T::one(); n_l]),
            k,
        );
        Ok(Fitted {
            model,
            rounds,
            train_sizes: sizes,
        })
    }

    fn fit_supervised(&self, x: ArrayView2<'_, T>, y: &[usize], k: usize, _seed: u64) -> Result<TrainedModel<T>> {
        labeled_boosting(&self.base, x, y, k, self.rounds)
    }
}
