use ndarray::{concatenate, Array2, ArrayView2, Axis};

use super::{check_inputs, max_abs_diff, IterParams, LabelMatrix, PropagationError, PropagationResult, Result};
use crate::graph::SparseGraph;
use crate::inductive::{LogRegModel, LogRegParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphHopParams {
    pub rounds: usize,
    pub hops: usize,
    pub lr_l2: f64,
    pub lr_learning_rate: f64,
    pub lr_epochs: usize,
    pub iter: IterParams,
}

impl Default for GraphHopParams {
    fn default() -> Self {
        Self {
            rounds: 10,
            hops: 2,
            lr_l2: 1e-4,
            lr_learning_rate: 0.1,
            lr_epochs: 200,
            iter: IterParams::default(),
        }
    }
}

/// Fits logistic regression on the labeled rows of `x` and predicts every
/// row, then clamps labeled rows.
fn classify<T: Scalar>(x: ArrayView2<'_, T>, labels: &LabelMatrix<T>, lr: LogRegParams) -> Result<Array2<T>> {
    let idx = labels.labeled();
    let y: Vec<usize> = idx.iter().map(|&i| labels.class_of(i).expect("labeled")).collect();
    let model = LogRegModel::fit(
        x.select(Axis(0), &idx).view(),
        &y,
        &vec![T::one(); y.len()],
        labels.k(),
        lr,
    )?;
    let mut f = model.predict_proba(x);
    labels.clamp(&mut f);
    Ok(f)
}

/// Feature classifier followed by `rounds` of re-classification on the
/// embedding `[F, PF, P²F]` (or `[F, PF]` for one hop), `P = D⁻¹W`. Stops
/// early once the max-norm change of `F` falls below `tol`.
pub fn graphhop<T: Scalar>(
    g: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    features: ArrayView2<'_, T>,
    p: &GraphHopParams,
) -> Result<PropagationResult<T>> {
    check_inputs(g, labels)?;
    if features.nrows() != g.n() {
        return Err(PropagationError::Shape(format!(
            "{} feature rows for {} nodes",
            features.nrows(),
            g.n()
        )));
    }
    if !(p.hops == 1 || p.hops == 2) {
        return Err(PropagationError::InvalidParam(format!(
            "hops = {} must be 1 or 2",
            p.hops
        )));
    }
    if p.rounds > p.iter.max_iter {
        return Err(PropagationError::InvalidParam(format!(
            "rounds = {} exceeds max_iter = {}",
            p.rounds, p.iter.max_iter
        )));
    }
    let lr = LogRegParams {
        l2: p.lr_l2,
        learning_rate: p.lr_learning_rate,
        epochs: p.lr_epochs,
    };
    let transition = g.transition_row_stochastic()?;
    let mut f = classify(features, labels, lr)?;
    let mut change = 0.0;
    let mut iterations = 0;
    let mut converged = p.rounds == 0;
    while iterations < p.rounds {
        let one = transition.mul_dense(&f);
        let embedding = if p.hops == 2 {
            let two = transition.mul_dense(&one);
            concatenate(Axis(1), &[f.view(), one.view(), two.view()])
        } else {
            concatenate(Axis(1), &[f.view(), one.view()])
        }
        .expect("equal row counts");
        let next = classify(embedding.view(), labels, lr)?;
        change = max_abs_diff(&next, &f);
        f = next;
        iterations += 1;
        if change < p.iter.tol {
            converged = true;
            break;
        }
    }
    Ok(PropagationResult::from_soft(f, iterations, change, converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_cliques() -> (SparseGraph<f64>, Array2<f64>, LabelMatrix<f64>) {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        let g = SparseGraph::from_undirected_edges(8, edges).unwrap();
        let x = array![
            [1.0, 0.0],
            [0.9, 0.1],
            [1.1, -0.1],
            [0.8, 0.0],
            [0.0, 1.0],
            [0.1, 0.9],
            [-0.1, 1.1],
            [0.0, 0.8]
        ];
        let l = LabelMatrix::from_pairs(8, 2, &[(0, 0), (4, 1)]).unwrap();
        (g, x, l)
    }

    #[test]
    fn separates_cliques_in_one_round() {
        let (g, x, l) = two_cliques();
        let p = GraphHopParams {
            rounds: 1,
            ..Default::default()
        };
        let r = graphhop(&g, &l, x.view(), &p).unwrap();
        assert_eq!(r.hard, vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(r.soft.row(0).to_vec(), vec![1.0, 0.0]);
        assert_eq!(r.soft.row(4).to_vec(), vec![0.0, 1.0]);
    }

    #[test]
    fn zero_rounds_is_the_feature_classifier() {
        let (g, x, l) = two_cliques();
        let p = GraphHopParams {
            rounds: 0,
            ..Default::default()
        };
        let r = graphhop(&g, &l, x.view(), &p).unwrap();
        let expect = classify(x.view(), &l, LogRegParams::default()).unwrap();
        assert_eq!(r.soft, expect);
        assert_eq!(r.iterations, 0);
    }
}
