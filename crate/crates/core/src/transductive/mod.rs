//! Graph propagation methods. Each maps a graph and a partially labeled
//! one-hot matrix to soft scores and hard labels for every node.
//!
//! Hard labels are the row-wise argmax of the soft scores with ties going to
//! the lowest class index. Non-convergence is reported through
//! [`PropagationResult::converged`], never as an error.

mod graphhop;
mod harmonic;
mod poisson;
mod propagation;

use ndarray::{Array2, ArrayView2};

use crate::graph::{GraphError, SparseGraph};
use crate::inductive::LearnerError;
use crate::params::{
    self, at_least_one, half_open_unit, non_negative, open_unit, positive, ParamDef, ParamMap, Params,
};
use crate::scalar::{argmax_rows, Scalar};

pub use graphhop::{graphhop, GraphHopParams};
pub use harmonic::{laplace_learning, p_laplace, LaplaceParams, PLaplaceParams};
pub use poisson::{poisson_learning, poisson_mbo, PoissonMboParams, PoissonParams};
pub use propagation::{
    dynamic_label_propagation, label_propagation, label_spreading, lazy_random_walk, DlpParams, IterParams,
    LazyWalkParams, SpreadingParams, DLP_MAX_NODES,
};

#[derive(Debug, thiserror::Error)]
pub enum PropagationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("class {0} has no labeled node")]
    MissingClass(usize),
    #[error("nodes {nodes:?} form a component without labeled nodes")]
    UnlabeledComponent { nodes: Vec<usize> },
    #[error("component {component} (nodes {nodes:?}) has a nonzero source sum; the system is inconsistent")]
    ComponentConstraint { component: usize, nodes: Vec<usize> },
    #[error("{needed} labeled nodes required, got {got}")]
    TooFewLabeled { needed: usize, got: usize },
    #[error("dense method limited to {limit} nodes, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("method needs node features")]
    MissingFeatures,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("unknown transductive method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

pub type Result<T> = std::result::Result<T, PropagationError>;

/// One-hot rows for labeled nodes, zero rows elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix<T> {
    y: Array2<T>,
    mask: Vec<bool>,
    classes: Vec<Option<usize>>,
}

impl<T: Scalar> LabelMatrix<T> {
    /// `labels[i]` is read only where `labeled[i]` holds.
    pub fn new(labels: &[usize], labeled: &[bool], k: usize) -> Result<Self> {
        if labels.len() != labeled.len() {
            return Err(PropagationError::Shape(format!(
                "{} labels, {} mask entries",
                labels.len(),
                labeled.len()
            )));
        }
        let n = labels.len();
        let mut y = Array2::zeros((n, k));
        let mut classes = vec![None; n];
        for i in 0..n {
            if labeled[i] {
                if labels[i] >= k {
                    return Err(PropagationError::Shape(format!("label {} outside [0, {k})", labels[i])));
                }
                y[[i, labels[i]]] = T::one();
                classes[i] = Some(labels[i]);
            }
        }
        Ok(Self {
            y,
            mask: labeled.to_vec(),
            classes,
        })
    }

    /// From `(node, class)` pairs over `n` nodes.
    pub fn from_pairs(n: usize, k: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut labels = vec![0; n];
        let mut mask = vec![false; n];
        for &(i, c) in pairs {
            if i >= n {
                return Err(PropagationError::Shape(format!("node {i} outside [0, {n})")));
            }
            labels[i] = c;
            mask[i] = true;
        }
        Self::new(&labels, &mask, k)
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    pub fn y(&self) -> &Array2<T> {
        &self.y
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.classes[i]
    }

    pub fn labeled(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.mask[i]).collect()
    }

    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.mask[i]).collect()
    }

    /// Labeled count per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k()];
        self.classes.iter().flatten().for_each(|&l| c[l] += 1);
        c
    }

    /// Overwrites the labeled rows of `f` with their one-hot values.
    pub fn clamp(&self, f: &mut Array2<T>) {
        for (i, c) in self.classes.iter().enumerate() {
            if let Some(c) = *c {
                f.row_mut(i).fill(T::zero());
                f[[i, c]] = T::one();
            }
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let mut labels = vec![0; n];
        let mut mask = vec![false; n];
        for i in 0..n {
            if let Some(c) = self.classes[i] {
                labels[perm[i]] = c;
                mask[perm[i]] = true;
            }
        }
        Self::new(&labels, &mask, self.k()).expect("valid labels")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<T> {
    pub soft: Array2<T>,
    pub hard: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Human-readable notes about degenerate situations.
    pub diagnostics: Vec<String>,
}

impl<T: Scalar> PropagationResult<T> {
    pub fn from_soft(soft: Array2<T>, iterations: usize, residual: f64, converged: bool) -> Self {
        let hard = argmax_rows(&soft);
        Self {
            soft,
            hard,
            iterations,
            residual,
            converged,
            diagnostics: Vec::new(),
        }
    }
}

/// Checks shared by every method: matching sizes, no isolated nodes, at
/// least one labeled node per class.
pub(crate) fn check_inputs<T: Scalar>(g: &SparseGraph<T>, labels: &LabelMatrix<T>) -> Result<()> {
    if g.n() != labels.n() {
        return Err(PropagationError::Shape(format!(
            "graph has {} nodes, label matrix {} rows",
            g.n(),
            labels.n()
        )));
    }
    g.ensure_no_isolated()?;
    if let Some(c) = labels.class_counts().iter().position(|&c| c == 0) {
        return Err(PropagationError::MissingClass(c));
    }
    Ok(())
}

/// Max-norm of `a − b`.
pub(crate) fn max_abs_diff<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).abs().as_f64())
        .fold(0.0, f64::max)
}

pub const METHOD_NAMES: [&str; 9] = [
    "label_propagation",
    "label_spreading",
    "laplace",
    "lazy_random_walk",
    "dynamic_label_propagation",
    "poisson",
    "poisson_mbo",
    "p_laplace",
    "graphhop",
];

pub const LABEL_PROPAGATION_SCHEMA: &[ParamDef] = &[
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub const LABEL_SPREADING_SCHEMA: &[ParamDef] = &[
    ParamDef::float("alpha", 0.9, open_unit, "(0, 1)"),
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub const LAPLACE_SCHEMA: &[ParamDef] = &[
    ParamDef::float("tol", 1e-8, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
    ParamDef::flag("class_mass_normalization", false),
];

pub const LAZY_RANDOM_WALK_SCHEMA: &[ParamDef] = &[
    ParamDef::float("gamma", 0.5, half_open_unit, "(0, 1]"),
    ParamDef::int("steps", 50, non_negative, "[0, max_iter]"),
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub const DLP_SCHEMA: &[ParamDef] = &[
    ParamDef::float("alpha", 0.05, non_negative, "[0, inf)"),
    ParamDef::int("knn_k", 5, at_least_one, "[1, inf)"),
    ParamDef::int("T", 20, non_negative, "[0, max_iter]"),
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub const POISSON_SCHEMA: &[ParamDef] = &[
    ParamDef::float("tol", 1e-8, positive, "(0, inf)"),
    ParamDef::int("max_iter", 2000, at_least_one, "[1, inf)"),
    ParamDef::flag("prior_reweighting", false),
];

pub const POISSON_MBO_SCHEMA: &[ParamDef] = &[
    ParamDef::int("outer", 20, non_negative, "[0, max_iter]"),
    ParamDef::int("inner", 40, non_negative, "[0, inf)"),
    ParamDef::float("dt", 0.5, positive, "(0, inf)"),
    ParamDef::float("mu", 1.0, positive, "(0, inf)"),
    ParamDef::float("tol", 1e-8, positive, "(0, inf)"),
    ParamDef::int("max_iter", 2000, at_least_one, "[1, inf)"),
];

pub const P_LAPLACE_SCHEMA: &[ParamDef] = &[
    ParamDef::float("p", 3.0, |p| p >= 2.0, "[2, inf)"),
    ParamDef::int("outer", 50, non_negative, "[0, max_iter]"),
    ParamDef::float("eps", 1e-8, positive, "(0, inf)"),
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub const GRAPHHOP_SCHEMA: &[ParamDef] = &[
    ParamDef::int("rounds", 10, non_negative, "[0, max_iter]"),
    ParamDef::int("hops", 2, |h| h == 1.0 || h == 2.0, "{1, 2}"),
    ParamDef::float("lr_l2", 1e-4, non_negative, "[0, inf)"),
    ParamDef::float("lr_learning_rate", 0.1, positive, "(0, inf)"),
    ParamDef::int("lr_epochs", 200, non_negative, "[0, inf)"),
    ParamDef::float("tol", 1e-6, positive, "(0, inf)"),
    ParamDef::int("max_iter", 1000, at_least_one, "[1, inf)"),
];

pub fn method_schema(name: &str) -> Option<&'static [ParamDef]> {
    Some(match name {
        "label_propagation" => LABEL_PROPAGATION_SCHEMA,
        "label_spreading" => LABEL_SPREADING_SCHEMA,
        "laplace" => LAPLACE_SCHEMA,
        "lazy_random_walk" => LAZY_RANDOM_WALK_SCHEMA,
        "dynamic_label_propagation" => DLP_SCHEMA,
        "poisson" => POISSON_SCHEMA,
        "poisson_mbo" => POISSON_MBO_SCHEMA,
        "p_laplace" => P_LAPLACE_SCHEMA,
        "graphhop" => GRAPHHOP_SCHEMA,
        _ => return None,
    })
}

/// Whether the method reads node features.
pub fn needs_features(name: &str) -> bool {
    name == "graphhop"
}

/// A method with fully resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    LabelPropagation(IterParams),
    LabelSpreading(SpreadingParams),
    Laplace(LaplaceParams),
    LazyRandomWalk(LazyWalkParams),
    DynamicLabelPropagation(DlpParams),
    Poisson(PoissonParams),
    PoissonMbo(PoissonMboParams),
    PLaplace(PLaplaceParams),
    GraphHop(GraphHopParams),
}

/// `(parameter, message)` for parameters whose bound depends on another.
fn cross_checks(p: &Params<'_>, capped: &[&str]) -> Vec<(String, String)> {
    let max_iter = p.usize("max_iter");
    capped
        .iter()
        .filter(|name| p.usize(name) > max_iter)
        .map(|name| {
            (
                name.to_string(),
                format!("{} exceeds max_iter = {max_iter}", p.usize(name)),
            )
        })
        .collect()
}

impl Method {
    /// Resolves `params` against the schema of `name`. Errors are
    /// `(parameter, message)`.
    pub fn from_params(name: &str, params: &ParamMap) -> std::result::Result<Self, Vec<(String, String)>> {
        let schema = method_schema(name).ok_or_else(|| {
            vec![(
                String::new(),
                format!("unknown transductive method `{name}`; expected one of {METHOD_NAMES:?}"),
            )]
        })?;
        let resolved = params::resolve(schema, params)?;
        let mut errs = params::check_ranges(schema, &resolved);
        let p = Params::new(schema, &resolved);
        let iter = || IterParams {
            tol: p.f64("tol"),
            max_iter: p.usize("max_iter"),
        };
        let method = match name {
            "label_propagation" => Method::LabelPropagation(iter()),
            "label_spreading" => Method::LabelSpreading(SpreadingParams {
                alpha: p.f64("alpha"),
                iter: iter(),
            }),
            "laplace" => Method::Laplace(LaplaceParams {
                iter: iter(),
                class_mass_normalization: p.bool("class_mass_normalization"),
            }),
            "lazy_random_walk" => {
                errs.extend(cross_checks(&p, &["steps"]));
                Method::LazyRandomWalk(LazyWalkParams {
                    gamma: p.f64("gamma"),
                    steps: p.usize("steps"),
                    iter: iter(),
                })
            }
            "dynamic_label_propagation" => {
                errs.extend(cross_checks(&p, &["T"]));
                Method::DynamicLabelPropagation(DlpParams {
                    alpha: p.f64("alpha"),
                    knn_k: p.usize("knn_k"),
                    rounds: p.usize("T"),
                    iter: iter(),
                })
            }
            "poisson" => Method::Poisson(PoissonParams {
                iter: iter(),
                prior_reweighting: p.bool("prior_reweighting"),
            }),
            "poisson_mbo" => {
                errs.extend(cross_checks(&p, &["outer"]));
                Method::PoissonMbo(PoissonMboParams {
                    outer: p.usize("outer"),
                    inner: p.usize("inner"),
                    dt: p.f64("dt"),
                    mu: p.f64("mu"),
                    iter: iter(),
                })
            }
            "p_laplace" => {
                errs.extend(cross_checks(&p, &["outer"]));
                Method::PLaplace(PLaplaceParams {
                    p: p.f64("p"),
                    outer: p.usize("outer"),
                    eps: p.f64("eps"),
                    iter: iter(),
                })
            }
            _ => {
                errs.extend(cross_checks(&p, &["rounds"]));
                Method::GraphHop(GraphHopParams {
                    rounds: p.usize("rounds"),
                    hops: p.usize("hops"),
                    lr_l2: p.f64("lr_l2"),
                    lr_learning_rate: p.f64("lr_learning_rate"),
                    lr_epochs: p.usize("lr_epochs"),
                    iter: iter(),
                })
            }
        };
        if errs.is_empty() {
            Ok(method)
        } else {
            Err(errs)
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::LabelPropagation(_) => "label_propagation",
            Method::LabelSpreading(_) => "label_spreading",
            Method::Laplace(_) => "laplace",
            Method::LazyRandomWalk(_) => "lazy_random_walk",
            Method::DynamicLabelPropagation(_) => "dynamic_label_propagation",
            Method::Poisson(_) => "poisson",
            Method::PoissonMbo(_) => "poisson_mbo",
            Method::PLaplace(_) => "p_laplace",
            Method::GraphHop(_) => "graphhop",
        }
    }

    /// Runs the method. `features` is read only by methods that need it.
    pub fn run<T: Scalar>(
        &self,
        graph: &SparseGraph<T>,
        labels: &LabelMatrix<T>,
        features: Option<ArrayView2<'_, T>>,
    ) -> Result<PropagationResult<T>> {
        match self {
            Method::LabelPropagation(p) => label_propagation(graph, labels, p),
            Method::LabelSpreading(p) => label_spreading(graph, labels, p),
            Method::Laplace(p) => laplace_learning(graph, labels, p),
            Method::LazyRandomWalk(p) => lazy_random_walk(graph, labels, p),
            Method::DynamicLabelPropagation(p) => dynamic_label_propagation(graph, labels, p),
            Method::Poisson(p) => poisson_learning(graph, labels, p),
            Method::PoissonMbo(p) => poisson_mbo(graph, labels, p),
            Method::PLaplace(p) => p_laplace(graph, labels, p),
            Method::GraphHop(p) => graphhop(graph, labels, features.ok_or(PropagationError::MissingFeatures)?, p),
        }
    }
}

/// Resolves and runs the method called `name`.
pub fn propagate<T: Scalar>(
    name: &str,
    params: &ParamMap,
    graph: &SparseGraph<T>,
    labels: &LabelMatrix<T>,
    features: Option<ArrayView2<'_, T>>,
) -> Result<PropagationResult<T>> {
    let method = Method::from_params(name, params).map_err(|errs| {
        if errs.len() == 1 && errs[0].0.is_empty() {
            PropagationError::UnknownMethod(name.to_string())
        } else {
            PropagationError::InvalidParam(
                errs.iter()
                    .map(|(p, m)| format!("{p}: {m}"))
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        }
    })?;
    method.run(graph, labels, features)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn path(n: usize) -> SparseGraph<f64> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        SparseGraph::from_undirected_edges(n, edges).unwrap()
    }

    /// Ends of a path labeled 0 and 1.
    pub fn ends(n: usize) -> LabelMatrix<f64> {
        LabelMatrix::from_pairs(n, 2, &[(0, 0), (n - 1, 1)]).unwrap()
    }
}
