use std::collections::BTreeMap;

use super::{build_knn_graph, check_points, StochasticMatrix};
use crate::{Embedding, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MclConfig {
    pub inflation: f64,
    /// Matrix power applied in each expansion step.
    pub expansion: u32,
    /// Neighbor count for the mutual-kNN input graph.
    pub knn: usize,
    pub prune_eps: f64,
    /// Stop when the Frobenius norm of the iterate change falls below this.
    pub conv_tol: f64,
    pub max_iters: usize,
}

impl Default for MclConfig {
    fn default() -> Self {
        Self {
            inflation: 1.65,
            expansion: 2,
            knn: 10,
            prune_eps: 1e-5,
            conv_tol: 1e-9,
            max_iters: 100,
        }
    }
}

impl MclConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.inflation.is_finite() || self.inflation <= 1.0 {
            return Err(Error::InvalidConfig(
                "inflation must be a finite value > 1".into(),
            ));
        }
        if self.expansion < 2 {
            return Err(Error::InvalidConfig("expansion must be at least 2".into()));
        }
        if self.knn == 0 {
            return Err(Error::InvalidConfig("knn must be at least 1".into()));
        }
        if self.prune_eps.is_nan()
            || self.prune_eps <= 0.0
            || self.conv_tol.is_nan()
            || self.conv_tol <= 0.0
        {
            return Err(Error::InvalidConfig(
                "prune_eps and conv_tol must be positive".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MclResult {
    pub clusters: usize,
    /// Cluster label per point, labels numbered by ascending attractor index.
    pub assignment: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Markov clustering of `points` over their mutual-kNN cosine graph.
///
/// Hitting `max_iters` is not an error; the clusters of the last iterate are
/// returned with `converged == false`.
pub fn mcl_cluster(points: &[Embedding], config: &MclConfig) -> Result<MclResult> {
    config.validate()?;
    check_points(points)?;
    let graph = build_knn_graph(points, config.knn)?;
    Ok(mcl_on_graph(&graph, config))
}

/// Runs the expansion/inflation/prune iteration on a prepared graph.
pub fn mcl_on_graph(graph: &StochasticMatrix, config: &MclConfig) -> MclResult {
    let mut m = graph.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let mut next = m.clone();
        for _ in 1..config.expansion {
            next = next.multiply(&m);
        }
        next.inflate(config.inflation);
        next.prune(config.prune_eps);
        let change = next.frobenius_distance(&m);
        m = next;
        if change < config.conv_tol {
            converged = true;
            break;
        }
    }
    let (clusters, assignment) = read_clusters(&m);
    MclResult {
        clusters,
        assignment,
        iterations,
        converged,
    }
}

/// Attractors are nodes with positive diagonal mass; each node joins the
/// attractor holding its largest weight, ties to the lowest attractor.
fn read_clusters(m: &StochasticMatrix) -> (usize, Vec<usize>) {
    let n = m.size();
    let is_attractor: Vec<bool> = (0..n).map(|i| m.get(i, i) > 0.0).collect();
    let owner: Vec<usize> = (0..n)
        .map(|j| {
            let col = m.column(j);
            let best = |filter: &dyn Fn(usize) -> bool| {
                let mut best: Option<(usize, f64)> = None;
                for &(i, v) in col {
                    if v > 0.0 && filter(i) && best.is_none_or(|(_, b)| v > b) {
                        best = Some((i, v));
                    }
                }
                best.map(|(i, _)| i)
            };
            best(&|i| is_attractor[i])
                .or_else(|| best(&|_| true))
                .unwrap_or(j)
        })
        .collect();
    let labels: BTreeMap<usize, usize> = {
        let mut used: Vec<usize> = owner.clone();
        used.sort_unstable();
        used.dedup();
        used.into_iter()
            .enumerate()
            .map(|(label, a)| (a, label))
            .collect()
    };
    let assignment = owner.iter().map(|a| labels[a]).collect();
    (labels.len(), assignment)
}
