//! Per-token clustering: K-means (k-means++ seeding), Markov clustering over a
//! mutual-kNN cosine graph, and the adaptive cluster-count policy combining them.

mod adaptive;
mod graph;
mod kmeans;
mod mcl;

pub use adaptive::{adaptive_k, scale_cluster_count, AdaptivePolicy};
pub use graph::{build_knn_graph, StochasticMatrix};
pub use kmeans::{kmeans_fit, kmeans_fit_traced, kmeans_pp_init, KmeansConfig};
pub use mcl::{mcl_cluster, mcl_on_graph, MclConfig, MclResult};

use crate::{Embedding, Error, Result};

/// Result of a clustering: no cluster is empty and `sizes` sums to the point count.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Embedding>,
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Lloyd iterations run.
    pub iterations: usize,
    /// Sum of squared distances from each point to its centroid.
    pub objective: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

pub(crate) fn check_points(points: &[Embedding]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    Ok(dim)
}

/// Indices of the first occurrence of every distinct point (bitwise equality).
pub(crate) fn distinct_indices(points: &[Embedding]) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| seen.insert(p.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<_>>()))
        .map(|(i, _)| i)
        .collect()
}
