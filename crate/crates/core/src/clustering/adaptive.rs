use super::{mcl_cluster, MclConfig};
use crate::{Embedding, Error, Result};

/// Chooses a K-means `k` by scaling the MCL cluster count: `coef_high` above
/// `threshold` clusters, `coef_low` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptivePolicy {
    pub mcl: MclConfig,
    pub threshold: usize,
    pub coef_low: f64,
    pub coef_high: f64,
}

impl Default for AdaptivePolicy {
    fn default() -> Self {
        Self {
            mcl: MclConfig::default(),
            threshold: 900,
            coef_low: 0.1,
            coef_high: 0.4,
        }
    }
}

impl AdaptivePolicy {
    pub fn validate(&self) -> Result<()> {
        self.mcl.validate()?;
        if self.threshold == 0 {
            return Err(Error::InvalidConfig("threshold must be positive".into()));
        }
        for c in [self.coef_low, self.coef_high] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "coefficient {c} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Maps an MCL cluster count to `k`, clamped to `[1, n_points]`.
pub fn scale_cluster_count(mcl_clusters: usize, policy: &AdaptivePolicy, n_points: usize) -> usize {
    let coef = if mcl_clusters > policy.threshold {
        policy.coef_high
    } else {
        policy.coef_low
    };
    let k = (coef * mcl_clusters as f64).round() as usize;
    k.clamp(1, n_points.max(1))
}

pub fn adaptive_k(points: &[Embedding], policy: &AdaptivePolicy) -> Result<usize> {
    policy.validate()?;
    let mcl = mcl_cluster(points, &policy.mcl)?;
    Ok(scale_cluster_count(mcl.clusters, policy, points.len()))
}
