use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_points, distinct_indices, Clustering};
use crate::{sq_dist, Embedding, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    pub seed: u64,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            k: 15,
            max_iters: 100,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl KmeansConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidConfig("tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Greedy k-means++ seeding.
///
/// Returns `min(k, distinct points)` pairwise-distinct centers drawn from
/// `points`. When there are no more distinct points than `k`, every distinct
/// point is returned in order of first appearance.
pub fn kmeans_pp_init(points: &[Embedding], k: usize, seed: u64) -> Result<Vec<Embedding>> {
    check_points(points)?;
    Ok(seed_indices(points, k, seed)
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

fn seed_indices(points: &[Embedding], k: usize, seed: u64) -> Vec<usize> {
    let distinct = distinct_indices(points);
    if distinct.len() <= k {
        return distinct;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    chosen.push(distinct[rng.random_range(0..distinct.len())]);

    let mut nearest: Vec<f64> = distinct
        .iter()
        .map(|&i| sq_dist(&points[i], &points[chosen[0]]))
        .collect();

    // Greedy variant: draw a few D²-weighted candidates per step and keep the
    // one that lowers the potential most.
    let trials = 2 + (k as f64).ln().floor() as usize;
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let slot = sample_slot(&nearest, rng.random::<f64>() * total);
            let idx = distinct[slot];
            let updated: Vec<f64> = distinct
                .iter()
                .zip(&nearest)
                .map(|(&i, &cur)| sq_dist(&points[i], &points[idx]).min(cur))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, idx, updated));
            }
        }
        let (_, idx, updated) = best.expect("at least one trial");
        chosen.push(idx);
        nearest = updated;
    }
    chosen
}

/// Slot whose cumulative weight first exceeds `target`, skipping zero weights.
fn sample_slot(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut pick = None;
    for (slot, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        pick = Some(slot);
        if acc > target {
            break;
        }
    }
    // Some slot has positive weight while fewer than all distinct points are chosen.
    pick.expect("a distinct point remains unchosen")
}

fn nearest_centroid(point: &[f64], centroids: &[Embedding]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm seeded with [`kmeans_pp_init`].
pub fn kmeans_fit(points: &[Embedding], config: &KmeansConfig) -> Result<Clustering> {
    kmeans_fit_traced(points, config).map(|(c, _)| c)
}

/// Like [`kmeans_fit`], also returning the objective after every assignment
/// step followed by the final objective. The trace is non-increasing.
pub fn kmeans_fit_traced(
    points: &[Embedding],
    config: &KmeansConfig,
) -> Result<(Clustering, Vec<f64>)> {
    config.validate()?;
    let dim = check_points(points)?;
    let mut centroids: Vec<Embedding> = seed_indices(points, config.k, config.seed)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    let k = centroids.len();
    let n = points.len();

    let mut assignment = vec![0usize; n];
    let mut dists = vec![0.0f64; n];
    let mut sizes = vec![0usize; k];
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        sizes.iter_mut().for_each(|s| *s = 0);
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest_centroid(p, &centroids);
            assignment[i] = c;
            dists[i] = d;
            sizes[c] += 1;
        }
        repair_empty(
            &mut assignment,
            &mut dists,
            &mut sizes,
            &mut centroids,
            points,
        );
        trace.push(dists.iter().sum());

        let mut sums = vec![vec![0.0f64; dim]; k];
        for (p, &c) in points.iter().zip(&assignment) {
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut max_shift = 0.0f64;
        for (c, sum) in sums.into_iter().enumerate() {
            let inv = 1.0 / sizes[c] as f64;
            let mean: Embedding = sum.into_iter().map(|s| s * inv).collect();
            max_shift = max_shift.max(sq_dist(&mean, &centroids[c]).sqrt());
            centroids[c] = mean;
        }

        if max_shift <= config.tol || iterations >= config.max_iters {
            break;
        }
    }

    let objective = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum();
    trace.push(objective);

    Ok((
        Clustering {
            centroids,
            assignment,
            sizes,
            iterations,
            objective,
        },
        trace,
    ))
}

/// Fills each empty cluster with the point farthest from its centroid, taken
/// from a cluster that can spare it.
fn repair_empty(
    assignment: &mut [usize],
    dists: &mut [f64],
    sizes: &mut [usize],
    centroids: &mut [Embedding],
    points: &[Embedding],
) {
    for empty in 0..sizes.len() {
        if sizes[empty] != 0 {
            continue;
        }
        let mut donor: Option<usize> = None;
        for i in 0..points.len() {
            if sizes[assignment[i]] < 2 {
                continue;
            }
            if donor.is_none_or(|d| dists[i] > dists[d]) {
                donor = Some(i);
            }
        }
        let Some(i) = donor else { return };
        sizes[assignment[i]] -= 1;
        assignment[i] = empty;
        sizes[empty] = 1;
        dists[i] = 0.0;
        centroids[empty] = points[i].clone();
    }
}
