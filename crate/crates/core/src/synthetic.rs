//! Synthetic multi-sense corpora with known generating senses.
//!
//! Each token owns a few unit-norm sense means; each occurrence is one mean
//! plus isotropic Gaussian noise. Generated values are rounded to f32 so an
//! in-memory corpus and its `.semb` file hold the same numbers.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::store::OccurrenceRecord;
use crate::{dot, sq_dist, Embedding, TokenId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub tokens: usize,
    pub senses_per_token: usize,
    pub occurrences_per_token: usize,
    pub dim: usize,
    pub sigma: f64,
    /// Minimum Euclidean distance between a token's sense means.
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            tokens: 100,
            senses_per_token: 3,
            occurrences_per_token: 300,
            dim: 16,
            sigma: 0.05,
            min_separation: 0.5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dim: usize,
    pub records: Vec<OccurrenceRecord>,
    /// Generating sense of each record.
    pub labels: Vec<usize>,
    pub means: BTreeMap<TokenId, Vec<Embedding>>,
}

pub fn unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Embedding {
    loop {
        let v: Embedding = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random orthogonal `dim × dim` matrix (row-major), Gram-Schmidt on a
/// Gaussian matrix.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut rows: Vec<Embedding> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Embedding = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        // Two passes keep the rows orthogonal to working precision.
        for _ in 0..2 {
            for r in &rows {
                let p = dot(&v, r);
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    rows.concat()
}

impl SyntheticCorpus {
    pub fn generate(spec: &CorpusSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut means = BTreeMap::new();
        let mut records = Vec::with_capacity(spec.tokens * spec.occurrences_per_token);
        let mut labels = Vec::with_capacity(records.capacity());

        for t in 0..spec.tokens {
            let token = TokenId(t as u32);
            let mut token_means: Vec<Embedding> = Vec::with_capacity(spec.senses_per_token);
            while token_means.len() < spec.senses_per_token {
                let m = unit_vector(spec.dim, &mut rng);
                let min_sq = spec.min_separation * spec.min_separation;
                if token_means.iter().all(|o| sq_dist(o, &m) >= min_sq) {
                    token_means.push(m);
                }
            }
            for i in 0..spec.occurrences_per_token {
                let label = i % spec.senses_per_token;
                let emb = token_means[label]
                    .iter()
                    .map(|&mu| {
                        let noise: f64 = StandardNormal.sample(&mut rng);
                        (mu + spec.sigma * noise) as f32 as f64
                    })
                    .collect();
                records.push(OccurrenceRecord {
                    token,
                    embedding: emb,
                });
                labels.push(label);
            }
            means.insert(token, token_means);
        }

        let mut order: Vec<usize> = (0..records.len()).collect();
        order.shuffle(&mut rng);
        let mut slots: Vec<Option<OccurrenceRecord>> = records.into_iter().map(Some).collect();
        let records = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        let labels = order.iter().map(|&i| labels[i]).collect();

        Self {
            dim: spec.dim,
            records,
            labels,
            means,
        }
    }
}
