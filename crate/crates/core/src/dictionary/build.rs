use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SenseDictionary, SenseSet, FLAG_ADAPTIVE};
use crate::clustering::{adaptive_k, kmeans_fit, AdaptivePolicy, KmeansConfig};
use crate::store::OccurrenceRecord;
use crate::{sq_dist, Dtype, Embedding, Error, Result, TokenId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuildMode {
    FixedK(KmeansConfig),
    /// `k` comes from the adaptive policy; the K-means template supplies the rest.
    Adaptive {
        policy: AdaptivePolicy,
        kmeans: KmeansConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub mode: BuildMode,
    /// Occurrences clustered per token; larger groups are reservoir-sampled.
    pub max_per_token: usize,
    pub seed: u64,
    pub dtype: Dtype,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            mode: BuildMode::FixedK(KmeansConfig::default()),
            max_per_token: 8000,
            seed: 0,
            dtype: Dtype::F32,
        }
    }
}

impl BuildConfig {
    pub fn fixed_k(k: usize, seed: u64) -> Self {
        Self {
            mode: BuildMode::FixedK(KmeansConfig::with_k(k)),
            seed,
            ..Self::default()
        }
    }

    pub fn adaptive(policy: AdaptivePolicy, seed: u64) -> Self {
        Self {
            mode: BuildMode::Adaptive {
                policy,
                kmeans: KmeansConfig::default(),
            },
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_per_token == 0 || self.max_per_token > u16::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "max_per_token must lie in [1, {}]",
                u16::MAX
            )));
        }
        match &self.mode {
            BuildMode::FixedK(km) => {
                km.validate()?;
                if km.k > u16::MAX as usize {
                    return Err(Error::InvalidConfig(format!(
                        "k must be at most {}",
                        u16::MAX
                    )));
                }
            }
            BuildMode::Adaptive { policy, kmeans } => {
                policy.validate()?;
                kmeans.validate()?;
            }
        }
        Ok(())
    }

    fn flags(&self) -> u32 {
        match self.mode {
            BuildMode::FixedK(_) => 0,
            BuildMode::Adaptive { .. } => FLAG_ADAPTIVE,
        }
    }
}

fn token_seed(seed: u64, token: TokenId) -> u64 {
    seed ^ u64::from(token.0)
}

fn lexicographic(a: &Embedding, b: &Embedding) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Algorithm R over `n` items; returned indices are ascending.
fn reservoir(n: usize, cap: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..cap.min(n)).collect();
    for i in cap..n {
        let j = rng.random_range(0..=i);
        if j < cap {
            kept[j] = i;
        }
    }
    kept.sort_unstable();
    kept
}

/// Clusters one token's occurrences into its senses.
///
/// Occurrences are put in a canonical order first, so the result depends only
/// on the multiset of embeddings. Groups larger than `max_per_token` are
/// sampled; every occurrence still counts toward exactly one sense.
pub fn build_sense_set(
    token: TokenId,
    embeddings: &[Embedding],
    config: &BuildConfig,
) -> Result<SenseSet> {
    config.validate()?;
    let first = embeddings.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    if let Some(e) = embeddings.iter().find(|e| e.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            got: e.len(),
        });
    }

    let mut ordered: Vec<&Embedding> = embeddings.iter().collect();
    ordered.sort_by(|a, b| lexicographic(a, b));

    let seed = token_seed(config.seed, token);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled_idx = reservoir(ordered.len(), config.max_per_token, &mut rng);
    let sample: Vec<Embedding> = sampled_idx.iter().map(|&i| ordered[i].clone()).collect();

    let kmeans = match &config.mode {
        BuildMode::FixedK(km) => KmeansConfig { seed, ..*km },
        BuildMode::Adaptive { policy, kmeans } => KmeansConfig {
            k: adaptive_k(&sample, policy)?,
            seed,
            ..*kmeans
        },
    };
    let clustering = kmeans_fit(&sample, &kmeans)?;

    let mut counts: Vec<u64> = clustering.sizes.iter().map(|&s| s as u64).collect();
    if sample.len() < ordered.len() {
        let mut in_sample = vec![false; ordered.len()];
        for &i in &sampled_idx {
            in_sample[i] = true;
        }
        for (i, e) in ordered.iter().enumerate() {
            if in_sample[i] {
                continue;
            }
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in clustering.centroids.iter().enumerate() {
                let d = sq_dist(e, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            counts[best.0] += 1;
        }
    }

    let mut order: Vec<usize> = (0..clustering.k()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let senses = order
        .iter()
        .map(|&c| {
            clustering.centroids[c]
                .iter()
                .map(|&v| config.dtype.quantize(v))
                .collect()
        })
        .collect();
    let counts = order
        .iter()
        .map(|&c| u32::try_from(counts[c]).unwrap_or(u32::MAX))
        .collect();

    Ok(SenseSet {
        token,
        senses,
        counts,
        total: embeddings.len() as u64,
    })
}

/// Builds the dictionary on the current rayon pool.
///
/// The result depends only on the per-token multisets of embeddings and the
/// config: record order and thread count do not matter.
pub fn build_dictionary(
    dim: usize,
    corpus: &[OccurrenceRecord],
    config: &BuildConfig,
) -> Result<SenseDictionary> {
    config.validate()?;
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    let mut groups: BTreeMap<TokenId, Vec<Embedding>> = BTreeMap::new();
    for rec in corpus {
        if rec.embedding.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: rec.embedding.len(),
            });
        }
        groups
            .entry(rec.token)
            .or_default()
            .push(rec.embedding.clone());
    }

    let sets: Vec<SenseSet> = groups
        .into_par_iter()
        .map(|(token, embeddings)| build_sense_set(token, &embeddings, config))
        .collect::<Result<_>>()?;

    let mut dict = SenseDictionary::new(dim, config.dtype);
    dict.seed = config.seed;
    dict.flags = config.flags();
    for set in sets {
        dict.entries.insert(set.token, set);
    }
    Ok(dict)
}

/// [`build_dictionary`] on a dedicated pool of `threads` workers.
pub fn build_dictionary_with_threads(
    dim: usize,
    corpus: &[OccurrenceRecord],
    config: &BuildConfig,
    threads: usize,
) -> Result<SenseDictionary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| build_dictionary(dim, corpus, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_occurrence_is_its_own_sense() {
        let set = build_sense_set(
            TokenId(1),
            &[vec![0.25, -1.5]],
            &BuildConfig::fixed_k(15, 0),
        )
        .unwrap();
        assert_eq!(set.senses, vec![vec![0.25, -1.5]]);
        assert_eq!(set.counts, vec![1]);
        assert_eq!(set.total, 1);
    }

    #[test]
    fn identical_occurrences_give_one_sense() {
        let set = build_sense_set(
            TokenId(1),
            &vec![vec![0.5, 0.5]; 10],
            &BuildConfig::fixed_k(15, 3),
        )
        .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.counts, vec![10]);
    }

    #[test]
    fn senses_sorted_by_occupancy() {
        let mut emb = vec![vec![0.0, 0.0]; 2];
        emb.extend(vec![vec![5.0, 5.0]; 7]);
        emb.extend(vec![vec![-5.0, 5.0]; 4]);
        let set = build_sense_set(TokenId(0), &emb, &BuildConfig::fixed_k(3, 1)).unwrap();
        assert_eq!(set.counts, vec![7, 4, 2]);
        assert_eq!(set.senses[0], vec![5.0, 5.0]);
    }

    #[test]
    fn sampling_keeps_every_occurrence_counted() {
        let emb: Vec<Embedding> = (0..50)
            .map(|i| vec![(i % 2) as f64 * 10.0 + i as f64 * 1e-3])
            .collect();
        let cfg = BuildConfig {
            max_per_token: 10,
            ..BuildConfig::fixed_k(2, 4)
        };
        let set = build_sense_set(TokenId(0), &emb, &cfg).unwrap();
        assert_eq!(set.counts.iter().map(|&c| c as u64).sum::<u64>(), 50);
        assert_eq!(set.total, 50);
    }

    #[test]
    fn reservoir_is_deterministic_and_bounded() {
        let a = reservoir(100, 10, &mut ChaCha8Rng::seed_from_u64(5));
        let b = reservoir(100, 10, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            reservoir(4, 10, &mut ChaCha8Rng::seed_from_u64(5)),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        let cfg = BuildConfig::fixed_k(2, 0);
        assert!(matches!(
            build_sense_set(TokenId(0), &[], &cfg),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            build_sense_set(TokenId(0), &[vec![1.0], vec![1.0, 2.0]], &cfg),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn bookkeeping_over_three_tokens() {
        let corpus: Vec<OccurrenceRecord> = (0..30)
            .map(|i| OccurrenceRecord::new(i % 3, vec![i as f64, 1.0]))
            .collect();
        let d = build_dictionary(2, &corpus, &BuildConfig::fixed_k(2, 0)).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.entries.values().all(|s| s.total == 10));
    }

    #[test]
    fn empty_corpus_gives_empty_dictionary() {
        let d = build_dictionary(4, &[], &BuildConfig::default()).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.dim, 4);
    }

    #[test]
    fn adaptive_mode_sets_flag() {
        let corpus: Vec<OccurrenceRecord> = (0..20)
            .map(|i| OccurrenceRecord::new(0, vec![1.0, i as f64 * 0.1]))
            .collect();
        let d = build_dictionary(
            2,
            &corpus,
            &BuildConfig::adaptive(AdaptivePolicy::default(), 2),
        )
        .unwrap();
        assert_eq!(d.flags, FLAG_ADAPTIVE);
        assert!(!d.get(TokenId(0)).unwrap().is_empty());
    }
}
