//! Lets Markov clustering pick each token's sense count, then refines the senses with K-means.
//!
//! cargo run --release --example adaptive_clustering

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sensedict::clustering::{
    adaptive_k, build_knn_graph, mcl_cluster, mcl_on_graph, scale_cluster_count, AdaptivePolicy,
    MclConfig,
};
use sensedict::dictionary::{build_dictionary, BuildConfig};
use sensedict::store::OccurrenceRecord;
use sensedict::Embedding;

fn blob(center: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<Embedding> {
    let noise = Normal::new(0.0, 0.02).unwrap();
    (0..n)
        .map(|_| center.iter().map(|c| c + noise.sample(rng)).collect())
        .collect()
}

fn main() -> sensedict::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut points = blob(&[1.0, 0.0, 0.0], 40, &mut rng);
    points.extend(blob(&[0.0, 1.0, 0.0], 40, &mut rng));
    points.extend(blob(&[0.0, 0.0, 1.0], 40, &mut rng));

    let config = MclConfig::default();
    let result = mcl_cluster(&points, &config)?;
    println!(
        "MCL: {} clusters after {} iterations (converged: {})",
        result.clusters, result.iterations, result.converged
    );

    let graph = build_knn_graph(&points, 5)?;
    let sparse = mcl_on_graph(
        &graph,
        &MclConfig {
            inflation: 3.0,
            ..config
        },
    );
    println!("knn=5, inflation 3.0: {} clusters", sparse.clusters);

    let policy = AdaptivePolicy::default();
    for c in [2, 100, 900, 901, 1000] {
        println!(
            "  {c:>4} MCL clusters -> k = {}",
            scale_cluster_count(c, &policy, usize::MAX)
        );
    }
    println!(
        "adaptive k with the default policy: {}",
        adaptive_k(&points, &policy)?
    );

    // The default coefficients expect thousands of occurrences per token; a
    // group this small needs a gentler scale.
    let small = AdaptivePolicy {
        coef_low: 0.25,
        ..policy
    };
    println!(
        "adaptive k with coef_low 0.25: {}",
        adaptive_k(&points, &small)?
    );

    let corpus: Vec<OccurrenceRecord> = points
        .into_iter()
        .map(|p| OccurrenceRecord::new(9, p))
        .collect();
    let dict = build_dictionary(3, &corpus, &BuildConfig::adaptive(small, 0))?;
    let set = dict.get(9.into()).unwrap();
    println!(
        "adaptive dictionary: token 9 has {} senses, counts {:?}",
        set.len(),
        set.counts
    );
    Ok(())
}
