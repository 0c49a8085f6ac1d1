//! Builds word-level senses and scores a small word-pair benchmark with Spearman correlation.
//!
//! cargo run --release --example word_similarity

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensedict::store::OccurrenceRecord;
use sensedict::synthetic::unit_vector;
use sensedict::wordsim::{
    build_word_senses, evaluate, score_pairs, spearman, WordPairBenchmark, WordVocabulary,
};

fn main() -> sensedict::Result<()> {
    let vocab = WordVocabulary::from_surfaces(["bank", "river", "money", "shore", "cash"])?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let finance = unit_vector(8, &mut rng);
    let water = unit_vector(8, &mut rng);
    let mix = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| t * x + (1.0 - t) * y)
            .collect()
    };

    // "bank" occurs in both contexts; the other words lean to one side.
    let mut words = Vec::new();
    for i in 0..20 {
        let jitter = i as f64 * 1e-3;
        words.push(OccurrenceRecord::new(
            0,
            mix(&finance, &water, 0.95 - jitter),
        ));
        words.push(OccurrenceRecord::new(
            0,
            mix(&finance, &water, 0.05 + jitter),
        ));
        words.push(OccurrenceRecord::new(
            1,
            mix(&finance, &water, 0.1 + jitter),
        ));
        words.push(OccurrenceRecord::new(
            2,
            mix(&finance, &water, 0.9 - jitter),
        ));
        words.push(OccurrenceRecord::new(
            3,
            mix(&finance, &water, 0.3 + jitter),
        ));
        words.push(OccurrenceRecord::new(
            4,
            mix(&finance, &water, 0.7 - jitter),
        ));
    }
    let dict = build_word_senses(8, &words, 2, 0)?;
    println!(
        "bank has {} senses",
        dict.get(vocab.id("bank").unwrap()).unwrap().len()
    );

    let bench = WordPairBenchmark::parse(
        "# word1\tword2\tscore\n\
         bank\tmoney\t8.5\n\
         bank\triver\t7.9\n\
         money\tcash\t9.2\n\
         river\tshore\t8.8\n\
         money\triver\t1.1\n\
         cash\tshore\t0.9\n\
         bank\tunicorn\t0.5\n",
    )?;
    let scores = score_pairs(&dict, &vocab, &bench);
    let scored = bench
        .pairs
        .iter()
        .filter(|p| vocab.id(&p.word1).is_some() && vocab.id(&p.word2).is_some());
    for ((pair, predicted), gold) in scored.zip(&scores.predicted).zip(&scores.gold) {
        println!(
            "  {:>6} {:<6} predicted {predicted:.3}  gold {gold}",
            pair.word1, pair.word2
        );
    }
    let report = evaluate(&dict, &vocab, &bench);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );

    let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[10.0, 30.0, 20.0, 40.0])?;
    println!("spearman with a tie: {rho:.4}");
    Ok(())
}
