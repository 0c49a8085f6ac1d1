//! Builds a fixed-k sense dictionary from a synthetic corpus, saves it, and prints its statistics.
//!
//! cargo run --release --example build_dictionary

use sensedict::dictionary::{self, build_dictionary, BuildConfig};
use sensedict::synthetic::{CorpusSpec, SyntheticCorpus};
use sensedict::{Dtype, TokenId};

fn main() -> sensedict::Result<()> {
    let corpus = SyntheticCorpus::generate(&CorpusSpec {
        tokens: 50,
        senses_per_token: 3,
        occurrences_per_token: 200,
        ..Default::default()
    });
    println!(
        "corpus: {} occurrences of {} tokens, dim {}",
        corpus.records.len(),
        corpus.means.len(),
        corpus.dim
    );

    let config = BuildConfig {
        dtype: Dtype::F16,
        ..BuildConfig::fixed_k(3, 42)
    };
    let dict = build_dictionary(corpus.dim, &corpus.records, &config)?;

    let set = dict.get(TokenId(0)).expect("token 0 was in the corpus");
    println!(
        "token 0: {} senses, counts {:?} of {}",
        set.len(),
        set.counts,
        set.total
    );
    for (i, sense) in set.senses.iter().enumerate() {
        let head: Vec<String> = sense.iter().take(4).map(|v| format!("{v:+.3}")).collect();
        println!("  sense {i}: [{}, ...]", head.join(", "));
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("senses.sdict");
    let bytes = dictionary::write_file(&dict, &path)?;
    let reloaded = dictionary::read_file(&path)?;
    assert_eq!(reloaded, dict);
    println!("saved {bytes} bytes to {}", path.display());

    let stats = dictionary::stats(&dict);
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).expect("stats serialize")
    );
    Ok(())
}
