//! Replaces every embedding of a stream with its token's nearest sense and reports the fidelity.
//!
//! cargo run --release --example drop_in_replacement

use sensedict::dictionary::{build_dictionary, BuildConfig};
use sensedict::replacement::{replace_stream, teacher_label};
use sensedict::store::{self, RecordCount, StreamHeader};
use sensedict::synthetic::{CorpusSpec, SyntheticCorpus};
use sensedict::Dtype;

fn main() -> sensedict::Result<()> {
    let corpus = SyntheticCorpus::generate(&CorpusSpec {
        tokens: 20,
        ..Default::default()
    });
    let dict = build_dictionary(corpus.dim, &corpus.records, &BuildConfig::fixed_k(3, 1))?;

    let mut input = Vec::new();
    let header = StreamHeader::new(
        Dtype::F32,
        corpus.dim,
        RecordCount::Known(corpus.records.len() as u64),
    );
    store::write_stream(&corpus.records, header, &mut input)?;

    let mut output = Vec::new();
    let report = replace_stream(&dict, input.as_slice(), &mut output)?;
    println!(
        "{} records: {} replaced, {} passed through, mean squared error {:.5}",
        report.records, report.replaced, report.fallbacks, report.mean_sq_error
    );
    println!("sense usage of token 0: {:?}", report.sense_usage[&0]);

    // The chosen sense is the one whose vector maximizes the dot product.
    let first = &corpus.records[0];
    let label = teacher_label(&dict, first.token, &first.embedding)?;
    let (_, replaced) = store::read_all(output.as_slice())?;
    assert_eq!(
        replaced[0].embedding,
        dict.get(first.token).unwrap().senses[label]
    );
    println!("record 0 (token {}) now holds sense {label}", first.token);

    // Senses are fixed points, so a second pass changes nothing.
    let mut again = Vec::new();
    let second = replace_stream(&dict, output.as_slice(), &mut again)?;
    assert_eq!(again, output);
    println!("second pass: mean squared error {}", second.mean_sq_error);
    Ok(())
}
