//! Writes, validates, and streams `.semb` embedding files, including open-ended streams and f16 payloads.
//!
//! cargo run --release --example stream_io [path/to/file.semb]

use std::fs::File;
use std::io::BufReader;

use sensedict::store::{self, OccurrenceRecord, RecordCount, StreamHeader, StreamWriter};
use sensedict::{Dtype, TokenId};

fn main() -> sensedict::Result<()> {
    if let Some(path) = std::env::args().nth(1) {
        let summary = store::validate_stream(BufReader::new(File::open(&path)?))?;
        println!(
            "{path}: {} records, {} distinct tokens, dim {}",
            summary.records, summary.distinct_tokens, summary.dim
        );
        return Ok(());
    }

    let dir = tempfile::tempdir()?;
    let records: Vec<OccurrenceRecord> = (0..6u32)
        .map(|i| OccurrenceRecord::new(i % 3, vec![i as f64 * 0.5, -1.0, 0.25]))
        .collect();

    let known = dir.path().join("known.semb");
    store::write_file(&known, Dtype::F32, 3, &records)?;
    let summary = store::validate_stream(BufReader::new(File::open(&known)?))?;
    println!("known count: {summary:?}");

    // An extractor that does not know its record count up front.
    let open_ended = dir.path().join("open.semb");
    let header = StreamHeader::new(Dtype::F16, 3, RecordCount::Unknown);
    let mut writer = StreamWriter::new(File::create(&open_ended)?, header)?;
    for r in &records {
        writer.write(r.token, &r.embedding)?;
    }
    let (written, _) = writer.finish()?;
    println!(
        "open-ended f16 stream: {written} records, {} bytes",
        std::fs::metadata(&open_ended)?.len()
    );

    let reader = store::open(BufReader::new(File::open(&open_ended)?))?;
    println!("header: {:?}", reader.header());
    for rec in reader {
        let rec = rec?;
        if rec.token == TokenId(1) {
            println!("token 1 -> {:?}", rec.embedding);
        }
    }

    let mut truncated = std::fs::read(&known)?;
    truncated.pop();
    match store::validate_stream(truncated.as_slice()) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("truncated file rejected: {e}"),
    }
    Ok(())
}
