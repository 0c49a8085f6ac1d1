//! Drop-in quantization: every embedding is swapped for its token's nearest
//! sense, and the fidelity of the swap is reported.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dictionary::{nearest_sense, SenseDictionary};
use crate::store::{self, StreamHeader, StreamWriter};
use crate::{sq_dist, Error, Result, TokenId};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplacementReport {
    pub records: u64,
    pub replaced: u64,
    /// Records whose token is absent from the dictionary; passed through unchanged.
    pub fallbacks: u64,
    /// Mean of ‖m − s‖² over replaced records.
    pub mean_sq_error: f64,
    /// Per-token usage count of each sense, keyed by token id.
    pub sense_usage: BTreeMap<u32, Vec<u64>>,
}

/// Sense index the teacher embedding selects; the distillation class label.
pub fn teacher_label(
    dict: &SenseDictionary,
    token: TokenId,
    teacher_embedding: &[f64],
) -> Result<usize> {
    nearest_sense(dict, token, teacher_embedding)?
        .map(|m| m.index)
        .ok_or(Error::NotInDictionary(token))
}

/// Replaces every record of `input` and writes the result to `output` with
/// the input's header.
pub fn replace_stream<R: Read, W: Write>(
    dict: &SenseDictionary,
    input: R,
    output: W,
) -> Result<ReplacementReport> {
    let reader = store::open(input)?;
    let header: StreamHeader = *reader.header();
    if header.dim() != dict.dim {
        return Err(Error::DimMismatch {
            expected: dict.dim,
            got: header.dim(),
        });
    }
    let mut writer = StreamWriter::new(output, header)?;
    let mut report = ReplacementReport::default();
    let mut sq_err_sum = 0.0;

    for rec in reader {
        let rec = rec?;
        report.records += 1;
        match nearest_sense(dict, rec.token, &rec.embedding)? {
            Some(m) => {
                report.replaced += 1;
                sq_err_sum += sq_dist(&rec.embedding, m.sense);
                let usage = report
                    .sense_usage
                    .entry(rec.token.0)
                    .or_insert_with(|| vec![0; dict.get(rec.token).map_or(0, |s| s.len())]);
                usage[m.index] += 1;
                writer.write(rec.token, m.sense)?;
            }
            None => {
                report.fallbacks += 1;
                writer.write(rec.token, &rec.embedding)?;
            }
        }
    }
    writer.finish()?;
    if report.replaced > 0 {
        report.mean_sq_error = sq_err_sum / report.replaced as f64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::SenseSet;
    use crate::store::{read_all, write_stream, OccurrenceRecord, RecordCount};
    use crate::Dtype;

    fn dict() -> SenseDictionary {
        let mut d = SenseDictionary::new(2, Dtype::F32);
        d.insert(SenseSet {
            token: TokenId(1),
            senses: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            counts: vec![1, 1],
            total: 2,
        })
        .unwrap();
        d.insert(SenseSet {
            token: TokenId(2),
            senses: vec![vec![0.5, 0.5]],
            counts: vec![1],
            total: 1,
        })
        .unwrap();
        d
    }

    fn encode(records: &[OccurrenceRecord]) -> Vec<u8> {
        let mut buf = Vec::new();
        let header = StreamHeader::new(Dtype::F32, 2, RecordCount::Known(records.len() as u64));
        write_stream(records, header, &mut buf).unwrap();
        buf
    }

    #[test]
    fn sense_vectors_are_fixed_points() {
        let recs = vec![
            OccurrenceRecord::new(1, vec![0.0, 1.0]),
            OccurrenceRecord::new(1, vec![1.0, 0.0]),
            OccurrenceRecord::new(2, vec![0.5, 0.5]),
        ];
        let input = encode(&recs);
        let mut out = Vec::new();
        let report = replace_stream(&dict(), input.as_slice(), &mut out).unwrap();
        assert_eq!(out, input);
        assert_eq!(report.mean_sq_error, 0.0);
        assert_eq!(report.replaced, 3);
        assert_eq!(report.sense_usage[&1], vec![1, 1]);
    }

    #[test]
    fn unknown_tokens_pass_through() {
        let recs = vec![
            OccurrenceRecord::new(1, vec![0.9, 0.2]),
            OccurrenceRecord::new(7, vec![0.375, -0.25]),
        ];
        let mut out = Vec::new();
        let report = replace_stream(&dict(), encode(&recs).as_slice(), &mut out).unwrap();
        assert_eq!(report.fallbacks, 1);
        assert_eq!(report.replaced + report.fallbacks, report.records);
        let (_, back) = read_all(out.as_slice()).unwrap();
        assert_eq!(back[0].embedding, vec![1.0, 0.0]);
        assert_eq!(back[1], recs[1]);
        // Only the token-1 record is replaced; error is measured at f32-decoded input.
        let expected = (0.9f32 as f64 - 1.0).powi(2) + (0.2f32 as f64).powi(2);
        assert!((report.mean_sq_error - expected).abs() < 1e-15);
    }

    #[test]
    fn dim_mismatch() {
        let mut buf = Vec::new();
        write_stream(
            &[OccurrenceRecord::new(1, vec![1.0, 2.0, 3.0])],
            StreamHeader::new(Dtype::F32, 3, RecordCount::Known(1)),
            &mut buf,
        )
        .unwrap();
        assert!(matches!(
            replace_stream(&dict(), buf.as_slice(), std::io::sink()),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn teacher_label_rules() {
        let d = dict();
        assert_eq!(teacher_label(&d, TokenId(1), &[0.9, 0.1]).unwrap(), 0);
        assert_eq!(teacher_label(&d, TokenId(2), &[-3.0, 8.0]).unwrap(), 0);
        assert!(matches!(
            teacher_label(&d, TokenId(3), &[0.0, 0.0]),
            Err(Error::NotInDictionary(TokenId(3)))
        ));
    }

    #[test]
    fn report_json_keys_are_decimal_strings() {
        let mut r = ReplacementReport::default();
        r.sense_usage.insert(42, vec![3, 1]);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["sense_usage"]["42"], serde_json::json!([3, 1]));
        let mut fields: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        fields.sort();
        assert_eq!(
            fields,
            [
                "fallbacks",
                "mean_sq_error",
                "records",
                "replaced",
                "sense_usage"
            ]
        );
    }
}
