//! The `.semb` embedding-stream format.
//!
//! A stream is a 20-byte header followed by records of
//! `token_id: u32 LE` and `dim` values in the header's dtype:
//!
//! ```text
//! 0..4   magic "SEMB"
//! 4..6   version u16 = 1
//! 6      dtype (0 = f32, 1 = f16)
//! 7      reserved = 0
//! 8..12  dim u32
//! 12..20 record_count u64 (u64::MAX = unknown, read until EOF)
//! ```

use std::collections::BTreeSet;
use std::io::{self, BufReader, BufWriter, Read, Write};

use crate::codec::{decode_value, put_value};
use crate::{Dtype, Embedding, Error, Result, TokenId};

pub const MAGIC: [u8; 4] = *b"SEMB";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 20;
const UNKNOWN_COUNT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordCount {
    Known(u64),
    /// Stream is EOF-delimited.
    Unknown,
}

impl RecordCount {
    fn to_raw(self) -> u64 {
        match self {
            RecordCount::Known(n) => n,
            RecordCount::Unknown => UNKNOWN_COUNT,
        }
    }

    fn from_raw(raw: u64) -> Self {
        if raw == UNKNOWN_COUNT {
            RecordCount::Unknown
        } else {
            RecordCount::Known(raw)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u16,
    pub dtype: Dtype,
    pub dim: u32,
    pub record_count: RecordCount,
}

impl StreamHeader {
    pub fn new(dtype: Dtype, dim: usize, record_count: RecordCount) -> Self {
        Self {
            version: VERSION,
            dtype,
            dim: dim as u32,
            record_count,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn record_len(&self) -> usize {
        4 + self.dim() * self.dtype.byte_width()
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[6] = self.dtype.code();
        out[7] = 0;
        out[8..12].copy_from_slice(&self.dim.to_le_bytes());
        out[12..20].copy_from_slice(&self.record_count.to_raw().to_le_bytes());
        out
    }
}

/// One token occurrence with its contextual embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceRecord {
    pub token: TokenId,
    pub embedding: Embedding,
}

impl OccurrenceRecord {
    pub fn new(token: impl Into<TokenId>, embedding: Embedding) -> Self {
        Self {
            token: token.into(),
            embedding,
        }
    }
}

/// Reads as many bytes as are available up to `buf.len()`.
fn read_full<R: Read>(src: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match src.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Parses the header, consuming exactly [`HEADER_LEN`] bytes.
pub fn read_header<R: Read>(src: &mut R) -> Result<StreamHeader> {
    let mut buf = [0u8; HEADER_LEN];
    let got = read_full(src, &mut buf)?;
    if got >= 4 && buf[0..4] != MAGIC {
        return Err(Error::BadMagic {
            expected: MAGIC,
            found: buf[0..4].try_into().unwrap(),
        });
    }
    if got < HEADER_LEN {
        return Err(Error::TruncatedFile);
    }
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = Dtype::from_code(buf[6])?;
    let dim = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    let record_count = RecordCount::from_raw(u64::from_le_bytes(buf[12..20].try_into().unwrap()));
    Ok(StreamHeader {
        version,
        dtype,
        dim,
        record_count,
    })
}

/// Iterator over the records that follow a header.
pub struct RecordReader<R> {
    src: R,
    header: StreamHeader,
    index: u64,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> RecordReader<R> {
    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Records yielded so far.
    pub fn position(&self) -> u64 {
        self.index
    }

    pub fn into_inner(self) -> R {
        self.src
    }

    fn next_record(&mut self) -> Result<Option<OccurrenceRecord>> {
        if let RecordCount::Known(n) = self.header.record_count {
            if self.index >= n {
                return Ok(None);
            }
        }
        let got = read_full(&mut self.src, &mut self.buf)?;
        if got == 0 && self.header.record_count == RecordCount::Unknown {
            return Ok(None);
        }
        if got < self.buf.len() {
            return Err(Error::TruncatedRecord { index: self.index });
        }
        let token = TokenId(u32::from_le_bytes(self.buf[0..4].try_into().unwrap()));
        let width = self.header.dtype.byte_width();
        let mut embedding = Vec::with_capacity(self.header.dim());
        for chunk in self.buf[4..].chunks_exact(width) {
            let v = decode_value(self.header.dtype, chunk);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { index: self.index });
            }
            embedding.push(v);
        }
        self.index += 1;
        Ok(Some(OccurrenceRecord { token, embedding }))
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<OccurrenceRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Streams records following `header`; f16 payloads are widened on read.
pub fn stream_records<R: Read>(src: R, header: StreamHeader) -> RecordReader<R> {
    RecordReader {
        src,
        buf: vec![0; header.record_len()],
        header,
        index: 0,
        done: false,
    }
}

/// Opens a stream: parses the header and returns a record iterator.
pub fn open<R: Read>(mut src: R) -> Result<RecordReader<R>> {
    let header = read_header(&mut src)?;
    Ok(stream_records(src, header))
}

/// Reads a whole stream into memory.
pub fn read_all<R: Read>(src: R) -> Result<(StreamHeader, Vec<OccurrenceRecord>)> {
    let reader = open(src)?;
    let header = *reader.header();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}

pub fn read_file(
    path: impl AsRef<std::path::Path>,
) -> Result<(StreamHeader, Vec<OccurrenceRecord>)> {
    read_all(BufReader::new(std::fs::File::open(path)?))
}

/// Incremental writer; the header is emitted on construction.
pub struct StreamWriter<W: Write> {
    sink: W,
    header: StreamHeader,
    written: u64,
    buf: Vec<u8>,
}

impl<W: Write> StreamWriter<W> {
    pub fn new(mut sink: W, header: StreamHeader) -> Result<Self> {
        if header.dim == 0 {
            return Err(Error::ZeroDim);
        }
        sink.write_all(&header.to_bytes())?;
        Ok(Self {
            sink,
            header,
            written: 0,
            buf: Vec::with_capacity(header.record_len()),
        })
    }

    pub fn write(&mut self, token: TokenId, embedding: &[f64]) -> Result<()> {
        if embedding.len() != self.header.dim() {
            return Err(Error::DimMismatch {
                expected: self.header.dim(),
                got: embedding.len(),
            });
        }
        if let RecordCount::Known(n) = self.header.record_count {
            if self.written >= n {
                return Err(Error::InvalidConfig(format!(
                    "stream header declares {n} records but more were written"
                )));
            }
        }
        self.buf.clear();
        self.buf.extend_from_slice(&token.0.to_le_bytes());
        for &v in embedding {
            put_value(&mut self.buf, self.header.dtype, v);
        }
        self.sink.write_all(&self.buf)?;
        self.written += 1;
        Ok(())
    }

    /// Flushes and checks the declared record count was met.
    pub fn finish(mut self) -> Result<(u64, W)> {
        if let RecordCount::Known(n) = self.header.record_count {
            if self.written != n {
                return Err(Error::InvalidConfig(format!(
                    "stream header declares {n} records but {} were written",
                    self.written
                )));
            }
        }
        self.sink.flush()?;
        Ok((self.written, self.sink))
    }
}

/// Writes `header` and every record; returns the record count.
pub fn write_stream<'a, W, I>(records: I, header: StreamHeader, sink: W) -> Result<u64>
where
    W: Write,
    I: IntoIterator<Item = &'a OccurrenceRecord>,
{
    let mut writer = StreamWriter::new(sink, header)?;
    for rec in records {
        writer.write(rec.token, &rec.embedding)?;
    }
    Ok(writer.finish()?.0)
}

/// Writes a complete stream with a known record count to `path`.
pub fn write_file(
    path: impl AsRef<std::path::Path>,
    dtype: Dtype,
    dim: usize,
    records: &[OccurrenceRecord],
) -> Result<u64> {
    let header = StreamHeader::new(dtype, dim, RecordCount::Known(records.len() as u64));
    let mut sink = BufWriter::new(std::fs::File::create(path)?);
    let n = write_stream(records, header, &mut sink)?;
    sink.flush()?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSummary {
    pub records: u64,
    pub distinct_tokens: usize,
    pub dim: usize,
}

/// Scans a whole stream and fails on its first structural error.
pub fn validate_stream<R: Read>(src: R) -> Result<StreamSummary> {
    let mut reader = open(src)?;
    let mut tokens = BTreeSet::new();
    for rec in reader.by_ref() {
        tokens.insert(rec?.token);
    }
    let records = reader.position();
    let dim = reader.header().dim();
    if let RecordCount::Known(_) = reader.header().record_count {
        let mut probe = [0u8; 1];
        if read_full(&mut reader.into_inner(), &mut probe)? != 0 {
            return Err(Error::Malformed(format!(
                "trailing bytes after {records} declared records"
            )));
        }
    }
    Ok(StreamSummary {
        records,
        distinct_tokens: tokens.len(),
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header_bytes(magic: &[u8; 4], dtype: u8, dim: u32, count: u64) -> Vec<u8> {
        let mut b = magic.to_vec();
        b.extend_from_slice(&1u16.to_le_bytes());
        b.push(dtype);
        b.push(0);
        b.extend_from_slice(&dim.to_le_bytes());
        b.extend_from_slice(&count.to_le_bytes());
        b
    }

    #[test]
    fn decodes_header_fields() {
        let bytes = header_bytes(b"SEMB", 0, 4, 2);
        let mut cursor = io::Cursor::new(&bytes);
        let h = read_header(&mut cursor).unwrap();
        assert_eq!(h.dtype, Dtype::F32);
        assert_eq!(h.dim, 4);
        assert_eq!(h.record_count, RecordCount::Known(2));
        assert_eq!(cursor.position(), HEADER_LEN as u64);
    }

    #[test]
    fn rejects_bad_magic_and_zero_dim() {
        let bytes = header_bytes(b"XXXX", 0, 4, 2);
        assert!(matches!(
            read_header(&mut bytes.as_slice()),
            Err(Error::BadMagic { .. })
        ));
        let bytes = header_bytes(b"SEMB", 0, 0, 2);
        assert!(matches!(
            read_header(&mut bytes.as_slice()),
            Err(Error::ZeroDim)
        ));
    }

    #[test]
    fn rejects_unknown_version() {
        let mut bytes = header_bytes(b"SEMB", 0, 4, 2);
        bytes[4] = 2;
        assert!(matches!(
            read_header(&mut bytes.as_slice()),
            Err(Error::UnsupportedVersion(2))
        ));
    }

    fn sample(n: usize, dim: usize) -> Vec<OccurrenceRecord> {
        (0..n)
            .map(|i| {
                OccurrenceRecord::new(
                    i as u32 % 3,
                    (0..dim).map(|j| (i * dim + j) as f64 * 0.25).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn two_records_read_back_in_order() {
        let recs = sample(2, 4);
        let mut buf = Vec::new();
        write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 4, RecordCount::Known(2)),
            &mut buf,
        )
        .unwrap();
        let (_, back) = read_all(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn truncated_mid_vector() {
        let recs = sample(2, 4);
        let mut buf = Vec::new();
        write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 4, RecordCount::Known(2)),
            &mut buf,
        )
        .unwrap();
        buf.truncate(buf.len() - 3);
        let err = read_all(buf.as_slice()).unwrap_err();
        assert!(matches!(err, Error::TruncatedRecord { index: 1 }));
    }

    #[test]
    fn truncated_mid_vector_unknown_count() {
        let recs = sample(3, 2);
        let mut buf = Vec::new();
        write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 2, RecordCount::Unknown),
            &mut buf,
        )
        .unwrap();
        assert_eq!(read_all(buf.as_slice()).unwrap().1.len(), 3);
        buf.pop();
        assert!(matches!(
            read_all(buf.as_slice()),
            Err(Error::TruncatedRecord { index: 2 })
        ));
    }

    #[test]
    fn nan_payload_is_rejected() {
        let mut buf = header_bytes(b"SEMB", 0, 2, 1);
        buf.extend_from_slice(&7u32.to_le_bytes());
        buf.extend_from_slice(&1.0f32.to_le_bytes());
        buf.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            read_all(buf.as_slice()),
            Err(Error::NonFiniteValue { index: 0 })
        ));
    }

    #[test]
    fn dim_mismatch_on_write() {
        let recs = vec![OccurrenceRecord::new(0, vec![1.0, 2.0, 3.0])];
        let err = write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 4, RecordCount::Unknown),
            io::sink(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DimMismatch {
                expected: 4,
                got: 3
            }
        ));
    }

    #[test]
    fn f16_representable_values_round_trip() {
        let recs: Vec<_> = (0..20)
            .map(|i| OccurrenceRecord::new(i, vec![i as f64 * 0.5, -0.125, 1024.0]))
            .collect();
        let mut buf = Vec::new();
        write_stream(
            &recs,
            StreamHeader::new(Dtype::F16, 3, RecordCount::Known(20)),
            &mut buf,
        )
        .unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 20 * (4 + 3 * 2));
        assert_eq!(read_all(buf.as_slice()).unwrap().1, recs);
    }

    #[test]
    fn validate_counts_tokens() {
        let recs: Vec<_> = (0..300)
            .map(|i| OccurrenceRecord::new(i % 3, vec![i as f64; 5]))
            .collect();
        let mut buf = Vec::new();
        write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 5, RecordCount::Known(300)),
            &mut buf,
        )
        .unwrap();
        let s = validate_stream(buf.as_slice()).unwrap();
        assert_eq!(
            s,
            StreamSummary {
                records: 300,
                distinct_tokens: 3,
                dim: 5
            }
        );
    }

    #[test]
    fn validate_empty_body() {
        let buf = header_bytes(b"SEMB", 0, 6, 0);
        let s = validate_stream(buf.as_slice()).unwrap();
        assert_eq!(
            s,
            StreamSummary {
                records: 0,
                distinct_tokens: 0,
                dim: 6
            }
        );
    }

    #[test]
    fn validate_short_body() {
        let recs = sample(4, 2);
        let mut buf = header_bytes(b"SEMB", 0, 2, 5);
        for r in &recs {
            buf.extend_from_slice(&r.token.0.to_le_bytes());
            for &v in &r.embedding {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        assert!(matches!(
            validate_stream(buf.as_slice()),
            Err(Error::TruncatedRecord { index: 4 })
        ));
    }

    #[test]
    fn writer_enforces_declared_count() {
        let recs = sample(2, 2);
        let err = write_stream(
            &recs,
            StreamHeader::new(Dtype::F32, 2, RecordCount::Known(3)),
            io::sink(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
