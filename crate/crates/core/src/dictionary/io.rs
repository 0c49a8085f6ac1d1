//! `.sdict` persistence.
//!
//! Little-endian layout: magic "SDCT", version u16, dtype u8, reserved u8,
//! dim u32, token_count u32, seed u64, flags u32; then per token (ascending
//! id) token_id u32, n_senses u16, total u64 and n_senses × (count u32,
//! dim values); finally a CRC-32 of everything before it.

use std::io::Write;
use std::path::Path;

use super::{SenseDictionary, SenseSet};
use crate::codec::{check_magic, put_value, seal, unseal, ByteReader};
use crate::{Dtype, Error, Result, TokenId};

pub const MAGIC: [u8; 4] = *b"SDCT";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 28;

/// Exact size in bytes of the serialized dictionary.
pub fn serialized_len(dict: &SenseDictionary) -> u64 {
    let per_sense = 4 + dict.dim as u64 * dict.dtype.byte_width() as u64;
    let body: u64 = dict
        .entries
        .values()
        .map(|s| 4 + 2 + 8 + s.len() as u64 * per_sense)
        .sum();
    HEADER_LEN as u64 + body + 4
}

pub fn to_bytes(dict: &SenseDictionary) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(serialized_len(dict) as usize);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(dict.dtype.code());
    buf.push(0);
    buf.extend_from_slice(&(dict.dim as u32).to_le_bytes());
    let token_count = u32::try_from(dict.len())
        .map_err(|_| Error::InvalidConfig("too many tokens for .sdict".into()))?;
    buf.extend_from_slice(&token_count.to_le_bytes());
    buf.extend_from_slice(&dict.seed.to_le_bytes());
    buf.extend_from_slice(&dict.flags.to_le_bytes());

    for set in dict.entries.values() {
        let n = u16::try_from(set.len()).map_err(|_| {
            Error::InvalidConfig(format!("token {} has too many senses", set.token))
        })?;
        buf.extend_from_slice(&set.token.0.to_le_bytes());
        buf.extend_from_slice(&n.to_le_bytes());
        buf.extend_from_slice(&set.total.to_le_bytes());
        for (sense, &count) in set.senses.iter().zip(&set.counts) {
            if sense.len() != dict.dim {
                return Err(Error::DimMismatch {
                    expected: dict.dim,
                    got: sense.len(),
                });
            }
            buf.extend_from_slice(&count.to_le_bytes());
            for &v in sense {
                put_value(&mut buf, dict.dtype, v);
            }
        }
    }
    seal(&mut buf);
    Ok(buf)
}

pub fn serialize<W: Write>(dict: &SenseDictionary, mut sink: W) -> Result<u64> {
    let bytes = to_bytes(dict)?;
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len() as u64)
}

/// Parses a dictionary, verifying the CRC footer before decoding the body.
pub fn deserialize(bytes: &[u8]) -> Result<SenseDictionary> {
    check_magic(bytes, &MAGIC)?;
    if bytes.len() < HEADER_LEN + 4 {
        return Err(Error::TruncatedFile);
    }
    let payload = unseal(bytes)?;
    let mut r = ByteReader::new(payload);
    r.take(4)?;
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = Dtype::from_code(r.u8()?)?;
    r.u8()?;
    let dim = r.u32()? as usize;
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    let token_count = r.u32()?;
    let mut dict = SenseDictionary::new(dim, dtype);
    dict.seed = r.u64()?;
    dict.flags = r.u32()?;

    let mut prev: Option<u32> = None;
    for _ in 0..token_count {
        let token = r.u32()?;
        if prev.is_some_and(|p| p >= token) {
            return Err(Error::Malformed(format!(
                "token ids not strictly ascending at {token}"
            )));
        }
        prev = Some(token);
        let n = r.u16()? as usize;
        if n == 0 {
            return Err(Error::Malformed(format!("token {token} has no senses")));
        }
        let total = r.u64()?;
        let mut senses = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            counts.push(r.u32()?);
            senses.push(r.values(dtype, dim)?);
        }
        if counts.iter().map(|&c| c as u64).sum::<u64>() != total {
            return Err(Error::Malformed(format!(
                "token {token}: counts do not sum to total"
            )));
        }
        let token = TokenId(token);
        dict.entries.insert(
            token,
            SenseSet {
                token,
                senses,
                counts,
                total,
            },
        );
    }
    if !r.is_empty() {
        return Err(Error::Malformed("trailing bytes before footer".into()));
    }
    Ok(dict)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<SenseDictionary> {
    deserialize(&std::fs::read(path)?)
}

pub fn write_file(dict: &SenseDictionary, path: impl AsRef<Path>) -> Result<u64> {
    serialize(dict, std::io::BufWriter::new(std::fs::File::create(path)?))
}
