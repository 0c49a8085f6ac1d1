//! Little-endian primitives shared by the binary formats.

use crate::{Dtype, Error, Result};

pub(crate) fn put_value(buf: &mut Vec<u8>, dtype: Dtype, v: f64) {
    match dtype {
        Dtype::F32 => buf.extend_from_slice(&(v as f32).to_le_bytes()),
        Dtype::F16 => buf.extend_from_slice(&half::f16::from_f64(v).to_le_bytes()),
    }
}

pub(crate) fn decode_value(dtype: Dtype, bytes: &[u8]) -> f64 {
    match dtype {
        Dtype::F32 => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        Dtype::F16 => half::f16::from_le_bytes(bytes.try_into().unwrap()).to_f64(),
    }
}

/// Appends the CRC-32 (reflected, poly 0xEDB88320) of `buf` to itself.
pub(crate) fn seal(buf: &mut Vec<u8>) {
    let crc = crc32fast::hash(buf);
    buf.extend_from_slice(&crc.to_le_bytes());
}

/// Verifies the trailing CRC-32 footer and returns the covered payload.
pub(crate) fn unseal(bytes: &[u8]) -> Result<&[u8]> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile);
    }
    let (payload, footer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(footer.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    Ok(payload)
}

/// Cursor over an in-memory payload; running out of bytes is `TruncatedFile`.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::TruncatedFile)?;
        let out = self.bytes.get(self.pos..end).ok_or(Error::TruncatedFile)?;
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn values(&mut self, dtype: Dtype, n: usize) -> Result<Vec<f64>> {
        let w = dtype.byte_width();
        let raw = self.take(n.checked_mul(w).ok_or(Error::TruncatedFile)?)?;
        let vals: Vec<f64> = raw
            .chunks_exact(w)
            .map(|c| decode_value(dtype, c))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("non-finite value".into()));
        }
        Ok(vals)
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

pub(crate) fn check_magic(bytes: &[u8], expected: &[u8; 4]) -> Result<()> {
    let found: [u8; 4] = match bytes.get(..4) {
        Some(m) => m.try_into().unwrap(),
        None => return Err(Error::TruncatedFile),
    };
    if &found != expected {
        return Err(Error::BadMagic {
            expected: *expected,
            found,
        });
    }
    Ok(())
}
