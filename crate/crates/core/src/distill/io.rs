//! `.skdm` model files: magic "SKDM", version u16, feature_dim u32,
//! hidden_dim u32, teacher_dim u32, activation u8, 3 reserved bytes, then
//! W1, b1, W2, b2 as row-major f32 (W1/b1 absent when hidden_dim = 0) and a
//! CRC-32 footer.

use std::io::Write;
use std::path::Path;

use super::model::{Activation, StudentModel};
use crate::codec::{check_magic, put_value, seal, unseal, ByteReader};
use crate::{Dtype, Error, Result};

pub const MAGIC: [u8; 4] = *b"SKDM";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 22;

/// Weights are narrowed to f32.
pub fn to_bytes(model: &StudentModel) -> Result<Vec<u8>> {
    model.validate()?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * model.parameter_count() + 4);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for d in [model.feature_dim, model.hidden_dim, model.teacher_dim] {
        let d =
            u32::try_from(d).map_err(|_| Error::InvalidConfig("dimension exceeds u32".into()))?;
        buf.extend_from_slice(&d.to_le_bytes());
    }
    buf.push(model.activation.code());
    buf.extend_from_slice(&[0; 3]);
    for &v in model
        .w1
        .iter()
        .chain(&model.b1)
        .chain(&model.w2)
        .chain(&model.b2)
    {
        put_value(&mut buf, Dtype::F32, v);
    }
    seal(&mut buf);
    Ok(buf)
}

pub fn save_model<W: Write>(model: &StudentModel, mut sink: W) -> Result<u64> {
    let bytes = to_bytes(model)?;
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len() as u64)
}

pub fn load_model(bytes: &[u8]) -> Result<StudentModel> {
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
    let feature_dim = r.u32()? as usize;
    let hidden_dim = r.u32()? as usize;
    let teacher_dim = r.u32()? as usize;
    let activation = Activation::from_code(r.u8()?)?;
    r.take(3)?;
    if feature_dim == 0 || teacher_dim == 0 {
        return Err(Error::ZeroDim);
    }
    let mut model = StudentModel::zeros(feature_dim, hidden_dim, teacher_dim, activation);
    for t in model.tensors_mut() {
        *t = r.values(Dtype::F32, t.len())?;
    }
    if !r.is_empty() {
        return Err(Error::Malformed("trailing bytes before footer".into()));
    }
    Ok(model)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<StudentModel> {
    load_model(&std::fs::read(path)?)
}

pub fn write_file(model: &StudentModel, path: impl AsRef<Path>) -> Result<u64> {
    save_model(model, std::io::BufWriter::new(std::fs::File::create(path)?))
}
