//! Binary model format.
//!
//! All integers are little-endian `u32`, all parameters little-endian `f32`:
//!
//! ```text
//! "LNDN"  version
//! embed_dim hidden_dim window vocab_size label_count keep_prob(f32)
//! codepoint_count  codepoint*            (indices 2.. of the vocabulary)
//! label_count      (byte_len utf8_bytes)*
//! tensors in `tensor_layout` order, row-major
//! ```

use std::path::Path;

use crate::corpus::{LabelSet, Vocabulary};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::network::{tensor_layout, ModelConfig, ModelParams};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"LNDN";
pub const VERSION: u32 = 1;

/// Largest vocabulary a file may declare: every Unicode scalar plus the two
/// reserved entries.
const MAX_VOCAB: usize = 0x11_0000 + 2;
const MAX_TAG_BYTES: usize = 4;

/// Serializes a model. Parameters are stored as `f32` whatever `T` is.
pub fn encode_model<T: Scalar>(model: &Model<T>) -> Result<Vec<u8>> {
    let c = &model.config;
    let mut out = Vec::with_capacity(64 + model.params.parameter_count() * 4);
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, VERSION);
    for v in [c.embed_dim, c.hidden_dim, c.window, c.vocab_size, c.label_count] {
        put_u32(&mut out, to_u32(v, "config field")?);
    }
    out.extend_from_slice(&(c.keep_prob as f32).to_le_bytes());
    let cps = model.vocab.codepoints();
    put_u32(&mut out, to_u32(cps.len(), "vocabulary size")?);
    for &cp in cps {
        put_u32(&mut out, cp as u32);
    }
    put_u32(&mut out, to_u32(model.labels.len(), "label count")?);
    for tag in model.labels.tags() {
        put_u32(&mut out, tag.len() as u32);
        out.extend_from_slice(tag.as_bytes());
    }
    for t in model.params.tensors() {
        for &x in t {
            out.extend_from_slice(&x.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save_model<T: Scalar>(model: &Model<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model<f32>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

/// Parses a model file. Every length is checked against the bytes that are
/// actually present before anything is allocated for it.
pub fn decode_model(bytes: &[u8]) -> Result<Model<f32>> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            found: [magic[0], magic[1], magic[2], magic[3]],
        });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let config_at = r.pos;
    let mut dims = [0usize; 5];
    for d in &mut dims {
        *d = r.u32()? as usize;
    }
    let keep_prob = r.f32()? as f64;
    let config = ModelConfig {
        embed_dim: dims[0],
        hidden_dim: dims[1],
        window: dims[2],
        vocab_size: dims[3],
        label_count: dims[4],
        keep_prob,
    };
    if config.vocab_size > MAX_VOCAB || config.vocab_size < 2 {
        return Err(Error::SizeOverflow {
            offset: config_at + 12,
            what: format!("vocabulary size {} outside [2, {MAX_VOCAB}]", config.vocab_size),
        });
    }
    config.validate().map_err(|e| Error::Corrupt {
        offset: config_at,
        message: e.to_string(),
    })?;

    let at = r.pos;
    let n_cp = r.u32()? as usize;
    if n_cp + 2 != config.vocab_size {
        return Err(Error::Corrupt {
            offset: at,
            message: format!("{n_cp} codepoints do not match vocabulary size {}", config.vocab_size),
        });
    }
    r.need(n_cp * 4)?;
    let mut cps = Vec::with_capacity(n_cp);
    for _ in 0..n_cp {
        let at = r.pos;
        let v = r.u32()?;
        cps.push(char::from_u32(v).ok_or_else(|| Error::Corrupt {
            offset: at,
            message: format!("{v:#x} is not a Unicode scalar value"),
        })?);
    }
    let vocab = Vocabulary::from_codepoints(cps).map_err(|e| Error::Corrupt {
        offset: at,
        message: e.to_string(),
    })?;

    let at = r.pos;
    let n_labels = r.u32()? as usize;
    if n_labels != config.label_count {
        return Err(Error::Corrupt {
            offset: at,
            message: format!("{n_labels} labels do not match label count {}", config.label_count),
        });
    }
    r.need(n_labels.checked_mul(4).ok_or_else(|| overflow(at, "label table"))?)?;
    let mut tags = Vec::with_capacity(n_labels);
    for _ in 0..n_labels {
        let at = r.pos;
        let len = r.u32()? as usize;
        if len > MAX_TAG_BYTES {
            return Err(Error::Corrupt {
                offset: at,
                message: format!("tag length {len} exceeds {MAX_TAG_BYTES}"),
            });
        }
        let raw = r.take(len)?;
        let tag = std::str::from_utf8(raw).map_err(|_| Error::Corrupt {
            offset: at + 4,
            message: "tag is not UTF-8".into(),
        })?;
        tags.push(tag.to_string());
    }
    let labels = LabelSet::new(tags).map_err(|e| Error::Corrupt {
        offset: at,
        message: e.to_string(),
    })?;

    let at = r.pos;
    let layout = tensor_layout(&config);
    let mut total: usize = 0;
    for (name, rows, cols) in &layout {
        let n = rows
            .checked_mul(*cols)
            .and_then(|n| total.checked_add(n))
            .ok_or_else(|| overflow(at, &format!("tensor {name}")))?;
        total = n;
    }
    let byte_len = total.checked_mul(4).ok_or_else(|| overflow(at, "parameter block"))?;
    r.need(byte_len)?;
    let mut params = ModelParams::<f32>::zeros(&config);
    for t in params.tensors_mut() {
        for x in t.iter_mut() {
            *x = r.f32()?;
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Corrupt {
            offset: r.pos,
            message: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }
    Model::new(config, vocab, labels, params)
}

fn overflow(offset: usize, what: &str) -> Error {
    Error::SizeOverflow {
        offset,
        what: format!("{what} size does not fit in memory"),
    }
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Parameter(format!("{what} {v} does not fit the model format")))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn need(&self, n: usize) -> Result<()> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(Error::Truncated {
                offset: self.bytes.len(),
                needed: n - left,
            });
        }
        Ok(())
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        self.need(n)?;
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self) -> Result<f32> {
        let b = self.take(4)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
