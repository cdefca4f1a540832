//! Versioned binary weight files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        4 bytes  "LLWS"
//! version      u32      1
//! fingerprint  u64      architecture fingerprint
//! count        u32      number of entries
//! per entry:
//!   name_len   u32
//!   name       name_len bytes, UTF-8
//!   ndim       u32
//!   dims       ndim × u32
//!   data       prod(dims) × f32
//! ```
//!
//! Trailing bytes after the last entry are an error.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const WEIGHTS_MAGIC: &[u8; 4] = b"LLWS";
pub const WEIGHTS_VERSION: u32 = 1;

/// Named parameter tensors plus the fingerprint of the producing spec.
/// Values are held at f32 precision, so saving and loading is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStore {
    fingerprint: u64,
    entries: Vec<(String, Tensor)>,
}

impl WeightStore {
    /// Rounds every value to f32; names must be unique.
    pub fn new(fingerprint: u64, entries: Vec<(String, Tensor)>) -> Result<Self> {
        let mut names: Vec<&str> = entries.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Format(format!("duplicate entry {:?}", w[0])));
        }
        let entries = entries
            .into_iter()
            .map(|(n, t)| (n, t.map(|v| v as f32 as f64)))
            .collect();
        Ok(Self {
            fingerprint,
            entries,
        })
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

pub fn save_weights(store: &WeightStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&store.fingerprint.to_le_bytes());
    out.extend_from_slice(&(store.entries.len() as u32).to_le_bytes());
    for (name, t) in &store.entries {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in t.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "truncated at byte {} while reading {what}",
                    self.pos
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8, what)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn load_weights(bytes: &[u8]) -> Result<WeightStore> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != WEIGHTS_MAGIC {
        return Err(Error::Format("not a weight file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != WEIGHTS_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version} (expected {WEIGHTS_VERSION})"
        )));
    }
    let fingerprint = r.u64("fingerprint")?;
    let count = r.u32("entry count")? as usize;
    let mut entries = Vec::new();
    for i in 0..count {
        let len = r.u32("name length")? as usize;
        let name = std::str::from_utf8(r.take(len, "name")?)
            .map_err(|_| Error::Format(format!("entry {i}: name is not UTF-8")))?
            .to_string();
        let ndim = r.u32("rank")? as usize;
        if ndim == 0 || ndim > 8 {
            return Err(Error::Format(format!("{name}: unsupported rank {ndim}")));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u32("dimension")? as usize);
        }
        let numel = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Format(format!("{name}: invalid shape {shape:?}")))?;
        let nbytes = numel
            .checked_mul(4)
            .ok_or_else(|| Error::Format(format!("{name}: shape too large")))?;
        let data = r
            .take(nbytes, "tensor data")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect();
        let t = Tensor::new(&shape, data).map_err(|e| Error::Format(e.to_string()))?;
        entries.push((name, t));
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last entry",
            bytes.len() - r.pos
        )));
    }
    WeightStore::new(fingerprint, entries)
}
