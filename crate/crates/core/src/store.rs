//! Binary embedding-store file format, shared by prompt banks, model
//! parameter files, and precomputed image features.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic   4 bytes  "QEMB"
//! version u16      currently 1
//! count   u32      number of vectors
//! dim     u32      vector dimension
//! payload count * dim f32, row-major
//! ids     count lines of UTF-8, newline-separated
//! ```
//!
//! Embedding stores hold unit-norm vectors and are validated as such on
//! both read and write (tolerance 1e-4). Parameter files reuse the same
//! container through the `raw` variants, which skip the norm check.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"QEMB";
pub const VERSION: u16 = 1;
const NORM_TOLERANCE: f32 = 1e-4;

/// In-memory contents of a store file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    pub ids: Vec<String>,
    pub dim: usize,
    /// `ids.len() * dim` values, row-major.
    pub vectors: Vec<f32>,
}

impl EmbeddingStore {
    pub fn new(ids: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if vectors.len() != ids.len() * dim {
            return Err(Error::invalid(format!(
                "store payload {} does not match {} vectors of dim {dim}",
                vectors.len(),
                ids.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for id in &ids {
            if id.contains('\n') {
                return Err(Error::invalid(format!("id `{id}` contains a newline")));
            }
            if !seen.insert(id) {
                return Err(Error::invalid(format!("duplicate id `{id}`")));
            }
        }
        Ok(Self { ids, dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vector(&self, row: usize) -> &[f32] {
        &self.vectors[row * self.dim..(row + 1) * self.dim]
    }

    pub fn find(&self, id: &str) -> Option<&[f32]> {
        self.ids.iter().position(|i| i == id).map(|row| self.vector(row))
    }

    fn check_norms(&self, path: &Path) -> Result<()> {
        for (row, id) in self.ids.iter().enumerate() {
            let norm: f32 = self.vector(row).iter().map(|v| v * v).sum::<f32>().sqrt();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::format(
                    path,
                    format!("vector `{id}` has norm {norm}, expected 1 within {NORM_TOLERANCE}"),
                ));
            }
        }
        Ok(())
    }
}

/// Writes an embedding store, validating that every vector is unit-norm.
pub fn store_write(path: impl AsRef<Path>, store: &EmbeddingStore) -> Result<()> {
    let path = path.as_ref();
    store.check_norms(path)?;
    store_write_raw(path, store)
}

/// Writes the container without the unit-norm requirement (parameter
/// blobs).
pub fn store_write_raw(path: impl AsRef<Path>, store: &EmbeddingStore) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(14 + store.vectors.len() * 4);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(store.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(store.dim as u32).to_le_bytes());
    for v in &store.vectors {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for id in &store.ids {
        bytes.extend_from_slice(id.as_bytes());
        bytes.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads an embedding store, validating layout and unit norms. Fails
/// closed: any truncation or mismatch is an error, never a partial result.
pub fn store_read(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let store = store_read_raw(path.as_ref())?;
    store.check_norms(path.as_ref())?;
    Ok(store)
}

/// Reads the container without the unit-norm check.
pub fn store_read_raw(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 14 {
        return Err(Error::format(
            path,
            format!("file too short ({} bytes) for a store header", bytes.len()),
        ));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {:02x?}, expected {:02x?} (\"QEMB\")", &bytes[0..4], MAGIC),
        ));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}, expected {VERSION}")));
    }
    let count = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let payload_len = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(path, "count * dim overflows"))?;
    let ids_start = 14 + payload_len;
    if bytes.len() < ids_start {
        return Err(Error::format(
            path,
            format!("truncated payload: need {payload_len} bytes for {count} x {dim} floats"),
        ));
    }
    let mut vectors = Vec::with_capacity(count * dim);
    for chunk in bytes[14..ids_start].chunks_exact(4) {
        vectors.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    let id_block = std::str::from_utf8(&bytes[ids_start..])
        .map_err(|_| Error::format(path, "id block is not valid UTF-8"))?;
    let ids: Vec<String> = id_block.lines().map(str::to_string).collect();
    if ids.len() != count {
        return Err(Error::format(path, format!("id block has {} lines, expected {count}", ids.len())));
    }
    EmbeddingStore::new(ids, dim, vectors).map_err(|e| Error::format(path, e.to_string()))
}
