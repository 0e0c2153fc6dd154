//! `WPK1` packed genotype files.
//!
//! Layout, all integers little-endian:
//!
//! | field            | encoding                                              |
//! |------------------|-------------------------------------------------------|
//! | magic            | `b"WPK1"`                                             |
//! | n_subjects       | u64                                                   |
//! | n_markers        | u64                                                   |
//! | marker names     | per marker: u32 byte length, UTF-8 bytes              |
//! | phenotype        | ⌈n_subjects/64⌉ × u64, bit set for cases              |
//! | bitplanes        | marker-major blocks, see [`wtest_core::packed`]       |
//!
//! A marker block is planes 0, 1, 2, missing; each plane is ⌈N1/64⌉ case words
//! followed by ⌈N0/64⌉ control words.

use std::fs;
use std::path::Path;

use wtest_core::PackedGenotypes;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"WPK1";

pub fn encode(packed: &PackedGenotypes) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * packed.words().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(packed.n_subjects() as u64).to_le_bytes());
    out.extend_from_slice(&(packed.n_markers() as u64).to_le_bytes());
    for name in packed.marker_names() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for w in packed.phenotype_words().iter().chain(packed.words()) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!("truncated WPK1 file: {what} at byte {} runs past end", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn words(&mut self, n: usize, what: &str) -> Result<Vec<u64>> {
        let bytes = n.checked_mul(8).ok_or_else(|| Error::Format(format!("{what}: size overflow")))?;
        Ok(self.take(bytes, what)?.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<PackedGenotypes> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic: not a WPK1 file".into()));
    }
    let n_subjects = usize::try_from(cur.u64("subject count")?)
        .map_err(|_| Error::Format("subject count too large".into()))?;
    let n_markers = usize::try_from(cur.u64("marker count")?)
        .map_err(|_| Error::Format("marker count too large".into()))?;
    // every name costs at least its 4-byte length prefix
    if n_markers > bytes.len() / 4 {
        return Err(Error::Format(format!("truncated WPK1 file: {n_markers} markers declared")));
    }
    let mut names = Vec::with_capacity(n_markers);
    for m in 0..n_markers {
        let len = cur.u32("marker name length")? as usize;
        let raw = cur.take(len, "marker name")?;
        names.push(
            String::from_utf8(raw.to_vec())
                .map_err(|_| Error::Format(format!("marker {m}: name is not UTF-8")))?,
        );
    }
    let pheno_words = n_subjects.div_ceil(64);
    let phenotype = cur.words(pheno_words, "phenotype bitset")?;
    let n_cases: usize = phenotype.iter().map(|w| w.count_ones() as usize).sum();
    let n_cases = n_cases.min(n_subjects);
    let stride = 4 * (n_cases.div_ceil(64) + (n_subjects - n_cases).div_ceil(64));
    let total = stride
        .checked_mul(n_markers)
        .ok_or_else(|| Error::Format("bitplane size overflow".into()))?;
    let words = cur.words(total, "bitplanes")?;
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after bitplanes", bytes.len() - cur.pos)));
    }
    PackedGenotypes::from_raw_parts(n_subjects, names, phenotype, words).map_err(|e| match e {
        wtest_core::Error::Validation(m) => Error::Format(format!("corrupt WPK1 file: {m}")),
        other => other.into(),
    })
}

pub fn write_packed(packed: &PackedGenotypes, path: &Path) -> Result<()> {
    fs::write(path, encode(packed)).map_err(|e| Error::io(path, e))
}

pub fn read_packed(path: &Path) -> Result<PackedGenotypes> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// True when the file starts with the WPK1 magic.
pub fn is_packed(path: &Path) -> Result<bool> {
    use std::io::Read;
    let mut head = [0u8; 4];
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let n = f.read(&mut head).map_err(|e| Error::io(path, e))?;
    Ok(n == 4 && &head == MAGIC)
}
