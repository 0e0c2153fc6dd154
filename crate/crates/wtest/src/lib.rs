//! File formats, multi-threaded drivers, diagnostics, benchmarks and the
//! command-line front end for the W-test.
//!
//! The statistics live in [`wtest_core`]; this crate adds everything that
//! needs the operating system.

pub mod bench;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod hf_io;
pub mod parallel;
pub mod results;
pub mod simulate;
pub mod svg;
pub mod text;
pub mod wpk;

use std::path::Path;

pub use error::{Error, Result};
pub use wtest_core;

use text::PhenotypeSource;
use wtest_core::GenotypeDataset;

/// Loads a genotype file, packed (`WPK1`) or delimited text. Packed files carry
/// their own phenotype, so `phenotype` and `missing_token` only apply to text.
pub fn load_dataset(path: &Path, phenotype: &PhenotypeSource, missing_token: &str) -> Result<GenotypeDataset> {
    if wpk::is_packed(path)? {
        Ok(wpk::read_packed(path)?.unpack().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?)
    } else {
        text::load_text(path, phenotype, missing_token)
    }
}
