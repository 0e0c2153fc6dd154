//! Core statistics for the W-test of association between categorical
//! genotype markers and a binary phenotype.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command line, parallel drivers and plotting live in the `wtest` crate.
//!
//! Pipeline:
//!   GenotypeDataset → (naive | packed) contingency tables → per-cell log odds
//!   ratios → S = Σ (log OR / SE)² → W = h(k)·S ~ χ²_f(k)
//!
//! The per-k calibration pair (h, f) is either the large-sample default or is
//! estimated by moment matching on permuted-phenotype replicates ([`hf`]).
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod hf;
pub mod null;
pub mod packed;
pub mod scan;
pub mod special;
pub mod stats;
pub mod table;
pub mod wstat;

pub use dataset::{GenotypeDataset, MISSING};
pub use error::{Error, Result};
pub use hf::{default_hf, EntrySource, HfEntry, HfTable, Order, Provenance};
pub use null::{null_w_samples, NullWSamples};
pub use packed::PackedGenotypes;
pub use scan::{AssociationResult, ScanConfig, ScanOutcome};
pub use special::{chisq_cdf, chisq_pdf, chisq_quantile, chisq_sf};
pub use table::{tabulate_pair, tabulate_single, Cell, ContingencyTable};
pub use wstat::{cell_log_odds, s_statistic, w_test, OddsCell, WStatistic};
