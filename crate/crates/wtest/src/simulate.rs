//! Synthetic datasets under Hardy–Weinberg equilibrium.
//!
//! Null datasets have a phenotype independent of every marker. Each marker's
//! minor-allele frequency is drawn uniformly from `[maf_min, maf_max]`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtest_core::{GenotypeDataset, MISSING};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_subjects: usize,
    pub n_markers: usize,
    pub n_cases: usize,
    pub maf_min: f64,
    pub maf_max: f64,
    pub missing_rate: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Balanced case/control null design, MAF in [0.05, 0.5], no missing calls.
    pub fn null(n_subjects: usize, n_markers: usize, seed: u64) -> Self {
        Self {
            n_subjects,
            n_markers,
            n_cases: n_subjects / 2,
            maf_min: 0.05,
            maf_max: 0.5,
            missing_rate: 0.0,
            seed,
        }
    }
}

fn genotype(rng: &mut impl Rng, maf: f64) -> u8 {
    rng.random_bool(maf) as u8 + rng.random_bool(maf) as u8
}

pub fn simulate_null(cfg: &SimConfig) -> Result<GenotypeDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut phenotype: Vec<u8> = (0..cfg.n_subjects).map(|s| (s < cfg.n_cases) as u8).collect();
    phenotype.shuffle(&mut rng);
    let width = cfg.n_markers.to_string().len();
    let mut names = Vec::with_capacity(cfg.n_markers);
    let mut columns = Vec::with_capacity(cfg.n_markers);
    for m in 0..cfg.n_markers {
        let maf = rng.random_range(cfg.maf_min..=cfg.maf_max);
        let col = (0..cfg.n_subjects)
            .map(|_| {
                if cfg.missing_rate > 0.0 && rng.random_bool(cfg.missing_rate) {
                    MISSING
                } else {
                    genotype(&mut rng, maf)
                }
            })
            .collect();
        names.push(format!("snp{m:0width$}"));
        columns.push(col);
    }
    Ok(GenotypeDataset::new(names, columns, phenotype)?)
}
