//! Permuted-phenotype replicates of the raw statistic S.
//!
//! Replicate `r` under `seed` draws from a ChaCha8 stream selected by
//! `(seed, purpose, r)`, so any subset of replicates can be computed on any
//! thread and pooled in replicate order with identical results.
//!
//! Permutation work uses unsplit subject-order bitplanes (one per genotype
//! code) and a case mask rebuilt for each replicate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};
use crate::hf::{HfTable, Order};
use crate::packed::{and_popcount, words_for};
use crate::scan::{pair_at, pair_count};
use crate::table::{ContingencyTable, MAX_CATEGORIES};
use crate::wstat::table_s;

/// Keeps diagnostic replicates disjoint from estimation replicates that use
/// the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Estimate,
    Diagnose,
}

impl Purpose {
    fn stream(self, replicate: u64) -> u64 {
        let domain = match self {
            Purpose::Estimate => 0u64,
            Purpose::Diagnose => 1u64,
        };
        (domain << 56) | replicate
    }
}

pub struct NullSampler<'a> {
    dataset: &'a GenotypeDataset,
    order: Order,
    testable: Vec<usize>,
    words: usize,
    /// Three planes per testable marker, each `words` long.
    planes: Vec<u64>,
    totals: Vec<[u32; 3]>,
    n_units: u64,
}

impl<'a> NullSampler<'a> {
    pub fn new(dataset: &'a GenotypeDataset, order: Order) -> Result<Self> {
        let testable = dataset.testable_markers();
        let n_units = match order {
            Order::Main => testable.len() as u64,
            Order::Pair => pair_count(testable.len()),
        };
        if n_units == 0 {
            return Err(Error::Estimation(alloc::format!(
                "{} testable markers, too few for order {}",
                testable.len(),
                order.number()
            )));
        }
        let words = words_for(dataset.n_subjects());
        let mut planes = vec![0u64; 3 * words * testable.len()];
        let mut totals = vec![[0u32; 3]; testable.len()];
        for (slot, &m) in testable.iter().enumerate() {
            let block = &mut planes[slot * 3 * words..(slot + 1) * 3 * words];
            for (s, &g) in dataset.column(m).iter().enumerate() {
                if g != MISSING {
                    block[g as usize * words + s / 64] |= 1 << (s % 64);
                    totals[slot][g as usize] += 1;
                }
            }
        }
        Ok(Self { dataset, order, testable, words, planes, totals, n_units })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Markers or pairs available to draw from.
    pub fn n_units(&self) -> u64 {
        self.n_units
    }

    pub fn testable(&self) -> &[usize] {
        &self.testable
    }

    fn rng(&self, seed: u64, purpose: Purpose, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(purpose.stream(replicate));
        rng
    }

    pub fn permuted_phenotype(&self, seed: u64, purpose: Purpose, replicate: u64) -> Vec<u8> {
        let mut rng = self.rng(seed, purpose, replicate);
        let mut y = self.dataset.phenotype().to_vec();
        y.shuffle(&mut rng);
        y
    }

    /// Dataset marker indices behind a unit (second is `None` for order 1).
    pub fn unit_markers(&self, unit: u64) -> (usize, Option<usize>) {
        match self.order {
            Order::Main => (self.testable[unit as usize], None),
            Order::Pair => {
                let (i, j) = pair_at(unit, self.testable.len());
                (self.testable[i], Some(self.testable[j]))
            }
        }
    }

    fn plane(&self, slot: usize, code: usize) -> &[u64] {
        let start = (slot * 3 + code) * self.words;
        &self.planes[start..start + self.words]
    }

    /// Table of one unit under the phenotype given as a subject-order case mask.
    pub fn unit_table(&self, unit: u64, case_mask: &[u64]) -> Result<ContingencyTable> {
        match self.order {
            Order::Main => {
                let slot = unit as usize;
                let mut cases = [0u32; 3];
                let mut controls = [0u32; 3];
                for code in 0..3 {
                    cases[code] = and_popcount(self.plane(slot, code), case_mask);
                    controls[code] = self.totals[slot][code] - cases[code];
                }
                ContingencyTable::from_counts(&cases, &controls)
            }
            Order::Pair => {
                let (i, j) = pair_at(unit, self.testable.len());
                let mut cases = [0u32; MAX_CATEGORIES];
                let mut controls = [0u32; MAX_CATEGORIES];
                for g1 in 0..3 {
                    let a = self.plane(i, g1);
                    for g2 in 0..3 {
                        let b = self.plane(j, g2);
                        let (mut n1, mut n) = (0u32, 0u32);
                        for ((x, y), m) in a.iter().zip(b).zip(case_mask) {
                            let joint = x & y;
                            n += joint.count_ones();
                            n1 += (joint & m).count_ones();
                        }
                        cases[3 * g1 + g2] = n1;
                        controls[3 * g1 + g2] = n - n1;
                    }
                }
                ContingencyTable::from_counts(&cases, &controls)
            }
        }
    }

    /// One replicate: permute the phenotype, draw `n_sample` units (without
    /// replacement unless the pool is smaller), and return (k, S) for every
    /// draw with k ≥ 2.
    pub fn replicate(&self, n_sample: usize, seed: u64, purpose: Purpose, replicate: u64) -> Vec<(usize, f64)> {
        let mut rng = self.rng(seed, purpose, replicate);
        let mut y = self.dataset.phenotype().to_vec();
        y.shuffle(&mut rng);
        let mut mask = vec![0u64; self.words];
        for (s, &v) in y.iter().enumerate() {
            if v == 1 {
                mask[s / 64] |= 1 << (s % 64);
            }
        }
        let units: Vec<u64> = if self.n_units >= n_sample as u64 {
            index::sample(&mut rng, self.n_units as usize, n_sample)
                .into_iter()
                .map(|u| u as u64)
                .collect()
        } else {
            (0..n_sample).map(|_| rng.random_range(0..self.n_units)).collect()
        };
        let mut out = Vec::with_capacity(units.len());
        for unit in units {
            if let Ok(table) = self.unit_table(unit, &mask) {
                if table.k() >= 2 {
                    out.push((table.k(), table_s(&table)));
                }
            }
        }
        out
    }
}

/// Null W values bucketed by k.
#[derive(Debug, Clone, PartialEq)]
pub struct NullWSamples {
    pub order: Order,
    pub by_k: BTreeMap<usize, Vec<f64>>,
    pub hf: HfTable,
}

impl NullWSamples {
    /// Scales pooled (k, S) draws by h(k), in replicate order.
    pub fn from_replicates(order: Order, hf: &HfTable, replicates: &[Vec<(usize, f64)>]) -> Result<Self> {
        hf.expect_order(order)?;
        let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for draws in replicates {
            for &(k, s) in draws {
                let e = hf.get(k).ok_or(Error::MissingHf { k })?;
                by_k.entry(k).or_default().push(e.h * s);
            }
        }
        Ok(Self { order, by_k, hf: hf.clone() })
    }

    pub fn total(&self) -> usize {
        self.by_k.values().map(Vec::len).sum()
    }

    pub fn count(&self, k: usize) -> usize {
        self.by_k.get(&k).map_or(0, Vec::len)
    }
}

/// Sequential null W sampling for diagnostics.
pub fn null_w_samples(
    dataset: &GenotypeDataset,
    hf: &HfTable,
    order: Order,
    n_rep: usize,
    n_sample: usize,
    seed: u64,
) -> Result<NullWSamples> {
    hf.expect_order(order)?;
    let sampler = NullSampler::new(dataset, order)?;
    let reps: Vec<Vec<(usize, f64)>> = (0..n_rep as u64)
        .map(|r| sampler.replicate(n_sample, seed, Purpose::Diagnose, r))
        .collect();
    NullWSamples::from_replicates(order, hf, &reps)
}
