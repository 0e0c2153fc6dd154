//! Per-k calibration pairs (h, f) for the W statistic.
//!
//! Under the null, h·S is matched to χ²_f in mean and variance using S values
//! pooled by k over permuted-phenotype replicates:
//! h = 2m/v and f = 2m²/v for pooled mean m and variance v. Pools smaller
//! than [`MIN_POOL`] (or with zero variance) fall back to the large-sample
//! defaults h = (k−1)/k, f = k−1 and are flagged.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::dataset::GenotypeDataset;
use crate::error::{Error, Result};
use crate::null::{NullSampler, Purpose};
use crate::stats::{mean, sample_variance};

/// Smallest per-k pool whose moments are trusted.
pub const MIN_POOL: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    /// Single-marker main effects.
    Main,
    /// Pairwise interactions.
    Pair,
}

impl Order {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Order::Main),
            2 => Some(Order::Pair),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Order::Main => 1,
            Order::Pair => 2,
        }
    }

    /// Testable category counts for this order.
    pub fn k_range(self) -> RangeInclusive<usize> {
        match self {
            Order::Main => 2..=3,
            Order::Pair => 2..=9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySource {
    Estimated,
    /// Estimation was attempted but the pool was too small or flat.
    Fallback,
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfEntry {
    pub h: f64,
    pub f: f64,
    pub source: EntrySource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Default,
    Estimated { replicates: u64, n_sample: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HfTable {
    order: Order,
    entries: BTreeMap<usize, HfEntry>,
    provenance: Provenance,
}

/// Large-sample defaults: h = (k−1)/k, f = k−1.
pub fn default_entry(k: usize) -> HfEntry {
    let k = k as f64;
    HfEntry { h: (k - 1.0) / k, f: k - 1.0, source: EntrySource::Default }
}

pub fn default_hf(order: Order) -> HfTable {
    HfTable {
        order,
        entries: order.k_range().map(|k| (k, default_entry(k))).collect(),
        provenance: Provenance::Default,
    }
}

/// Satterthwaite fit of h·S ≈ χ²_f. `None` when the variance is zero or the
/// moments are not finite.
pub fn moment_match(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let v = sample_variance(values);
    moment_match_from(m, v)
}

pub fn moment_match_from(m: f64, v: f64) -> Option<(f64, f64)> {
    if !(v > 0.0) || !(m > 0.0) || !m.is_finite() || !v.is_finite() {
        return None;
    }
    Some((2.0 * m / v, 2.0 * m * m / v))
}

impl HfTable {
    /// Assembles a table, rejecting non-positive entries and filling any k
    /// the order can reach with a flagged default.
    pub fn from_entries(
        order: Order,
        entries: BTreeMap<usize, HfEntry>,
        provenance: Provenance,
    ) -> Result<Self> {
        for (&k, e) in &entries {
            if !order.k_range().contains(&k) {
                return Err(Error::Estimation(alloc::format!(
                    "k = {k} is outside the range for order {}",
                    order.number()
                )));
            }
            if !(e.h > 0.0 && e.f > 0.0 && e.h.is_finite() && e.f.is_finite()) {
                return Err(Error::Estimation(alloc::format!("non-positive h or f at k = {k}")));
            }
        }
        let mut table = Self { order, entries, provenance };
        for k in order.k_range() {
            table.entries.entry(k).or_insert_with(|| HfEntry {
                source: if provenance == Provenance::Default {
                    EntrySource::Default
                } else {
                    EntrySource::Fallback
                },
                ..default_entry(k)
            });
        }
        Ok(table)
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, k: usize) -> Option<&HfEntry> {
        self.entries.get(&k)
    }

    pub fn set(&mut self, k: usize, entry: HfEntry) {
        self.entries.insert(k, entry);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &HfEntry)> {
        self.entries.iter().map(|(&k, e)| (k, e))
    }

    pub fn expect_order(&self, order: Order) -> Result<()> {
        if self.order == order {
            Ok(())
        } else {
            Err(Error::WrongOrder { expected: order.number(), found: self.order.number() })
        }
    }

    /// Returns a copy with every f shifted by `delta` (negative controls).
    pub fn with_f_shift(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for e in out.entries.values_mut() {
            e.f += delta;
        }
        out
    }

    /// Returns a copy with every h multiplied by `factor`.
    pub fn with_h_scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in out.entries.values_mut() {
            e.h *= factor;
        }
        out
    }
}

/// Null S values grouped by k, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SPool {
    by_k: BTreeMap<usize, Vec<f64>>,
}

impl SPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, draws: &[(usize, f64)]) {
        for &(k, s) in draws {
            self.by_k.entry(k).or_default().push(s);
        }
    }

    pub fn values(&self, k: usize) -> &[f64] {
        self.by_k.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.by_k.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Moment-matches every k of the order; small or flat pools fall back.
    pub fn fit(&self, order: Order, provenance: Provenance) -> HfTable {
        let mut entries = BTreeMap::new();
        for k in order.k_range() {
            let values = self.values(k);
            let fitted = if values.len() >= MIN_POOL { moment_match(values) } else { None };
            let entry = match fitted {
                Some((h, f)) => HfEntry { h, f, source: EntrySource::Estimated },
                None => {
                    log::debug!("k = {k}: {} pooled values, using default", values.len());
                    HfEntry { source: EntrySource::Fallback, ..default_entry(k) }
                }
            };
            entries.insert(k, entry);
        }
        HfTable { order, entries, provenance }
    }
}

fn check_counts(replicates: usize, n_sample: usize) -> Result<()> {
    if replicates == 0 {
        return Err(Error::Domain("number of bootstrap replicates must be at least 1"));
    }
    if n_sample == 0 {
        return Err(Error::Domain("n_sample must be at least 1"));
    }
    Ok(())
}

/// Bootstrap estimate of (h, f) per k. Sequential; `wtest` provides a
/// parallel driver with bit-identical output.
pub fn estimate_hf(
    dataset: &GenotypeDataset,
    order: Order,
    replicates: usize,
    n_sample: usize,
    seed: u64,
) -> Result<HfTable> {
    check_counts(replicates, n_sample)?;
    let sampler = NullSampler::new(dataset, order)?;
    let mut pool = SPool::new();
    for r in 0..replicates as u64 {
        pool.extend(&sampler.replicate(n_sample, seed, Purpose::Estimate, r));
    }
    Ok(pool.fit(order, estimated_provenance(replicates, n_sample, seed)))
}

pub fn estimated_provenance(replicates: usize, n_sample: usize, seed: u64) -> Provenance {
    Provenance::Estimated { replicates: replicates as u64, n_sample: n_sample as u64, seed }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub replicates: usize,
    pub k: usize,
    /// Seeds whose pool for this k was large enough to estimate.
    pub n_estimated: usize,
    pub n_seeds: usize,
    pub mean_f: f64,
    /// Across-seed standard deviation of f̂; absent with fewer than two estimates.
    pub sd_f: Option<f64>,
}

impl ConvergenceRow {
    pub fn cv(&self) -> Option<f64> {
        self.sd_f.map(|sd| sd / self.mean_f)
    }
}

/// Fits every prefix length in `grid` of each seed's replicate sequence.
///
/// `replicates[s][r]` holds the draws of replicate `r` under `seeds[s]`; a
/// B-replicate estimate uses replicates `0..B`, exactly as [`estimate_hf`]
/// would with the same seed.
pub fn convergence_from_replicates(
    order: Order,
    grid: &[usize],
    seeds: &[u64],
    n_sample: usize,
    replicates: &[Vec<Vec<(usize, f64)>>],
) -> Result<Vec<ConvergenceRow>> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(Error::Domain("convergence grid and seed list must be nonempty"));
    }
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    let mut fitted: BTreeMap<(usize, usize), Vec<HfTable>> = BTreeMap::new();
    for (s, &seed) in seeds.iter().enumerate() {
        let mut pool = SPool::new();
        let mut done = 0;
        for (g, &b) in grid.iter().enumerate() {
            check_counts(b, n_sample)?;
            for reps in &replicates[s][done..b] {
                pool.extend(reps);
            }
            done = b;
            fitted
                .entry((g, b))
                .or_default()
                .push(pool.fit(order, estimated_provenance(b, n_sample, seed)));
        }
    }
    let mut rows = Vec::new();
    for ((_, b), tables) in fitted {
        for k in order.k_range() {
            let fs: Vec<f64> = tables
                .iter()
                .filter_map(|t| t.get(k))
                .filter(|e| e.source == EntrySource::Estimated)
                .map(|e| e.f)
                .collect();
            if fs.is_empty() {
                continue;
            }
            rows.push(ConvergenceRow {
                replicates: b,
                k,
                n_estimated: fs.len(),
                n_seeds: tables.len(),
                mean_f: mean(&fs),
                sd_f: (fs.len() >= 2).then(|| libm::sqrt(sample_variance(&fs))),
            });
        }
    }
    Ok(rows)
}

/// Dispersion of f̂ across seeds for each B in `grid`. Sequential.
pub fn hf_convergence_report(
    dataset: &GenotypeDataset,
    order: Order,
    grid: &[usize],
    seeds: &[u64],
    n_sample: usize,
) -> Result<Vec<ConvergenceRow>> {
    let sampler = NullSampler::new(dataset, order)?;
    let max_b = grid.iter().copied().max().unwrap_or(0);
    let replicates: Vec<Vec<Vec<(usize, f64)>>> = seeds
        .iter()
        .map(|&seed| {
            (0..max_b as u64)
                .map(|r| sampler.replicate(n_sample, seed, Purpose::Estimate, r))
                .collect()
        })
        .collect();
    convergence_from_replicates(order, grid, seeds, n_sample, &replicates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::d0;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{ChiSquared, Distribution};

    #[test]
    fn defaults() {
        let pair = default_hf(Order::Pair);
        let e = pair.get(9).unwrap();
        assert_eq!((e.h, e.f), (8.0 / 9.0, 8.0));
        let main = default_hf(Order::Main);
        let e = main.get(2).unwrap();
        assert_eq!((e.h, e.f), (0.5, 1.0));
        assert_eq!(main.entries().count(), 2);
        assert_eq!(pair.entries().count(), 8);
        assert!(main.entries().all(|(_, e)| e.source == EntrySource::Default));
    }

    #[test]
    fn plug_in_moments() {
        assert_eq!(moment_match_from(8.0, 16.0), Some((1.0, 8.0)));
        assert_eq!(moment_match_from(8.0, 0.0), None);
    }

    #[test]
    fn moment_identity_on_pool() {
        let values: Vec<f64> = (1..200).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let (h, f) = moment_match(&values).unwrap();
        let scaled: Vec<f64> = values.iter().map(|s| h * s).collect();
        assert!((mean(&scaled) - f).abs() < 1e-10 * f);
        assert!((sample_variance(&scaled) - 2.0 * f).abs() < 1e-10 * f);
    }

    #[test]
    fn recovers_scaled_chi_squared() {
        let (h0, f0) = (0.9, 7.0);
        let dist = ChiSquared::new(f0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng) / h0).collect();
        let (h, f) = moment_match(&values).unwrap();
        assert!((h - h0).abs() / h0 < 0.1, "h = {h}");
        assert!((f - f0).abs() / f0 < 0.1, "f = {f}");
    }

    #[test]
    fn small_pools_fall_back() {
        let mut pool = SPool::new();
        pool.extend(&[(2, 1.0), (2, 3.0), (3, 0.5)]);
        let t = pool.fit(Order::Main, Provenance::Default);
        assert!(t.entries().all(|(_, e)| e.source == EntrySource::Fallback));
        assert_eq!(t.get(3).unwrap().f, 2.0);
    }

    #[test]
    fn flat_pool_falls_back() {
        let mut pool = SPool::new();
        pool.extend(&vec![(3, 2.5); 50]);
        let t = pool.fit(Order::Main, Provenance::Default);
        assert_eq!(t.get(3).unwrap().source, EntrySource::Fallback);
    }

    #[test]
    fn estimate_is_seed_deterministic() {
        let d = d0();
        let a = estimate_hf(&d, Order::Main, 20, 5, 3).unwrap();
        let b = estimate_hf(&d, Order::Main, 20, 5, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.provenance(),
            Provenance::Estimated { replicates: 20, n_sample: 5, seed: 3 }
        );
    }

    #[test]
    fn zero_replicates_rejected() {
        assert!(estimate_hf(&d0(), Order::Main, 0, 5, 3).is_err());
        assert!(estimate_hf(&d0(), Order::Main, 5, 0, 3).is_err());
    }

    #[test]
    fn from_entries_fills_and_validates() {
        let mut entries = BTreeMap::new();
        entries.insert(3, HfEntry { h: 0.7, f: 2.2, source: EntrySource::Estimated });
        let t = HfTable::from_entries(Order::Main, entries.clone(), estimated_provenance(1, 1, 1))
            .unwrap();
        assert_eq!(t.get(2).unwrap().source, EntrySource::Fallback);
        entries.insert(5, HfEntry { h: 0.7, f: 2.2, source: EntrySource::Estimated });
        assert!(HfTable::from_entries(Order::Main, entries, Provenance::Default).is_err());
    }

    #[test]
    fn convergence_single_seed_has_no_sd() {
        let rows = hf_convergence_report(&d0(), Order::Main, &[40], &[1], 2).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.sd_f.is_none() && r.replicates == 40));
    }

    #[test]
    fn convergence_prefix_matches_direct_estimate() {
        let d = d0();
        let rows = hf_convergence_report(&d, Order::Main, &[30, 60], &[5, 6], 2).unwrap();
        let direct: Vec<f64> = [5u64, 6]
            .iter()
            .filter_map(|&s| {
                let t = estimate_hf(&d, Order::Main, 60, 2, s).unwrap();
                let e = *t.get(3).unwrap();
                (e.source == EntrySource::Estimated).then_some(e.f)
            })
            .collect();
        let row = rows.iter().find(|r| r.replicates == 60 && r.k == 3).unwrap();
        assert_eq!(row.mean_f, mean(&direct));
    }
}
