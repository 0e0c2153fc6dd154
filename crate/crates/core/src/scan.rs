//! Main-effect and stage-wise pairwise scans.
//!
//! Pairs are enumerated canonically (i < j over retained markers in dataset
//! order, lexicographic) and addressed by a linear index, so any contiguous
//! index range can be scanned independently and the pieces concatenated.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use crate::dataset::GenotypeDataset;
use crate::error::{Error, Result};
use crate::hf::{HfTable, Order};
use crate::packed::PackedGenotypes;
use crate::table::tabulate_single;
use crate::wstat::{w_test, WStatistic};

/// Number of unordered pairs among `m` items.
pub fn pair_count(m: usize) -> u64 {
    let m = m as u64;
    m * m.saturating_sub(1) / 2
}

/// Linear index of pair (i, j), i < j, among `m` items.
pub fn pair_index(i: usize, j: usize, m: usize) -> u64 {
    let (i, j, m) = (i as u64, j as u64, m as u64);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_at(index: u64, m: usize) -> (usize, usize) {
    let mf = m as f64;
    // row i is the largest with offset(i) <= index
    let disc = (2.0 * mf - 1.0) * (2.0 * mf - 1.0) - 8.0 * index as f64;
    let mut i = libm::floor(((2.0 * mf - 1.0) - libm::sqrt(disc.max(0.0))) / 2.0) as usize;
    let offset = |i: usize| (i as u64) * (2 * m as u64 - i as u64 - 1) / 2;
    while i > 0 && offset(i) > index {
        i -= 1;
    }
    while i + 1 < m && offset(i + 1) <= index {
        i += 1;
    }
    (i, i + 1 + (index - offset(i)) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub order: Order,
    /// Stage-1 cutoff: keep markers with main p ≤ this value.
    pub input_pval: Option<f64>,
    /// Stage-1 alternative: keep this many markers with the smallest main p.
    pub input_poolsize: Option<usize>,
    /// Report only rows with p ≤ this value.
    pub output_pval: Option<f64>,
    /// Worker cap for parallel drivers; ignored by the sequential scans here.
    pub threads: Option<usize>,
}

impl ScanConfig {
    pub fn new(order: Order) -> Self {
        Self { order, input_pval: None, input_poolsize: None, output_pval: None, threads: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub marker1: String,
    pub marker2: Option<String>,
    pub marker1_index: usize,
    pub marker2_index: Option<usize>,
    /// Absent when the test is untestable (k < 2).
    pub w: Option<f64>,
    pub k: usize,
    pub p_value: Option<f64>,
    pub marker1_main_p: Option<f64>,
    pub marker2_main_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOutcome {
    pub results: Vec<AssociationResult>,
    /// Tests performed (rows before output filtering).
    pub tested: u64,
    /// Markers excluded before testing (k < 2 or all missing).
    pub untestable_markers: usize,
    pub warnings: Vec<String>,
}

impl ScanOutcome {
    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }
}

/// Ascending p (untestable last), ties by (marker1, marker2) name.
pub fn result_order(a: &AssociationResult, b: &AssociationResult) -> Ordering {
    let by_p = match (a.p_value, b.p_value) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_p.then_with(|| a.marker1.cmp(&b.marker1)).then_with(|| a.marker2.cmp(&b.marker2))
}

pub fn sort_results(results: &mut [AssociationResult]) {
    results.sort_by(result_order);
}

fn passes(p: Option<f64>, cutoff: Option<f64>) -> bool {
    match cutoff {
        None => true,
        Some(c) => p.is_some_and(|p| p <= c),
    }
}

fn check_cutoff(name: &'static str, value: Option<f64>) -> Result<()> {
    match value {
        Some(v) if !(0.0..=1.0).contains(&v) => Err(Error::Domain(name)),
        _ => Ok(()),
    }
}

/// Main-effect statistic for every marker; `None` for untestable markers.
pub fn main_effects(dataset: &GenotypeDataset, hf: &HfTable) -> Result<Vec<Option<WStatistic>>> {
    hf.expect_order(Order::Main)?;
    (0..dataset.n_markers())
        .map(|m| match tabulate_single(dataset, m).and_then(|t| w_test(&t, hf)) {
            Ok(w) => Ok(Some(w)),
            Err(Error::Degenerate | Error::Untestable) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn scan_main(dataset: &GenotypeDataset, hf: &HfTable, config: &ScanConfig) -> Result<ScanOutcome> {
    let stats = main_effects(dataset, hf)?;
    main_outcome(dataset, &stats, config)
}

/// Builds the main-effect outcome from precomputed per-marker statistics.
pub fn main_outcome(
    dataset: &GenotypeDataset,
    stats: &[Option<WStatistic>],
    config: &ScanConfig,
) -> Result<ScanOutcome> {
    check_cutoff("output p-value cutoff must lie in [0, 1]", config.output_pval)?;
    let mut outcome = ScanOutcome::default();
    for (m, stat) in stats.iter().enumerate() {
        let Some(stat) = stat else {
            outcome.untestable_markers += 1;
            continue;
        };
        outcome.tested += 1;
        if passes(Some(stat.p_value), config.output_pval) {
            outcome.results.push(AssociationResult {
                marker1: dataset.marker_name(m).into(),
                marker2: None,
                marker1_index: m,
                marker2_index: None,
                w: Some(stat.w),
                k: stat.k,
                p_value: Some(stat.p_value),
                marker1_main_p: None,
                marker2_main_p: None,
            });
        }
    }
    if outcome.untestable_markers > 0 {
        let n = outcome.untestable_markers;
        outcome.warn(format!("{n} untestable markers skipped (fewer than two genotype categories)"));
    }
    if outcome.tested == 0 {
        outcome.warn("no testable markers; result is empty".into());
    }
    sort_results(&mut outcome.results);
    Ok(outcome)
}

/// Stage 1 of the pairwise scan plus everything stage 2 needs.
#[derive(Debug, Clone)]
pub struct PairPlan {
    /// Retained marker indices, ascending.
    retained: Vec<usize>,
    names: Vec<String>,
    main_p: Vec<f64>,
    packed: PackedGenotypes,
    hf_pair: HfTable,
    output_pval: Option<f64>,
    pub untestable_markers: usize,
    pub warnings: Vec<String>,
}

impl PairPlan {
    pub fn new(
        dataset: &GenotypeDataset,
        hf_main: &HfTable,
        hf_pair: &HfTable,
        config: &ScanConfig,
    ) -> Result<Self> {
        hf_pair.expect_order(Order::Pair)?;
        let stats = main_effects(dataset, hf_main)?;
        Self::from_main_effects(dataset, &stats, hf_pair, config)
    }

    pub fn from_main_effects(
        dataset: &GenotypeDataset,
        stats: &[Option<WStatistic>],
        hf_pair: &HfTable,
        config: &ScanConfig,
    ) -> Result<Self> {
        hf_pair.expect_order(Order::Pair)?;
        check_cutoff("input p-value cutoff must lie in [0, 1]", config.input_pval)?;
        check_cutoff("output p-value cutoff must lie in [0, 1]", config.output_pval)?;
        let mut warnings = Vec::new();
        let mut warn = |m: String| {
            log::warn!("{m}");
            warnings.push(m);
        };
        let mut candidates: Vec<(usize, f64)> =
            stats.iter().enumerate().filter_map(|(m, s)| s.map(|s| (m, s.p_value))).collect();
        let untestable_markers = stats.len() - candidates.len();
        if untestable_markers > 0 {
            warn(format!("{untestable_markers} untestable markers excluded from stage 1"));
        }
        if config.input_pval.is_some() && config.input_poolsize.is_some() {
            warn("both input p-value and input pool size given; using the p-value cutoff".into());
        }
        if let Some(cut) = config.input_pval {
            candidates.retain(|&(_, p)| p <= cut);
        } else if let Some(size) = config.input_poolsize {
            candidates.sort_by(|a, b| {
                a.1.total_cmp(&b.1).then_with(|| dataset.marker_name(a.0).cmp(dataset.marker_name(b.0)))
            });
            candidates.truncate(size);
            candidates.sort_by_key(|&(m, _)| m);
        }
        if candidates.len() < 2 {
            warn(format!("{} markers retained after stage 1; no pairs to test", candidates.len()));
        }
        let retained: Vec<usize> = candidates.iter().map(|&(m, _)| m).collect();
        Ok(Self {
            names: retained.iter().map(|&m| dataset.marker_name(m).into()).collect(),
            main_p: candidates.iter().map(|&(_, p)| p).collect(),
            packed: PackedGenotypes::pack_markers(dataset, &retained),
            retained,
            hf_pair: hf_pair.clone(),
            output_pval: config.output_pval,
            untestable_markers,
            warnings,
        })
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn n_pairs(&self) -> u64 {
        pair_count(self.retained.len())
    }

    /// Tests pairs with linear index in `range`, applying the output filter.
    pub fn scan_range(&self, range: Range<u64>) -> Result<Vec<AssociationResult>> {
        let mut out = Vec::new();
        if range.start >= range.end {
            return Ok(out);
        }
        let m = self.retained.len();
        let (mut i, mut j) = pair_at(range.start, m);
        for _ in range {
            let row = self.test_pair(i, j)?;
            if passes(row.p_value, self.output_pval) {
                out.push(row);
            }
            j += 1;
            if j == m {
                i += 1;
                j = i + 1;
            }
        }
        Ok(out)
    }

    fn test_pair(&self, i: usize, j: usize) -> Result<AssociationResult> {
        let (w, k, p) = match self.packed.tabulate_pair(i, j) {
            Ok(table) => match w_test(&table, &self.hf_pair) {
                Ok(s) => (Some(s.w), s.k, Some(s.p_value)),
                Err(Error::Untestable) => (None, table.k(), None),
                Err(e) => return Err(e),
            },
            Err(Error::Degenerate) => (None, 0, None),
            Err(e) => return Err(e),
        };
        Ok(AssociationResult {
            marker1: self.names[i].clone(),
            marker2: Some(self.names[j].clone()),
            marker1_index: self.retained[i],
            marker2_index: Some(self.retained[j]),
            w,
            k,
            p_value: p,
            marker1_main_p: Some(self.main_p[i]),
            marker2_main_p: Some(self.main_p[j]),
        })
    }

    /// Concatenates chunk results in chunk order and sorts globally.
    pub fn finish(self, chunks: Vec<Vec<AssociationResult>>) -> ScanOutcome {
        let mut results: Vec<AssociationResult> = chunks.into_iter().flatten().collect();
        sort_results(&mut results);
        ScanOutcome {
            results,
            tested: self.n_pairs(),
            untestable_markers: self.untestable_markers,
            warnings: self.warnings,
        }
    }
}

/// Sequential stage-wise pair scan.
pub fn scan_pairs(
    dataset: &GenotypeDataset,
    hf_main: &HfTable,
    hf_pair: &HfTable,
    config: &ScanConfig,
) -> Result<ScanOutcome> {
    let plan = PairPlan::new(dataset, hf_main, hf_pair, config)?;
    let all = plan.scan_range(0..plan.n_pairs())?;
    Ok(plan.finish(alloc::vec![all]))
}
