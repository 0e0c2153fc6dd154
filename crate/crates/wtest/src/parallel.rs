//! Multi-threaded drivers over the sequential core kernels.
//!
//! Work is split into units whose results do not depend on scheduling
//! (bootstrap replicates, contiguous pair-index ranges). Units are computed on
//! a rayon pool and reduced in unit order, so every driver returns exactly
//! what the sequential core function returns, for any thread count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use wtest_core::hf::{convergence_from_replicates, estimated_provenance, ConvergenceRow, SPool};
use wtest_core::null::{NullSampler, Purpose};
use wtest_core::scan::{main_outcome, PairPlan};
use wtest_core::{
    tabulate_single, w_test, GenotypeDataset, HfTable, NullWSamples, Order, ScanConfig, ScanOutcome,
    WStatistic,
};

use crate::error::{Error, Result};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "WSCAN_THREADS";

/// Resolves a worker count: explicit value, then `WSCAN_THREADS`, then all cores.
pub fn resolve_threads(threads: Option<usize>) -> usize {
    threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(threads))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

/// Rate and ETA lines on stderr, at most once a second.
pub struct Progress {
    label: &'static str,
    total: u64,
    done: AtomicU64,
    start: Instant,
    last: Mutex<Instant>,
    quiet: bool,
}

impl Progress {
    pub fn new(label: &'static str, total: u64, quiet: bool) -> Self {
        let now = Instant::now();
        Self { label, total, done: AtomicU64::new(0), start: now, last: Mutex::new(now), quiet }
    }

    pub fn advance(&self, n: u64) {
        let done = self.done.fetch_add(n, Ordering::Relaxed) + n;
        if self.quiet {
            return;
        }
        let mut last = self.last.lock().unwrap();
        if last.elapsed().as_secs_f64() < 1.0 {
            return;
        }
        *last = Instant::now();
        let secs = self.start.elapsed().as_secs_f64();
        let rate = done as f64 / secs;
        let eta = (self.total.saturating_sub(done)) as f64 / rate.max(1e-9);
        eprintln!("{}: {done}/{} ({rate:.0}/s, ETA {eta:.0}s)", self.label, self.total);
    }

    pub fn finish(&self) {
        if !self.quiet {
            let secs = self.start.elapsed().as_secs_f64();
            eprintln!("{}: {} done in {secs:.2}s", self.label, self.done.load(Ordering::Relaxed));
        }
    }
}

fn replicates(
    sampler: &NullSampler<'_>,
    n_rep: usize,
    n_sample: usize,
    seed: u64,
    purpose: Purpose,
) -> Vec<Vec<(usize, f64)>> {
    (0..n_rep as u64)
        .into_par_iter()
        .map(|r| sampler.replicate(n_sample, seed, purpose, r))
        .collect()
}

/// Parallel bootstrap estimate; bit-identical to [`wtest_core::hf::estimate_hf`].
pub fn estimate_hf(
    dataset: &GenotypeDataset,
    order: Order,
    replicates_b: usize,
    n_sample: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<HfTable> {
    if replicates_b == 0 || n_sample == 0 {
        return Err(wtest_core::Error::Domain("B and n_sample must be at least 1").into());
    }
    let sampler = NullSampler::new(dataset, order)?;
    let reps = pool(threads)?.install(|| replicates(&sampler, replicates_b, n_sample, seed, Purpose::Estimate));
    let mut s_pool = SPool::new();
    for r in &reps {
        s_pool.extend(r);
    }
    Ok(s_pool.fit(order, estimated_provenance(replicates_b, n_sample, seed)))
}

pub fn hf_convergence_report(
    dataset: &GenotypeDataset,
    order: Order,
    grid: &[usize],
    seeds: &[u64],
    n_sample: usize,
    threads: Option<usize>,
) -> Result<Vec<ConvergenceRow>> {
    let sampler = NullSampler::new(dataset, order)?;
    let max_b = grid.iter().copied().max().unwrap_or(0);
    let reps = pool(threads)?.install(|| {
        seeds
            .iter()
            .map(|&seed| replicates(&sampler, max_b, n_sample, seed, Purpose::Estimate))
            .collect::<Vec<_>>()
    });
    Ok(convergence_from_replicates(order, grid, seeds, n_sample, &reps)?)
}

pub fn null_w_samples(
    dataset: &GenotypeDataset,
    hf: &HfTable,
    order: Order,
    n_rep: usize,
    n_sample: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<NullWSamples> {
    hf.expect_order(order)?;
    let sampler = NullSampler::new(dataset, order)?;
    let reps = pool(threads)?.install(|| replicates(&sampler, n_rep, n_sample, seed, Purpose::Diagnose));
    Ok(NullWSamples::from_replicates(order, hf, &reps)?)
}

fn main_effects_par(dataset: &GenotypeDataset, hf: &HfTable) -> Result<Vec<Option<WStatistic>>> {
    hf.expect_order(Order::Main)?;
    let stats: wtest_core::Result<Vec<_>> = (0..dataset.n_markers())
        .into_par_iter()
        .with_min_len(256)
        .map(|m| match tabulate_single(dataset, m).and_then(|t| w_test(&t, hf)) {
            Ok(w) => Ok(Some(w)),
            Err(wtest_core::Error::Degenerate | wtest_core::Error::Untestable) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    Ok(stats?)
}

pub fn scan_main(
    dataset: &GenotypeDataset,
    hf: &HfTable,
    config: &ScanConfig,
) -> Result<ScanOutcome> {
    let stats = pool(config.threads)?.install(|| main_effects_par(dataset, hf))?;
    Ok(main_outcome(dataset, &stats, config)?)
}

/// Pair-index ranges of roughly equal size, in canonical order.
pub fn chunks(n_pairs: u64, workers: usize) -> Vec<std::ops::Range<u64>> {
    if n_pairs == 0 {
        return Vec::new();
    }
    let size = (n_pairs / (workers as u64 * 16)).clamp(256, 1 << 20);
    (0..n_pairs.div_ceil(size)).map(|c| c * size..((c + 1) * size).min(n_pairs)).collect()
}

pub fn scan_pairs(
    dataset: &GenotypeDataset,
    hf_main: &HfTable,
    hf_pair: &HfTable,
    config: &ScanConfig,
    quiet: bool,
) -> Result<ScanOutcome> {
    let workers = resolve_threads(config.threads);
    let pool = pool(Some(workers))?;
    pool.install(|| {
        hf_pair.expect_order(Order::Pair)?;
        let stats = main_effects_par(dataset, hf_main)?;
        let plan = PairPlan::from_main_effects(dataset, &stats, hf_pair, config)?;
        let progress = Progress::new("pairs", plan.n_pairs(), quiet);
        let pieces: wtest_core::Result<Vec<_>> = chunks(plan.n_pairs(), workers)
            .into_par_iter()
            .map(|range| {
                let n = range.end - range.start;
                let out = plan.scan_range(range);
                progress.advance(n);
                out
            })
            .collect();
        let pieces = pieces?;
        progress.finish();
        Ok(plan.finish(pieces))
    })
}
