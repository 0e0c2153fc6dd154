//! Timing harness: W-test against Pearson chi-squared and logistic regression
//! over the same exhaustive set of marker pairs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use wtest_core::baselines::{chisq_association, logistic_interaction_p};
use wtest_core::scan::{pair_at, pair_count};
use wtest_core::{tabulate_pair, GenotypeDataset, HfTable, Order, ScanConfig};

use crate::error::{Error, Result};
use crate::parallel::{chunks, pool, resolve_threads, scan_pairs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    WTest,
    Chisq,
    Logistic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WTest => "wtest",
            Method::Chisq => "chisq",
            Method::Logistic => "logistic",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wtest" => Ok(Method::WTest),
            "chisq" => Ok(Method::Chisq),
            "logistic" => Ok(Method::Logistic),
            other => Err(Error::Usage(format!("unknown method '{other}' (expected wtest, chisq or logistic)"))),
        }
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::Usage("at least one benchmark method is required".into()));
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n_tests: u64,
    /// Pairs the method could not test (k < 2, separation, non-convergence).
    pub n_untestable: u64,
    pub seconds: f64,
}

impl BenchRow {
    pub fn tests_per_second(&self) -> f64 {
        if self.seconds > 0.0 { self.n_tests as f64 / self.seconds } else { f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub n_subjects: usize,
    pub n_markers: usize,
    pub n_testable_markers: usize,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchmarkReport {
    pub fn row(&self, method: Method) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Times each method over all pairs of testable markers. `hf` holds the main
/// and pair tables used by the W-test.
pub fn run_benchmark(
    dataset: &GenotypeDataset,
    methods: &[Method],
    hf: (&HfTable, &HfTable),
    threads: Option<usize>,
) -> Result<BenchmarkReport> {
    if methods.is_empty() {
        return Err(Error::Usage("at least one benchmark method is required".into()));
    }
    let workers = resolve_threads(threads);
    let pool = pool(Some(workers))?;
    let testable = dataset.testable_markers();
    let n_pairs = pair_count(testable.len());
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let (n_tests, n_untestable) = pool.install(|| -> Result<(u64, u64)> {
            match method {
                Method::WTest => {
                    let config = ScanConfig { threads: Some(workers), ..ScanConfig::new(Order::Pair) };
                    let outcome = scan_pairs(dataset, hf.0, hf.1, &config, true)?;
                    let untestable = outcome.results.iter().filter(|r| r.p_value.is_none()).count() as u64;
                    Ok((outcome.tested, untestable))
                }
                Method::Chisq => count_pairs(&testable, n_pairs, workers, |a, b| {
                    match tabulate_pair(dataset, a, b).and_then(|t| chisq_association(&t)) {
                        Ok(_) => Ok(true),
                        Err(wtest_core::Error::Degenerate | wtest_core::Error::Untestable) => Ok(false),
                        Err(e) => Err(e),
                    }
                }),
                Method::Logistic => count_pairs(&testable, n_pairs, workers, |a, b| {
                    match logistic_interaction_p(dataset, a, b) {
                        Ok(_) => Ok(true),
                        Err(wtest_core::Error::Untestable) => Ok(false),
                        Err(e) => Err(e),
                    }
                }),
            }
        })?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!("{}: {n_tests} tests in {seconds:.3}s", method.name());
        rows.push(BenchRow { method, n_tests, n_untestable, seconds });
    }
    Ok(BenchmarkReport {
        n_subjects: dataset.n_subjects(),
        n_markers: dataset.n_markers(),
        n_testable_markers: testable.len(),
        threads: workers,
        rows,
    })
}

/// Runs `test` on every pair, returning (tests, untestable).
fn count_pairs<F>(markers: &[usize], n_pairs: u64, workers: usize, test: F) -> Result<(u64, u64)>
where
    F: Fn(usize, usize) -> wtest_core::Result<bool> + Sync,
{
    let m = markers.len();
    let failed: wtest_core::Result<Vec<u64>> = chunks(n_pairs, workers)
        .into_par_iter()
        .map(|range| {
            let mut failed = 0;
            for idx in range {
                let (i, j) = pair_at(idx, m);
                if !test(markers[i], markers[j])? {
                    failed += 1;
                }
            }
            Ok(failed)
        })
        .collect();
    Ok((n_pairs, failed?.iter().sum()))
}

/// CPU model, core count and platform, best effort.
pub fn hardware_note() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| s.lines().find(|l| l.starts_with("model name")).and_then(|l| l.split(':').nth(1)).map(|m| m.trim().to_string()))
        .unwrap_or_else(|| "unknown cpu".into());
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{cpu}; {cores} logical cores; {}-{}", std::env::consts::OS, std::env::consts::ARCH)
}

pub fn format_report(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# shape: subjects={} markers={} testable_markers={} pairs={} threads={}",
        report.n_subjects,
        report.n_markers,
        report.n_testable_markers,
        pair_count(report.n_testable_markers),
        report.threads
    )
    .unwrap();
    writeln!(out, "# hardware: {}", hardware_note()).unwrap();
    if let Some(w) = report.row(Method::WTest) {
        for r in report.rows.iter().filter(|r| r.method != Method::WTest) {
            writeln!(out, "# {} / wtest time ratio: {:.1}", r.method.name(), r.seconds / w.seconds.max(1e-12)).unwrap();
        }
    }
    out.push_str("method\tn_tests\tseconds\ttests_per_second\n");
    for r in &report.rows {
        writeln!(out, "{}\t{}\t{:.6}\t{:.1}", r.method.name(), r.n_tests, r.seconds, r.tests_per_second()).unwrap();
    }
    out
}

pub fn write_report(report: &BenchmarkReport, path: &Path) -> Result<()> {
    fs::write(path, format_report(report)).map_err(|e| Error::io(path, e))
}
