//! Command-line interface.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wtest_core::{default_hf, GenotypeDataset, HfTable, Order, PackedGenotypes, ScanConfig};

use crate::bench::{format_report, parse_methods, run_benchmark, write_report};
use crate::diagnostics::{density_report, qq_report, write_summary};
use crate::error::{Error, Result};
use crate::parallel::{self, THREADS_ENV};
use crate::simulate::{simulate_null, SimConfig};
use crate::text::{write_text, PhenotypeSource, DEFAULT_MISSING, PHENOTYPE_COLUMN};
use crate::{hf_io, load_dataset, results, wpk};

/// Seed used when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_B: usize = 400;
pub const DEFAULT_N_SAMPLE: usize = 1000;
/// Diagnostics favour many permutations with few draws each, so samples from
/// different draws are close to independent.
pub const DEFAULT_N_REP: usize = 1000;
pub const DEFAULT_DIAG_N_SAMPLE: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "wtest", version, about = "W-test association scans for case/control genotype data")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between delimited text and packed WPK1 genotype files.
    Convert(ConvertArgs),
    /// Estimate (h, f) per k from permuted-phenotype bootstrap samples.
    EstimateHf(EstimateArgs),
    /// Across-seed dispersion of estimated f over a grid of bootstrap counts.
    HfConvergence(ConvergenceArgs),
    /// Main-effect (order 1) or stage-wise pairwise (order 2) scan.
    Scan(ScanArgs),
    /// Null W samples against chi-squared: density and QQ panels per k.
    Diagnose(DiagnoseArgs),
    /// Time the W-test against chi-squared and logistic regression on all pairs.
    Bench(BenchArgs),
    /// Write a simulated null dataset.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Genotype file: packed WPK1 or delimited text.
    pub data: PathBuf,
    /// Phenotype column name in a text file.
    #[arg(long, default_value = PHENOTYPE_COLUMN, conflicts_with = "pheno_file")]
    pub pheno_col: String,
    /// Separate phenotype file, one 0/1 per line in subject order.
    #[arg(long)]
    pub pheno_file: Option<PathBuf>,
    /// Missing-genotype token in text files.
    #[arg(long, default_value = DEFAULT_MISSING)]
    pub missing: String,
}

impl DataArgs {
    fn load(&self) -> Result<GenotypeDataset> {
        let pheno = match &self.pheno_file {
            Some(p) => PhenotypeSource::File(p.clone()),
            None => PhenotypeSource::Column(self.pheno_col.clone()),
        };
        let d = load_dataset(&self.data, &pheno, &self.missing)?;
        log::info!("{}: {} subjects ({} cases), {} markers", self.data.display(), d.n_subjects(), d.n_cases(), d.n_markers());
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Wpk,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Output path.
    pub output: PathBuf,
    /// Output format; defaults to wpk for a `.wpk` extension, text otherwise.
    #[arg(long, value_enum)]
    pub to: Option<Format>,
}

fn order_arg() -> clap::builder::RangedI64ValueParser<u8> {
    clap::value_parser!(u8).range(1..=2)
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// 1 = main effects, 2 = pairwise interactions.
    #[arg(long, value_parser = order_arg())]
    pub order: u8,
    /// Bootstrap replicates.
    #[arg(short = 'B', long = "B", default_value_t = DEFAULT_B)]
    pub replicates: usize,
    /// Markers (order 1) or pairs (order 2) drawn per replicate.
    #[arg(long, default_value_t = DEFAULT_N_SAMPLE)]
    pub n_sample: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output HfTable TSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_parser = order_arg())]
    pub order: u8,
    /// Bootstrap counts to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 400, 800])]
    pub grid: Vec<usize>,
    /// Seeds; one estimate per seed and grid value.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5, 6, 7, 8, 9, 10])]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_N_SAMPLE)]
    pub n_sample: usize,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_parser = order_arg())]
    pub order: u8,
    /// HfTable files; the order column selects main or pair use. May repeat.
    #[arg(long)]
    pub hf: Vec<PathBuf>,
    /// Stage 1: keep markers with main-effect p ≤ this value.
    #[arg(long)]
    pub input_pval: Option<f64>,
    /// Stage 1: keep this many markers with the smallest main-effect p.
    #[arg(long)]
    pub input_poolsize: Option<usize>,
    /// Report only rows with p ≤ this value.
    #[arg(long)]
    pub output_pval: Option<f64>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Suppress progress lines.
    #[arg(long)]
    pub quiet: bool,
    /// Output results TSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_parser = order_arg())]
    pub order: u8,
    /// HfTable for the chosen order; defaults when omitted.
    #[arg(long)]
    pub hf: Option<PathBuf>,
    /// Permutation replicates.
    #[arg(long, default_value_t = DEFAULT_N_REP)]
    pub n_rep: usize,
    /// Markers or pairs drawn per replicate.
    #[arg(long, default_value_t = DEFAULT_DIAG_N_SAMPLE)]
    pub n_sample: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add this to every f before comparing (negative control).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub f_shift: f64,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Comma-separated: wtest, chisq, logistic.
    #[arg(long, default_value = "wtest,chisq,logistic")]
    pub methods: String,
    /// HfTable files for the W-test (main and/or pair); defaults when omitted.
    #[arg(long)]
    pub hf: Vec<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub subjects: usize,
    #[arg(long)]
    pub markers: usize,
    /// Number of cases; half the subjects by default.
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub maf_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub maf_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub missing_rate: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; `.wpk` writes packed, anything else text.
    pub output: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .format_target(false)
        .try_init();
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Convert(a) => cmd_convert(&a),
        Command::EstimateHf(a) => cmd_estimate_hf(&a),
        Command::HfConvergence(a) => cmd_hf_convergence(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    }
}

fn order(n: u8) -> Result<Order> {
    Order::from_number(n).ok_or_else(|| Error::Usage(format!("order must be 1 or 2, got {n}")))
}

fn seed_or_default(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        log::warn!("--seed not given; using {DEFAULT_SEED}. Pass --seed explicitly in scripts");
        DEFAULT_SEED
    })
}

fn is_wpk_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wpk"))
}

fn write_dataset(dataset: &GenotypeDataset, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Wpk => wpk::write_packed(&PackedGenotypes::pack(dataset), path),
        Format::Text => write_text(dataset, path, DEFAULT_MISSING),
    }
}

fn cmd_convert(a: &ConvertArgs) -> Result<()> {
    let dataset = a.input.load()?;
    let format = a.to.unwrap_or(if is_wpk_path(&a.output) { Format::Wpk } else { Format::Text });
    write_dataset(&dataset, &a.output, format)
}

fn cmd_estimate_hf(a: &EstimateArgs) -> Result<()> {
    let order = order(a.order)?;
    if a.replicates == 0 || a.n_sample == 0 {
        return Err(Error::Usage("--B and --n-sample must be at least 1".into()));
    }
    let seed = seed_or_default(a.seed);
    let dataset = a.input.load()?;
    let table = parallel::estimate_hf(&dataset, order, a.replicates, a.n_sample, seed, a.threads)?;
    for (k, e) in table.entries() {
        log::info!("k={k}: h={:.4} f={:.4} ({:?})", e.h, e.f, e.source);
    }
    hf_io::write_hf(&table, &a.out)
}

fn cmd_hf_convergence(a: &ConvergenceArgs) -> Result<()> {
    let order = order(a.order)?;
    if a.grid.is_empty() || a.seeds.is_empty() || a.grid.contains(&0) || a.n_sample == 0 {
        return Err(Error::Usage("--grid and --seeds must be nonempty, counts at least 1".into()));
    }
    let dataset = a.input.load()?;
    let rows = parallel::hf_convergence_report(&dataset, order, &a.grid, &a.seeds, a.n_sample, a.threads)?;
    let mut out = String::from("B\tk\tn_estimated\tn_seeds\tmean_f\tsd_f\tcv_f\n");
    let na = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.6}"));
    for r in &rows {
        writeln!(out, "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}", r.replicates, r.k, r.n_estimated, r.n_seeds, r.mean_f, na(r.sd_f), na(r.cv())).unwrap();
    }
    fs::write(&a.out, out).map_err(|e| Error::io(&a.out, e))
}

/// Main and pair tables from `--hf` files, defaults for whichever is missing.
fn load_hf_pair(paths: &[PathBuf], need_pair: bool) -> Result<(HfTable, HfTable)> {
    let mut main = None;
    let mut pair = None;
    for p in paths {
        let t = hf_io::read_hf(p)?;
        let slot = match t.order() {
            Order::Main => &mut main,
            Order::Pair => &mut pair,
        };
        if slot.replace(t).is_some() {
            return Err(Error::Usage(format!("more than one order-{} hf table given", slot.as_ref().unwrap().order().number())));
        }
    }
    if main.is_none() {
        eprintln!("note: no order-1 hf table given; main-effect W will be calculated using default hf values");
    }
    if need_pair && pair.is_none() {
        eprintln!("note: no order-2 hf table given; pairwise W will be calculated using default hf values");
    }
    Ok((main.unwrap_or_else(|| default_hf(Order::Main)), pair.unwrap_or_else(|| default_hf(Order::Pair))))
}

fn cmd_scan(a: &ScanArgs) -> Result<()> {
    let order = order(a.order)?;
    for (name, v) in [("--input-pval", a.input_pval), ("--output-pval", a.output_pval)] {
        if v.is_some_and(|v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Usage(format!("{name} must lie in [0, 1]")));
        }
    }
    let (hf_main, hf_pair) = load_hf_pair(&a.hf, order == Order::Pair)?;
    let dataset = a.input.load()?;
    let config = ScanConfig {
        order,
        input_pval: a.input_pval,
        input_poolsize: a.input_poolsize,
        output_pval: a.output_pval,
        threads: a.threads,
    };
    let outcome = match order {
        Order::Main => parallel::scan_main(&dataset, &hf_main, &config)?,
        Order::Pair => parallel::scan_pairs(&dataset, &hf_main, &hf_pair, &config, a.quiet)?,
    };
    log::info!("{} tests, {} rows written", outcome.tested, outcome.results.len());
    results::write_results(&outcome.results, order, &a.out)
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let order = order(a.order)?;
    if a.n_sample == 0 {
        return Err(Error::Usage("--n-sample must be at least 1".into()));
    }
    let seed = seed_or_default(a.seed);
    let mut hf = match &a.hf {
        Some(p) => hf_io::read_hf(p)?,
        None => {
            eprintln!("note: no hf table given; diagnostics use default hf values");
            default_hf(order)
        }
    };
    hf.expect_order(order)?;
    if a.f_shift != 0.0 {
        hf = hf.with_f_shift(a.f_shift);
    }
    let dataset = a.input.load()?;
    let samples = parallel::null_w_samples(&dataset, &hf, order, a.n_rep, a.n_sample, seed, a.threads)?;
    let panels = density_report(&samples, &a.out_dir)?;
    qq_report(&samples, &a.out_dir)?;
    write_summary(&panels, &a.out_dir.join("diag_summary.tsv"))?;
    for p in &panels {
        eprintln!("k={}: n={} f={:.3} KS={:.4} QQ slope={:.3}", p.k, p.n, p.f, p.ks_distance, p.qq_slope);
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let methods = parse_methods(&a.methods)?;
    let (hf_main, hf_pair) = load_hf_pair(&a.hf, true)?;
    let dataset = a.input.load()?;
    let report = run_benchmark(&dataset, &methods, (&hf_main, &hf_pair), a.threads)?;
    eprint!("{}", format_report(&report));
    write_report(&report, &a.out)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let cases = a.cases.unwrap_or(a.subjects / 2);
    if a.subjects < 2 || cases == 0 || cases >= a.subjects || a.markers == 0 {
        return Err(Error::Usage("need at least one case, one control and one marker".into()));
    }
    if !(0.0 < a.maf_min && a.maf_min <= a.maf_max && a.maf_max <= 0.5) || !(0.0..1.0).contains(&a.missing_rate) {
        return Err(Error::Usage("need 0 < maf-min <= maf-max <= 0.5 and 0 <= missing-rate < 1".into()));
    }
    let cfg = SimConfig {
        n_subjects: a.subjects,
        n_markers: a.markers,
        n_cases: cases,
        maf_min: a.maf_min,
        maf_max: a.maf_max,
        missing_rate: a.missing_rate,
        seed: seed_or_default(a.seed),
    };
    let dataset = simulate_null(&cfg)?;
    write_dataset(&dataset, &a.output, if is_wpk_path(&a.output) { Format::Wpk } else { Format::Text })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(["wtest", "scan"]), 64);
        assert_eq!(run(["wtest", "estimate-hf", "x.txt", "--order", "3", "--out", "o"]), 64);
        assert_eq!(run(["wtest", "--help"]), 0);
    }
}
