//! Small descriptive statistics used by estimation and diagnostics.

use alloc::vec;
use alloc::vec::Vec;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased (n − 1) variance, two-pass.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kolmogorov–Smirnov distance sup |F_n − F| for sorted samples.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let c = cdf(x);
        let above = (i + 1) as f64 / n - c;
        let below = c - i as f64 / n;
        d.max(above).max(below)
    })
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Bin width 2·IQR·n^(−1/3); falls back to Sturges-like width when the IQR
/// vanishes.
pub fn freedman_diaconis_width(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let width = 2.0 * iqr / libm::cbrt(n);
    if width > 0.0 {
        return width;
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range > 0.0 {
        range / (libm::log2(n) + 1.0)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub width: f64,
    pub counts: Vec<usize>,
    pub total: usize,
}

impl Histogram {
    /// Freedman–Diaconis histogram starting at zero (W is nonnegative).
    pub fn freedman_diaconis(sorted: &[f64]) -> Self {
        let width = freedman_diaconis_width(sorted);
        let max = sorted[sorted.len() - 1];
        let n_bins = ((libm::floor(max / width) as usize) + 1).clamp(1, 10_000);
        let mut counts = vec![0; n_bins];
        for &x in sorted {
            let b = ((x / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        Self { start: 0.0, width, counts, total: sorted.len() }
    }

    pub fn density(&self, bin: usize) -> f64 {
        self.counts[bin] as f64 / (self.total as f64 * self.width)
    }

    pub fn bin_start(&self, bin: usize) -> f64 {
        self.start + bin as f64 * self.width
    }
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
