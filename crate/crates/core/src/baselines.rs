//! Reference association tests used for cross-checks and benchmarks:
//! Pearson's chi-squared on the k×2 table and a logistic regression
//! likelihood-ratio test for a multiplicative interaction term.

use alloc::vec::Vec;

use crate::dataset::{GenotypeDataset, MISSING};
use crate::error::{Error, Result};
use crate::special::chisq_sf;
use crate::table::ContingencyTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChisqResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Categories left after pooling sparse cells.
    pub k_pooled: usize,
}

/// Merges categories whose expected count in either group is below one into
/// an adjacent category (in category order) until none remain.
pub fn pool_sparse_cells(cells: &mut Vec<(f64, f64)>, n1: f64, n0: f64) {
    let n = n1 + n0;
    loop {
        if cells.len() < 2 {
            return;
        }
        let sparse = cells
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| {
                let t = a + b;
                t * n1 / n < 1.0 || t * n0 / n < 1.0
            })
            .min_by(|x, y| (x.1 .0 + x.1 .1).total_cmp(&(y.1 .0 + y.1 .1)))
            .map(|(i, _)| i);
        let Some(i) = sparse else { return };
        let total = |j: usize| cells[j].0 + cells[j].1;
        let target = if i == 0 {
            1
        } else if i == cells.len() - 1 || total(i - 1) <= total(i + 1) {
            i - 1
        } else {
            i + 1
        };
        let (a, b) = cells.remove(i);
        let t = if target > i { target - 1 } else { target };
        cells[t].0 += a;
        cells[t].1 += b;
    }
}

/// Pearson chi-squared on the k×2 table, df = k − 1 after pooling.
pub fn chisq_association(table: &ContingencyTable) -> Result<ChisqResult> {
    if table.k() < 2 {
        return Err(Error::Untestable);
    }
    let (n1, n0) = (table.n1() as f64, table.n0() as f64);
    let mut cells: Vec<(f64, f64)> = table.cells().iter().map(|c| (c.n1 as f64, c.n0 as f64)).collect();
    pool_sparse_cells(&mut cells, n1, n0);
    if cells.len() < 2 {
        return Err(Error::Untestable);
    }
    let n = n1 + n0;
    let statistic: f64 = cells
        .iter()
        .map(|&(a, b)| {
            let t = a + b;
            let (e1, e0) = (t * n1 / n, t * n0 / n);
            (a - e1) * (a - e1) / e1 + (b - e0) * (b - e0) / e0
        })
        .sum();
    let df = cells.len() - 1;
    Ok(ChisqResult { statistic, df, p_value: chisq_sf(statistic, df as f64)?, k_pooled: cells.len() })
}

pub const IRLS_MAX_ITER: usize = 25;
pub const IRLS_TOL: f64 = 1e-8;
const MU_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit<const P: usize> {
    pub coefficients: [f64; P],
    pub deviance: f64,
    pub iterations: usize,
    /// Deviance before the first step and after each accepted step.
    pub deviance_trace: Vec<f64>,
}

fn deviance<const P: usize>(rows: &[[f64; P]], y: &[f64], beta: &[f64; P]) -> f64 {
    let mut dev = 0.0;
    for (x, &yi) in rows.iter().zip(y) {
        let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
        let mu = logistic(eta).clamp(MU_EPS, 1.0 - MU_EPS);
        dev -= 2.0 * (yi * libm::log(mu) + (1.0 - yi) * libm::log(1.0 - mu));
    }
    dev
}

#[inline]
fn logistic(eta: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-eta))
}

/// Solves `a · x = b` for symmetric positive definite `a` by Cholesky.
fn cholesky_solve<const P: usize>(a: &[[f64; P]; P], b: &[f64; P]) -> Option<[f64; P]> {
    let mut l = [[0.0; P]; P];
    for i in 0..P {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 1e-10 * a[i][i].abs().max(1e-300)) {
                    return None;
                }
                l[i][i] = libm::sqrt(d);
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = [0.0; P];
    for i in 0..P {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = [0.0; P];
    for i in (0..P).rev() {
        let s: f64 = (i + 1..P).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    Some(x)
}

/// Logistic regression by iteratively reweighted least squares with step
/// halving. Fails when the weighted normal equations are singular or the
/// coefficients have not settled (max change < 1e−8) within 25 iterations,
/// which is how separation shows up.
pub fn fit_logistic<const P: usize>(rows: &[[f64; P]], y: &[f64]) -> Result<LogisticFit<P>> {
    let mut beta = [0.0; P];
    let mut dev = deviance(rows, y, &beta);
    let mut trace = alloc::vec![dev];
    for iter in 1..=IRLS_MAX_ITER {
        let mut xtwx = [[0.0; P]; P];
        let mut xtwz = [0.0; P];
        for (x, &yi) in rows.iter().zip(y) {
            let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = logistic(eta).clamp(MU_EPS, 1.0 - MU_EPS);
            let w = mu * (1.0 - mu);
            let z = eta + (yi - mu) / w;
            for i in 0..P {
                let wxi = w * x[i];
                xtwz[i] += wxi * z;
                for j in 0..=i {
                    xtwx[i][j] += wxi * x[j];
                }
            }
        }
        for i in 0..P {
            for j in 0..i {
                xtwx[j][i] = xtwx[i][j];
            }
        }
        let target = cholesky_solve(&xtwx, &xtwz).ok_or(Error::Fit("singular design"))?;
        let mut step = 1.0;
        let mut next = target;
        let mut next_dev = deviance(rows, y, &next);
        let mut halvings = 0;
        while !(next_dev <= dev) && halvings < 30 {
            step *= 0.5;
            for i in 0..P {
                next[i] = beta[i] + step * (target[i] - beta[i]);
            }
            next_dev = deviance(rows, y, &next);
            halvings += 1;
        }
        if !(next_dev <= dev) {
            return Err(Error::Fit("deviance failed to decrease"));
        }
        let change = (0..P).map(|i| (next[i] - beta[i]).abs()).fold(0.0, f64::max);
        beta = next;
        dev = next_dev;
        trace.push(dev);
        if change < IRLS_TOL {
            return Ok(LogisticFit { coefficients: beta, deviance: dev, iterations: iter, deviance_trace: trace });
        }
    }
    Err(Error::Fit("no convergence within 25 iterations"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTest {
    pub statistic: f64,
    pub p_value: f64,
    pub full: LogisticFit<4>,
    pub reduced: LogisticFit<3>,
    pub n_used: usize,
}

/// Likelihood-ratio test of β3 in
/// logit P(case) = β0 + β1·g1 + β2·g2 + β3·g1·g2 (additive 0/1/2 coding,
/// complete cases only). Fit failures map to [`Error::Untestable`].
pub fn logistic_interaction(first: &[u8], second: &[u8], phenotype: &[u8]) -> Result<InteractionTest> {
    let mut full_rows = Vec::new();
    let mut reduced_rows = Vec::new();
    let mut y = Vec::new();
    for ((&g1, &g2), &yi) in first.iter().zip(second).zip(phenotype) {
        if g1 == MISSING || g2 == MISSING {
            continue;
        }
        let (a, b) = (g1 as f64, g2 as f64);
        full_rows.push([1.0, a, b, a * b]);
        reduced_rows.push([1.0, a, b]);
        y.push(yi as f64);
    }
    let full = fit_logistic(&full_rows, &y).map_err(|_| Error::Untestable)?;
    let reduced = fit_logistic(&reduced_rows, &y).map_err(|_| Error::Untestable)?;
    let statistic = (reduced.deviance - full.deviance).max(0.0);
    Ok(InteractionTest { statistic, p_value: chisq_sf(statistic, 1.0)?, full, reduced, n_used: y.len() })
}

pub fn logistic_interaction_p(dataset: &GenotypeDataset, m1: usize, m2: usize) -> Result<InteractionTest> {
    dataset.check_marker(m1)?;
    dataset.check_marker(m2)?;
    if m1 == m2 {
        return Err(Error::SameMarker(m1));
    }
    logistic_interaction(dataset.column(m1), dataset.column(m2), dataset.phenotype())
}
