//! Straight-line reference implementations shared by the integration tests.
//! None of these call into the library's tabulation or statistic code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtest_core::GenotypeDataset;

pub const MISSING: u8 = 3;

/// Fixture D0: eight subjects, two markers.
pub fn d0() -> GenotypeDataset {
    GenotypeDataset::new(
        vec!["A".into(), "B".into()],
        vec![vec![0, 0, 1, 2, 0, 1, 1, 2], vec![2, 2, 1, 0, 0, 0, 1, 1]],
        vec![1, 1, 1, 1, 0, 0, 0, 0],
    )
    .unwrap()
}

/// Case and control counts per category id (`g` or `3·g1 + g2`), complete cases only.
pub fn counts(first: &[u8], second: Option<&[u8]>, phenotype: &[u8]) -> ([u32; 9], [u32; 9]) {
    let mut cases = [0u32; 9];
    let mut controls = [0u32; 9];
    for s in 0..phenotype.len() {
        let g1 = first[s];
        if g1 == MISSING {
            continue;
        }
        let cat = match second {
            Some(col) => {
                if col[s] == MISSING {
                    continue;
                }
                3 * g1 as usize + col[s] as usize
            }
            None => g1 as usize,
        };
        if phenotype[s] == 1 {
            cases[cat] += 1;
        } else {
            controls[cat] += 1;
        }
    }
    (cases, controls)
}

/// (S, k) from per-category counts.
pub fn s_and_k(cases: &[u32; 9], controls: &[u32; 9]) -> (f64, usize) {
    let n1: u32 = cases.iter().sum();
    let n0: u32 = controls.iter().sum();
    let mut s = 0.0;
    let mut k = 0;
    for i in 0..9 {
        if cases[i] + controls[i] == 0 {
            continue;
        }
        k += 1;
        let (mut a, mut b, mut c, mut d) =
            (cases[i] as f64, (n1 - cases[i]) as f64, controls[i] as f64, (n0 - controls[i]) as f64);
        if a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0 {
            a += 0.5;
            b += 0.5;
            c += 0.5;
            d += 0.5;
        }
        let lor = ((a * d) / (b * c)).ln();
        let var = 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d;
        s += lor * lor / var;
    }
    (s, k)
}

/// Pearson statistic on a k×2 table without pooling; `None` if any expected count is zero.
pub fn pearson(cases: &[u32], controls: &[u32]) -> Option<(f64, usize)> {
    let n1: f64 = cases.iter().map(|&c| c as f64).sum();
    let n0: f64 = controls.iter().map(|&c| c as f64).sum();
    let n = n1 + n0;
    let mut stat = 0.0;
    let mut k = 0;
    for (&a, &c) in cases.iter().zip(controls) {
        let t = (a + c) as f64;
        if t == 0.0 {
            continue;
        }
        k += 1;
        let (e1, e0) = (t * n1 / n, t * n0 / n);
        stat += (a as f64 - e1).powi(2) / e1 + (c as f64 - e0).powi(2) / e0;
    }
    (k >= 2).then_some((stat, k - 1))
}

/// Logistic fit on grouped binomial data (one row per covariate pattern), by
/// Newton–Raphson with Gaussian elimination. Returns the deviance
/// −2·Σ[y·log p + (n−y)·log(1−p)].
pub fn grouped_logistic_deviance(patterns: &[(Vec<f64>, f64, f64)]) -> Option<f64> {
    let p = patterns.first()?.0.len();
    let mut beta = vec![0.0; p];
    for _ in 0..200 {
        let mut info = vec![vec![0.0; p]; p];
        let mut score = vec![0.0; p];
        for (x, y, n) in patterns {
            let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            let w = n * mu * (1.0 - mu);
            for i in 0..p {
                score[i] += x[i] * (y - n * mu);
                for j in 0..p {
                    info[i][j] += w * x[i] * x[j];
                }
            }
        }
        let step = solve(info, score)?;
        let change = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
        }
        if !beta.iter().all(|b| b.is_finite()) || beta.iter().any(|b| b.abs() > 30.0) {
            return None;
        }
        if change < 1e-12 {
            let mut dev = 0.0;
            for (x, y, n) in patterns {
                let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
                let mu = 1.0 / (1.0 + (-eta).exp());
                if *y > 0.0 {
                    dev -= 2.0 * y * mu.ln();
                }
                if n - y > 0.0 {
                    dev -= 2.0 * (n - y) * (1.0 - mu).ln();
                }
            }
            return Some(dev);
        }
    }
    None
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Grouped covariate patterns for the interaction model (full when `full`).
pub fn interaction_patterns(g1: &[u8], g2: &[u8], y: &[u8], full: bool) -> Vec<(Vec<f64>, f64, f64)> {
    let mut cells = [[(0.0, 0.0); 3]; 3];
    for s in 0..y.len() {
        if g1[s] == MISSING || g2[s] == MISSING {
            continue;
        }
        let c = &mut cells[g1[s] as usize][g2[s] as usize];
        c.0 += y[s] as f64;
        c.1 += 1.0;
    }
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let (ys, n) = cells[a][b];
            if n > 0.0 {
                let (fa, fb) = (a as f64, b as f64);
                let x = if full { vec![1.0, fa, fb, fa * fb] } else { vec![1.0, fa, fb] };
                out.push((x, ys, n));
            }
        }
    }
    out
}

/// Random small dataset: up to `max_markers` markers, some missing calls,
/// occasionally constant or all-missing markers.
pub fn random_dataset(rng: &mut ChaCha8Rng, max_subjects: usize, max_markers: usize) -> GenotypeDataset {
    let n = rng.random_range(4..=max_subjects);
    let m = rng.random_range(2..=max_markers);
    let mut phenotype: Vec<u8> = (0..n).map(|_| rng.random_bool(0.5) as u8).collect();
    phenotype[0] = 1;
    phenotype[1] = 0;
    let missing = rng.random_range(0.0..0.2);
    let columns = (0..m)
        .map(|_| match rng.random_range(0..20) {
            0 => vec![rng.random_range(0..3u8); n],
            1 => vec![MISSING; n],
            _ => (0..n)
                .map(|_| if rng.random_bool(missing) { MISSING } else { rng.random_range(0..3u8) })
                .collect(),
        })
        .collect();
    let names = (0..m).map(|i| format!("m{i}")).collect();
    GenotypeDataset::new(names, columns, phenotype).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Regularized upper incomplete gamma Q(a, y) = U / (L + U) by double-exponential
/// quadrature of t^(a−1)·e^(−t): tanh-sinh on [0, y] and on [y, y + 80].
pub fn quadrature_q(a: f64, y: f64) -> f64 {
    let g = |t: f64| (a - 1.0) * t.ln() - t;
    let lower = tanh_sinh(&g, 0.0, y);
    let upper = tanh_sinh(&g, y, y + 80.0) + tanh_sinh(&g, y + 80.0, y + 400.0);
    upper / (lower + upper)
}

/// ∫ exp(log_f(t)) dt over [lo, hi], refined until successive levels agree.
fn tanh_sinh(log_f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let term = |u: f64| -> f64 {
        let s = std::f64::consts::FRAC_PI_2 * u.sinh();
        let e = (-2.0 * s.abs()).exp();
        // distance from the nearer endpoint, without cancellation
        let delta = (hi - lo) * e / (1.0 + e);
        if delta <= 0.0 {
            return 0.0;
        }
        let t = if s < 0.0 { lo + delta } else { hi - delta };
        let cosh_s = 0.5 * (s.exp() + (-s).exp());
        let w = half * std::f64::consts::FRAC_PI_2 * u.cosh() / (cosh_s * cosh_s);
        if w == 0.0 { 0.0 } else { (log_f(t) + w.ln()).exp() }
    };
    let limit = 4.5;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut u = h;
    while u <= limit {
        sum += term(u) + term(-u);
        u += h;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let mut u = h;
        while u <= limit {
            sum += term(u) + term(-u);
            u += 2.0 * h;
        }
        let next = sum * h;
        if (next - estimate).abs() <= 1e-15 * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}
