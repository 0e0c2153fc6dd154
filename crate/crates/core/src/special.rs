//! Regularized incomplete gamma functions and the chi-squared distribution
//! with real-valued degrees of freedom.

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

pub fn ln_gamma(a: f64) -> f64 {
    libm::lgamma(a)
}

/// Returns (P(a, x), Q(a, x)).
///
/// Series for x < a + 1, Lentz continued fraction otherwise, so the smaller
/// of the two is always computed directly.
pub fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain("shape must be positive and finite"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("argument must be nonnegative"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = -x + a * libm::log(x) - ln_gamma(a);
    if x < a + 1.0 {
        let p = libm::exp(log_prefactor) * series(a, x);
        let p = p.min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = libm::exp(log_prefactor) * continued_fraction(a, x);
        let q = q.min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Σ_{n≥0} x^n / (a (a+1) … (a+n))
fn series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of 1/(x+1−a− 1(1−a)/(x+3−a− 2(2−a)/(x+5−a− …))).
fn continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_df(f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("degrees of freedom must be positive and finite"))
    }
}

/// Upper tail P(χ²_f > x) = Q(f/2, x/2).
pub fn chisq_sf(x: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    Ok(gamma_pq(f / 2.0, x / 2.0)?.1)
}

pub fn chisq_cdf(x: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    Ok(gamma_pq(f / 2.0, x / 2.0)?.0)
}

pub fn chisq_pdf(x: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    if !(x >= 0.0) {
        return Err(Error::Domain("argument must be nonnegative"));
    }
    let a = f / 2.0;
    if x == 0.0 {
        return Ok(match a {
            a if a < 1.0 => f64::INFINITY,
            a if a == 1.0 => 0.5,
            _ => 0.0,
        });
    }
    let ln = (a - 1.0) * libm::log(x) - x / 2.0 - a * core::f64::consts::LN_2 - ln_gamma(a);
    Ok(libm::exp(ln))
}

/// Inverse CDF by bracketing and bisection; the upper tail is inverted
/// through the survival function to keep precision for p near 1.
pub fn chisq_quantile(p: f64, f: f64) -> Result<f64> {
    check_df(f)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain("probability must lie in [0, 1]"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    // g is increasing in x and crosses zero at the quantile
    let g = |x: f64| -> Result<f64> {
        Ok(if upper { target - chisq_sf(x, f)? } else { chisq_cdf(x, f)? - target })
    };
    let mut lo = 0.0;
    let mut hi = f.max(1.0);
    while g(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain("quantile bracket overflow"));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_is_one() {
        for f in [0.3, 1.0, 2.0, 7.5, 40.0] {
            assert_eq!(chisq_sf(0.0, f).unwrap(), 1.0);
        }
    }

    #[test]
    fn closed_forms() {
        // f = 2: Q(1, x/2) = exp(-x/2)
        for x in [0.1, 1.0, 5.0, 30.0, 200.0] {
            assert!(rel(chisq_sf(x, 2.0).unwrap(), libm::exp(-x / 2.0)) < 1e-13);
        }
        // f = 1: erfc(sqrt(x/2))
        for x in [0.01, 0.5, 3.0, 20.0] {
            assert!(rel(chisq_sf(x, 1.0).unwrap(), libm::erfc(libm::sqrt(x / 2.0))) < 1e-12);
        }
    }

    #[test]
    fn critical_values() {
        assert!(rel(chisq_sf(3.841458821, 1.0).unwrap(), 0.05) < 1e-8);
        assert!(rel(chisq_sf(15.50731306, 8.0).unwrap(), 0.05) < 1e-8);
    }

    #[test]
    fn domain_errors() {
        assert!(chisq_sf(-1.0, 2.0).is_err());
        assert!(chisq_sf(1.0, 0.0).is_err());
        assert!(chisq_sf(f64::NAN, 2.0).is_err());
        assert!(chisq_sf(1.0, f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts() {
        for f in [0.7, 1.0, 2.0, 5.3, 12.0] {
            for p in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
                let x = chisq_quantile(p, f).unwrap();
                assert!((chisq_cdf(x, f).unwrap() - p).abs() < 1e-12, "f={f} p={p}");
            }
        }
        assert!(rel(chisq_quantile(0.95, 1.0).unwrap(), 3.841458820694124) < 1e-10);
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        // trapezoid over a fine grid, away from the f < 2 pole
        let f = 4.5;
        let n = 200_000;
        let hi = 10.0;
        let h = hi / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc += 0.5 * h * (chisq_pdf(a, f).unwrap() + chisq_pdf(b, f).unwrap());
        }
        assert!((acc - chisq_cdf(hi, f).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn sf_monotone() {
        let mut prev = 1.0;
        for i in 1..400 {
            let v = chisq_sf(i as f64 * 0.25, 3.3).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
