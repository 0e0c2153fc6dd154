//! Per-cell log odds ratios, the raw sum S and the calibrated W statistic.
//!
//! Each retained category i is contrasted against the rest through the 2×2
//! table (n1i, N1−n1i; n0i, N0−n0i). When any of the four entries is zero,
//! 0.5 is added to all four (Haldane–Anscombe) so that the log odds ratio and
//! its Woolf standard error stay finite. Logs are natural.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hf::HfTable;
use crate::special::chisq_sf;
use crate::table::ContingencyTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsCell {
    pub log_or: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WStatistic {
    pub w: f64,
    pub k: usize,
    pub h_used: f64,
    pub f_used: f64,
    pub p_value: f64,
}

/// Log odds ratio and standard error for one category against the rest.
#[inline]
pub fn odds_cell(n1: u32, total1: u32, n0: u32, total0: u32) -> OddsCell {
    let mut a = n1 as f64;
    let mut c = (total1 - n1) as f64;
    let mut b = n0 as f64;
    let mut d = (total0 - n0) as f64;
    if a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0 {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    OddsCell {
        log_or: libm::log((a * d) / (c * b)),
        se: libm::sqrt(1.0 / a + 1.0 / c + 1.0 / b + 1.0 / d),
    }
}

pub fn cell_log_odds(table: &ContingencyTable) -> Vec<OddsCell> {
    table.cells().iter().map(|c| odds_cell(c.n1, table.n1(), c.n0, table.n0())).collect()
}

/// S = Σ (log_or / se)².
pub fn s_statistic(cells: &[OddsCell]) -> f64 {
    cells.iter().map(|c| (c.log_or / c.se) * (c.log_or / c.se)).sum()
}

/// S straight from a table, without the intermediate vector.
#[inline]
pub fn table_s(table: &ContingencyTable) -> f64 {
    let (n1, n0) = (table.n1(), table.n0());
    table
        .cells()
        .iter()
        .map(|c| {
            let o = odds_cell(c.n1, n1, c.n0, n0);
            (o.log_or / o.se) * (o.log_or / o.se)
        })
        .sum()
}

/// W = h(k)·S referred to χ²_f(k).
///
/// Tables with a single category have no odds contrast and yield
/// [`Error::Untestable`].
pub fn w_test(table: &ContingencyTable, hf: &HfTable) -> Result<WStatistic> {
    let k = table.k();
    if k < 2 {
        return Err(Error::Untestable);
    }
    let entry = hf.get(k).ok_or(Error::MissingHf { k })?;
    let w = entry.h * table_s(table);
    Ok(WStatistic { w, k, h_used: entry.h, f_used: entry.f, p_value: chisq_sf(w, entry.f)? })
}
