//! Association results TSV.
//!
//! Pair scans write `rank marker1 marker2 w k pair_pval marker1_pval
//! marker2_pval`; main-effect scans write `rank marker1 w k pval`.
//! p-values use scientific notation with three significant digits; untestable
//! rows show `NA`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use wtest_core::{AssociationResult, Order};

use crate::error::{Error, Result};

pub const PAIR_HEADER: &str = "rank\tmarker1\tmarker2\tw\tk\tpair_pval\tmarker1_pval\tmarker2_pval";
pub const MAIN_HEADER: &str = "rank\tmarker1\tw\tk\tpval";

pub fn format_p(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.2e}"),
        None => "NA".into(),
    }
}

fn format_w(w: Option<f64>) -> String {
    match w {
        Some(w) => format!("{w:.4}"),
        None => "NA".into(),
    }
}

pub fn write_results_to<W: Write>(results: &[AssociationResult], order: Order, w: &mut W) -> std::io::Result<()> {
    match order {
        Order::Main => writeln!(w, "{MAIN_HEADER}")?,
        Order::Pair => writeln!(w, "{PAIR_HEADER}")?,
    }
    for (i, r) in results.iter().enumerate() {
        match order {
            Order::Main => writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                i + 1,
                r.marker1,
                format_w(r.w),
                r.k,
                format_p(r.p_value)
            )?,
            Order::Pair => writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                r.marker1,
                r.marker2.as_deref().unwrap_or("NA"),
                format_w(r.w),
                r.k,
                format_p(r.p_value),
                format_p(r.marker1_main_p),
                format_p(r.marker2_main_p)
            )?,
        }
    }
    Ok(())
}

pub fn write_results(results: &[AssociationResult], order: Order, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_results_to(results, order, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64) -> AssociationResult {
        AssociationResult {
            marker1: "rs1".into(),
            marker2: Some("rs2".into()),
            marker1_index: 0,
            marker2_index: Some(1),
            w: Some(31.1),
            k: 9,
            p_value: Some(p),
            marker1_main_p: Some(0.123),
            marker2_main_p: Some(0.002),
        }
    }

    #[test]
    fn three_rows_four_lines() {
        let mut buf = Vec::new();
        write_results_to(&[row(7.3e-4), row(1.9e-3), row(2.7e-3)], Order::Pair, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], PAIR_HEADER);
        assert_eq!(lines[1], "1\trs1\trs2\t31.1000\t9\t7.30e-4\t1.23e-1\t2.00e-3");
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_results_to(&[], Order::Main, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{MAIN_HEADER}\n"));
    }

    #[test]
    fn untestable_prints_na() {
        assert_eq!(format_p(None), "NA");
        assert_eq!(format_p(Some(1.0)), "1.00e0");
    }
}
