//! Density and QQ diagnostics for null W samples.
//!
//! For each k with enough samples the observed null W distribution is set
//! against χ²_f(k): a Freedman–Diaconis histogram under the expected density
//! curve, and sorted W against χ²_f quantiles at plotting positions
//! (i − 0.5)/n. Each report writes one TSV and one SVG per k
//! (`diag_density_k{K}.*`, `diag_qq_k{K}.*`) and a combined SVG with one panel
//! per k (`diag_density.svg`, `diag_qq.svg`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use wtest_core::special::{chisq_cdf, chisq_pdf, chisq_quantile};
use wtest_core::stats::{ks_distance, ols_slope, quantile_sorted, sorted, Histogram};
use wtest_core::NullWSamples;

use crate::error::{Error, Result};
use crate::svg::{Canvas, Frame, PANEL_H, PANEL_W};

/// Fewest samples a k bucket needs before it is plotted.
pub const MIN_DIAG_SAMPLES: usize = 100;
const COLUMNS: usize = 3;
const CURVE_POINTS: usize = 240;

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSummary {
    pub k: usize,
    pub n: usize,
    pub h: f64,
    pub f: f64,
    pub ks_distance: f64,
    pub qq_slope: f64,
}

/// Summary of every k with at least [`MIN_DIAG_SAMPLES`] samples, plus the
/// (k, count) of every omitted bucket in the order's range.
pub fn summarize(samples: &NullWSamples) -> Result<(Vec<PanelSummary>, Vec<(usize, usize)>)> {
    let mut panels = Vec::new();
    let mut omitted = Vec::new();
    for k in samples.order.k_range() {
        let n = samples.count(k);
        if n < MIN_DIAG_SAMPLES {
            omitted.push((k, n));
            continue;
        }
        let e = samples.hf.get(k).ok_or(wtest_core::Error::MissingHf { k })?;
        let values = sorted(&samples.by_k[&k]);
        panels.push(PanelSummary {
            k,
            n,
            h: e.h,
            f: e.f,
            ks_distance: ks_against_chisq(&values, e.f),
            qq_slope: qq_slope(&values, e.f)?,
        });
    }
    if panels.is_empty() {
        let counts: Vec<String> = omitted.iter().map(|(k, n)| format!("k={k}: {n}")).collect();
        return Err(Error::Diagnostics(format!(
            "no k bucket has at least {MIN_DIAG_SAMPLES} null samples ({})",
            counts.join(", ")
        )));
    }
    Ok((panels, omitted))
}

/// KS distance between sorted samples and χ²_f.
pub fn ks_against_chisq(sorted_values: &[f64], f: f64) -> f64 {
    ks_distance(sorted_values, |x| chisq_cdf(x, f).unwrap_or(f64::NAN))
}

/// (theoretical, observed) quantile pairs.
pub fn qq_points(sorted_values: &[f64], f: f64) -> Result<Vec<(f64, f64)>> {
    let n = sorted_values.len() as f64;
    sorted_values
        .iter()
        .enumerate()
        .map(|(i, &w)| Ok((chisq_quantile((i as f64 + 0.5) / n, f)?, w)))
        .collect()
}

pub fn qq_slope(sorted_values: &[f64], f: f64) -> Result<f64> {
    let pts = qq_points(sorted_values, f)?;
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Ok(ols_slope(&x, &y))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn density_panel(canvas: &mut Canvas, left: f64, top: f64, values: &[f64], p: &PanelSummary) -> Result<()> {
    let hist = Histogram::freedman_diaconis(values);
    let x_max = quantile_sorted(values, 0.995).max(chisq_quantile(0.995, p.f)?).max(hist.width);
    let curve = curve_points(p.f, x_max)?;
    let hist_max = (0..hist.counts.len()).map(|b| hist.density(b)).fold(0.0, f64::max);
    let curve_max = curve.iter().map(|c| c.1).filter(|y| y.is_finite()).fold(0.0, f64::max);
    let y_max = 1.1 * hist_max.max(curve_max.min(2.0 * hist_max));
    let frame = Frame::new(left, top, (0.0, x_max), (0.0, y_max));
    for b in 0..hist.counts.len() {
        canvas.bar(&frame, hist.bin_start(b), hist.bin_start(b + 1), hist.density(b), "#9ecae1");
    }
    canvas.polyline(&frame, &curve, "#d62728", false);
    let title = format!("k = {}, f = {:.2}, n = {}, KS = {:.3}", p.k, p.f, p.n, p.ks_distance);
    canvas.axes(&frame, &title, "W", "density");
    canvas.text(frame.px(x_max) - 118.0, top + 46.0, 10.0, "bars: observed", "#3182bd");
    canvas.text(frame.px(x_max) - 118.0, top + 58.0, 10.0, "line: chi-squared(f)", "#d62728");
    Ok(())
}

fn curve_points(f: f64, x_max: f64) -> Result<Vec<(f64, f64)>> {
    (1..=CURVE_POINTS)
        .map(|i| {
            let x = x_max * i as f64 / CURVE_POINTS as f64;
            Ok((x, chisq_pdf(x, f)?))
        })
        .collect()
}

fn density_tsv(values: &[f64], p: &PanelSummary) -> Result<String> {
    let hist = Histogram::freedman_diaconis(values);
    let mut out = String::from("kind\tx0\tx1\tcount\tobserved_density\texpected_density\n");
    for b in 0..hist.counts.len() {
        let (x0, x1) = (hist.bin_start(b), hist.bin_start(b + 1));
        let mid = chisq_pdf(0.5 * (x0 + x1), p.f)?;
        writeln!(out, "bin\t{x0}\t{x1}\t{}\t{}\t{mid}", hist.counts[b], hist.density(b)).unwrap();
    }
    let x_max = hist.bin_start(hist.counts.len());
    for (x, y) in curve_points(p.f, x_max)? {
        writeln!(out, "curve\t{x}\t{x}\tNA\tNA\t{y}").unwrap();
    }
    Ok(out)
}

fn qq_panel(canvas: &mut Canvas, left: f64, top: f64, points: &[(f64, f64)], p: &PanelSummary) {
    let hi = points.iter().map(|&(x, y)| x.max(y)).fold(0.0, f64::max).max(1e-9) * 1.05;
    let frame = Frame::new(left, top, (0.0, hi), (0.0, hi));
    canvas.polyline(&frame, &[(0.0, 0.0), (hi, hi)], "#d62728", true);
    let stride = (points.len() / 2000).max(1);
    for &(x, y) in points.iter().step_by(stride) {
        canvas.point(&frame, x, y, "#3182bd");
    }
    let title = format!("k = {}, f = {:.2}, n = {}, slope = {:.3}", p.k, p.f, p.n, p.qq_slope);
    canvas.axes(&frame, &title, "expected chi-squared(f) quantile", "observed W");
}

fn omitted_note(canvas: &mut Canvas, left: f64, top: f64, k: usize, n: usize) {
    canvas.text(left + 40.0, top + PANEL_H / 2.0, 12.0, &format!("k = {k}: {n} samples, panel omitted"), "#777");
}

fn grid_size(panels: usize) -> (f64, f64) {
    let cols = panels.clamp(1, COLUMNS);
    let rows = panels.div_ceil(COLUMNS).max(1);
    (cols as f64 * PANEL_W, rows as f64 * PANEL_H)
}

fn slot(i: usize) -> (f64, f64) {
    ((i % COLUMNS) as f64 * PANEL_W, (i / COLUMNS) as f64 * PANEL_H)
}

/// Writes per-k density TSV/SVG files and the combined panel figure.
pub fn density_report(samples: &NullWSamples, out_dir: &Path) -> Result<Vec<PanelSummary>> {
    let (panels, omitted) = summarize(samples)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut combined = Canvas::default();
    let mut i = 0;
    for k in samples.order.k_range() {
        let (left, top) = slot(i);
        if let Some(p) = panels.iter().find(|p| p.k == k) {
            let values = sorted(&samples.by_k[&k]);
            density_panel(&mut combined, left, top, &values, p)?;
            let mut single = Canvas::default();
            density_panel(&mut single, 0.0, 0.0, &values, p)?;
            write(&out_dir.join(format!("diag_density_k{k}.svg")), &single.finish(PANEL_W, PANEL_H))?;
            write(&out_dir.join(format!("diag_density_k{k}.tsv")), &density_tsv(&values, p)?)?;
        } else {
            let n = omitted.iter().find(|o| o.0 == k).map_or(0, |o| o.1);
            omitted_note(&mut combined, left, top, k, n);
        }
        i += 1;
    }
    let (w, h) = grid_size(i);
    write(&out_dir.join("diag_density.svg"), &combined.finish(w, h))?;
    Ok(panels)
}

/// Writes per-k QQ TSV/SVG files and the combined panel figure.
pub fn qq_report(samples: &NullWSamples, out_dir: &Path) -> Result<Vec<PanelSummary>> {
    let (panels, omitted) = summarize(samples)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut combined = Canvas::default();
    let mut i = 0;
    for k in samples.order.k_range() {
        let (left, top) = slot(i);
        if let Some(p) = panels.iter().find(|p| p.k == k) {
            let values = sorted(&samples.by_k[&k]);
            let points = qq_points(&values, p.f)?;
            qq_panel(&mut combined, left, top, &points, p);
            let mut single = Canvas::default();
            qq_panel(&mut single, 0.0, 0.0, &points, p);
            write(&out_dir.join(format!("diag_qq_k{k}.svg")), &single.finish(PANEL_W, PANEL_H))?;
            let mut tsv = String::from("i\texpected\tobserved\n");
            for (j, (x, y)) in points.iter().enumerate() {
                writeln!(tsv, "{}\t{x}\t{y}", j + 1).unwrap();
            }
            write(&out_dir.join(format!("diag_qq_k{k}.tsv")), &tsv)?;
        } else {
            let n = omitted.iter().find(|o| o.0 == k).map_or(0, |o| o.1);
            omitted_note(&mut combined, left, top, k, n);
        }
        i += 1;
    }
    let (w, h) = grid_size(i);
    write(&out_dir.join("diag_qq.svg"), &combined.finish(w, h))?;
    Ok(panels)
}

pub fn write_summary(panels: &[PanelSummary], path: &Path) -> Result<()> {
    let mut out = String::from("k\tn\th\tf\tks_distance\tqq_slope\n");
    for p in panels {
        writeln!(out, "{}\t{}\t{}\t{}\t{:.6}\t{:.6}", p.k, p.n, p.h, p.f, p.ks_distance, p.qq_slope).unwrap();
    }
    write(path, &out)
}
