//! Just enough SVG for the diagnostic panels.

use std::fmt::Write as _;

pub const PANEL_W: f64 = 360.0;
pub const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

/// Data-to-pixel mapping for one panel placed at (`left`, `top`).
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub left: f64,
    pub top: f64,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Frame {
    pub fn new(left: f64, top: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        Self { left, top, x, y }
    }

    fn plot_w(&self) -> f64 {
        PANEL_W - MARGIN_L - MARGIN_R
    }

    fn plot_h(&self) -> f64 {
        PANEL_H - MARGIN_T - MARGIN_B
    }

    pub fn px(&self, x: f64) -> f64 {
        self.left + MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * self.plot_w()
    }

    pub fn py(&self, y: f64) -> f64 {
        self.top + MARGIN_T + (1.0 - (y - self.y.0) / (self.y.1 - self.y.0)) * self.plot_h()
    }

    fn clamp_y(&self, y: f64) -> f64 {
        y.clamp(self.y.0, self.y.1)
    }
}

pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Default)]
pub struct Canvas {
    body: String,
}

impl Canvas {
    pub fn axes(&mut self, f: &Frame, title: &str, x_label: &str, y_label: &str) {
        let (x0, x1) = (f.px(f.x.0), f.px(f.x.1));
        let (y0, y1) = (f.py(f.y.0), f.py(f.y.1));
        let b = &mut self.body;
        writeln!(b, r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##, x1 - x0, y0 - y1).unwrap();
        for t in nice_ticks(f.x.0, f.x.1) {
            let x = f.px(t);
            writeln!(b, r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/>"##, y0 + 4.0).unwrap();
            writeln!(b, r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, y0 + 15.0, fmt_tick(t)).unwrap();
        }
        for t in nice_ticks(f.y.0, f.y.1) {
            let y = f.py(t);
            writeln!(b, r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="#444"/>"##, x0 - 4.0).unwrap();
            writeln!(b, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#, x0 - 6.0, y + 3.5, fmt_tick(t)).unwrap();
        }
        writeln!(b, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, f.top + 18.0, escape(title)).unwrap();
        writeln!(b, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, y0 + 32.0, escape(x_label)).unwrap();
        let (lx, ly) = (f.left + 12.0, (y0 + y1) / 2.0);
        writeln!(b, r#"<text x="{lx:.1}" y="{ly:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#, escape(y_label)).unwrap();
    }

    /// Bars from `x0` to `x1` of height `y`, clipped to the frame.
    pub fn bar(&mut self, f: &Frame, x0: f64, x1: f64, y: f64, fill: &str) {
        if x0 >= f.x.1 || y <= f.y.0 {
            return;
        }
        let (a, b) = (f.px(x0.max(f.x.0)), f.px(x1.min(f.x.1)));
        let top = f.py(f.clamp_y(y));
        writeln!(
            self.body,
            r#"<rect x="{a:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="white" stroke-width="0.5"/>"#,
            (b - a).max(0.0),
            f.py(f.y.0) - top
        )
        .unwrap();
    }

    pub fn polyline(&mut self, f: &Frame, points: &[(f64, f64)], stroke: &str, dashed: bool) {
        let pts: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && *x >= f.x.0 && *x <= f.x.1)
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(f.clamp_y(y))))
            .collect();
        let dash = if dashed { r#" stroke-dasharray="5,4""# } else { "" };
        writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.6"{dash}/>"#, pts.join(" ")).unwrap();
    }

    pub fn point(&mut self, f: &Frame, x: f64, y: f64, fill: &str) {
        if x < f.x.0 || x > f.x.1 || y < f.y.0 || y > f.y.1 {
            return;
        }
        writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{fill}"/>"#, f.px(x), f.py(y)).unwrap();
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, text: &str, fill: &str) {
        writeln!(self.body, r#"<text x="{x:.1}" y="{y:.1}" font-size="{size}" fill="{fill}">{}</text>"#, escape(text)).unwrap();
    }

    pub fn finish(self, width: f64, height: f64) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}
