//! Deterministic SVG plots of spectral tables.
//!
//! Input is a CSV table with a header row. The spectrum plots read `lambda`
//! against `theta_eps` (or `theta`) and `ln_eps`; an optional `family` column
//! selects the marker colour. The coverage plot reads `lambda` only. Output
//! has a fixed viewport and fixed number formatting, so equal input gives
//! byte-identical files.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    SpectrumVsLntheta,
    SpectrumVsLneps,
    Coverage,
}

impl FromStr for PlotKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrum-vs-lntheta" => Ok(PlotKind::SpectrumVsLntheta),
            "spectrum-vs-lneps" => Ok(PlotKind::SpectrumVsLneps),
            "coverage" => Ok(PlotKind::Coverage),
            _ => Err(invalid(format!(
                "unknown plot kind '{s}' (expected spectrum-vs-lntheta, spectrum-vs-lneps or coverage)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// Period markers of the ln ε plot are spaced by π/b0.
    pub b0: f64,
    /// Interval of the coverage plot; defaults to the data range.
    pub interval: Option<(f64, f64)>,
    /// Gaps wider than this are marked on the coverage plot; defaults to 1% of the interval.
    pub gap_tol: Option<f64>,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { b0: 1.0, interval: None, gap_tol: None, title: None }
    }
}

/// A parsed CSV table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| invalid(format!("malformed CSV header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()
            .map_err(|e| invalid(format!("malformed CSV row: {e}")))?;
        Ok(Self { header, rows })
    }

    fn column(&self, names: &[&str]) -> Option<usize> {
        names.iter().find_map(|n| self.header.iter().position(|h| h == n))
    }

    fn numbers(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.get(col)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("row {}: column '{}' is not a number", i + 1, self.header[col])))
            })
            .collect()
    }

    fn require(&self, names: &[&str]) -> Result<usize> {
        self.column(names).ok_or_else(|| invalid(format!("table has no column {}", names.join(" or "))))
    }
}

/// Renders `table` as an SVG document.
pub fn emit_plot(table: &Table, kind: PlotKind, opts: &PlotOptions) -> Result<String> {
    let y_col = table.require(&["lambda"])?;
    let title = opts.title.clone().unwrap_or_else(|| match kind {
        PlotKind::SpectrumVsLntheta => "spectrum against theta".into(),
        PlotKind::SpectrumVsLneps => "spectrum against ln eps".into(),
        PlotKind::Coverage => "coverage of the spectral union".into(),
    });
    let families: Vec<String> = match table.column(&["family"]) {
        Some(c) => table.rows.iter().map(|r| r.get(c).cloned().unwrap_or_default()).collect(),
        None => vec![String::new(); table.rows.len()],
    };
    let lambda = table.numbers(y_col)?;
    match kind {
        PlotKind::SpectrumVsLntheta | PlotKind::SpectrumVsLneps => {
            let (x_names, x_label): (&[&str], &str) = if kind == PlotKind::SpectrumVsLneps {
                (&["ln_eps"], "ln eps")
            } else {
                (&["theta_eps", "theta"], "theta")
            };
            let x = table.numbers(table.require(x_names)?)?;
            let mut svg = Canvas::new(&title, x_label, "lambda");
            if x.is_empty() {
                svg.empty();
                return Ok(svg.finish());
            }
            let mut frame = Frame::fit(&x, &lambda);
            if kind == PlotKind::SpectrumVsLneps {
                frame.pad_x();
            }
            svg.axes(&frame);
            if kind == PlotKind::SpectrumVsLneps {
                if !(opts.b0 > 0.0) {
                    return Err(invalid("b0 must be positive"));
                }
                let period = std::f64::consts::PI / opts.b0;
                let start = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut k = 0;
                loop {
                    let at = start - k as f64 * period;
                    if at < frame.x0 - 1e-12 {
                        break;
                    }
                    svg.period_marker(&frame, at);
                    k += 1;
                }
            }
            for ((&xi, &yi), fam) in x.iter().zip(&lambda).zip(&families) {
                svg.point(&frame, xi, yi, colour(fam));
            }
            Ok(svg.finish())
        }
        PlotKind::Coverage => {
            let mut svg = Canvas::new(&title, "lambda", "");
            let interval = match opts.interval {
                Some(i) => i,
                None if lambda.is_empty() => {
                    svg.empty();
                    return Ok(svg.finish());
                }
                None => (
                    lambda.iter().cloned().fold(f64::INFINITY, f64::min),
                    lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                ),
            };
            if lambda.is_empty() {
                svg.empty();
                return Ok(svg.finish());
            }
            let (lo, hi) = interval;
            if !(hi > lo) {
                return Err(invalid("coverage interval must have positive length"));
            }
            let tol = opts.gap_tol.unwrap_or(0.01 * (hi - lo));
            let frame = Frame { x0: lo, x1: hi, y0: 0.0, y1: 1.0 };
            svg.axes_x_only(&frame);
            let mut pts: Vec<f64> = lambda.iter().copied().filter(|&v| v >= lo && v <= hi).collect();
            for &p in &pts {
                svg.tick_mark(&frame, p);
            }
            pts.push(lo);
            pts.push(hi);
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                if w[1] - w[0] > tol {
                    svg.gap_marker(&frame, w[0], w[1]);
                }
            }
            Ok(svg.finish())
        }
    }
}

fn colour(family: &str) -> &'static str {
    match family {
        "mode0" => "#1f5fbf",
        "fem" | "" => "#000000",
        _ => "#808080",
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(x: &[f64], y: &[f64]) -> Self {
        let span = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            } else {
                (lo - 1.0, hi + 1.0)
            }
        };
        let (x0, x1) = span(x);
        let (y0, y1) = span(y);
        Self { x0, x1, y0, y1 }
    }

    fn pad_x(&mut self) {
        // keeps the rightmost period marker inside the plotting area
        let pad = 0.01 * (self.x1 - self.x0);
        self.x1 += pad;
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Round tick positions covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 10.0,
            escape(x_label)
        );
        if !y_label.is_empty() {
            let _ = writeln!(
                out,
                r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
                (TOP + HEIGHT - BOTTOM) / 2.0,
                escape(y_label)
            );
        }
        Self { out }
    }

    fn frame_rect(&mut self) {
        let _ = writeln!(
            self.out,
            r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
    }

    fn empty(&mut self) {
        self.frame_rect();
        let _ = writeln!(
            self.out,
            r##"<text class="warning" x="{}" y="{}" text-anchor="middle" fill="#b00000">warning: empty table, nothing to plot</text>"##,
            (LEFT + WIDTH - RIGHT) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0
        );
    }

    fn x_ticks(&mut self, f: &Frame) {
        for t in ticks(f.x0, f.x1) {
            let x = f.px(t);
            let _ = writeln!(
                self.out,
                r##"<line x1="{x:.2}" y1="{0}" x2="{x:.2}" y2="{1}" stroke="#000000"/><text x="{x:.2}" y="{2}" text-anchor="middle">{3}</text>"##,
                HEIGHT - BOTTOM,
                HEIGHT - BOTTOM + 5.0,
                HEIGHT - BOTTOM + 18.0,
                num(t)
            );
        }
    }

    fn axes(&mut self, f: &Frame) {
        self.frame_rect();
        self.x_ticks(f);
        for t in ticks(f.y0, f.y1) {
            let y = f.py(t);
            let _ = writeln!(
                self.out,
                r##"<line x1="{0}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#000000"/><text x="{1}" y="{2:.2}" text-anchor="end">{3}</text>"##,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                num(t)
            );
        }
    }

    fn axes_x_only(&mut self, f: &Frame) {
        self.frame_rect();
        self.x_ticks(f);
    }

    fn period_marker(&mut self, f: &Frame, x: f64) {
        let _ = writeln!(
            self.out,
            r##"<line class="period" x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1}" stroke="#c08000" stroke-dasharray="4 3"/>"##,
            f.px(x),
            HEIGHT - BOTTOM
        );
    }

    fn point(&mut self, f: &Frame, x: f64, y: f64, fill: &str) {
        let _ = writeln!(self.out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}"/>"#, f.px(x), f.py(y));
    }

    fn tick_mark(&mut self, f: &Frame, x: f64) {
        let _ = writeln!(
            self.out,
            r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="#1f5fbf"/>"##,
            f.px(x),
            f.py(0.7),
            f.py(0.3)
        );
    }

    fn gap_marker(&mut self, f: &Frame, a: f64, b: f64) {
        let _ = writeln!(
            self.out,
            r##"<rect class="gap" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#d04040" fill-opacity="0.3"/>"##,
            f.px(a),
            f.py(0.2),
            f.px(b) - f.px(a),
            f.py(0.0) - f.py(0.2)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_csv() -> String {
        let mut s = String::from("eps,ln_eps,theta_eps,lambda,family,mismatch\n");
        for j in 0..17 {
            let l = -(j as f64) * std::f64::consts::PI / 8.0 - 4.6;
            let _ = writeln!(s, "{:e},{l},{},{},mode0,0.01", l.exp(), (j as f64 * 0.3) % 6.0, 3.0 - 0.2 * j as f64);
            let _ = writeln!(s, "{:e},{l},{},3.39,k1,0.002", l.exp(), (j as f64 * 0.3) % 6.0);
        }
        s
    }

    #[test]
    fn identical_input_gives_identical_svg() {
        let t = Table::from_csv(&sweep_csv()).unwrap();
        for kind in [PlotKind::SpectrumVsLntheta, PlotKind::SpectrumVsLneps, PlotKind::Coverage] {
            let a = emit_plot(&t, kind, &PlotOptions::default()).unwrap();
            let b = emit_plot(&Table::from_csv(&sweep_csv()).unwrap(), kind, &PlotOptions::default()).unwrap();
            assert_eq!(a, b);
            assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        }
    }

    #[test]
    fn period_markers_are_spaced_by_the_period() {
        let t = Table::from_csv(&sweep_csv()).unwrap();
        let svg = emit_plot(&t, PlotKind::SpectrumVsLneps, &PlotOptions::default()).unwrap();
        let xs: Vec<f64> = svg
            .lines()
            .filter(|l| l.contains("class=\"period\""))
            .map(|l| l.split("x1=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap())
            .collect();
        // data spans two periods in ln eps
        assert_eq!(xs.len(), 3);
        let f = Frame::fit(&[-4.6, -4.6 - 2.0 * std::f64::consts::PI], &[0.0, 1.0]);
        let mut f2 = f;
        f2.pad_x();
        let unit = f2.px(std::f64::consts::PI) - f2.px(0.0);
        assert!((xs[0] - xs[1] - unit).abs() < 0.02);
        assert!((xs[1] - xs[2] - unit).abs() < 0.02);
    }

    #[test]
    fn fully_covered_interval_has_no_gap_markers() {
        let mut s = String::from("lambda\n");
        for i in 0..=200 {
            let _ = writeln!(s, "{}", i as f64 * 0.025);
        }
        let t = Table::from_csv(&s).unwrap();
        let opts = PlotOptions { interval: Some((0.0, 5.0)), ..PlotOptions::default() };
        let svg = emit_plot(&t, PlotKind::Coverage, &opts).unwrap();
        assert!(!svg.contains("class=\"gap\""));
        let t = Table::from_csv("lambda\n0.5\n4.5\n").unwrap();
        let svg = emit_plot(&t, PlotKind::Coverage, &opts).unwrap();
        assert_eq!(svg.matches("class=\"gap\"").count(), 3);
    }

    #[test]
    fn empty_table_gives_annotated_axes() {
        let t = Table::from_csv("eps,ln_eps,theta_eps,lambda,family,mismatch\n").unwrap();
        for kind in [PlotKind::SpectrumVsLntheta, PlotKind::SpectrumVsLneps, PlotKind::Coverage] {
            let svg = emit_plot(&t, kind, &PlotOptions::default()).unwrap();
            assert!(svg.contains("class=\"warning\""));
            assert!(!svg.contains("<circle"));
        }
    }

    #[test]
    fn malformed_tables_rejected() {
        let t = Table::from_csv("x,y\n1,2\n").unwrap();
        assert!(emit_plot(&t, PlotKind::Coverage, &PlotOptions::default()).is_err());
        let t = Table::from_csv("ln_eps,lambda\n1,abc\n").unwrap();
        assert!(emit_plot(&t, PlotKind::SpectrumVsLneps, &PlotOptions::default()).is_err());
        assert!("scatter".parse::<PlotKind>().is_err());
    }

    #[test]
    fn tick_positions_are_round() {
        assert_eq!(ticks(0.0, 5.0), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(num(-0.00001), "0");
        assert_eq!(num(2.5), "2.5");
    }
}
