//! Minimal self-contained SVG charts: actual-vs-predicted scatter and
//! objective-trace line plots.

use std::fmt::Write;

use crate::error::{Error, Result};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Data-to-pixel mapping for one plot area.
#[derive(Clone, Copy, Debug)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    width: f64,
    height: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), width: f64, height: f64) -> Self {
        Frame {
            x: widen(x),
            y: widen(y),
            width,
            height,
        }
    }

    fn px(&self, v: f64) -> f64 {
        MARGIN_LEFT
            + (v - self.x.0) / (self.x.1 - self.x.0) * (self.width - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        let plot_h = self.height - MARGIN_TOP - MARGIN_BOTTOM;
        self.height - MARGIN_BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * plot_h
    }
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    })
}

/// Roughly `count` round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let raw = (hi - lo) / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (left, right) = (MARGIN_LEFT, frame.width - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, frame.height - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        right - left,
        bottom - top
    );
    out.push_str("<g class=\"ticks\" fill=\"#333\">\n");
    for t in ticks(frame.x.0, frame.x.1, 6) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            bottom + 5.0,
            bottom + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(frame.y.0, frame.y.1, 6) {
        let y = frame.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        frame.height - 15.0,
        escape(x_label)
    );
    let cy = (top + bottom) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        escape(y_label)
    );
}

/// Actual (x) against predicted (y) in kW, with the `y = x` reference line.
/// Both axes share one range so the reference line is the diagonal.
pub fn scatter_svg(points: &[(f64, f64)], title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::invalid("scatter plot needs at least one point"));
    }
    if points.iter().any(|(a, p)| !a.is_finite() || !p.is_finite()) {
        return Err(Error::invalid("scatter plot points must be finite"));
    }
    let range = bounds(points.iter().flat_map(|&(a, p)| [a, p]));
    let frame = Frame::new(range, range, WIDTH, HEIGHT);
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title);
    axes(
        &mut out,
        &frame,
        "Actual power (kW)",
        "Predicted power (kW)",
    );
    let (lo, hi) = frame.x;
    let _ = writeln!(
        out,
        r##"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        frame.px(lo),
        frame.py(lo),
        frame.px(hi),
        frame.py(hi)
    );
    out.push_str("<g class=\"points\" fill=\"#1f77b4\" fill-opacity=\"0.5\">\n");
    for &(a, p) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
            frame.px(a),
            frame.py(p)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// One polyline of objective value against iteration per series, with a
/// legend in series order.
pub fn trace_svg(series: &[(String, Vec<(f64, f64)>)], title: &str) -> Result<String> {
    if series.is_empty() || series.iter().any(|(_, s)| s.is_empty()) {
        return Err(Error::invalid("trace plot needs non-empty series"));
    }
    let all = || series.iter().flat_map(|(_, s)| s.iter());
    if all().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("trace values must be finite"));
    }
    let width = WIDTH + 150.0;
    let frame = Frame {
        width: WIDTH,
        ..Frame::new(
            bounds(all().map(|p| p.0)),
            bounds(all().map(|p| p.1)),
            WIDTH,
            HEIGHT,
        )
    };
    let mut out = String::new();
    header(&mut out, width, HEIGHT, title);
    axes(&mut out, &frame, "Iteration", "Objective (MSE, scaled)");
    for (i, (label, points)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-label="{}" points="{}" fill="none" stroke="{colour}" stroke-width="1.8"/>"#,
            escape(label),
            coords.join(" ")
        );
    }
    out.push_str("<g class=\"legend\">\n");
    for (i, (label, _)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH + 5.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
