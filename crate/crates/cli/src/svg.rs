//! Minimal SVG 1.1 charts: line plots, histograms and tornado bars. Text
//! uses the generic `sans-serif` family so no font is embedded or fetched.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub color: &'static str,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        esc(title)
    );
}

#[derive(Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let (mut x0, mut x1) = bounds(xs);
        let (mut y0, mut y1) = bounds(ys);
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        Frame {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        })
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (bx, by) = (LEFT, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (x, y) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{by}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            by + 5.0,
            by + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{bx}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 5.0,
            bx - 7.0,
            y + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 20.0,
        esc(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        esc(ylabel)
    );
}

/// Line plot; non-finite points break a series into separate polylines.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let f = Frame::fit(pts().map(|p| p.0), pts().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for s in series {
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        for run in s
            .points
            .split(|p| !(p.0.is_finite() && p.1.is_finite()))
            .filter(|r| !r.is_empty())
        {
            let mut d = String::new();
            for (x, y) in run {
                let _ = write!(d, "{:.2},{:.2} ", f.px(*x), f.py(*y));
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                d.trim_end(),
                s.color
            );
        }
    }
    let mut seen: Vec<&str> = Vec::new();
    let mut row = 0;
    for s in series {
        if s.label.is_empty() || seen.contains(&s.label.as_str()) {
            continue;
        }
        seen.push(&s.label);
        let y = TOP + 14.0 + 16.0 * row as f64;
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="1.8"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            W - RIGHT - 170.0,
            W - RIGHT - 140.0,
            s.color,
            W - RIGHT - 134.0,
            y + 4.0,
            esc(&s.label)
        );
        row += 1;
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram with `bins` equal-width bins over the finite values.
pub fn histogram(title: &str, xlabel: &str, values: &[f64], bins: usize) -> String {
    let bins = bins.max(1);
    let (lo, hi) = bounds(values.iter().copied());
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (0.0, 1.0)
    };
    let mut counts = vec![0usize; bins];
    for &v in values.iter().filter(|v| v.is_finite()) {
        let i = (((v - lo) / (hi - lo)) * bins as f64) as usize;
        counts[i.min(bins - 1)] += 1;
    }
    let cmax = counts.iter().copied().max().unwrap_or(0) as f64;
    let f = Frame {
        x0: lo,
        x1: hi,
        y0: 0.0,
        y1: cmax.max(1.0) * 1.05,
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, "count");
    let w = (hi - lo) / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        let x = f.px(lo + i as f64 * w);
        let x2 = f.px(lo + (i + 1) as f64 * w);
        let y = f.py(c as f64);
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white" stroke-width="0.5"/>"##,
            x2 - x,
            f.py(0.0) - y
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Horizontal bars centred on zero, in the given order.
pub fn tornado(title: &str, xlabel: &str, entries: &[(String, f64)]) -> String {
    let m = entries
        .iter()
        .map(|e| e.1.abs())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let f = Frame {
        x0: -m * 1.05,
        x1: m * 1.05,
        y0: 0.0,
        y1: 1.0,
    };
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    let n = entries.len().max(1) as f64;
    let band = (H - TOP - BOTTOM) / n;
    let zero = f.px(0.0);
    for (i, (name, v)) in entries.iter().enumerate() {
        let y = TOP + band * i as f64;
        if v.is_finite() {
            let x = f.px(*v);
            let fill = if *v < 0.0 { "#d62728" } else { "#1f77b4" };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                x.min(zero),
                y + 0.15 * band,
                (x - zero).abs(),
                0.7 * band
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 0.5 * band + 4.0,
            esc(name)
        );
    }
    let _ = writeln!(
        out,
        r#"<line x1="{zero:.2}" y1="{TOP}" x2="{zero:.2}" y2="{}" stroke="black"/>"#,
        H - BOTTOM
    );
    for v in [-m, 0.0, m] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.px(v),
            H - BOTTOM + 18.0,
            tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 20.0,
        esc(xlabel)
    );
    out.push_str("</svg>\n");
    out
}
