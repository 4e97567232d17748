//! Deterministic hand-written SVG line plots.

use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Axes {
    pub x: String,
    pub y: String,
    pub logx: bool,
    pub logy: bool,
    pub title: String,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Up to about six ticks in data space; decades on log axes.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
        let stride = ((b - a) / 6).max(1);
        return (a..=b).step_by(stride as usize).map(|e| e as f64).filter(|e| *e >= lo && *e <= hi).collect();
    }
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders one polyline per series with a legend and tick labels.
///
/// On log axes nonpositive coordinates are dropped and the count is recorded
/// in a comment; non-finite points are always dropped.
pub fn emit_svg_lines(series: &[Series], axes: &Axes) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Plot("no series to plot".into()));
    }
    if let Some(s) = series.iter().find(|s| s.points.len() < 2) {
        return Err(Error::Plot(format!("series `{}` has fewer than 2 points", s.label)));
    }
    let mut dropped = 0usize;
    let tx = |v: f64| if axes.logx { v.log10() } else { v };
    let ty = |v: f64| if axes.logy { v.log10() } else { v };
    let kept: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|&&(x, y)| {
                    let ok = x.is_finite() && y.is_finite() && (!axes.logx || x > 0.0) && (!axes.logy || y > 0.0);
                    if !ok {
                        dropped += 1;
                    }
                    ok
                })
                .map(|&(x, y)| (tx(x), ty(y)))
                .collect()
        })
        .collect();
    if kept.iter().all(Vec::is_empty) {
        return Err(Error::Plot("every point was dropped".into()));
    }
    let (x0, x1) = bounds(kept.iter().flatten().map(|p| p.0));
    let (y0, y1) = bounds(kept.iter().flatten().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, "<!-- dropped {dropped} points -->");
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&axes.title)
    );
    let show = |v: f64, log: bool| tick_label(if log { 10f64.powf(v) } else { v });
    for t in ticks(x0, x1, axes.logx) {
        let px = sx(t);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#888" stroke-width="0.5"/>"##,
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            show(t, axes.logx)
        );
    }
    for t in ticks(y0, y1, axes.logy) {
        let py = sy(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#888" stroke-width="0.5"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            show(t, axes.logy)
        );
    }
    let log_note = |name: &str, log: bool| if log { format!("{name} (log)") } else { name.to_string() };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&log_note(&axes.x, axes.logx))
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&log_note(&axes.y, axes.logy))
    );
    for (k, (s, pts)) in series.iter().zip(&kept).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(points: Vec<(f64, f64)>) -> Vec<Series> {
        vec![Series { label: "a".into(), points }]
    }

    #[test]
    fn two_point_polyline() {
        let svg = emit_svg_lines(&one(vec![(1.0, 1.0), (2.0, 2.0)]), &Axes::default()).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(pts.split(' ').count(), 2);
        assert!(svg.contains("<!-- dropped 0 points -->"));
    }

    #[test]
    fn log_axis_drops_nonpositive() {
        let axes = Axes { logy: true, ..Axes::default() };
        let svg = emit_svg_lines(&one(vec![(1.0, 0.0), (2.0, 1.0), (3.0, 10.0)]), &axes).unwrap();
        assert!(svg.contains("<!-- dropped 1 points -->"));
        assert!(matches!(emit_svg_lines(&one(vec![(1.0, 0.0), (2.0, -1.0)]), &axes), Err(Error::Plot(_))));
    }

    #[test]
    fn deterministic_and_validated() {
        let s = vec![
            Series { label: "x<y".into(), points: vec![(1.0, 3.0), (10.0, 0.5), (100.0, 0.01)] },
            Series { label: "b".into(), points: vec![(1.0, 2.0), (100.0, 1e-4)] },
        ];
        let axes = Axes { logx: true, logy: true, title: "t".into(), x: "iter".into(), y: "g".into() };
        let a = emit_svg_lines(&s, &axes).unwrap();
        assert_eq!(a, emit_svg_lines(&s, &axes).unwrap());
        assert!(a.contains("x&lt;y"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(emit_svg_lines(&[], &axes).is_err());
        assert!(emit_svg_lines(&one(vec![(1.0, 1.0)]), &axes).is_err());
    }
}
