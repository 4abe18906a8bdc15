//! Static SVG scatter and line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Markers,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: &'static str, style: Style, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color, style, points }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Fixed axis ranges; fitted to the data when `None`.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fitted(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { lo.abs().max(1.0) * 0.5 };
    (lo - pad, hi + pad)
}

fn tick_label(x: f64, span: f64) -> String {
    if span == 0.0 || (span.abs() < 1e4 && span.abs() >= 1e-2) {
        let s = format!("{x:.3}");
        if s == "-0.000" { "0.000".into() } else { s }
    } else {
        format!("{x:.2e}")
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let (x0, x1) = self.x_range.unwrap_or_else(|| fitted(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0))));
        let (y0, y1) = self.y_range.unwrap_or_else(|| fitted(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1))));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title)).unwrap();
        writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();

        for i in 0..=TICKS {
            let f = i as f64 / TICKS as f64;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let bottom = TOP + ph;
            writeln!(out, r#"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 5.0).unwrap();
            writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 19.0, tick_label(xv, x1 - x0)).unwrap();
            writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0).unwrap();
            writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, tick_label(yv, y1 - y0)).unwrap();
        }
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, escape(&self.x_label)).unwrap();
        writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for s in &self.series {
            let pts: Vec<(f64, f64)> =
                s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).map(|&(x, y)| (sx(x), sy(y))).collect();
            match s.style {
                Style::Markers => {
                    writeln!(out, r#"<g fill="{}" class="markers">"#, s.color).unwrap();
                    for (px, py) in pts {
                        writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="1.6"/>"#).unwrap();
                    }
                    out.push_str("</g>\n");
                }
                Style::Line if !pts.is_empty() => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#, s.color, path.join(" ")).unwrap();
                }
                Style::Line => {}
            }
        }

        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = LEFT + pw - 150.0;
            writeln!(out, r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#, y - 9.0, s.color).unwrap();
            writeln!(out, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 14.0, escape(&s.label)).unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}
