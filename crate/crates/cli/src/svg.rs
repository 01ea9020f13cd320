//! Minimal deterministic SVG line plots on a fixed 640×480 canvas.

use std::fmt::Write;

use crate::format::fmt_g;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const DASHES: [&str; 3] = ["", "6 4", "2 3"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
}

#[derive(Debug, PartialEq, Eq)]
pub enum SvgError {
    Empty,
    NonFinite,
    NonPositiveLog,
}

impl std::fmt::Display for SvgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SvgError::Empty => "nothing to plot",
            SvgError::NonFinite => "plot data must be finite",
            SvgError::NonPositiveLog => "log-scale x values must be positive",
        })
    }
}

impl std::error::Error for SvgError {}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(lo: f64, hi: f64, log: bool) -> Self {
        let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        let (lo, hi) = if log {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.04 * (hi - lo);
            (lo - pad, hi + pad)
        };
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            return (self.lo as i32..=self.hi as i32).map(|e| 10f64.powi(e)).collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series as polylines (single points as markers) with axes,
/// decade ticks when `log_x`, and a legend.
pub fn emit_svg(series: &[Series], style: &PlotStyle) -> Result<String, SvgError> {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return Err(SvgError::Empty);
    }
    if all.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(SvgError::NonFinite);
    }
    if style.log_x && all.iter().any(|(x, _)| *x <= 0.0) {
        return Err(SvgError::NonPositiveLog);
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| all.iter().map(pick).fold(init, f);
    let xa = Axis::new(fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0), style.log_x);
    let ya = Axis::new(fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1), false);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&style.title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    for t in xa.ticks() {
        let x = px(t);
        let label = if style.log_x { format!("1e{}", t.log10().round() as i32) } else { fmt_g(t, 4) };
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0);
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, fmt_g(t, 4));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 14.0, escape(&style.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(&style.y_label)
    );

    for (k, series) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dash = DASHES[k % DASHES.len()];
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        if series.points.len() == 1 {
            let (x, y) = series.points[0];
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(x), py(y));
        } else if series.points.len() > 1 {
            let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = LEFT + pw - 190.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            lx + 24.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn style(log_x: bool) -> PlotStyle {
        PlotStyle { title: "t".into(), x_label: "x".into(), y_label: "y".into(), log_x }
    }

    #[test]
    fn single_point_is_a_marker() {
        let svg = emit_svg(&[Series::new("p", vec![(0.5, 0.5)])], &style(false)).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn three_curves_three_polylines() {
        let a = Series::new("a", vec![(0.0, 0.0), (1.0, 0.5)]);
        let b = Series::new("b", vec![(0.0, 0.0), (1.0, 0.5)]);
        let c = Series::new("c", vec![(0.0, 0.0), (1.0, 0.25)]);
        let svg = emit_svg(&[a, b, c], &style(false)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(">a</text>") && svg.contains(">c</text>"));
    }

    #[test]
    fn log_axis_ticks_at_decades() {
        let s = Series::new("n", vec![(1e-6, 3.0), (1e-2, 1.0)]);
        let svg = emit_svg(&[s], &style(true)).unwrap();
        for e in -6..=-2 {
            assert!(svg.contains(&format!(">1e{e}<")), "missing decade {e}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(emit_svg(&[], &style(false)), Err(SvgError::Empty));
        assert_eq!(emit_svg(&[Series::new("e", vec![])], &style(false)), Err(SvgError::Empty));
        assert_eq!(emit_svg(&[Series::new("n", vec![(f64::NAN, 1.0)])], &style(false)), Err(SvgError::NonFinite));
        assert_eq!(emit_svg(&[Series::new("z", vec![(0.0, 1.0)])], &style(true)), Err(SvgError::NonPositiveLog));
    }

    #[test]
    fn deterministic() {
        let s = [Series::new("a", vec![(0.1, 0.2), (0.3, 0.4)])];
        assert_eq!(emit_svg(&s, &style(false)).unwrap(), emit_svg(&s, &style(false)).unwrap());
    }
}
