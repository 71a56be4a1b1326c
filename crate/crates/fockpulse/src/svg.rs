//! Minimal SVG line plots: polylines, ticks, a legend and an optional right axis.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const MAX_POINTS: usize = 1500;

pub const PALETTE: [&str; 9] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stroke {
    Solid,
    Dotted,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub color: &'static str,
    pub stroke: Stroke,
    pub axis: Axis,
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub left_label: String,
    pub right_label: Option<String>,
    pub series: Vec<Series>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let lo = lo.min(0.0);
    if hi - lo < 1e-300 {
        (lo, lo + 1.0)
    } else {
        (lo, hi * 1.05)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let (x0, x1) = {
            let (lo, hi) = self
                .series
                .iter()
                .flat_map(|s| s.x.iter().copied())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if lo.is_finite() && hi > lo {
                (lo, hi)
            } else {
                (0.0, 1.0)
            }
        };
        let axis_range =
            |axis: Axis| range(self.series.iter().filter(|s| s.axis == axis).flat_map(|s| s.y.iter().copied()));
        let left = axis_range(Axis::Left);
        let right = axis_range(Axis::Right);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64, (lo, hi): (f64, f64)| TOP + ph - (y - lo) / (hi - lo) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                TOP + ph,
                TOP + ph + 5.0
            );
            let _ =
                writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t));
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );

        for t in ticks(left.0, left.1) {
            let y = sy(t, left);
            let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ =
                writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, label(t));
        }
        let _ = writeln!(
            out,
            r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.left_label)
        );
        if let Some(right_label) = &self.right_label {
            let xr = LEFT + pw;
            for t in ticks(right.0, right.1) {
                let y = sy(t, right);
                let _ = writeln!(out, r#"<line x1="{xr}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="black"/>"#, xr + 5.0);
                let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, xr + 8.0, y + 4.0, label(t));
            }
            let _ = writeln!(
                out,
                r#"<text transform="translate({} {}) rotate(90)" text-anchor="middle">{}</text>"#,
                WIDTH - 14.0,
                TOP + ph / 2.0,
                escape(right_label)
            );
        }

        for (i, s) in self.series.iter().enumerate() {
            let r = if s.axis == Axis::Left { left } else { right };
            let stride = s.x.len().div_ceil(MAX_POINTS).max(1);
            let mut points = String::new();
            let last = s.x.len().saturating_sub(1);
            for (k, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
                if k % stride == 0 || k == last {
                    let _ = write!(points, "{:.2},{:.2} ", sx(*x), sy(*y, r));
                }
            }
            let dash = if s.stroke == Stroke::Dotted { r#" stroke-dasharray="2 3""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                s.color,
                points.trim_end()
            );
            let ly = TOP + 14.0 + 16.0 * i as f64;
            let lx = LEFT + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                s.color,
                lx + 28.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_numbers() {
        let t = ticks(0.0, 1.0);
        let want = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        assert_eq!(t.len(), want.len());
        assert!(t.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{t:?}");
        assert_eq!(ticks(-18.0, 18.0), [-10.0, 0.0, 10.0]);
    }

    #[test]
    fn renders_every_series_and_escapes_text() {
        let plot = Plot {
            title: "a < b".into(),
            x_label: "t".into(),
            left_label: "n".into(),
            right_label: Some("flux".into()),
            series: vec![
                Series {
                    name: "n_out".into(),
                    x: vec![0.0, 1.0, 2.0],
                    y: vec![0.0, 1.0, 2.0],
                    color: PALETTE[0],
                    stroke: Stroke::Solid,
                    axis: Axis::Left,
                },
                Series {
                    name: "pump".into(),
                    x: vec![0.0, 1.0, 2.0],
                    y: vec![0.0, 1.0, 0.0],
                    color: PALETTE[1],
                    stroke: Stroke::Dotted,
                    axis: Axis::Right,
                },
            ],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("stroke-dasharray"));
    }
}
