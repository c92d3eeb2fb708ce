//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 48.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dashed: bool,
}

/// Shaded region between `lo` and `hi`.
#[derive(Debug, Clone)]
pub struct Band {
    pub x: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn path(frame: &Frame, x: &[f64], y: &[f64]) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for (a, b) in x.iter().zip(y) {
        if !(a.is_finite() && b.is_finite()) {
            pen_down = false;
            continue;
        }
        let cmd = if pen_down { 'L' } else { 'M' };
        let _ = write!(d, "{cmd}{:.2},{:.2} ", frame.px(*a), frame.py(*b));
        pen_down = true;
    }
    d.trim_end().to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.x.iter().copied())
            .chain(self.bands.iter().flat_map(|b| b.x.iter().copied()));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.y.iter().copied())
            .chain(self.bands.iter().flat_map(|b| b.lo.iter().chain(&b.hi).copied()));
        let (x0, x1) = extent(xs);
        let (y0, y1) = extent(ys);
        let f = Frame { x0, x1, y0, y1 };

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        if !self.title.is_empty() {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
                WIDTH / 2.0,
                escape(&self.title)
            );
        }
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{l:.2},{t:.2} L{l:.2},{b:.2} L{r:.2},{b:.2}" stroke="black" fill="none"/>"#
        );
        for (v, anchor, x, y) in [
            (x0, "start", l, b + 16.0),
            (x1, "end", r, b + 16.0),
            (y0, "end", l - 4.0, b),
            (y1, "end", l - 4.0, t + 4.0),
        ] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{v:.3}</text>"#
            );
        }
        for band in &self.bands {
            let upper = path(&f, &band.x, &band.hi);
            let lower: Vec<(f64, f64)> = band.x.iter().copied().zip(band.lo.iter().copied()).rev().collect();
            let (lx, ly): (Vec<f64>, Vec<f64>) = lower.into_iter().unzip();
            let lower = path(&f, &lx, &ly).replacen('M', "L", 1);
            let _ = writeln!(
                out,
                r##"<path d="{upper} {lower} Z" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = if s.dashed { "black" } else { PALETTE[i % PALETTE.len()] };
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"{dash}><title>{}</title></path>"#,
                path(&f, &s.x, &s.y),
                escape(&s.label)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = if s.dashed { "black" } else { PALETTE[i % PALETTE.len()] };
            let y = t + 14.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
                r - 80.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Rescales each value into `[0, 1]`; constant input maps to zeros.
pub fn min_max(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    if hi - lo <= 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_polyline() {
        let c = Chart {
            series: vec![Series {
                label: "y".into(),
                x: vec![0.0, 1.0, 2.0],
                y: vec![1.0, 3.0, 2.0],
                dashed: false,
            }],
            ..Default::default()
        };
        let svg = c.render();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 1);
        assert!(svg.contains("M48.00,372.00 L360.00,48.00 L672.00,210.00"));
    }

    #[test]
    fn non_finite_points_break_the_line() {
        let f = Frame {
            x0: 0.0,
            x1: 2.0,
            y0: 0.0,
            y1: 1.0,
        };
        let d = path(&f, &[0.0, 1.0, 2.0], &[0.0, f64::NAN, 1.0]);
        assert_eq!(d.matches('M').count(), 2);
    }

    #[test]
    fn min_max_scaling() {
        assert_eq!(min_max(&[2.0, 4.0, 3.0]), vec![0.0, 1.0, 0.5]);
        assert_eq!(min_max(&[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn labels_are_escaped() {
        assert_eq!(escape("a<b & c"), "a&lt;b &amp; c");
    }
}
