//! Minimal SVG line charts with a CSV sidecar of the plotted points.

use std::fmt::Write;

use crate::telemetry::Point;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Upper bound on points drawn per series; longer series are min/max decimated.
    pub max_points: usize,
}

impl LineChart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        LineChart {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            max_points: 4000,
        }
    }

    pub fn with_series(mut self, name: impl Into<String>, points: Vec<Point>) -> Self {
        self.series.push(Series { name: name.into(), points });
        self
    }

    /// The points that are actually drawn, per series.
    pub fn plotted(&self) -> Vec<Series> {
        self.series
            .iter()
            .map(|s| Series { name: s.name.clone(), points: decimate(&s.points, self.max_points) })
            .collect()
    }

    pub fn to_svg(&self) -> String {
        let plotted = self.plotted();
        let all = plotted.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in all {
            x0 = x0.min(p.t);
            x1 = x1.max(p.t);
            y0 = y0.min(p.v);
            y1 = y1.max(p.v);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = (y1 - y0) * 0.05;
        let (y0, y1) = (y0 - pad, y1 + pad);
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.1}" y1="{MARGIN_T}" x2="{px:.1}" y2="{:.1}" stroke="#ddd"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                MARGIN_T + ph,
                MARGIN_T + ph + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_L}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                MARGIN_L + pw,
                MARGIN_L - 6.0,
                py + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in plotted.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut pts = String::with_capacity(s.points.len() * 16);
            for p in &s.points {
                let _ = write!(pts, "{:.2},{:.2} ", sx(p.t), sy(p.v));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                pts.trim_end()
            );
            let ly = MARGIN_T + 14.0 + i as f64 * 18.0;
            let lx = MARGIN_L + pw + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                lx + 24.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    /// `series,t,v` rows of every plotted point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,t,v\n");
        for s in self.plotted() {
            for p in &s.points {
                let _ = writeln!(out, "{},{:.6},{:.6}", s.name, p.t, p.v);
            }
        }
        out
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e6).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Keeps the first, min, max and last point of each bucket, in time order.
fn decimate(points: &[Point], max_points: usize) -> Vec<Point> {
    if points.len() <= max_points || max_points < 4 {
        return points.to_vec();
    }
    let buckets = max_points / 4;
    let size = points.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(max_points);
    for chunk in points.chunks(size) {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in chunk.iter().enumerate() {
            if p.v < chunk[lo].v {
                lo = i;
            }
            if p.v > chunk[hi].v {
                hi = i;
            }
        }
        let mut idx = vec![0, lo, hi, chunk.len() - 1];
        idx.sort_unstable();
        idx.dedup();
        out.extend(idx.into_iter().map(|i| chunk[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_series() {
        let chart = LineChart::new("core", "t [s]", "P [mW]")
            .with_series("core", (0..100).map(|i| Point::new(i as f64, 3000.0 + i as f64)).collect())
            .with_series("pll", (0..100).map(|i| Point::new(i as f64, 1.0)).collect());
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(chart.to_csv().lines().count(), 201);
    }

    #[test]
    fn decimation_bounds_points_and_keeps_extremes() {
        let pts: Vec<_> = (0..100_000)
            .map(|i| Point::new(i as f64, if i == 54_321 { 1e6 } else { (i % 7) as f64 }))
            .collect();
        let d = decimate(&pts, 4000);
        assert!(d.len() <= 4000);
        assert!(d.iter().any(|p| p.v == 1e6));
        assert!(d.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn empty_chart_renders() {
        let svg = LineChart::new("x", "t", "v").to_svg();
        assert!(svg.contains("</svg>"));
    }
}
