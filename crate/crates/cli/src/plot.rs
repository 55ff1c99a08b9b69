//! Static SVG: data points, band center curve and band.

use std::fmt::Write;

use crate::report::BandRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn polyline(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in pts {
        let _ = write!(s, "{:.2},{:.2} ", frame.px(x), frame.py(y));
    }
    s.trim_end().to_string()
}

/// Renders the plot. `points` are observed `(x, y)` pairs.
pub fn render_svg(title: &str, points: &[(f64, f64)], band: &[BandRow]) -> String {
    let xs = points.iter().map(|p| p.0).chain(band.iter().map(|r| r.x));
    let ys = points
        .iter()
        .map(|p| p.1)
        .chain(band.iter().flat_map(|r| [r.lower, r.upper]));
    let frame = Frame::fit(xs.clone(), ys.clone());

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    for (value, x, y, anchor) in [
        (frame.x0, left, bottom + 16.0, "start"),
        (frame.x1, right, bottom + 16.0, "end"),
    ] {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{value:.3}</text>"#
        );
    }
    for (value, y) in [(frame.y0, bottom), (frame.y1, top + 10.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{value:.3}</text>"#,
            left - 4.0
        );
    }

    if !band.is_empty() {
        let outline = polyline(
            &frame,
            band.iter()
                .map(|r| (r.x, r.upper))
                .chain(band.iter().rev().map(|r| (r.x, r.lower))),
        );
        let _ = writeln!(
            svg,
            r##"<polygon points="{outline}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##
        );
        let center = polyline(&frame, band.iter().map(|r| (r.x, r.center)));
        let _ = writeln!(
            svg,
            r##"<polyline points="{center}" fill="none" stroke="#08519c" stroke-width="2"/>"##
        );
    }
    for &(x, y) in points {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#d94801"/>"##,
            frame.px(x),
            frame.py(y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_every_layer() {
        let band = vec![
            BandRow {
                x: 0.0,
                lower: -1.0,
                center: 0.0,
                upper: 1.0,
            },
            BandRow {
                x: 1.0,
                lower: 0.0,
                center: 1.0,
                upper: 2.0,
            },
        ];
        let svg = render_svg("a < b", &[(0.5, 0.4), (0.7, 0.9)], &band);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn degenerate_ranges_do_not_produce_nan() {
        let band = vec![BandRow {
            x: 2.0,
            lower: 3.0,
            center: 3.0,
            upper: 3.0,
        }];
        let svg = render_svg("flat", &[(2.0, 3.0)], &band);
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }
}
