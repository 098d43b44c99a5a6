//! SVG scatter of chart coordinates for `d = 3` limit sets.
//!
//! The viewport covers the 5th to 95th percentile of `u`, then the 5th to
//! 95th percentile of `w` over the points inside that `u` range, padded by
//! 10%. Taking the `w` range independently would let the far branches of the
//! curve, where `w` grows like `u²`, flatten everything else. The anchor
//! sits at the chart origin and its tangent line `ξ^(2)` is the `u` axis,
//! drawn as a segment of fixed relative length.

use std::fmt::Write;

use anosov_core::export::ChartPoint;

const SIZE: f64 = 600.0;
const PAD: f64 = 0.1;
const TANGENT_FRACTION: f64 = 0.4;

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let i = (p * (sorted.len() - 1) as f64).round() as usize;
    sorted[i]
}

/// `[lo, hi]` covering the 5th to 95th percentile and the origin, padded.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (-1.0, 1.0);
    }
    v.sort_by(f64::total_cmp);
    let lo = percentile(&v, 0.05).min(0.0);
    let hi = percentile(&v, 0.95).max(0.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    (lo - PAD * span, hi + PAD * span)
}

pub fn chart_svg(points: &[ChartPoint], anchor: &str) -> String {
    let (u0, u1) = range(points.iter().map(|p| p.u[0]));
    let (w0, w1) = range(points.iter().filter(|p| (u0..=u1).contains(&p.u[0])).map(|p| p.w[0]));
    let x = |u: f64| (u - u0) / (u1 - u0) * SIZE;
    let y = |w: f64| SIZE - (w - w0) / (w1 - w0) * SIZE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<title>chart coordinates, anchor {anchor}</title>"#);
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(s, r##"<g fill="#1f4e99" fill-opacity="0.6">"##);
    for p in points {
        let (px, py) = (x(p.u[0]), y(p.w[0]));
        if (0.0..=SIZE).contains(&px) && (0.0..=SIZE).contains(&py) {
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="1.5"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");
    let half = TANGENT_FRACTION * (u1 - u0) / 2.0;
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2"/>"##,
        x(-half),
        y(0.0),
        x(half),
        y(0.0)
    );
    let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#c0392b"/>"##, x(0.0), y(0.0));
    s.push_str("</svg>\n");
    s
}
