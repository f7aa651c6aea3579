//! Minimal SVG rendering of curve families, projected to two axes.

use std::fmt::Write;

use curve_surgery::Curve;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Renders each curve as a polyline through its leg endpoints, using
/// coordinates `axes.0` and `axes.1`. The first curve, if `background` is
/// set, is drawn in light grey underneath the rest.
pub fn render(curves: &[&Curve], axes: (usize, usize), background: bool) -> String {
    let pts: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| {
            let coord = |v: &[f64]| (v.get(axes.0).copied().unwrap_or(0.0), v.get(axes.1).copied().unwrap_or(0.0));
            let legs = c.legs();
            let mut line: Vec<(f64, f64)> = Vec::with_capacity(legs.len() + 1);
            match legs.first() {
                Some(first) => line.push(coord(&first.leg.start)),
                None => line.push(coord(&c.start().0)),
            }
            line.extend(legs.iter().map(|l| coord(&l.leg.end)));
            line
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |(x, y): (f64, f64)| (MARGIN + (x - x0) * scale, SIZE - MARGIN - (y - y0) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, line) in pts.iter().enumerate() {
        let (color, width) = if background && k == 0 {
            ("#cccccc", 4.0)
        } else {
            (PALETTE[k % PALETTE.len()], 1.5)
        };
        let mut d = String::new();
        for (i, &p) in line.iter().enumerate() {
            let (x, y) = map(p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        if curves[k].is_closed() {
            d.push('Z');
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{width}" stroke-linejoin="round"/>"#,
            d.trim_end()
        );
    }
    out.push_str("</svg>\n");
    out
}
