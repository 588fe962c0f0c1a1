//! Static SVG barcodes.

use std::fmt::Write;

use crate::diagram::PersistenceDiagram;

const WIDTH: f64 = 640.0;
const LEFT: f64 = 48.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 16.0;
const ROW: f64 = 6.0;
const PANEL_GAP: f64 = 28.0;
const AXIS_HEIGHT: f64 = 32.0;

/// Draw one horizontal bar per pair, one panel per diagram labeled by its
/// dimension. The x axis spans `[0, cap]` (extended left if a birth is
/// negative); infinite bars run to the right edge and end in an arrowhead.
/// Values beyond `cap` are clipped to it.
pub fn emit_barcode_svg(diagrams: &[PersistenceDiagram], cap: f64) -> String {
    let lo = diagrams
        .iter()
        .flat_map(|d| d.pairs.iter())
        .map(|p| p.birth)
        .filter(|b| b.is_finite())
        .fold(0.0_f64, f64::min);
    let hi = if cap.is_finite() && cap > lo { cap } else { lo + 1.0 };
    let plot = WIDTH - LEFT - RIGHT;
    let x = |v: f64| LEFT + (v.clamp(lo, hi) - lo) / (hi - lo) * plot;

    let mut body = String::new();
    let mut y = TOP;
    for d in diagrams {
        let rows = d.len().max(1) as f64;
        let panel = rows * ROW + ROW;
        writeln!(
            body,
            r#"<text class="label" x="8" y="{:.2}">H{}</text>"#,
            y + panel / 2.0 + 4.0,
            d.dimension
        )
        .unwrap();
        writeln!(
            body,
            r##"<rect x="{LEFT:.2}" y="{y:.2}" width="{plot:.2}" height="{panel:.2}" fill="none" stroke="#ccc"/>"##
        )
        .unwrap();
        for (i, p) in d.sorted().pairs.iter().enumerate() {
            let yy = y + ROW * (i as f64 + 1.0);
            let x1 = x(p.birth);
            if p.is_essential() {
                writeln!(
                    body,
                    r#"<line class="bar" x1="{x1:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" marker-end="url(#arrow)"/>"#,
                    WIDTH - RIGHT
                )
                .unwrap();
            } else {
                writeln!(
                    body,
                    r#"<line class="bar" x1="{x1:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}"/>"#,
                    x(p.death)
                )
                .unwrap();
            }
        }
        y += panel + PANEL_GAP;
    }

    let axis_y = y.max(TOP + PANEL_GAP) - PANEL_GAP / 2.0;
    let height = axis_y + AXIS_HEIGHT;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    )
    .unwrap();
    svg.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">",
        "<path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f4e8c\"/></marker></defs>\n",
        "<style>.bar{stroke:#1f4e8c;stroke-width:3}.label,.tick{font:12px sans-serif}</style>\n",
    ));
    svg.push_str(&body);
    writeln!(
        svg,
        r#"<line class="axis" x1="{LEFT:.2}" y1="{axis_y:.2}" x2="{:.2}" y2="{axis_y:.2}" stroke="black"/>"#,
        WIDTH - RIGHT
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line class="axis" x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{axis_y:.2}" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        writeln!(
            svg,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#,
            x(v),
            axis_y + 16.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
