//! Debug export of panel outlines as SVG, one path per panel laid out left
//! to right.

use std::fmt::Write;

use super::curve::control_point_abs;
use crate::pattern::PatternSpec;

pub fn pattern_to_svg(pattern: &PatternSpec) -> String {
    let gap = 5.0;
    let mut body = String::new();
    let mut offset_x = 0.0;
    let mut max_h: f64 = 0.0;
    for panel in &pattern.panels {
        if panel.vertices.is_empty() {
            continue;
        }
        let (mut lo, mut hi) = (panel.vertices[0], panel.vertices[0]);
        for v in &panel.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        max_h = max_h.max(hi.y - lo.y);
        // y-up panel coordinates, y-down SVG.
        let map = |x: f64, y: f64| (x - lo.x + offset_x, hi.y - y);
        let mut d = String::new();
        for (i, e) in panel.edges.iter().enumerate() {
            let (p0, p1) = panel.edge_endpoints(i);
            if i == 0 {
                let (x, y) = map(p0.x, p0.y);
                let _ = write!(d, "M {x} {y} ");
            }
            let (x1, y1) = map(p1.x, p1.y);
            match e.curvature.and_then(|rel| control_point_abs(p0, p1, rel).ok()) {
                Some(c) => {
                    let (cx, cy) = map(c.x, c.y);
                    let _ = write!(d, "Q {cx} {cy} {x1} {y1} ");
                }
                None => {
                    let _ = write!(d, "L {x1} {y1} ");
                }
            }
        }
        d.push('Z');
        let _ = writeln!(
            body,
            r#"  <path id="{}" d="{}" fill="none" stroke="black" stroke-width="0.3"/>"#,
            panel.name, d
        );
        offset_x += hi.x - lo.x + gap;
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
        offset_x.max(1.0),
        max_h.max(1.0),
        body
    )
}
