//! Deterministic panel and edge ordering.
//!
//! Panels are sorted by translation (x, then y, then z, then name), every
//! loop is made counterclockwise, and each loop starts at the edge leaving
//! the lowest-leftmost vertex. Edge references are remapped to match.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::geometry::{sample_boundary, signed_area, DEFAULT_INTERSECTION_SAMPLES};
use crate::pattern::{EdgeRef, Panel, PatternSpec};
use crate::template::TemplateSpec;

/// Where an old edge index ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EdgeMove {
    index: usize,
    reversed: bool,
}

fn canonical_panel(panel: &Panel) -> (Panel, Vec<EdgeMove>) {
    let n = panel.edges.len();
    let ccw = signed_area(&sample_boundary(panel, DEFAULT_INTERSECTION_SAMPLES)) >= 0.0;

    let (edges, mut moves): (Vec<_>, Vec<EdgeMove>) = if ccw {
        (panel.edges.clone(), (0..n).map(|i| EdgeMove { index: i, reversed: false }).collect())
    } else {
        (
            panel.edges.iter().rev().map(|e| e.reversed()).collect(),
            (0..n).map(|i| EdgeMove { index: n - 1 - i, reversed: true }).collect(),
        )
    };

    let lowest_leftmost = |a: usize, b: usize| {
        let (va, vb) = (panel.vertices[edges[a].start()], panel.vertices[edges[b].start()]);
        va.y.total_cmp(&vb.y).then(va.x.total_cmp(&vb.x))
    };
    let first = (0..n).min_by(|&a, &b| lowest_leftmost(a, b)).unwrap_or(0);

    let rotated: Vec<_> = (0..n).map(|j| edges[(j + first) % n].clone()).collect();
    for m in &mut moves {
        m.index = (m.index + n - first) % n;
    }
    let mut out = panel.clone();
    out.edges = rotated;
    (out, moves)
}

fn panel_order(a: &Panel, b: &Panel) -> Ordering {
    let (ta, tb) = (a.translation, b.translation);
    ta.x.total_cmp(&tb.x)
        .then(ta.y.total_cmp(&tb.y))
        .then(ta.z.total_cmp(&tb.z))
        .then_with(|| a.name.cmp(&b.name))
}

fn canonical_with_moves(p: &PatternSpec) -> (PatternSpec, HashMap<String, Vec<EdgeMove>>) {
    let mut moves = HashMap::new();
    let mut panels = Vec::with_capacity(p.panels.len());
    for panel in &p.panels {
        let (c, m) = canonical_panel(panel);
        moves.insert(panel.name.clone(), m);
        panels.push(c);
    }
    panels.sort_by(panel_order);

    let remap = |r: &EdgeRef| -> EdgeRef { remap_ref(&moves, r).0 };
    let stitches = p
        .stitches
        .iter()
        .map(|s| crate::pattern::Stitch { sides: [remap(&s.sides[0]), remap(&s.sides[1])] })
        .collect();
    (PatternSpec { panels, stitches }, moves)
}

fn remap_ref(moves: &HashMap<String, Vec<EdgeMove>>, r: &EdgeRef) -> (EdgeRef, bool) {
    match moves.get(&r.panel).and_then(|m| m.get(r.edge)) {
        Some(m) => (EdgeRef::new(r.panel.clone(), m.index), m.reversed),
        None => (r.clone(), false),
    }
}

pub fn canonicalize(p: &PatternSpec) -> PatternSpec {
    canonical_with_moves(p).0
}

/// Canonicalize the base pattern and carry every edge reference along.
///
/// Influence entries on reversed edges swap which endpoint moves so that
/// length rules keep displacing the same vertex.
pub fn canonicalize_template(t: &TemplateSpec) -> TemplateSpec {
    let (pattern, moves) = canonical_with_moves(&t.pattern);
    let mut out = t.clone();
    out.pattern = pattern;
    for rule in &mut out.parameters {
        for entry in &mut rule.influence {
            let (r, reversed) = remap_ref(&moves, &entry.edge_ref);
            entry.edge_ref = r;
            if reversed {
                entry.toward_end = !entry.toward_end;
            }
        }
    }
    for c in &mut out.constraints {
        for r in &mut c.edges {
            *r = remap_ref(&moves, r).0;
        }
    }
    out
}
