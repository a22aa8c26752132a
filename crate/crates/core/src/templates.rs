//! Built-in demonstration templates and the default mannequin body.
//!
//! The JSON documents under `assets/templates` are generated from the
//! builders here; `PATTERNFORGE_BLESS=1 cargo test -p patternforge-core
//! templates` rewrites them.

use crate::body::{shapes, BodyModel};
use crate::canonical::canonicalize_template;
use crate::geometry::control_point_abs;
use crate::params::{Constraint, InfluenceEntry, ParameterRule, RuleKind, Target};
use crate::pattern::{Edge, EdgeRef, Panel, PatternSpec, Stitch, Vec3, Vertex2D};
use crate::template::{parse_template, TemplateSpec};

pub const PANTS_JSON: &str = include_str!("../assets/templates/pants.json");
pub const SKIRT_2_PANELS_JSON: &str = include_str!("../assets/templates/skirt_2_panels.json");
pub const SKIRT_4_PANELS_JSON: &str = include_str!("../assets/templates/skirt_4_panels.json");
pub const MANNEQUIN_OBJ: &str = include_str!("../assets/mannequin.obj");

/// Names and documents of every shipped template.
pub const SHIPPED: [(&str, &str); 3] = [
    ("pants", PANTS_JSON),
    ("skirt_2_panels", SKIRT_2_PANELS_JSON),
    ("skirt_4_panels", SKIRT_4_PANELS_JSON),
];

pub fn shipped(name: &str) -> Option<TemplateSpec> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, doc)| parse_template(doc).expect("shipped template"))
}

pub fn mannequin() -> BodyModel {
    BodyModel::from_obj_str(MANNEQUIN_OBJ).expect("shipped mannequin")
}

fn rel_control(a: Vertex2D, b: Vertex2D, c: Vertex2D) -> [f64; 2] {
    let d = b - a;
    let perp = Vertex2D::new(-d.y, d.x);
    let w = c - a;
    let n2 = d.norm_squared();
    [w.dot(&d) / n2, w.dot(&perp) / n2]
}

/// Reflect a panel through its local x = 0 line, keeping the loop
/// counterclockwise. Old edge `k` becomes edge `n - 1 - k`, reversed.
fn mirrored(p: &Panel, name: &str) -> Panel {
    let n = p.edges.len();
    let vertices: Vec<Vertex2D> = p.vertices.iter().map(|v| Vertex2D::new(-v.x, v.y)).collect();
    let edges = (0..n)
        .map(|k| {
            let e = &p.edges[n - 1 - k];
            let (s, t) = (e.start(), e.end());
            match e.curvature {
                None => Edge::straight(t, s),
                Some(rel) => {
                    let c = control_point_abs(p.vertices[s], p.vertices[t], rel).expect("non-degenerate edge");
                    let c = Vertex2D::new(-c.x, c.y);
                    let r = rel_control(vertices[t], vertices[s], c);
                    Edge::curved(t, s, r[0], r[1])
                }
            }
        })
        .collect();
    Panel { name: name.to_string(), vertices, edges, translation: p.translation, rotation: p.rotation }
}

fn mirror_index(p: &Panel, edge: usize) -> usize {
    p.edges.len() - 1 - edge
}

fn entry(panel: &str, edge: usize, toward_end: bool) -> InfluenceEntry {
    let e = InfluenceEntry::new(EdgeRef::new(panel, edge));
    if toward_end {
        e
    } else {
        e.toward_start()
    }
}

/// Edge roles of the pants leg panel.
mod leg {
    pub const HEM: usize = 0;
    pub const SIDE_LOW: usize = 1;
    pub const SIDE_UP: usize = 2;
    pub const WAIST: usize = 3;
    pub const CROTCH: usize = 4;
    pub const INSEAM: usize = 5;
}

/// Front-left leg quarter: local x grows from the center seam toward the
/// side seam, y from hem to waist.
fn leg_panel(name: &str) -> Panel {
    let v = |x: f64, y: f64| Vertex2D::new(x, y);
    Panel::new(
        name,
        vec![v(0.0, 0.0), v(27.0, 0.0), v(29.0, 84.0), v(26.0, 98.0), v(4.0, 98.0), v(-4.0, 68.0)],
        vec![
            Edge::straight(0, 1),
            Edge::straight(1, 2),
            Edge::curved(2, 3, 0.5, -0.05),
            Edge::straight(3, 4),
            Edge::curved(4, 5, 0.5, 0.1),
            Edge::straight(5, 0),
        ],
    )
}

/// Four-panel trousers with leg length, hem width and waist width parameters.
pub fn pants() -> TemplateSpec {
    let base = leg_panel("x");
    let (y0, z) = (6.0, 15.0);
    let fl = Panel { name: "front_left".into(), ..base.clone() }
        .with_placement(Vec3::new(4.0, y0, z), Vec3::zeros());
    let fr = mirrored(&base, "front_right").with_placement(Vec3::new(-4.0, y0, z), Vec3::zeros());
    // Back panels face −z: rotating half a turn about y swaps local x.
    let bl = mirrored(&base, "back_left").with_placement(Vec3::new(4.0, y0, -z), Vec3::new(0.0, 180.0, 0.0));
    let br = Panel { name: "back_right".into(), ..base.clone() }
        .with_placement(Vec3::new(-4.0, y0, -z), Vec3::new(0.0, 180.0, 0.0));

    // (panel, is mirrored)
    let panels = [("front_left", false), ("front_right", true), ("back_left", true), ("back_right", false)];
    let idx = |mirror: bool, e: usize| if mirror { mirror_index(&base, e) } else { e };
    let r = |name: &str, mirror: bool, e: usize| EdgeRef::new(name, idx(mirror, e));

    let mut stitches = Vec::new();
    for e in [leg::SIDE_LOW, leg::SIDE_UP, leg::INSEAM] {
        stitches.push(Stitch::new(r("front_left", false, e), r("back_left", true, e)));
        stitches.push(Stitch::new(r("front_right", true, e), r("back_right", false, e)));
    }
    stitches.push(Stitch::new(r("front_left", false, leg::CROTCH), r("front_right", true, leg::CROTCH)));
    stitches.push(Stitch::new(r("back_left", true, leg::CROTCH), r("back_right", false, leg::CROTCH)));
    let mut t = TemplateSpec::from_pattern(PatternSpec { panels: vec![fl, fr, bl, br], stitches });

    // Moving the hem corners vertically keeps the hem level. Mirrored
    // panels traverse each edge backwards, so the moving end flips.
    let mut length = Vec::new();
    for (name, mir) in panels {
        length.push(entry(name, idx(mir, leg::SIDE_LOW), mir).along([0.0, 1.0]));
        length.push(entry(name, idx(mir, leg::INSEAM), !mir).along([0.0, 1.0]));
    }
    t.push_parameter(ParameterRule::new("length", Target::Length, RuleKind::Additive, [-40.0, 0.0], length));
    let hem = panels.iter().map(|&(name, mir)| entry(name, idx(mir, leg::HEM), !mir)).collect();
    t.push_parameter(ParameterRule::new("hem_width", Target::Length, RuleKind::Multiplicative, [0.75, 1.3], hem));
    let waist = panels.iter().map(|&(name, mir)| entry(name, idx(mir, leg::WAIST), mir)).collect();
    t.push_parameter(ParameterRule::new("waist", Target::Length, RuleKind::Multiplicative, [0.9, 1.05], waist));
    canonicalize_template(&t)
}

fn trapezoid(name: &str, waist: f64, hem: f64, length: f64) -> Panel {
    let v = |x: f64, y: f64| Vertex2D::new(x, y);
    let (hw, hh) = (waist / 2.0, hem / 2.0);
    Panel::new(
        name,
        vec![v(-hh, 0.0), v(hh, 0.0), v(hw, length), v(-hw, length)],
        vec![Edge::curved(0, 1, 0.5, -0.03), Edge::straight(1, 2), Edge::curved(2, 3, 0.5, -0.02), Edge::straight(3, 0)],
    )
}

/// Front/back skirt with length, flare and waist-curve parameters.
pub fn skirt_2_panels() -> TemplateSpec {
    let (y0, z) = (48.0, 15.0);
    let front = trapezoid("front", 46.0, 62.0, 52.0).with_placement(Vec3::new(0.0, y0, z), Vec3::zeros());
    let back = trapezoid("back", 46.0, 62.0, 52.0).with_placement(Vec3::new(0.0, y0, -z), Vec3::new(0.0, 180.0, 0.0));
    let stitches = vec![
        Stitch::new(EdgeRef::new("front", 1), EdgeRef::new("back", 3)),
        Stitch::new(EdgeRef::new("front", 3), EdgeRef::new("back", 1)),
    ];
    let mut t = TemplateSpec::from_pattern(PatternSpec { panels: vec![front, back], stitches });
    let mut length = Vec::new();
    for name in ["front", "back"] {
        length.push(entry(name, 1, false).along([0.0, 1.0]));
        length.push(entry(name, 3, true).along([0.0, 1.0]));
    }
    t.push_parameter(ParameterRule::new("length", Target::Length, RuleKind::Additive, [-20.0, 15.0], length));
    // The back hem grows from its other corner so both side seams change alike.
    let flare = vec![entry("front", 0, true), entry("back", 0, false)];
    t.push_parameter(ParameterRule::new("flare", Target::Length, RuleKind::Multiplicative, [0.85, 1.4], flare));
    let curve = ["front", "back"].iter().map(|n| entry(n, 2, true)).collect();
    t.push_parameter(ParameterRule::new("waist_curve", Target::Curvature, RuleKind::Additive, [-0.05, 0.05], curve));
    canonicalize_template(&t)
}

/// Four-gore skirt. The front length parameter alone breaks the side
/// seams, so each stitched seam pair is held equal by a constraint.
pub fn skirt_4_panels() -> TemplateSpec {
    let y0 = 48.0;
    let front = trapezoid("front", 26.0, 36.0, 52.0).with_placement(Vec3::new(0.0, y0, 15.0), Vec3::zeros());
    let back = trapezoid("back", 26.0, 36.0, 52.0).with_placement(Vec3::new(0.0, y0, -15.0), Vec3::new(0.0, 180.0, 0.0));
    let left = trapezoid("left", 20.0, 30.0, 52.0).with_placement(Vec3::new(22.0, y0, 0.0), Vec3::new(0.0, 90.0, 0.0));
    let right = trapezoid("right", 20.0, 30.0, 52.0).with_placement(Vec3::new(-22.0, y0, 0.0), Vec3::new(0.0, -90.0, 0.0));
    let seams = [("front", 1, "left", 3), ("left", 1, "back", 3), ("back", 1, "right", 3), ("right", 1, "front", 3)];
    let stitches = seams
        .iter()
        .map(|&(a, ea, b, eb)| Stitch::new(EdgeRef::new(a, ea), EdgeRef::new(b, eb)))
        .collect();
    let mut t = TemplateSpec::from_pattern(PatternSpec { panels: vec![front, back, left, right], stitches });
    let mut length = Vec::new();
    for name in ["front", "back", "left", "right"] {
        length.push(entry(name, 1, false).along([0.0, 1.0]));
        length.push(entry(name, 3, true).along([0.0, 1.0]));
    }
    t.push_parameter(ParameterRule::new("length", Target::Length, RuleKind::Additive, [-20.0, 15.0], length));
    let front_length = vec![entry("front", 1, false).along([0.0, 1.0]), entry("front", 3, true).along([0.0, 1.0])];
    t.push_parameter(ParameterRule::new(
        "front_length",
        Target::Length,
        RuleKind::Multiplicative,
        [0.85, 1.15],
        front_length,
    ));
    let flare = ["front", "back", "left", "right"].iter().map(|n| entry(n, 0, true)).collect();
    t.push_parameter(ParameterRule::new("flare", Target::Length, RuleKind::Multiplicative, [0.9, 1.5], flare));
    t.constraints = seams
        .iter()
        .map(|&(a, ea, b, eb)| Constraint::new(vec![EdgeRef::new(a, ea), EdgeRef::new(b, eb)]))
        .collect();
    canonicalize_template(&t)
}

/// The mannequin as OBJ text.
pub fn mannequin_obj() -> String {
    let (v, t) = shapes::mannequin();
    crate::mesh::write_obj(&v, &t)
}
