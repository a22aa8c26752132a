//! Sewing pattern domain model: panels bounded by oriented edge loops,
//! placed in 3D, and joined by stitches.

use std::fmt;

use nalgebra::{Rotation3, Vector2, Vector3};
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Panel-local 2D position in centimeters.
pub type Vertex2D = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// One oriented edge of a panel loop.
///
/// `curvature`, when present, is the quadratic Bezier control point expressed
/// in the edge's similarity frame: `(0, 0)` maps to the start vertex and
/// `(1, 0)` to the end vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub endpoints: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<[f64; 2]>,
}

impl Edge {
    pub fn straight(start: usize, end: usize) -> Self {
        Self { endpoints: [start, end], curvature: None }
    }

    pub fn curved(start: usize, end: usize, cx: f64, cy: f64) -> Self {
        Self { endpoints: [start, end], curvature: Some([cx, cy]) }
    }

    pub fn start(&self) -> usize {
        self.endpoints[0]
    }

    pub fn end(&self) -> usize {
        self.endpoints[1]
    }

    /// The same curve traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self {
            endpoints: [self.endpoints[1], self.endpoints[0]],
            curvature: self.curvature.map(|[cx, cy]| [1.0 - cx, -cy]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub vertices: Vec<Vertex2D>,
    pub edges: Vec<Edge>,
    /// Centimeters.
    pub translation: Vec3,
    /// Intrinsic XYZ Euler angles, degrees.
    pub rotation: Vec3,
}

impl Panel {
    pub fn new(name: impl Into<String>, vertices: Vec<Vertex2D>, edges: Vec<Edge>) -> Self {
        Self {
            name: name.into(),
            vertices,
            edges,
            translation: Vec3::zeros(),
            rotation: Vec3::zeros(),
        }
    }

    /// Closed straight-edged polygon over `points` in the given order.
    pub fn polygon(name: impl Into<String>, points: &[[f64; 2]]) -> Self {
        let n = points.len();
        let vertices = points.iter().map(|p| Vertex2D::new(p[0], p[1])).collect();
        let edges = (0..n).map(|i| Edge::straight(i, (i + 1) % n)).collect();
        Self::new(name, vertices, edges)
    }

    pub fn with_placement(mut self, translation: Vec3, rotation: Vec3) -> Self {
        self.translation = translation;
        self.rotation = rotation;
        self
    }

    pub fn edge_endpoints(&self, edge: usize) -> (Vertex2D, Vertex2D) {
        let e = &self.edges[edge];
        (self.vertices[e.start()], self.vertices[e.end()])
    }

    /// Rotation taking panel-local axes to world axes (intrinsic X, then Y, then Z).
    pub fn rotation_matrix(&self) -> Rotation3<f64> {
        let r = self.rotation.map(f64::to_radians);
        Rotation3::from_axis_angle(&Vector3::x_axis(), r.x)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), r.y)
            * Rotation3::from_axis_angle(&Vector3::z_axis(), r.z)
    }

    /// Lift a panel-local point into world space.
    pub fn to_world(&self, p: &Vertex2D) -> Vec3 {
        self.rotation_matrix() * Vec3::new(p.x, p.y, 0.0) + self.translation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRef {
    pub panel: String,
    pub edge: usize,
}

impl EdgeRef {
    pub fn new(panel: impl Into<String>, edge: usize) -> Self {
        Self { panel: panel.into(), edge }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.panel, self.edge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stitch {
    pub sides: [EdgeRef; 2],
}

impl Stitch {
    pub fn new(a: EdgeRef, b: EdgeRef) -> Self {
        Self { sides: [a, b] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    #[serde(serialize_with = "ser_panels", deserialize_with = "de_panels")]
    pub panels: Vec<Panel>,
    #[serde(default)]
    pub stitches: Vec<Stitch>,
}

impl PatternSpec {
    pub fn panel(&self, name: &str) -> Option<&Panel> {
        self.panels.iter().find(|p| p.name == name)
    }

    pub fn panel_index(&self, name: &str) -> Option<usize> {
        self.panels.iter().position(|p| p.name == name)
    }

    pub fn panel_mut(&mut self, name: &str) -> Option<&mut Panel> {
        self.panels.iter_mut().find(|p| p.name == name)
    }

    pub fn resolves(&self, r: &EdgeRef) -> bool {
        self.panel(&r.panel).is_some_and(|p| r.edge < p.edges.len())
    }
}

// Panels are stored as a JSON object keyed by name. Entries are collected
// in document order without deduplication so that duplicate names reach
// semantic validation instead of being silently overwritten.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PanelBody {
    vertices: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    #[serde(default)]
    translation: [f64; 3],
    #[serde(default)]
    rotation: [f64; 3],
}

fn ser_panels<S: Serializer>(panels: &[Panel], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(panels.len()))?;
    for p in panels {
        let body = PanelBody {
            vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
            edges: p.edges.clone(),
            translation: p.translation.into(),
            rotation: p.rotation.into(),
        };
        map.serialize_entry(&p.name, &body)?;
    }
    map.end()
}

fn de_panels<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Panel>, D::Error> {
    struct PanelsVisitor;

    impl<'de> Visitor<'de> for PanelsVisitor {
        type Value = Vec<Panel>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an object mapping panel names to panels")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some((name, body)) = map.next_entry::<String, PanelBody>()? {
                out.push(Panel {
                    name,
                    vertices: body.vertices.iter().map(|v| Vertex2D::new(v[0], v[1])).collect(),
                    edges: body.edges,
                    translation: body.translation.into(),
                    rotation: body.rotation.into(),
                });
            }
            Ok(out)
        }
    }

    d.deserialize_map(PanelsVisitor)
}
