//! Structural and semantic checks over patterns and templates.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::params::Target;
use crate::pattern::{EdgeRef, PatternSpec};
use crate::template::TemplateSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    EmptyPattern,
    DuplicatePanelName,
    NonFiniteValue,
    TooFewEdges,
    VertexOutOfRange,
    DegenerateEdge,
    OpenEdgeLoop,
    UnreferencedVertex,
    DuplicateVertex,
    DanglingReference,
    SelfStitch,
    EdgeStitchedTwice,
    DuplicateParameter,
    ParameterOrder,
    InvalidRange,
    ValueOutOfRange,
    EmptyInfluence,
    NonUnitDirection,
    NonContiguousGroup,
    InvalidConstraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub panel: Option<String>,
    pub edge: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    fn error(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, code, panel: None, edge: None, message: message.into() }
    }

    fn warning(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, ..Self::error(code, message) }
    }

    fn at(mut self, panel: &str, edge: Option<usize>) -> Self {
        self.panel = Some(panel.to_string());
        self.edge = edge;
        self
    }

    /// `file:panel:edge: severity: message`, with `-` for missing loci.
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let panel = self.panel.as_deref().unwrap_or("-");
        match self.edge {
            Some(e) => write!(f, "{panel}:{e}: {}: {}", self.severity, self.message),
            None => write!(f, "{panel}:-: {}: {}", self.severity, self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Every violated pattern invariant, as diagnostics. Empty iff valid.
pub fn validate(p: &PatternSpec) -> Vec<Diagnostic> {
    use DiagnosticCode::*;
    let mut out = Vec::new();
    if p.panels.is_empty() {
        out.push(Diagnostic::error(EmptyPattern, "pattern has no panels"));
    }
    let mut names = HashSet::new();
    for panel in &p.panels {
        if !names.insert(panel.name.as_str()) {
            out.push(
                Diagnostic::error(DuplicatePanelName, format!("duplicate panel name '{}'", panel.name))
                    .at(&panel.name, None),
            );
        }
    }

    for panel in &p.panels {
        let name = panel.name.as_str();
        let finite_vertices = panel.vertices.iter().all(|v| v.x.is_finite() && v.y.is_finite());
        let finite_place = panel.translation.iter().chain(panel.rotation.iter()).all(|x| x.is_finite());
        if !finite_vertices || !finite_place {
            out.push(Diagnostic::error(NonFiniteValue, "non-finite coordinate").at(name, None));
        }
        if panel.edges.len() < 2 {
            out.push(
                Diagnostic::error(TooFewEdges, format!("{} edges cannot form a loop", panel.edges.len()))
                    .at(name, None),
            );
        }
        let nv = panel.vertices.len();
        let mut indices_ok = true;
        for (i, e) in panel.edges.iter().enumerate() {
            for &v in &e.endpoints {
                if v >= nv {
                    indices_ok = false;
                    out.push(
                        Diagnostic::error(
                            VertexOutOfRange,
                            format!("vertex index {v} out of range ({nv} vertices)"),
                        )
                        .at(name, Some(i)),
                    );
                }
            }
            if e.start() == e.end() {
                out.push(
                    Diagnostic::error(DegenerateEdge, "edge starts and ends at the same vertex")
                        .at(name, Some(i)),
                );
            }
            if let Some(c) = e.curvature {
                if !c[0].is_finite() || !c[1].is_finite() {
                    out.push(Diagnostic::error(NonFiniteValue, "non-finite curvature").at(name, Some(i)));
                }
            }
        }
        let n = panel.edges.len();
        for i in 0..n {
            let next = (i + 1) % n;
            if n >= 2 && panel.edges[i].end() != panel.edges[next].start() {
                out.push(
                    Diagnostic::error(
                        OpenEdgeLoop,
                        format!(
                            "open edge loop: edge {i} ends at vertex {} but edge {next} starts at vertex {}",
                            panel.edges[i].end(),
                            panel.edges[next].start()
                        ),
                    )
                    .at(name, Some(i)),
                );
            }
        }
        if indices_ok {
            let mut used = vec![false; nv];
            for e in &panel.edges {
                used[e.start()] = true;
                used[e.end()] = true;
            }
            for (v, u) in used.iter().enumerate() {
                if !u {
                    out.push(
                        Diagnostic::error(UnreferencedVertex, format!("vertex {v} is not on any edge"))
                            .at(name, None),
                    );
                }
            }
        }
        for a in 0..nv {
            for b in a + 1..nv {
                if panel.vertices[a] == panel.vertices[b] {
                    out.push(
                        Diagnostic::error(
                            DuplicateVertex,
                            format!("vertices {a} and {b} share coordinates"),
                        )
                        .at(name, None),
                    );
                }
            }
        }
    }

    let mut stitched: HashMap<&EdgeRef, usize> = HashMap::new();
    for (si, s) in p.stitches.iter().enumerate() {
        for r in &s.sides {
            if !p.resolves(r) {
                out.push(
                    Diagnostic::error(
                        DanglingReference,
                        format!("stitch {si} references missing edge {r}"),
                    )
                    .at(&r.panel, Some(r.edge)),
                );
            }
        }
        if s.sides[0] == s.sides[1] {
            out.push(
                Diagnostic::error(SelfStitch, format!("stitch {si} joins an edge to itself"))
                    .at(&s.sides[0].panel, Some(s.sides[0].edge)),
            );
            continue;
        }
        for r in &s.sides {
            if let Some(prev) = stitched.insert(r, si) {
                out.push(
                    Diagnostic::error(
                        EdgeStitchedTwice,
                        format!("edge {r} appears in stitches {prev} and {si}"),
                    )
                    .at(&r.panel, Some(r.edge)),
                );
            }
        }
    }
    out
}

/// Pattern checks plus parameter and constraint consistency.
pub fn validate_template(t: &TemplateSpec) -> Vec<Diagnostic> {
    use DiagnosticCode::*;
    let p = &t.pattern;
    let mut out = validate(p);

    let check_ref = |out: &mut Vec<Diagnostic>, r: &EdgeRef, what: &str| {
        if !p.resolves(r) {
            out.push(
                Diagnostic::error(DanglingReference, format!("{what} references missing edge {r}"))
                    .at(&r.panel, Some(r.edge)),
            );
            false
        } else {
            true
        }
    };

    let mut names = HashSet::new();
    for rule in &t.parameters {
        let what = format!("parameter '{}'", rule.name);
        if !names.insert(rule.name.as_str()) {
            out.push(Diagnostic::error(DuplicateParameter, format!("duplicate {what}")));
        }
        let [lo, hi] = rule.range;
        if !lo.is_finite() || !hi.is_finite() || !rule.value.is_finite() {
            out.push(Diagnostic::error(NonFiniteValue, format!("{what} has a non-finite value")));
        } else if lo > hi {
            out.push(Diagnostic::error(InvalidRange, format!("{what} range [{lo}, {hi}] is inverted")));
        } else if !rule.contains(rule.value) {
            out.push(Diagnostic::warning(
                ValueOutOfRange,
                format!("{what} value {} lies outside [{lo}, {hi}]", rule.value),
            ));
        }
        if rule.influence.is_empty() {
            out.push(Diagnostic::error(EmptyInfluence, format!("{what} influences no edges")));
        }
        for entry in &rule.influence {
            let ok = check_ref(&mut out, &entry.edge_ref, &what);
            if let Some([ax, ay]) = entry.along {
                let norm = (ax * ax + ay * ay).sqrt();
                if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
                    let d = Diagnostic::error(
                        NonUnitDirection,
                        format!("{what} direction ({ax}, {ay}) is not a unit vector"),
                    );
                    out.push(if ok { d.at(&entry.edge_ref.panel, Some(entry.edge_ref.edge)) } else { d });
                }
            }
        }
        if rule.target == Target::Length {
            check_groups(&mut out, t, rule, &what);
        }
    }

    let declared: HashSet<&str> = t.parameters.iter().map(|r| r.name.as_str()).collect();
    let ordered: Vec<&str> = t.parameter_order.iter().map(String::as_str).collect();
    let ordered_set: HashSet<&str> = ordered.iter().copied().collect();
    if ordered.len() != ordered_set.len() || ordered_set != declared {
        out.push(Diagnostic::error(
            ParameterOrder,
            "parameter_order must list every parameter exactly once",
        ));
    }

    for (ci, c) in t.constraints.iter().enumerate() {
        let what = format!("constraint {ci}");
        if c.edges.is_empty() {
            out.push(Diagnostic::error(InvalidConstraint, format!("{what} lists no edges")));
        }
        if c.multipliers.len() != c.edges.len() {
            out.push(Diagnostic::error(
                InvalidConstraint,
                format!("{what} has {} multipliers for {} edges", c.multipliers.len(), c.edges.len()),
            ));
        }
        if c.multipliers.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            out.push(Diagnostic::error(InvalidConstraint, format!("{what} multipliers must be positive")));
        }
        for r in &c.edges {
            check_ref(&mut out, r, &what);
        }
    }
    out
}

fn check_groups(
    out: &mut Vec<Diagnostic>,
    t: &TemplateSpec,
    rule: &crate::params::ParameterRule,
    what: &str,
) {
    let mut groups: Vec<(&str, Vec<&EdgeRef>)> = Vec::new();
    for entry in &rule.influence {
        if let Some(g) = &entry.group {
            match groups.iter_mut().find(|(name, _)| name == g) {
                Some((_, refs)) => refs.push(&entry.edge_ref),
                None => groups.push((g, vec![&entry.edge_ref])),
            }
        }
    }
    for (g, refs) in groups {
        let panel = &refs[0].panel;
        let Some(p) = t.pattern.panel(panel) else { continue };
        let same_panel = refs.iter().all(|r| &r.panel == panel);
        let edges: HashSet<usize> = refs.iter().map(|r| r.edge).collect();
        if !same_panel || edges.len() != refs.len() || !crate::params::is_contiguous_run(&edges, p.edges.len()) {
            out.push(
                Diagnostic::error(
                    DiagnosticCode::NonContiguousGroup,
                    format!("{what} group '{g}' is not a contiguous run of edges in one panel"),
                )
                .at(panel, None),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{Edge, Panel, Stitch};

    fn square(name: &str) -> Panel {
        Panel::polygon(name, &[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]])
    }

    #[test]
    fn valid_pattern_has_no_diagnostics() {
        let p = PatternSpec {
            panels: vec![square("a"), square("b")],
            stitches: vec![Stitch::new(EdgeRef::new("a", 1), EdgeRef::new("b", 3))],
        };
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn stitch_to_missing_edge() {
        let p = PatternSpec {
            panels: vec![square("a")],
            stitches: vec![Stitch::new(EdgeRef::new("a", 9), EdgeRef::new("a", 1))],
        };
        let d = validate(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::DanglingReference);
        assert_eq!(d[0].to_string(), "a:9: error: stitch 0 references missing edge a:9");
    }

    #[test]
    fn zero_length_index_pair() {
        let mut panel = Panel::polygon("t", &[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]]);
        panel.edges.insert(1, Edge::straight(1, 1));
        let d = validate(&PatternSpec { panels: vec![panel], stitches: vec![] });
        assert_eq!(d.iter().filter(|d| d.code == DiagnosticCode::DegenerateEdge).count(), 1);
        assert!(d.iter().all(|d| d.code != DiagnosticCode::OpenEdgeLoop));
    }

    #[test]
    fn edge_in_two_stitches() {
        let p = PatternSpec {
            panels: vec![square("a"), square("b")],
            stitches: vec![
                Stitch::new(EdgeRef::new("a", 1), EdgeRef::new("b", 3)),
                Stitch::new(EdgeRef::new("a", 1), EdgeRef::new("b", 1)),
            ],
        };
        let d = validate(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::EdgeStitchedTwice);
    }

    #[test]
    fn duplicate_coordinates_and_unused_vertices() {
        let mut panel = square("a");
        panel.vertices.push(panel.vertices[0]);
        let codes: Vec<_> = validate(&PatternSpec { panels: vec![panel], stitches: vec![] })
            .into_iter()
            .map(|d| d.code)
            .collect();
        assert!(codes.contains(&DiagnosticCode::DuplicateVertex));
        assert!(codes.contains(&DiagnosticCode::UnreferencedVertex));
    }

    #[test]
    fn render_includes_file() {
        let d = Diagnostic::error(DiagnosticCode::EmptyPattern, "pattern has no panels");
        assert_eq!(d.render("x.json"), "x.json:-:-: error: pattern has no panels");
    }
}
