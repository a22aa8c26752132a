use std::collections::HashSet;

use indexmap::IndexMap;

use super::constraints::apply_constraints;
use super::rules::{Constraint, InfluenceEntry, ParameterRule, RuleKind, Target};
use super::{is_contiguous_run, ParamError, MIN_EDGE_LENGTH};
use crate::geometry::edge_length_default;
use crate::pattern::{Panel, PatternSpec, Vertex2D};
use crate::template::TemplateSpec;

pub type Values = IndexMap<String, f64>;

/// A pattern after parameters and constraints, with the constraint
/// multipliers recorded by that application.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub pattern: PatternSpec,
    pub constraints: Vec<Constraint>,
}

/// Apply one rule at `value` to every influenced edge.
pub fn apply_parameter(
    p: &PatternSpec,
    rule: &ParameterRule,
    value: f64,
) -> Result<PatternSpec, ParamError> {
    if !value.is_finite() {
        return Err(ParamError::NonFiniteValue { name: rule.name.clone(), value });
    }
    let mut out = p.clone();
    if value == rule.kind.identity() {
        return Ok(out);
    }
    match rule.target {
        Target::Length => apply_length(&mut out, rule, value)?,
        Target::Curvature => apply_curvature(&mut out, rule, value)?,
    }
    Ok(out)
}

/// Parameters only, in template order.
pub fn apply_parameters(t: &TemplateSpec, values: &Values) -> Result<PatternSpec, ParamError> {
    let mut pattern = t.pattern.clone();
    for rule in t.ordered_parameters() {
        let value = *values
            .get(&rule.name)
            .ok_or_else(|| ParamError::MissingValue(rule.name.clone()))?;
        pattern = apply_parameter(&pattern, rule, value)
            .map_err(|e| ParamError::Rule { rule: rule.name.clone(), source: Box::new(e) })?;
    }
    Ok(pattern)
}

/// Parameters in template order, then constraints.
pub fn apply_all(t: &TemplateSpec, values: &Values) -> Result<Applied, ParamError> {
    let pattern = apply_parameters(t, values)?;
    let (pattern, constraints) = apply_constraints(&pattern, &t.constraints)?;
    Ok(Applied { pattern, constraints })
}

/// A set of influenced edges that moves together: one edge, or a
/// distribution group laid out in loop order.
struct Unit<'a> {
    panel: &'a str,
    edges: Vec<usize>,
    lead: &'a InfluenceEntry,
}

fn units<'a>(p: &PatternSpec, rule: &'a ParameterRule) -> Result<Vec<Unit<'a>>, ParamError> {
    let mut out: Vec<Unit<'a>> = Vec::new();
    let mut seen_groups: Vec<&str> = Vec::new();
    for entry in &rule.influence {
        let r = &entry.edge_ref;
        let panel = p
            .panel(&r.panel)
            .filter(|pl| r.edge < pl.edges.len())
            .ok_or_else(|| ParamError::MissingEdge { panel: r.panel.clone(), edge: r.edge })?;
        let Some(group) = entry.group.as_deref() else {
            out.push(Unit { panel: &r.panel, edges: vec![r.edge], lead: entry });
            continue;
        };
        if seen_groups.contains(&group) {
            continue;
        }
        seen_groups.push(group);
        let members: Vec<&InfluenceEntry> =
            rule.influence.iter().filter(|e| e.group.as_deref() == Some(group)).collect();
        if members.iter().any(|m| m.edge_ref.panel != r.panel) {
            return Err(ParamError::InvalidGroup(group.to_string()));
        }
        let set: HashSet<usize> = members.iter().map(|m| m.edge_ref.edge).collect();
        let n = panel.edges.len();
        if set.len() != members.len() || !is_contiguous_run(&set, n) {
            return Err(ParamError::InvalidGroup(group.to_string()));
        }
        let first = *set.iter().find(|&&e| !set.contains(&((e + n - 1) % n))).unwrap();
        let edges = (0..set.len()).map(|k| (first + k) % n).collect();
        out.push(Unit { panel: &r.panel, edges, lead: entry });
    }
    Ok(out)
}

/// Chord after moving its free end by `s` along unit `u` such that its
/// length becomes `target`; picks the smaller displacement.
fn chord_along(c: Vertex2D, u: Vertex2D, target: f64) -> Option<Vertex2D> {
    let b = c.dot(&u);
    let disc = b * b + target * target - c.norm_squared();
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let s = if b >= 0.0 { root - b } else { -root - b };
    Some(u * s)
}

fn apply_length(p: &mut PatternSpec, rule: &ParameterRule, value: f64) -> Result<(), ParamError> {
    let plan = units(p, rule)?;
    let plan: Vec<(String, Vec<usize>, InfluenceEntry)> = plan
        .into_iter()
        .map(|u| (u.panel.to_string(), u.edges, u.lead.clone()))
        .collect();
    for (panel_name, edges, lead) in plan {
        let panel = p.panel_mut(&panel_name).expect("resolved above");
        move_chain(panel, &edges, &lead, rule.kind, value)?;
        check_edges(panel)?;
    }
    Ok(())
}

fn move_chain(
    panel: &mut Panel,
    edges: &[usize],
    lead: &InfluenceEntry,
    kind: RuleKind,
    value: f64,
) -> Result<(), ParamError> {
    let mut lengths = Vec::with_capacity(edges.len());
    for &e in edges {
        lengths.push(edge_length_default(panel, e)?);
    }
    let total: f64 = lengths.iter().sum();
    let new_total = match kind {
        RuleKind::Multiplicative => total * value,
        RuleKind::Additive => total + value,
    };
    if !(total > 0.0) || !(new_total >= MIN_EDGE_LENGTH) {
        return Err(ParamError::DegenerateEdge {
            panel: panel.name.clone(),
            edge: edges[0],
            length: new_total,
        });
    }
    let factor = new_total / total;

    // Walk from the fixed end of the chain toward the moving end.
    let order: Vec<usize> =
        if lead.toward_end { edges.to_vec() } else { edges.iter().rev().copied().collect() };
    let along = lead.along.map(|[x, y]| Vertex2D::new(x, y));
    let mut carried = Vertex2D::zeros();
    for e in order {
        let (fixed, moving) = if lead.toward_end {
            (panel.edges[e].start(), panel.edges[e].end())
        } else {
            (panel.edges[e].end(), panel.edges[e].start())
        };
        let chord = panel.vertices[moving] - panel.vertices[fixed] + carried;
        let delta = match along {
            None => chord * (factor - 1.0),
            Some(u) => {
                let target = chord.norm() * factor;
                chord_along(chord, u, target).ok_or_else(|| ParamError::UnreachableLength {
                    panel: panel.name.clone(),
                    edge: e,
                    target,
                })?
            }
        };
        carried += delta;
        panel.vertices[moving] += carried;
    }
    Ok(())
}

fn check_edges(panel: &Panel) -> Result<(), ParamError> {
    for (i, e) in panel.edges.iter().enumerate() {
        let chord = (panel.vertices[e.end()] - panel.vertices[e.start()]).norm();
        if !(chord >= MIN_EDGE_LENGTH) {
            return Err(ParamError::DegenerateEdge { panel: panel.name.clone(), edge: i, length: chord });
        }
    }
    Ok(())
}

fn apply_curvature(p: &mut PatternSpec, rule: &ParameterRule, value: f64) -> Result<(), ParamError> {
    for entry in &rule.influence {
        let r = &entry.edge_ref;
        let edge = p
            .panel_mut(&r.panel)
            .and_then(|pl| pl.edges.get_mut(r.edge))
            .ok_or_else(|| ParamError::MissingEdge { panel: r.panel.clone(), edge: r.edge })?;
        edge.curvature = match (rule.kind, edge.curvature) {
            (RuleKind::Multiplicative, c) => c.map(|[cx, cy]| [cx * value, cy * value]),
            (RuleKind::Additive, c) => {
                let [cx, cy] = c.unwrap_or([0.5, 0.0]);
                match entry.along {
                    None => Some([cx, cy + value]),
                    Some([ax, ay]) => Some([cx + value * ax, cy + value * ay]),
                }
            }
        };
    }
    Ok(())
}
