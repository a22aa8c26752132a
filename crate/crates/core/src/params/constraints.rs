use super::rules::Constraint;
use super::{ParamError, MIN_EDGE_LENGTH};
use crate::geometry::edge_length_default;
use crate::pattern::{EdgeRef, PatternSpec};

// Multipliers this close to 1 leave the edge untouched, so constraints that
// already hold are exact no-ops.
const UNIT_EPS: f64 = 1e-12;

fn resolve<'a>(
    p: &'a mut PatternSpec,
    r: &EdgeRef,
) -> Result<&'a mut crate::pattern::Panel, ParamError> {
    p.panel_mut(&r.panel)
        .filter(|pl| r.edge < pl.edges.len())
        .ok_or_else(|| ParamError::MissingEdge { panel: r.panel.clone(), edge: r.edge })
}

/// Scale an edge about its start vertex by moving the end vertex along the chord.
fn scale_edge(p: &mut PatternSpec, r: &EdgeRef, factor: f64) -> Result<(), ParamError> {
    if (factor - 1.0).abs() <= UNIT_EPS {
        return Ok(());
    }
    let panel = resolve(p, r)?;
    let (a, b) = (panel.edges[r.edge].start(), panel.edges[r.edge].end());
    let chord = panel.vertices[b] - panel.vertices[a];
    panel.vertices[b] += chord * (factor - 1.0);
    Ok(())
}

/// Equalize each constraint's edges to their mean length, recording the
/// applied per-edge multipliers.
pub fn apply_constraints(
    p: &PatternSpec,
    cs: &[Constraint],
) -> Result<(PatternSpec, Vec<Constraint>), ParamError> {
    let mut out = p.clone();
    let mut updated = Vec::with_capacity(cs.len());
    for c in cs {
        let mut lengths = Vec::with_capacity(c.edges.len());
        for r in &c.edges {
            let panel = resolve(&mut out, r)?;
            let len = edge_length_default(panel, r.edge)?;
            if !(len >= MIN_EDGE_LENGTH) {
                return Err(ParamError::DegenerateEdge {
                    panel: r.panel.clone(),
                    edge: r.edge,
                    length: len,
                });
            }
            lengths.push(len);
        }
        if lengths.is_empty() {
            updated.push(c.clone());
            continue;
        }
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        let mut multipliers = Vec::with_capacity(lengths.len());
        for (r, len) in c.edges.iter().zip(&lengths) {
            let m = mean / len;
            let m = if (m - 1.0).abs() <= UNIT_EPS { 1.0 } else { m };
            scale_edge(&mut out, r, m)?;
            multipliers.push(m);
        }
        updated.push(Constraint { edges: c.edges.clone(), multipliers });
    }
    Ok((out, updated))
}

/// Undo a prior [`apply_constraints`] using its recorded multipliers.
pub fn restore_constraints(p: &PatternSpec, cs: &[Constraint]) -> Result<PatternSpec, ParamError> {
    let mut out = p.clone();
    for c in cs.iter().rev() {
        for (r, &m) in c.edges.iter().zip(&c.multipliers).rev() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(ParamError::InvalidMultiplier(m));
            }
            scale_edge(&mut out, r, 1.0 / m)?;
        }
    }
    Ok(out)
}
