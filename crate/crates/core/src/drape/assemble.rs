use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::DrapeError;
use crate::geometry::{edge_length_default, edge_segments, triangulate_panel_with, PanelMesh2D};
use crate::mesh::{GarmentMesh, STITCH_LABEL};
use crate::pattern::PatternSpec;

/// Two garment vertices to be sewn together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StitchPair {
    pub a: usize,
    pub b: usize,
    /// Index of the stitch in the pattern.
    pub stitch: usize,
    /// Normalized arc-length position on the first edge.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StitchPairs(pub Vec<StitchPair>);

impl StitchPairs {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StitchPair> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub mesh: GarmentMesh,
    pub stitches: StitchPairs,
    /// Index of the first mesh vertex of each panel, in pattern order.
    pub panel_offsets: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Stitched edges whose lengths differ by more than this fraction are reported.
pub const STITCH_LENGTH_TOLERANCE: f64 = 0.2;

/// Triangulate every panel, place it in 3D, and pair up stitched boundary
/// vertices at equal arc-length positions.
///
/// Both edges of a stitch get the same number of boundary segments. Which
/// end of the second edge meets the start of the first is chosen by the
/// smaller 3D endpoint distance; equal distances join start to end, which
/// is the consistent choice for outward-facing panels.
pub fn assemble_garment(p: &PatternSpec, resolution: f64) -> Result<Assembly, DrapeError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(DrapeError::InvalidResolution(resolution));
    }
    let mut segments: Vec<Vec<usize>> = p.panels.iter().map(|pl| edge_segments(pl, resolution)).collect();
    let mut resolved = Vec::with_capacity(p.stitches.len());
    let mut warnings = Vec::new();
    for (k, st) in p.stitches.iter().enumerate() {
        let mut ends = [(0, 0); 2];
        for (slot, side) in ends.iter_mut().zip(&st.sides) {
            let pi = p
                .panel_index(&side.panel)
                .filter(|&i| side.edge < p.panels[i].edges.len())
                .ok_or_else(|| DrapeError::DanglingStitch(side.to_string()))?;
            *slot = (pi, side.edge);
        }
        let [(pa, ea), (pb, eb)] = ends;
        let m = segments[pa][ea].max(segments[pb][eb]);
        segments[pa][ea] = m;
        segments[pb][eb] = m;
        let la = edge_length_default(&p.panels[pa], ea)?;
        let lb = edge_length_default(&p.panels[pb], eb)?;
        if (la - lb).abs() > STITCH_LENGTH_TOLERANCE * la.max(lb) {
            warnings.push(format!(
                "stitch {k} ({} / {}): edge lengths {la:.3} and {lb:.3} differ by more than {:.0}%",
                st.sides[0],
                st.sides[1],
                STITCH_LENGTH_TOLERANCE * 100.0
            ));
        }
        resolved.push(ends);
    }

    let mut mesh = GarmentMesh::default();
    let mut panel_offsets = Vec::with_capacity(p.panels.len());
    let mut flat: Vec<PanelMesh2D> = Vec::with_capacity(p.panels.len());
    for (panel, segs) in p.panels.iter().zip(&segments) {
        let m2 = triangulate_panel_with(panel, resolution, segs)?;
        let part = GarmentMesh::uniform(
            m2.vertices.iter().map(|v| panel.to_world(v)).collect(),
            m2.triangles.clone(),
            &panel.name,
        );
        panel_offsets.push(mesh.vertex_count());
        mesh.append(&part);
        flat.push(m2);
    }

    let mut pairs = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (k, &[(pa, ea), (pb, eb)]) in resolved.iter().enumerate() {
        let va: Vec<(usize, f64)> =
            flat[pa].edge_vertices(ea).into_iter().map(|(i, s)| (i + panel_offsets[pa], s)).collect();
        let mut vb: Vec<(usize, f64)> =
            flat[pb].edge_vertices(eb).into_iter().map(|(i, s)| (i + panel_offsets[pb], s)).collect();
        debug_assert_eq!(va.len(), vb.len());
        let x = |i: usize| mesh.vertices[i];
        let (a0, a1) = (x(va[0].0), x(va[va.len() - 1].0));
        let (b0, b1) = (x(vb[0].0), x(vb[vb.len() - 1].0));
        let same = (a0 - b0).norm() + (a1 - b1).norm();
        let flipped = (a0 - b1).norm() + (a1 - b0).norm();
        if flipped <= same {
            vb.reverse();
            for v in &mut vb {
                v.1 = 1.0 - v.1;
            }
        }
        for (&(a, s), &(b, _)) in va.iter().zip(&vb) {
            // Corners shared by two stitches on the same pair of panels would
            // otherwise appear twice.
            if !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            pairs.push(StitchPair { a, b, stitch: k, s });
        }
    }
    for pr in &pairs {
        mesh.labels[pr.a] = STITCH_LABEL.to_string();
        mesh.labels[pr.b] = STITCH_LABEL.to_string();
    }
    Ok(Assembly { mesh, stitches: StitchPairs(pairs), panel_offsets, warnings })
}
