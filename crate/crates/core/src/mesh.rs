//! Labelled triangle meshes and their on-disk formats: Wavefront OBJ for
//! geometry and one-label-per-line text for segmentation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::Vec3;

/// Label for vertices that lie on a stitched seam.
pub const STITCH_LABEL: &str = "stitch";

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{labels} labels for {vertices} vertices")]
    LabelCount { labels: usize, vertices: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MeshError + '_ {
    move |source| MeshError::Io { path: path.display().to_string(), source }
}

/// Triangle mesh with one segmentation label per vertex.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GarmentMesh {
    #[serde(with = "vec3_list")]
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub labels: Vec<String>,
}

impl GarmentMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, labels: Vec<String>) -> Self {
        Self { vertices, triangles, labels }
    }

    /// Unlabelled mesh; every vertex gets `label`.
    pub fn uniform(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, label: &str) -> Self {
        let labels = vec![label.to_string(); vertices.len()];
        Self { vertices, triangles, labels }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        self.triangles[f].map(|i| self.vertices[i])
    }

    /// Unnormalized normal (twice the area, right-hand rule on winding).
    pub fn face_normal_raw(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a))
    }

    pub fn area(&self) -> f64 {
        (0..self.face_count()).map(|f| 0.5 * self.face_normal_raw(f).norm()).sum()
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))))
    }

    /// Append another mesh, offsetting its indices.
    pub fn append(&mut self, other: &GarmentMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.labels.extend(other.labels.iter().cloned());
        self.triangles.extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }

    /// Keep only the faces where `keep` is true, dropping vertices left
    /// without faces. Returns the mesh and, for each new vertex, its old index.
    pub fn retain_faces(&self, keep: &[bool]) -> (GarmentMesh, Vec<usize>) {
        let mut used = vec![false; self.vertices.len()];
        for (t, _) in self.triangles.iter().zip(keep).filter(|(_, &k)| k) {
            for &i in t {
                used[i] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut old_index = Vec::new();
        for (i, _) in used.iter().enumerate().filter(|(_, &u)| u) {
            remap[i] = old_index.len();
            old_index.push(i);
        }
        let mesh = GarmentMesh {
            vertices: old_index.iter().map(|&i| self.vertices[i]).collect(),
            labels: old_index.iter().map(|&i| self.labels[i].clone()).collect(),
            triangles: self
                .triangles
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(t, _)| t.map(|i| remap[i]))
                .collect(),
        };
        (mesh, old_index)
    }

    pub fn to_obj(&self) -> String {
        write_obj(&self.vertices, &self.triangles)
    }

    pub fn labels_text(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 8);
        for l in &self.labels {
            out.push_str(l);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, obj: &Path, labels: &Path) -> Result<(), MeshError> {
        fs::write(obj, self.to_obj()).map_err(io_err(obj))?;
        fs::write(labels, self.labels_text()).map_err(io_err(labels))?;
        Ok(())
    }

    pub fn load(obj: &Path, labels: &Path) -> Result<GarmentMesh, MeshError> {
        let text = fs::read_to_string(obj).map_err(io_err(obj))?;
        let (vertices, triangles) = parse_obj(&text)?;
        let labels_text = fs::read_to_string(labels).map_err(io_err(labels))?;
        let labels = parse_labels(&labels_text);
        if labels.len() != vertices.len() {
            return Err(MeshError::LabelCount { labels: labels.len(), vertices: vertices.len() });
        }
        Ok(GarmentMesh { vertices, triangles, labels })
    }
}

pub fn write_obj(vertices: &[Vec3], triangles: &[[usize; 3]]) -> String {
    let mut out = String::with_capacity(vertices.len() * 40 + triangles.len() * 24);
    for v in vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Reads `v` and `f` records; polygons are fan-triangulated and texture or
/// normal indices are ignored.
pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let tok = it.next().ok_or(MeshError::Parse {
                        line: ln + 1,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse().map_err(|_| MeshError::Parse {
                        line: ln + 1,
                        message: format!("bad coordinate '{tok}'"),
                    })?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let raw: i64 = head.parse().map_err(|_| MeshError::Parse {
                        line: ln + 1,
                        message: format!("bad face index '{tok}'"),
                    })?;
                    let i = if raw < 0 { vertices.len() as i64 + raw } else { raw - 1 };
                    if i < 0 || i as usize >= vertices.len() {
                        return Err(MeshError::Parse {
                            line: ln + 1,
                            message: format!("face index {raw} out of range"),
                        });
                    }
                    idx.push(i as usize);
                }
                if idx.len() < 3 {
                    return Err(MeshError::Parse { line: ln + 1, message: "face needs 3 vertices".into() });
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

pub fn parse_labels(text: &str) -> Vec<String> {
    text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect()
}

pub(crate) mod vec3_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::pattern::Vec3;

    pub fn serialize<S: Serializer>(v: &[Vec3], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 3]> = v.iter().map(|p| [p.x, p.y, p.z]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec3>, D::Error> {
        let raw: Vec<[f64; 3]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
    }
}
