use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::pattern::EdgeRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Length,
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Multiplicative,
    Additive,
}

impl RuleKind {
    pub fn identity(self) -> f64 {
        match self {
            RuleKind::Multiplicative => 1.0,
            RuleKind::Additive => 0.0,
        }
    }
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// One edge influenced by a parameter rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEntry {
    #[serde(flatten)]
    pub edge_ref: EdgeRef,
    /// Panel-local unit direction along which the moving endpoint travels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub along: Option<[f64; 2]>,
    /// Move the end vertex (true) or the start vertex (false).
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub toward_end: bool,
    /// Entries sharing a group split one length change across contiguous edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl InfluenceEntry {
    pub fn new(edge_ref: EdgeRef) -> Self {
        Self { edge_ref, along: None, toward_end: true, group: None }
    }

    pub fn along(mut self, dir: [f64; 2]) -> Self {
        self.along = Some(dir);
        self
    }

    pub fn toward_start(mut self) -> Self {
        self.toward_end = false;
        self
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterRule {
    pub name: String,
    pub target: Target,
    pub kind: RuleKind,
    pub range: [f64; 2],
    pub value: f64,
    pub influence: Vec<InfluenceEntry>,
}

impl ParameterRule {
    pub fn new(
        name: impl Into<String>,
        target: Target,
        kind: RuleKind,
        range: [f64; 2],
        influence: Vec<InfluenceEntry>,
    ) -> Self {
        Self { name: name.into(), target, kind, range, value: kind.identity(), influence }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.range[0] && value <= self.range[1]
    }
}

/// Stitch-consistency repair: listed edges are equalized to their mean length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub edges: Vec<EdgeRef>,
    /// Per-edge `new_length / old_length` from the last application.
    #[serde(default)]
    pub multipliers: Vec<f64>,
}

impl Constraint {
    pub fn new(edges: Vec<EdgeRef>) -> Self {
        let multipliers = vec![1.0; edges.len()];
        Self { edges, multipliers }
    }
}

/// Bookkeeping for one accepted template sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub seed: u64,
    pub values: IndexMap<String, f64>,
    pub constraint_multipliers: Vec<Vec<f64>>,
    /// Rejected draws before the accepted one.
    pub retries: u32,
    /// Subset of `retries` rejected only after constraints were applied.
    #[serde(default)]
    pub constraint_rejections: u32,
}
