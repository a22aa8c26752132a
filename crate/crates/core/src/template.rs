//! Template documents: a base pattern plus ordered parameter rules and
//! constraints, read from and written to JSON.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{DeserializeOwned, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::params::{Constraint, InfluenceEntry, ParameterRule, RuleKind, SampleRecord, Target};
use crate::pattern::PatternSpec;
use crate::validate::{validate_template, Diagnostic, Severity};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemplateSpec {
    pub pattern: PatternSpec,
    pub parameters: Vec<ParameterRule>,
    pub parameter_order: Vec<String>,
    pub constraints: Vec<Constraint>,
    /// Present on documents produced by sampling.
    pub sample: Option<SampleRecord>,
}

impl TemplateSpec {
    pub fn from_pattern(pattern: PatternSpec) -> Self {
        Self { pattern, ..Default::default() }
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterRule> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Rules in application order. Names missing from `parameters` are skipped.
    pub fn ordered_parameters(&self) -> impl Iterator<Item = &ParameterRule> {
        self.parameter_order.iter().filter_map(|n| self.parameter(n))
    }

    pub fn push_parameter(&mut self, rule: ParameterRule) {
        self.parameter_order.push(rule.name.clone());
        self.parameters.push(rule);
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("semantic violation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<Diagnostic>),
}

impl ParseError {
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::Schema { .. } => "schema",
            ParseError::Semantic(_) => "semantic",
        }
    }
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column) = (e.line(), e.column());
        let message = e.to_string();
        match e.classify() {
            Category::Data => ParseError::Schema { line, column, message },
            Category::Syntax | Category::Eof | Category::Io => {
                ParseError::Syntax { line, column, message }
            }
        }
    }
}

/// Parse and fully validate a template document.
pub fn parse_template(text: &str) -> Result<TemplateSpec, ParseError> {
    let t = parse_template_unchecked(text)?;
    let errors: Vec<Diagnostic> =
        validate_template(&t).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if errors.is_empty() {
        Ok(t)
    } else {
        Err(ParseError::Semantic(errors))
    }
}

/// Parse without semantic validation; used by the linter.
pub fn parse_template_unchecked(text: &str) -> Result<TemplateSpec, ParseError> {
    let doc: TemplateDoc = serde_json::from_str(text)?;
    Ok(doc.into_spec())
}

/// Deterministic, round-trip exact JSON rendering.
pub fn serialize_template(t: &TemplateSpec) -> String {
    let doc = TemplateDoc::from_spec(t);
    let mut out = serde_json::to_string_pretty(&doc).expect("template serialization is infallible");
    out.push('\n');
    out
}

// JSON shape of a template. Named collections are objects keyed by name,
// kept in document order.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateDoc {
    pattern: PatternSpec,
    #[serde(default)]
    parameters: NamedEntries<RuleDoc>,
    #[serde(default)]
    parameter_order: Vec<String>,
    #[serde(default)]
    constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample: Option<SampleRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    target: Target,
    kind: RuleKind,
    range: [f64; 2],
    #[serde(default)]
    value: Option<f64>,
    influence: Vec<InfluenceEntry>,
}

impl TemplateDoc {
    fn into_spec(self) -> TemplateSpec {
        let parameters = self
            .parameters
            .0
            .into_iter()
            .map(|(name, r)| ParameterRule {
                name,
                target: r.target,
                kind: r.kind,
                range: r.range,
                value: r.value.unwrap_or(r.kind.identity()),
                influence: r.influence,
            })
            .collect();
        let constraints = self
            .constraints
            .into_iter()
            .map(|mut c| {
                if c.multipliers.is_empty() {
                    c.multipliers = vec![1.0; c.edges.len()];
                }
                c
            })
            .collect();
        TemplateSpec {
            pattern: self.pattern,
            parameters,
            parameter_order: self.parameter_order,
            constraints,
            sample: self.sample,
        }
    }

    fn from_spec(t: &TemplateSpec) -> Self {
        let parameters = t
            .parameters
            .iter()
            .map(|r| {
                (
                    r.name.clone(),
                    RuleDoc {
                        target: r.target,
                        kind: r.kind,
                        range: r.range,
                        value: Some(r.value),
                        influence: r.influence.clone(),
                    },
                )
            })
            .collect();
        TemplateDoc {
            pattern: t.pattern.clone(),
            parameters: NamedEntries(parameters),
            parameter_order: t.parameter_order.clone(),
            constraints: t.constraints.clone(),
            sample: t.sample.clone(),
        }
    }
}

/// JSON object read as an ordered list of entries, keeping duplicates.
struct NamedEntries<T>(Vec<(String, T)>);

impl<T> Default for NamedEntries<T> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<T: Serialize> Serialize for NamedEntries<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for NamedEntries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: DeserializeOwned> Visitor<'de> for V<T> {
            type Value = NamedEntries<T>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object keyed by name")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, T>()? {
                    out.push(entry);
                }
                Ok(NamedEntries(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}
