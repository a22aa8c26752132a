//! Parameter rules, constraints, and template sampling.

mod apply;
mod constraints;
mod rules;
mod sampling;

pub use apply::{apply_all, apply_parameter, apply_parameters, Applied, Values};
pub use constraints::{apply_constraints, restore_constraints};
pub use rules::{Constraint, InfluenceEntry, ParameterRule, RuleKind, SampleRecord, Target};
pub use sampling::{
    draw_values, sample_pattern, sample_seed, sampled_template, SamplingError, DEFAULT_MAX_RETRIES,
};

use std::collections::HashSet;

use thiserror::Error;

use crate::geometry::GeometryError;

pub const MIN_EDGE_LENGTH: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("edge {panel}:{edge} would collapse to length {length:e} cm")]
    DegenerateEdge { panel: String, edge: usize, length: f64 },
    #[error("edge {panel}:{edge} cannot reach length {target} cm along the given direction")]
    UnreachableLength { panel: String, edge: usize, target: f64 },
    #[error("reference to missing edge {panel}:{edge}")]
    MissingEdge { panel: String, edge: usize },
    #[error("no value supplied for parameter '{0}'")]
    MissingValue(String),
    #[error("non-finite value {value} for parameter '{name}'")]
    NonFiniteValue { name: String, value: f64 },
    #[error("group '{0}' is not a contiguous open run of edges in one panel")]
    InvalidGroup(String),
    #[error("constraint multiplier {0} must be positive")]
    InvalidMultiplier(f64),
    #[error("parameter '{rule}': {source}")]
    Rule {
        rule: String,
        #[source]
        source: Box<ParamError>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ParamError {
    /// The underlying error with any rule context stripped.
    pub fn root(&self) -> &ParamError {
        match self {
            ParamError::Rule { source, .. } => source.root(),
            other => other,
        }
    }
}

/// True if `edges` (indices into a loop of `n` edges) form one cyclic run
/// that does not cover the whole loop.
pub fn is_contiguous_run(edges: &HashSet<usize>, n: usize) -> bool {
    if edges.is_empty() || edges.len() >= n || edges.iter().any(|&e| e >= n) {
        return false;
    }
    let starts = edges.iter().filter(|&&e| !edges.contains(&((e + n - 1) % n))).count();
    starts == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_runs() {
        let set = |v: &[usize]| v.iter().copied().collect::<HashSet<_>>();
        assert!(is_contiguous_run(&set(&[1, 2, 3]), 6));
        assert!(is_contiguous_run(&set(&[5, 0]), 6));
        assert!(!is_contiguous_run(&set(&[1, 3]), 6));
        assert!(!is_contiguous_run(&set(&[0, 1, 2]), 3));
    }
}
