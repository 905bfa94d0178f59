//! Eventually periodic ends of the downstairs tree.
//!
//! An end is written `prefix;cycle` with comma-separated class ids, e.g.
//! `x+,y-;x+` or `;u+`. A step may name an instance as `class#i`; the index
//! counts the instances of that class at the current vertex, skipping the edge
//! just traversed, so every well-formed spec describes a geodesic ray.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ptp::{ClassId, TypeId, TypedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndStep {
    pub class: ClassId,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EndSpec {
    pub base_type: TypeId,
    pub prefix: Vec<EndStep>,
    pub cycle: Vec<EndStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndSpecError {
    #[error("end has an empty cycle")]
    EmptyCycle,
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("bad instance index in {0:?}")]
    BadIndex(String),
    #[error("step {step}: class {class} does not start where the previous step ends")]
    Discontinuous { step: usize, class: String },
    #[error("step {step}: {class}#{index} is not available (would backtrack or exceed the multiplicity)")]
    Backtrack { step: usize, class: String, index: u32 },
}

impl EndSpec {
    pub fn new(graph: &TypedGraph, prefix: Vec<EndStep>, cycle: Vec<EndStep>) -> Result<EndSpec, EndSpecError> {
        let first = prefix.first().or(cycle.first()).ok_or(EndSpecError::EmptyCycle)?;
        let spec = EndSpec { base_type: graph.class(first.class).from, prefix, cycle };
        spec.validate(graph)?;
        Ok(spec)
    }

    /// Parses `prefix;cycle`. Without a `;` the whole text is the cycle.
    pub fn parse(graph: &TypedGraph, text: &str) -> Result<EndSpec, EndSpecError> {
        let (prefix, cycle) = match text.split_once(';') {
            Some((p, c)) => (p, c),
            None => ("", text),
        };
        let prefix = parse_steps(graph, prefix)?;
        let cycle = parse_steps(graph, cycle)?;
        if cycle.is_empty() {
            return Err(EndSpecError::EmptyCycle);
        }
        EndSpec::new(graph, prefix, cycle)
    }

    /// Step `i` of the infinite ray.
    pub fn step(&self, i: usize) -> EndStep {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = EndStep> + '_ {
        (0..).map(|i| self.step(i))
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// Number of steps that must be inspected before the ray repeats itself
    /// (prefix, one period, and the step closing the period).
    pub fn horizon(&self) -> usize {
        self.prefix.len() + self.cycle.len() + 1
    }

    pub fn validate(&self, graph: &TypedGraph) -> Result<(), EndSpecError> {
        if self.cycle.is_empty() {
            return Err(EndSpecError::EmptyCycle);
        }
        let mut at = self.base_type;
        let mut prev: Option<ClassId> = None;
        for i in 0..self.horizon() {
            let step = self.step(i);
            let class = graph.class(step.class);
            if class.from != at {
                return Err(EndSpecError::Discontinuous { step: i, class: class.id.clone() });
            }
            let backtrack = prev.is_some_and(|p| graph.reverse(p) == step.class);
            let available = class.mult.finite().map(|m| m - u32::from(backtrack));
            if available.is_some_and(|a| step.index >= a) {
                return Err(EndSpecError::Backtrack { step: i, class: class.id.clone(), index: step.index });
            }
            at = class.to;
            prev = Some(step.class);
        }
        Ok(())
    }

    pub fn display(&self, graph: &TypedGraph) -> String {
        let fmt_steps = |steps: &[EndStep]| {
            steps
                .iter()
                .map(|s| {
                    let name = graph.class_name(s.class);
                    if s.index == 0 {
                        name.to_string()
                    } else {
                        format!("{name}#{}", s.index)
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{};{}", fmt_steps(&self.prefix), fmt_steps(&self.cycle))
    }
}

fn parse_steps(graph: &TypedGraph, text: &str) -> Result<Vec<EndStep>, EndSpecError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (name, index) = match tok.split_once('#') {
                Some((n, i)) => (n, i.parse::<u32>().map_err(|_| EndSpecError::BadIndex(tok.to_string()))?),
                None => (tok, 0),
            };
            let class = graph.class_index(name).ok_or_else(|| EndSpecError::UnknownClass(name.to_string()))?;
            Ok(EndStep { class, index })
        })
        .collect()
}

/// Serializable view of an end, with class names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndView {
    pub base_type: String,
    pub prefix: Vec<String>,
    pub cycle: Vec<String>,
    pub text: String,
}

impl EndView {
    pub fn new(end: &EndSpec, graph: &TypedGraph) -> EndView {
        let names = |s: &[EndStep]| s.iter().map(|s| graph.class_name(s.class).to_string()).collect();
        EndView {
            base_type: graph.type_name(end.base_type).to_string(),
            prefix: names(&end.prefix),
            cycle: names(&end.cycle),
            text: end.display(graph),
        }
    }
}

impl fmt::Display for EndView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn parse_and_display() {
        let ptp = corpus::load_example("two_rose").unwrap().ptp();
        let g = ptp.downstairs();
        let e = EndSpec::parse(g, "x+;x+").unwrap();
        assert_eq!(e.prefix.len(), 1);
        assert_eq!(e.display(g), "x+;x+");
        let e = EndSpec::parse(g, ";y-,x+").unwrap();
        assert_eq!(e.period(), 2);
        assert_eq!(e.step(5).class, g.class_index("x+").unwrap());
    }

    #[test]
    fn rejects_backtracking() {
        let ptp = corpus::load_example("two_rose").unwrap().ptp();
        let g = ptp.downstairs();
        assert!(matches!(EndSpec::parse(g, ";x+,x-"), Err(EndSpecError::Backtrack { .. })));
        assert!(matches!(EndSpec::parse(g, "x+;x-"), Err(EndSpecError::Backtrack { .. })));
        assert!(matches!(EndSpec::parse(g, "x+;"), Err(EndSpecError::EmptyCycle)));
        assert!(matches!(EndSpec::parse(g, ";z"), Err(EndSpecError::UnknownClass(_))));
    }

    #[test]
    fn backtracking_class_allowed_with_spare_instances() {
        let ptp = corpus::load_example("ascending_synthetic").unwrap().ptp();
        let g = ptp.downstairs();
        // u+ then u-: the u- edge back is used, the other one is available.
        assert!(EndSpec::parse(g, "u+;u-").is_ok());
        assert!(EndSpec::parse(g, "u+;u-#1").is_err());
        assert!(EndSpec::parse(g, ";u-#1").is_ok());
    }

    #[test]
    fn discontinuous_steps_are_rejected() {
        let ptp = corpus::load_example("free_product").unwrap().ptp();
        let g = ptp.downstairs();
        assert!(matches!(EndSpec::parse(g, ";x"), Err(EndSpecError::Discontinuous { .. })));
        assert!(EndSpec::parse(g, ";x,y#2").is_ok());
    }
}
