//! Type-level classification of the ends of the downstairs tree.
//!
//! A downstairs edge is *marked* when it is the image of a collapsing pair. An
//! end `E` is faced when some marked edge points toward it. Since marks only
//! depend on the class of an edge (when every class is fully marked or
//! unmarked), facing can be decided on the quotient:
//!
//! * a class `c` at `V` is *clean* when the edge of class `c` and every edge
//!   behind it that points the same way are unmarked; this is the greatest
//!   fixed point of "`c` is unmarked and `reverse(c')` is clean for every other
//!   star class `c'` at `V`";
//! * the viability digraph has the unmarked classes as nodes and a step
//!   `d -> d'` when a ray may continue from `d` into `d'` with every hanging
//!   branch clean.
//!
//! Unfaced ends are exactly the infinite paths of the digraph starting at a
//! class whose siblings at the base are all clean. Such a path must eventually
//! run around a cycle, which is why an unfaced end, when it exists, is
//! eventually periodic. The classifier counts these paths, weighting each step
//! by the number of edge instances it may use, and stops at two.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::end::{EndSpec, EndStep, EndView};
use crate::local::{applicability_check, ApplicabilityReport};
use crate::ptp::{ClassId, Ptp, TypeId, TypedGraph, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkStatus {
    Unmarked,
    PartiallyMarked,
    FullyMarked,
}

/// How partially marked classes are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialPolicy {
    /// Partially marked counts as marked.
    Conservative,
    /// Partially marked counts as unmarked.
    Liberal,
}

/// Mark status of every downstairs class, read as an outgoing class at its
/// source type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSet {
    status: Vec<MarkStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkEntry {
    pub vertex_type: String,
    pub class: String,
    pub status: MarkStatus,
}

impl MarkedSet {
    pub fn status(&self, d: ClassId) -> MarkStatus {
        self.status[d.0]
    }

    pub fn is_marked(&self, d: ClassId, policy: PartialPolicy) -> bool {
        match self.status[d.0] {
            MarkStatus::Unmarked => false,
            MarkStatus::FullyMarked => true,
            MarkStatus::PartiallyMarked => policy == PartialPolicy::Conservative,
        }
    }

    pub fn has_partial(&self) -> bool {
        self.status.contains(&MarkStatus::PartiallyMarked)
    }

    pub fn marked(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.status.len()).map(ClassId).filter(|&d| self.status(d) != MarkStatus::Unmarked)
    }

    /// Non-unmarked entries, in class order.
    pub fn entries(&self, graph: &TypedGraph) -> Vec<MarkEntry> {
        self.marked()
            .map(|d| MarkEntry {
                vertex_type: graph.type_name(graph.class(d).from).to_string(),
                class: graph.class_name(d).to_string(),
                status: self.status(d),
            })
            .collect()
    }
}

/// `(V, d)` is fully marked when the collapsing cells of a single upstairs
/// type over `V` cover every instance of `d`, and partially marked when some
/// collapsing cell targets `d` but no type covers all of it.
pub fn marked_classes(ptp: &Ptp) -> MarkedSet {
    let down = ptp.downstairs();
    let status = down
        .class_ids()
        .map(|d| {
            let mult = down.class(d).mult.finite().expect("downstairs is locally finite");
            let mut any = false;
            let mut full = false;
            for t in ptp.preimage_types(down.class(d).from) {
                let covered: u32 = ptp
                    .cells_at(t)
                    .filter(|(_, c)| c.target == d && c.is_collapsing())
                    .map(|(_, c)| c.coverage)
                    .sum();
                any |= covered > 0;
                full |= covered == mult;
            }
            match (any, full) {
                (_, true) => MarkStatus::FullyMarked,
                (true, false) => MarkStatus::PartiallyMarked,
                (false, false) => MarkStatus::Unmarked,
            }
        })
        .collect();
    MarkedSet { status }
}

/// Clean classes: `c` is clean when no edge on the far side of an edge of
/// class `c` (its source side) that points toward that edge is marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanSet {
    clean: Vec<bool>,
}

impl CleanSet {
    pub fn contains(&self, c: ClassId) -> bool {
        self.clean[c.0]
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.clean.len()).map(ClassId).filter(|&c| self.contains(c))
    }

    pub fn is_empty(&self) -> bool {
        !self.clean.contains(&true)
    }

    /// `(vertex type, class)` pairs, in class order.
    pub fn pairs(&self, graph: &TypedGraph) -> Vec<(String, String)> {
        self.classes()
            .map(|c| (graph.type_name(graph.class(c).from).to_string(), graph.class_name(c).to_string()))
            .collect()
    }
}

/// Star classes at `t` that remain after removing one instance of each class
/// in `used`.
fn residual(graph: &TypedGraph, t: TypeId, used: &[ClassId]) -> Vec<ClassId> {
    graph
        .star(t)
        .filter(|&c| {
            let taken = used.iter().filter(|&&u| u == c).count() as u32;
            graph.class(c).mult.at_least(taken + 1)
        })
        .collect()
}

/// Clean classes with partial marks counted as marked.
pub fn clean_pairs(ptp: &Ptp, marked: &MarkedSet) -> CleanSet {
    clean_pairs_with(ptp, marked, PartialPolicy::Conservative)
}

pub fn clean_pairs_with(ptp: &Ptp, marked: &MarkedSet, policy: PartialPolicy) -> CleanSet {
    let down = ptp.downstairs();
    let mut clean: Vec<bool> = down.class_ids().map(|c| !marked.is_marked(c, policy)).collect();
    loop {
        let mut changed = false;
        for c in down.class_ids() {
            if !clean[c.0] {
                continue;
            }
            let v = down.class(c).from;
            if residual(down, v, &[c]).into_iter().any(|c2| !clean[down.reverse(c2).0]) {
                clean[c.0] = false;
                changed = true;
            }
        }
        if !changed {
            return CleanSet { clean };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViabilityEdge {
    pub from: ClassId,
    pub to: ClassId,
    /// Number of edge instances of `to` the ray may take after `from`.
    pub choices: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViabilityDigraph {
    /// Unmarked classes.
    pub nodes: Vec<ClassId>,
    pub edges: Vec<ViabilityEdge>,
    /// Classes that may start an unfaced ray at a vertex of their source type.
    pub starts: Vec<ClassId>,
    /// Nodes from which an infinite path exists.
    pub live: Vec<ClassId>,
}

impl ViabilityDigraph {
    pub fn successors(&self, d: ClassId) -> impl Iterator<Item = &ViabilityEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == d)
    }
}

pub fn viability_digraph(ptp: &Ptp, marked: &MarkedSet, clean: &CleanSet, policy: PartialPolicy) -> ViabilityDigraph {
    let down = ptp.downstairs();
    let nodes: Vec<ClassId> = down.class_ids().filter(|&c| !marked.is_marked(c, policy)).collect();
    let mut edges = Vec::new();
    for &d in &nodes {
        let w = down.class(d).to;
        let back = down.reverse(d);
        for &d2 in nodes.iter().filter(|&&n| down.class(n).from == w) {
            let choices = down.class(d2).mult.finite().expect("finite") - u32::from(d2 == back);
            if choices == 0 {
                continue;
            }
            if residual(down, w, &[back, d2]).into_iter().all(|c| clean.contains(down.reverse(c))) {
                edges.push(ViabilityEdge { from: d, to: d2, choices });
            }
        }
    }
    let starts: Vec<ClassId> = nodes
        .iter()
        .copied()
        .filter(|&d| {
            let v = down.class(d).from;
            residual(down, v, &[d]).into_iter().all(|c| clean.contains(down.reverse(c)))
        })
        .collect();

    // Live nodes reach a cycle: a strongly connected component with an
    // internal edge.
    let mut g: DiGraph<ClassId, ()> = DiGraph::new();
    let idx: Vec<Option<NodeIndex>> = {
        let mut idx = vec![None; down.classes.len()];
        for &n in &nodes {
            idx[n.0] = Some(g.add_node(n));
        }
        idx
    };
    for e in &edges {
        g.add_edge(idx[e.from.0].unwrap(), idx[e.to.0].unwrap(), ());
    }
    let mut live = vec![false; down.classes.len()];
    for scc in tarjan_scc(&g) {
        let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
        if cyclic {
            for n in scc {
                live[g[n].0] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for e in &edges {
            if live[e.to.0] && !live[e.from.0] {
                live[e.from.0] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let live = nodes.iter().copied().filter(|n| live[n.0]).collect();
    ViabilityDigraph { nodes, edges, starts, live }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    AllFaced,
    UniqueCandidate(EndSpec),
    Inconclusive(InconclusiveReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InconclusiveReason {
    /// The answer depends on which instances of a partially marked class are marked.
    PartialMarking,
    /// More than one unfaced end. Under the theorem's hypotheses this
    /// contradicts uniqueness and is flagged as a consistency violation.
    MultipleCandidates { cycles: usize, branching: bool, consistency_violation: bool },
}

impl Classification {
    pub fn is_consistency_violation(&self) -> bool {
        matches!(
            self,
            Classification::Inconclusive(InconclusiveReason::MultipleCandidates { consistency_violation: true, .. })
        )
    }

    pub fn candidate(&self) -> Option<&EndSpec> {
        match self {
            Classification::UniqueCandidate(e) => Some(e),
            _ => None,
        }
    }
}

/// Number of unfaced ends seen from a vertex of one type.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    None,
    One(EndSpec),
    Many { cycles: usize, branching: bool },
}

fn outcome(ptp: &Ptp, digraph: &ViabilityDigraph) -> Outcome {
    let down = ptp.downstairs();
    let n = down.classes.len();
    let mut live = vec![false; n];
    for d in &digraph.live {
        live[d.0] = true;
    }
    let live_succ = |d: ClassId| digraph.successors(d).filter(|e| live[e.to.0]).collect::<Vec<_>>();

    // unique[d]: exactly one infinite path continues after d (greatest fixed point).
    let mut unique = live.clone();
    loop {
        let mut changed = false;
        let current: Vec<ClassId> = down.class_ids().filter(|d| unique[d.0]).collect();
        for d in current {
            let s = live_succ(d);
            let ok = s.len() == 1 && s[0].choices == 1 && unique[s[0].to.0];
            if !ok {
                unique[d.0] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut best: Option<EndSpec> = None;
    let mut many = false;
    for v in down.type_ids() {
        let live_starts: Vec<ClassId> =
            digraph.starts.iter().copied().filter(|s| down.class(*s).from == v && live[s.0]).collect();
        match live_starts.as_slice() {
            [] => {}
            [d] if down.class(*d).mult.finite() == Some(1) && unique[d.0] => {
                let spec = walk(down, &live_succ, *d);
                let better = best.as_ref().is_none_or(|b| {
                    (spec.prefix.len(), class_key(&spec)) < (b.prefix.len(), class_key(b))
                });
                if better {
                    best = Some(spec);
                }
            }
            _ => many = true,
        }
    }
    if many {
        let relevant: BTreeSet<ClassId> = digraph.live.iter().copied().collect();
        let internal = digraph
            .edges
            .iter()
            .filter(|e| relevant.contains(&e.from) && relevant.contains(&e.to))
            .collect::<Vec<_>>();
        let branching = internal.iter().any(|e| e.choices > 1);
        return Outcome::Many { cycles: count_cycles(&relevant, &internal), branching };
    }
    match best {
        Some(spec) => Outcome::One(spec),
        None => Outcome::None,
    }
}

fn class_key(spec: &EndSpec) -> Vec<ClassId> {
    spec.prefix.iter().chain(&spec.cycle).map(|s| s.class).collect()
}

/// Follows the unique live successors from `start` until a class repeats.
fn walk<'a>(
    down: &TypedGraph,
    live_succ: &dyn Fn(ClassId) -> Vec<&'a ViabilityEdge>,
    start: ClassId,
) -> EndSpec {
    let mut path = vec![start];
    loop {
        let next = live_succ(*path.last().unwrap())[0].to;
        if let Some(i) = path.iter().position(|&c| c == next) {
            let prefix: Vec<ClassId> = path[..i].to_vec();
            let mut cycle: Vec<ClassId> = path[i..].to_vec();
            if prefix.is_empty() {
                let k = (0..cycle.len())
                    .min_by_key(|&k| cycle[k..].iter().chain(&cycle[..k]).copied().collect::<Vec<_>>())
                    .unwrap();
                cycle.rotate_left(k);
            }
            let first = prefix.first().copied().unwrap_or(cycle[0]);
            let steps = |v: Vec<ClassId>| v.into_iter().map(|class| EndStep { class, index: 0 }).collect();
            return EndSpec { base_type: down.class(first).from, prefix: steps(prefix), cycle: steps(cycle) };
        }
        path.push(next);
    }
}

/// Independent cycles (cyclomatic number) of the strongly connected parts.
fn count_cycles(nodes: &BTreeSet<ClassId>, edges: &[&ViabilityEdge]) -> usize {
    let mut g: DiGraph<ClassId, ()> = DiGraph::new();
    let idx: std::collections::BTreeMap<ClassId, NodeIndex> = nodes.iter().map(|&c| (c, g.add_node(c))).collect();
    for e in edges {
        g.add_edge(idx[&e.from], idx[&e.to], ());
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|scc| {
            let set: BTreeSet<NodeIndex> = scc.iter().copied().collect();
            let inner = g.edge_indices().filter(|&e| {
                let (a, b) = g.edge_endpoints(e).unwrap();
                set.contains(&a) && set.contains(&b)
            });
            let m = inner.count();
            if m == 0 {
                0
            } else {
                m + 1 - scc.len()
            }
        })
        .sum()
}

/// Everything the classifier computed, for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndAnalysis {
    pub marked: MarkedSet,
    /// Clean set with partial marks counted as marked.
    pub clean: CleanSet,
    pub digraph: ViabilityDigraph,
    pub classification: Classification,
}

pub fn classify_ends(ptp: &Ptp) -> EndAnalysis {
    let applicable = applicability_check(ptp).main_theorem_applies;
    let marked = marked_classes(ptp);
    let run = |policy| {
        let clean = clean_pairs_with(ptp, &marked, policy);
        let digraph = viability_digraph(ptp, &marked, &clean, policy);
        let out = outcome(ptp, &digraph);
        (clean, digraph, out)
    };
    let (clean, digraph, strict) = run(PartialPolicy::Conservative);
    let classification = if marked.has_partial() && run(PartialPolicy::Liberal).2 != strict {
        Classification::Inconclusive(InconclusiveReason::PartialMarking)
    } else {
        match strict {
            Outcome::None => Classification::AllFaced,
            Outcome::One(spec) => Classification::UniqueCandidate(spec),
            Outcome::Many { cycles, branching } => Classification::Inconclusive(InconclusiveReason::MultipleCandidates {
                cycles,
                branching,
                consistency_violation: applicable,
            }),
        }
    };
    EndAnalysis { marked, clean, digraph, classification }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FacingError {
    #[error("the answer depends on a partially marked class along the end")]
    PartialMarking,
    #[error("q is not locally surjective")]
    NotLocallySurjective,
}

/// Where a faced end is first faced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacedAt {
    /// Index of the ray vertex at which the check failed.
    pub step: usize,
    /// True when the step class itself is marked; otherwise a branch hanging
    /// off the ray at that vertex contains a marked edge pointing at the ray.
    pub on_ray: bool,
}

fn faced_with(ptp: &Ptp, end: &EndSpec, marked: &MarkedSet, policy: PartialPolicy) -> Option<FacedAt> {
    let down = ptp.downstairs();
    let clean = clean_pairs_with(ptp, marked, policy);
    for i in 0..end.horizon() {
        let s = end.step(i).class;
        if marked.is_marked(s, policy) {
            return Some(FacedAt { step: i, on_ray: true });
        }
        let used: Vec<ClassId> = if i == 0 { vec![s] } else { vec![down.reverse(end.step(i - 1).class), s] };
        let at = down.class(s).from;
        if residual(down, at, &used).into_iter().any(|c| !clean.contains(down.reverse(c))) {
            return Some(FacedAt { step: i, on_ray: false });
        }
    }
    None
}

/// Whether some collapsing pair faces `end`, decided on the quotient.
/// `Ok(None)` means unfaced.
pub fn end_faced(ptp: &Ptp, end: &EndSpec) -> Result<Option<FacedAt>, FacingError> {
    let marked = marked_classes(ptp);
    let strict = faced_with(ptp, end, &marked, PartialPolicy::Conservative);
    if marked.has_partial() && faced_with(ptp, end, &marked, PartialPolicy::Liberal).is_some() != strict.is_some() {
        return Err(FacingError::PartialMarking);
    }
    Ok(strict)
}

/// Whether the preimage of `end` is a single end upstairs: exactly when no
/// collapsing pair faces it. Needs local surjectivity.
pub fn q_fiber_singleton(ptp: &Ptp, end: &EndSpec) -> Result<bool, FacingError> {
    if !crate::local::local_properties(ptp).locally_surjective {
        return Err(FacingError::NotLocallySurjective);
    }
    Ok(end_faced(ptp, end)?.is_none())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sigma1 {
    Empty,
    AtMostOne(EndSpec),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub applicability: ApplicabilityReport,
    pub analysis: EndAnalysis,
    pub sigma1: Sigma1,
    pub notes: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl Verdict {
    pub fn classification(&self) -> &Classification {
        &self.analysis.classification
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.analysis.marked
    }
}

pub const STABILIZER_NOTE: &str =
    "the stabilizer of every point of the downstairs tree is not finitely generated";

pub fn sigma_verdict(ptp: &Ptp, fn_stabilizers_assumed: bool) -> Verdict {
    let applicability = applicability_check(ptp);
    let analysis = classify_ends(ptp);
    let down = ptp.downstairs();
    let applies = applicability.main_theorem_applies;
    let sigma1 = match (&analysis.classification, applies) {
        (Classification::AllFaced, true) => Sigma1::Empty,
        (Classification::UniqueCandidate(e), true) => Sigma1::AtMostOne(e.clone()),
        _ => Sigma1::Unknown,
    };
    let mut notes = Vec::new();
    if applies {
        notes.push(STABILIZER_NOTE.to_string());
    } else {
        for f in applicability.failures() {
            notes.push(format!("hypothesis fails: {f}"));
        }
    }
    if let (Classification::UniqueCandidate(e), true) = (&analysis.classification, applies) {
        let view = EndView::new(e, down);
        if fn_stabilizers_assumed {
            notes.push(format!(
                "E0 = {view} lies in Sigma^n(rho), conditional on upstairs stabilizers of type F_n"
            ));
        } else {
            notes.push(format!(
                "E0 = {view} is unfaced; whether it lies in Sigma^1 depends on the stabilizers"
            ));
        }
        notes.push(format!("candidate period: {}", e.period()));
    }
    if analysis.classification.is_consistency_violation() {
        notes.push("more than one unfaced end although the hypotheses hold".to_string());
    }
    for w in ptp.warnings() {
        notes.push(format!("warning: {}", w.message));
    }
    Verdict { applicability, analysis, sigma1, notes, warnings: ptp.warnings().to_vec() }
}
