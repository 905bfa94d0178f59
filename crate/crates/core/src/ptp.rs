//! Periodic tree-pair documents: a finite, orbit-level description of an
//! equivariant morphism `q` from an upstairs tree onto a downstairs tree.
//!
//! A document lists, for each tree, its vertex types and its directed edge
//! classes. An edge class `c` with `mult(c) = m` says that every vertex of type
//! `from(c)` has exactly `m` outgoing edges of class `c`, each leading to a vertex
//! of type `to(c)`; `reverse(c)` names the class of the same edges read in the
//! opposite direction. The morphism is given by a vertex-type map together with
//! star-map *cells*: a cell at upstairs type `at` says that the source classes
//! listed in it are sent onto `coverage` distinct downstairs edges of class
//! `target`, each of which receives `fiber` edges of every source class.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiplicity::Multiplicity;

/// Index of a vertex type inside one [`TypedGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeId(pub usize);

/// Index of a directed edge class inside one [`TypedGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtpDocument {
    pub name: String,
    pub upstairs: GraphDocument,
    pub downstairs: GraphDocument,
    pub q: MorphismDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertex_types: Vec<String>,
    pub edge_classes: Vec<EdgeClassDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeClassDocument {
    pub id: String,
    pub from: String,
    pub to: String,
    pub reverse: String,
    pub mult: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDocument {
    pub vertex_map: BTreeMap<String, String>,
    pub cells: Vec<CellDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDocument {
    pub at: String,
    pub target: String,
    pub coverage: Multiplicity,
    pub sources: Vec<SourceDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDocument {
    pub class: String,
    pub fiber: Multiplicity,
}

// ---------------------------------------------------------------------------
// Validated model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClass {
    pub id: String,
    pub from: TypeId,
    pub to: TypeId,
    pub reverse: ClassId,
    pub mult: Multiplicity,
}

/// Vertex types and directed edge classes of one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedGraph {
    pub vertex_types: Vec<String>,
    pub classes: Vec<EdgeClass>,
}

impl TypedGraph {
    pub fn class(&self, c: ClassId) -> &EdgeClass {
        &self.classes[c.0]
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.vertex_types[t.0]
    }

    pub fn class_name(&self, c: ClassId) -> &str {
        &self.classes[c.0].id
    }

    pub fn reverse(&self, c: ClassId) -> ClassId {
        self.classes[c.0].reverse
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.vertex_types.len()).map(TypeId)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.classes.len()).map(ClassId)
    }

    /// Outgoing classes at vertices of type `t`, in document order.
    pub fn star(&self, t: TypeId) -> impl Iterator<Item = ClassId> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.from == t)
            .map(|(i, _)| ClassId(i))
    }

    /// Total number of star edges at a vertex of type `t`.
    pub fn star_size(&self, t: TypeId) -> Multiplicity {
        Multiplicity::sum(self.star(t).map(|c| self.class(c).mult))
    }

    pub fn type_index(&self, name: &str) -> Option<TypeId> {
        self.vertex_types.iter().position(|v| v == name).map(TypeId)
    }

    pub fn class_index(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c.id == name).map(ClassId)
    }

    fn is_connected(&self) -> bool {
        if self.vertex_types.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertex_types.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for c in &self.classes {
                if c.from.0 == t && !seen[c.to.0] {
                    seen[c.to.0] = true;
                    queue.push_back(c.to.0);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Source {
    pub class: ClassId,
    pub fiber: Multiplicity,
}

/// One star-map record at an upstairs vertex type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub at: TypeId,
    pub target: ClassId,
    pub coverage: u32,
    pub sources: Vec<Source>,
}

impl Cell {
    /// Number of upstairs star edges sent onto each covered target edge.
    pub fn preimage_count(&self) -> Multiplicity {
        Multiplicity::sum(self.sources.iter().map(|s| s.fiber))
    }

    pub fn is_collapsing(&self) -> bool {
        self.preimage_count().at_least(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    DegenerateLine,
    UpstairsLeaf,
    PartialCoverage,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

/// A validated periodic tree-pair. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ptp {
    name: String,
    upstairs: TypedGraph,
    downstairs: TypedGraph,
    vertex_map: Vec<TypeId>,
    cells: Vec<Cell>,
    cell_of: Vec<usize>,
    warnings: Vec<Warning>,
}

impl Ptp {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn upstairs(&self) -> &TypedGraph {
        &self.upstairs
    }

    pub fn downstairs(&self) -> &TypedGraph {
        &self.downstairs
    }

    pub fn vertex_map(&self, up: TypeId) -> TypeId {
        self.vertex_map[up.0]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// The unique cell listing upstairs class `c` among its sources.
    pub fn cell_of(&self, c: ClassId) -> &Cell {
        &self.cells[self.cell_of[c.0]]
    }

    pub fn cell_index_of(&self, c: ClassId) -> usize {
        self.cell_of[c.0]
    }

    pub fn cells_at(&self, up: TypeId) -> impl Iterator<Item = (usize, &Cell)> + '_ {
        self.cells.iter().enumerate().filter(move |(_, c)| c.at == up)
    }

    pub fn fiber_of(&self, c: ClassId) -> Multiplicity {
        let cell = self.cell_of(c);
        cell.sources
            .iter()
            .find(|s| s.class == c)
            .map(|s| s.fiber)
            .expect("class listed in its own cell")
    }

    /// Upstairs types lying over the downstairs type `down`.
    pub fn preimage_types(&self, down: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        self.upstairs.type_ids().filter(move |&t| self.vertex_map(t) == down)
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Parses and validates a document in the textual (JSON) format.
    pub fn parse(text: &str) -> Result<Ptp, ValidationReport> {
        let doc: PtpDocument = serde_json::from_str(text).map_err(|e| ValidationReport {
            violations: vec![Violation::new(ViolationKind::Malformed, e.to_string())],
        })?;
        Ptp::from_document(&doc)
    }

    pub fn to_document(&self) -> PtpDocument {
        let graph_doc = |g: &TypedGraph| GraphDocument {
            vertex_types: g.vertex_types.clone(),
            edge_classes: g
                .classes
                .iter()
                .map(|c| EdgeClassDocument {
                    id: c.id.clone(),
                    from: g.type_name(c.from).to_string(),
                    to: g.type_name(c.to).to_string(),
                    reverse: g.class_name(c.reverse).to_string(),
                    mult: c.mult,
                })
                .collect(),
        };
        PtpDocument {
            name: self.name.clone(),
            upstairs: graph_doc(&self.upstairs),
            downstairs: graph_doc(&self.downstairs),
            q: MorphismDocument {
                vertex_map: self
                    .upstairs
                    .type_ids()
                    .map(|t| {
                        (
                            self.upstairs.type_name(t).to_string(),
                            self.downstairs.type_name(self.vertex_map(t)).to_string(),
                        )
                    })
                    .collect(),
                cells: self
                    .cells
                    .iter()
                    .map(|cell| CellDocument {
                        at: self.upstairs.type_name(cell.at).to_string(),
                        target: self.downstairs.class_name(cell.target).to_string(),
                        coverage: Multiplicity::Finite(cell.coverage),
                        sources: cell
                            .sources
                            .iter()
                            .map(|s| SourceDocument {
                                class: self.upstairs.class_name(s.class).to_string(),
                                fiber: s.fiber,
                            })
                            .collect(),
                    })
                    .collect(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_document(doc: &PtpDocument) -> Result<Ptp, ValidationReport> {
        Validator::default().run(doc)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Malformed,
    BadIdentifier,
    DuplicateId,
    UnknownId,
    EmptyGraph,
    InvolutionBroken,
    DownstairsLeaf,
    DownstairsOmega,
    Disconnected,
    VertexMapIncomplete,
    CellMismatch,
    ProductLaw,
    CellMembership,
    CoverageOverflow,
    ReversalCompatibility,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation { kind, message: message.into() }
    }
}

/// Every invariant a rejected document violates.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{}", self.summary())]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn summary(&self) -> String {
        let lines: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{:?}: {}", v.kind, v.message))
            .collect();
        format!("invalid document ({} violations): {}", lines.len(), lines.join("; "))
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Default)]
struct Validator {
    violations: Vec<Violation>,
}

impl Validator {
    fn push(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation::new(kind, message));
    }

    fn check_identifier(&mut self, what: &str, id: &str) {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            self.push(ViolationKind::BadIdentifier, format!("{what} identifier {id:?} is empty or contains whitespace"));
        }
    }

    fn run(mut self, doc: &PtpDocument) -> Result<Ptp, ValidationReport> {
        let up = self.graph("upstairs", &doc.upstairs);
        let down = self.graph("downstairs", &doc.downstairs);
        let (Some(up), Some(down)) = (up, down) else {
            return Err(ValidationReport { violations: self.violations });
        };

        for c in &down.classes {
            if c.mult.is_omega() {
                self.push(
                    ViolationKind::DownstairsOmega,
                    format!("downstairs class {} has multiplicity omega; the downstairs tree must be locally finite", c.id),
                );
            }
        }
        for t in down.type_ids() {
            if !down.star_size(t).at_least(2) {
                self.push(
                    ViolationKind::DownstairsLeaf,
                    format!("downstairs type {} has star size {} (< 2)", down.type_name(t), down.star_size(t)),
                );
            }
        }

        let vertex_map = self.vertex_map(&doc.q.vertex_map, &up, &down);
        let cells = self.cells(&doc.q.cells, &up, &down, vertex_map.as_deref());

        let (Some(vertex_map), Some(cells)) = (vertex_map, cells) else {
            return Err(ValidationReport { violations: self.violations });
        };

        let cell_of = self.membership(&up, &cells);
        self.coverage_bounds(&up, &down, &vertex_map, &cells);
        if let Some(cell_of) = &cell_of {
            self.reversal(&up, &down, &cells, cell_of);
        }

        if !self.violations.is_empty() {
            return Err(ValidationReport { violations: self.violations });
        }
        let cell_of = cell_of.expect("membership checked");
        let warnings = collect_warnings(&up, &down, &cells);
        Ok(Ptp {
            name: doc.name.clone(),
            upstairs: up,
            downstairs: down,
            vertex_map,
            cells,
            cell_of,
            warnings,
        })
    }

    fn graph(&mut self, side: &str, doc: &GraphDocument) -> Option<TypedGraph> {
        let before = self.violations.len();
        let mut type_ids = HashMap::new();
        for (i, t) in doc.vertex_types.iter().enumerate() {
            self.check_identifier(&format!("{side} vertex type"), t);
            if type_ids.insert(t.as_str(), TypeId(i)).is_some() {
                self.push(ViolationKind::DuplicateId, format!("{side} vertex type {t} listed twice"));
            }
        }
        let mut class_ids = HashMap::new();
        for (i, c) in doc.edge_classes.iter().enumerate() {
            self.check_identifier(&format!("{side} edge class"), &c.id);
            if class_ids.insert(c.id.as_str(), ClassId(i)).is_some() {
                self.push(ViolationKind::DuplicateId, format!("{side} edge class {} listed twice", c.id));
            }
        }
        if doc.vertex_types.is_empty() || doc.edge_classes.is_empty() {
            self.push(ViolationKind::EmptyGraph, format!("{side} graph needs at least one vertex type and one edge class"));
        }

        let mut classes = Vec::with_capacity(doc.edge_classes.len());
        for c in &doc.edge_classes {
            let from = type_ids.get(c.from.as_str()).copied();
            let to = type_ids.get(c.to.as_str()).copied();
            let reverse = class_ids.get(c.reverse.as_str()).copied();
            for (field, name, found) in [
                ("from", &c.from, from.is_some()),
                ("to", &c.to, to.is_some()),
                ("reverse", &c.reverse, reverse.is_some()),
            ] {
                if !found {
                    self.push(ViolationKind::UnknownId, format!("{side} class {}: unknown {field} {name}", c.id));
                }
            }
            if let (Some(from), Some(to), Some(reverse)) = (from, to, reverse) {
                classes.push(EdgeClass { id: c.id.clone(), from, to, reverse, mult: c.mult });
            }
        }
        if self.violations.len() > before {
            return None;
        }

        let graph = TypedGraph { vertex_types: doc.vertex_types.clone(), classes };
        for (i, c) in graph.classes.iter().enumerate() {
            let r = graph.class(c.reverse);
            if r.reverse != ClassId(i) {
                self.push(
                    ViolationKind::InvolutionBroken,
                    format!("{side} class {}: reverse of reverse is {}, not itself", c.id, graph.class_name(r.reverse)),
                );
            } else if r.from != c.to || r.to != c.from {
                self.push(
                    ViolationKind::InvolutionBroken,
                    format!("{side} class {}: reverse {} does not swap endpoints", c.id, r.id),
                );
            }
        }
        if !graph.is_connected() {
            self.push(ViolationKind::Disconnected, format!("{side} quotient graph is not connected"));
        }
        Some(graph)
    }

    fn vertex_map(
        &mut self,
        map: &BTreeMap<String, String>,
        up: &TypedGraph,
        down: &TypedGraph,
    ) -> Option<Vec<TypeId>> {
        let before = self.violations.len();
        for key in map.keys() {
            if up.type_index(key).is_none() {
                self.push(ViolationKind::UnknownId, format!("vertex_map key {key} is not an upstairs type"));
            }
        }
        let mut out = Vec::with_capacity(up.vertex_types.len());
        for t in &up.vertex_types {
            match map.get(t) {
                None => self.push(ViolationKind::VertexMapIncomplete, format!("vertex_map has no entry for {t}")),
                Some(d) => match down.type_index(d) {
                    Some(d) => out.push(d),
                    None => self.push(ViolationKind::UnknownId, format!("vertex_map sends {t} to unknown type {d}")),
                },
            }
        }
        (self.violations.len() == before).then_some(out)
    }

    fn cells(
        &mut self,
        docs: &[CellDocument],
        up: &TypedGraph,
        down: &TypedGraph,
        vertex_map: Option<&[TypeId]>,
    ) -> Option<Vec<Cell>> {
        let before = self.violations.len();
        let mut cells = Vec::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            let at = up.type_index(&doc.at);
            let target = down.class_index(&doc.target);
            if at.is_none() {
                self.push(ViolationKind::UnknownId, format!("cell {i}: unknown upstairs type {}", doc.at));
            }
            if target.is_none() {
                self.push(ViolationKind::UnknownId, format!("cell {i}: unknown downstairs class {}", doc.target));
            }
            let coverage = match doc.coverage {
                Multiplicity::Finite(k) => Some(k),
                Multiplicity::Omega => {
                    self.push(
                        ViolationKind::CoverageOverflow,
                        format!("cell {i}: coverage omega exceeds any finite downstairs multiplicity"),
                    );
                    None
                }
            };
            if doc.sources.is_empty() {
                self.push(ViolationKind::CellMismatch, format!("cell {i}: no sources"));
            }
            let mut sources = Vec::new();
            for s in &doc.sources {
                match up.class_index(&s.class) {
                    Some(class) => sources.push(Source { class, fiber: s.fiber }),
                    None => self.push(ViolationKind::UnknownId, format!("cell {i}: unknown upstairs class {}", s.class)),
                }
            }
            let (Some(at), Some(target), Some(coverage)) = (at, target, coverage) else {
                continue;
            };
            let cell = Cell { at, target, coverage, sources };
            if let Some(vm) = vertex_map {
                self.check_cell(i, &cell, up, down, vm);
            }
            cells.push(cell);
        }
        (self.violations.len() == before).then_some(cells)
    }

    fn check_cell(&mut self, i: usize, cell: &Cell, up: &TypedGraph, down: &TypedGraph, vm: &[TypeId]) {
        let target = down.class(cell.target);
        if target.from != vm[cell.at.0] {
            self.push(
                ViolationKind::CellMismatch,
                format!(
                    "cell {i}: target {} starts at {}, but {} maps to {}",
                    target.id,
                    down.type_name(target.from),
                    up.type_name(cell.at),
                    down.type_name(vm[cell.at.0])
                ),
            );
        }
        for s in &cell.sources {
            let class = up.class(s.class);
            if class.from != cell.at {
                self.push(
                    ViolationKind::CellMismatch,
                    format!("cell {i}: source {} does not start at {}", class.id, up.type_name(cell.at)),
                );
            }
            if vm[class.to.0] != target.to {
                self.push(
                    ViolationKind::CellMismatch,
                    format!("cell {i}: source {} ends over {}, target {} ends at {}", class.id,
                        down.type_name(vm[class.to.0]), target.id, down.type_name(target.to)),
                );
            }
            let product = Multiplicity::Finite(cell.coverage) * s.fiber;
            if product != class.mult {
                self.push(
                    ViolationKind::ProductLaw,
                    format!(
                        "cell {i}: source {} has multiplicity {}, but coverage {} x fiber {} = {}",
                        class.id, class.mult, cell.coverage, s.fiber, product
                    ),
                );
            }
        }
    }

    fn membership(&mut self, up: &TypedGraph, cells: &[Cell]) -> Option<Vec<usize>> {
        let mut owner: Vec<Vec<usize>> = vec![Vec::new(); up.classes.len()];
        for (i, cell) in cells.iter().enumerate() {
            for s in &cell.sources {
                owner[s.class.0].push(i);
            }
        }
        let mut ok = true;
        for (c, cells) in owner.iter().enumerate() {
            if cells.len() != 1 {
                ok = false;
                self.push(
                    ViolationKind::CellMembership,
                    format!("upstairs class {} appears in {} cells (expected exactly 1)", up.classes[c].id, cells.len()),
                );
            }
        }
        ok.then(|| owner.into_iter().map(|v| v[0]).collect())
    }

    fn coverage_bounds(&mut self, up: &TypedGraph, down: &TypedGraph, vm: &[TypeId], cells: &[Cell]) {
        let mut totals: BTreeMap<(TypeId, ClassId), u64> = BTreeMap::new();
        for cell in cells {
            *totals.entry((cell.at, cell.target)).or_default() += u64::from(cell.coverage);
        }
        for ((at, target), total) in totals {
            let mult = down.class(target).mult;
            if vm[at.0] == down.class(target).from && !mult.at_least(u32::try_from(total).unwrap_or(u32::MAX)) {
                self.push(
                    ViolationKind::CoverageOverflow,
                    format!(
                        "cells at {} cover {total} edges of {} but only {mult} exist",
                        up.type_name(at),
                        down.class_name(target)
                    ),
                );
            }
        }
    }

    fn reversal(&mut self, up: &TypedGraph, down: &TypedGraph, cells: &[Cell], cell_of: &[usize]) {
        for c in up.class_ids() {
            let target = cells[cell_of[c.0]].target;
            let rev_target = cells[cell_of[up.reverse(c).0]].target;
            if rev_target != down.reverse(target) {
                self.push(
                    ViolationKind::ReversalCompatibility,
                    format!(
                        "{} maps to {} but its reverse {} maps to {}, not {}",
                        up.class_name(c),
                        down.class_name(target),
                        up.class_name(up.reverse(c)),
                        down.class_name(rev_target),
                        down.class_name(down.reverse(target))
                    ),
                );
            }
        }
    }
}

fn collect_warnings(up: &TypedGraph, down: &TypedGraph, cells: &[Cell]) -> Vec<Warning> {
    let mut warnings = BTreeSet::new();
    if up.type_ids().all(|t| up.star_size(t) == Multiplicity::Finite(2)) {
        warnings.insert(Warning {
            kind: WarningKind::DegenerateLine,
            message: "every upstairs star has exactly two edges; the upstairs tree is a line".into(),
        });
    }
    for t in up.type_ids() {
        if !up.star_size(t).at_least(2) {
            warnings.insert(Warning {
                kind: WarningKind::UpstairsLeaf,
                message: format!("upstairs type {} is a leaf; the upstairs action is not minimal", up.type_name(t)),
            });
        }
    }
    for (i, cell) in cells.iter().enumerate() {
        let mult = down.class(cell.target).mult;
        if cell.is_collapsing() && !Multiplicity::Finite(cell.coverage).at_least(mult.finite().unwrap_or(u32::MAX)) {
            warnings.insert(Warning {
                kind: WarningKind::PartialCoverage,
                message: format!(
                    "collapsing cell {i} covers {} of {mult} edges of {}; the marking of that class is partial",
                    cell.coverage,
                    down.class_name(cell.target)
                ),
            });
        }
    }
    warnings.into_iter().collect()
}
