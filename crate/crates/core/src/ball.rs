//! Finite balls in the two Bass-Serre trees and the equivariant map between them.
//!
//! A [`Ball`] is a rooted tree grown breadth-first from a base vertex. Vertices
//! are numbered in creation order; edges come in pairs, the forward edge
//! `2i` (parent to child) and its reverse `2i + 1`. The out-edges of a vertex
//! are listed as: the edge back to its parent first, then its child edges in
//! `(class, index)` order. The back edge carries index 0 of its class.
//!
//! Balls can be grown lazily, one vertex at a time, which is what the witness
//! construction does: the upstairs ball of a 7-valent tree at radius 10 has
//! tens of millions of vertices, but a witness only touches a few thousand.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::end::EndSpec;
use crate::ptp::{ClassId, Ptp, TypeId, TypedGraph};

/// Default cap on the total number of vertices a pair may materialize.
pub const DEFAULT_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }

    pub fn reverse(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }

    /// True for parent-to-child edges.
    pub fn is_forward(self) -> bool {
        self.0 & 1 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallError {
    #[error("vertex budget of {budget} exceeded")]
    ResourceLimit { budget: usize },
    #[error("vertex {0} is not in the ball")]
    UnknownVertex(u32),
    #[error("vertex {0} has not been expanded")]
    NotExpanded(u32),
    #[error("ray is empty")]
    EmptyRay,
    #[error("ray does not start at the base vertex")]
    RayNotFromBase,
    #[error("ray is not a geodesic leaving the base")]
    NotDescending,
    #[error("end starts at type {expected}, but the ball is based at {found}")]
    BaseTypeMismatch { expected: String, found: String },
    #[error("step {step}: no instance {index} of class {class}")]
    NoSuchInstance { step: usize, class: String, index: u32 },
    #[error("type {0} has no upstairs preimage")]
    NoPreimage(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallVertex {
    pub ty: TypeId,
    pub depth: u32,
    /// Edge from the parent to this vertex.
    pub parent_edge: Option<EdgeId>,
    /// Index of the first child edge pair and the number of children.
    children: Option<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeInstance {
    pub class: ClassId,
    pub index: u32,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ball {
    vertices: Vec<BallVertex>,
    edges: Vec<EdgeInstance>,
    /// Set once some class of multiplicity omega has been truncated.
    truncated: bool,
}

/// A path in a ball, given by its vertices and the edges between them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RayInstance {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl RayInstance {
    pub fn start(vertex: VertexId) -> RayInstance {
        RayInstance { vertices: vec![vertex], edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn tip(&self) -> VertexId {
        *self.vertices.last().expect("a path has at least one vertex")
    }

    pub fn push(&mut self, ball: &Ball, e: EdgeId) {
        debug_assert_eq!(ball.edge(e).source, self.tip());
        self.edges.push(e);
        self.vertices.push(ball.edge(e).target);
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    pub fn labels(&self, ball: &Ball) -> Vec<(ClassId, u32)> {
        self.edges.iter().map(|&e| (ball.edge(e).class, ball.edge(e).index)).collect()
    }

    pub fn classes(&self, ball: &Ball) -> Vec<ClassId> {
        self.edges.iter().map(|&e| ball.edge(e).class).collect()
    }
}

/// One child to attach: its edge class and index, the reverse class, and
/// the child's type.
struct ChildSpec {
    class: ClassId,
    index: u32,
    reverse: ClassId,
    ty: TypeId,
}

impl Ball {
    pub fn new(base_type: TypeId) -> Ball {
        Ball {
            vertices: vec![BallVertex { ty: base_type, depth: 0, parent_edge: None, children: None }],
            edges: Vec::new(),
            truncated: false,
        }
    }

    /// The full ball of `radius` around a vertex of `base_type` in the tree of
    /// `graph`, with omega classes truncated to `omega_cap` instances.
    pub fn grow(
        graph: &TypedGraph,
        base_type: TypeId,
        radius: u32,
        omega_cap: u32,
        budget: usize,
    ) -> Result<Ball, BallError> {
        let mut ball = Ball::new(base_type);
        let mut next = 0;
        while next < ball.len() {
            let v = VertexId(next as u32);
            next += 1;
            if ball.vertex(v).depth >= radius {
                continue;
            }
            let specs = plain_children(graph, &ball, v, omega_cap);
            if graph.star(ball.vertex(v).ty).any(|c| graph.class(c).mult.is_omega()) {
                ball.truncated = true;
            }
            ball.attach(v, specs, budget)?;
        }
        Ok(ball)
    }

    pub fn base(&self) -> VertexId {
        VertexId(0)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.idx() < self.vertices.len()
    }

    pub fn vertex(&self, v: VertexId) -> &BallVertex {
        &self.vertices[v.idx()]
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeInstance {
        &self.edges[e.idx()]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.vertex(v).depth
    }

    /// Largest vertex depth present.
    pub fn radius(&self) -> u32 {
        self.vertices.last().map_or(0, |v| v.depth)
    }

    pub fn is_expanded(&self, v: VertexId) -> bool {
        self.vertex(v).children.is_some()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.vertex(v).parent_edge.map(|e| self.edge(e).source)
    }

    /// Edges leaving `v` that are present in the ball.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let vert = self.vertex(v);
        let up = vert.parent_edge.map(EdgeId::reverse);
        let (first, count) = vert.children.unwrap_or((0, 0));
        up.into_iter().chain((first..first + count).map(|i| EdgeId(2 * i)))
    }

    pub fn children(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let (first, count) = self.vertex(v).children.unwrap_or((0, 0));
        (first..first + count).map(move |i| self.edges[2 * i as usize].target)
    }

    /// True when `a` is `v` or lies on the path from the base to `v`.
    pub fn is_ancestor_or_self(&self, a: VertexId, v: VertexId) -> bool {
        let mut x = v;
        loop {
            if x == a {
                return true;
            }
            if self.depth(x) <= self.depth(a) {
                return false;
            }
            match self.parent(x) {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> u32 {
        let l = self.lca(a, b);
        self.depth(a) + self.depth(b) - 2 * self.depth(l)
    }

    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).expect("non-base vertex has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).expect("non-base vertex has a parent");
        }
        while a != b {
            a = self.parent(a).expect("distinct vertices meet below the base");
            b = self.parent(b).expect("distinct vertices meet below the base");
        }
        a
    }

    /// The unique reduced path from `a` to `b`.
    pub fn geodesic(&self, a: VertexId, b: VertexId) -> Result<RayInstance, BallError> {
        for v in [a, b] {
            if !self.contains(v) {
                return Err(BallError::UnknownVertex(v.0));
            }
        }
        let l = self.lca(a, b);
        let mut path = RayInstance::start(a);
        let mut x = a;
        while x != l {
            let e = self.vertex(x).parent_edge.expect("below the lca").reverse();
            path.push(self, e);
            x = self.edge(e).target;
        }
        let mut down = Vec::new();
        let mut y = b;
        while y != l {
            let e = self.vertex(y).parent_edge.expect("below the lca");
            down.push(e);
            y = self.edge(e).source;
        }
        for e in down.into_iter().rev() {
            path.push(self, e);
        }
        Ok(path)
    }

    /// Checks that `tau` is a geodesic path leaving the base.
    pub fn check_descending(&self, tau: &RayInstance) -> Result<(), BallError> {
        let first = *tau.vertices.first().ok_or(BallError::EmptyRay)?;
        if first != self.base() {
            return Err(BallError::RayNotFromBase);
        }
        for (i, &v) in tau.vertices.iter().enumerate() {
            if !self.contains(v) {
                return Err(BallError::UnknownVertex(v.0));
            }
            if self.depth(v) as usize != i {
                return Err(BallError::NotDescending);
            }
        }
        for (i, &e) in tau.edges.iter().enumerate() {
            if !e.is_forward() || self.edge(e).source != tau.vertices[i] || self.edge(e).target != tau.vertices[i + 1]
            {
                return Err(BallError::NotDescending);
            }
        }
        Ok(())
    }

    /// Busemann function of the ray `tau` (which must leave the base) at `p`:
    /// `2m - depth(p)`, where `m` is the depth of the last vertex of `tau` on
    /// the path from the base to `p`. Exact whenever that vertex is not the
    /// tip of `tau`.
    pub fn busemann(&self, tau: &RayInstance, p: VertexId) -> Result<i64, BallError> {
        self.check_descending(tau)?;
        if !self.contains(p) {
            return Err(BallError::UnknownVertex(p.0));
        }
        Ok(self.busemann_unchecked(tau, p))
    }

    pub(crate) fn busemann_unchecked(&self, tau: &RayInstance, p: VertexId) -> i64 {
        let mut x = p;
        loop {
            let d = self.depth(x) as usize;
            if tau.vertices.get(d) == Some(&x) {
                return 2 * d as i64 - self.depth(p) as i64;
            }
            x = self.parent(x).expect("the base lies on tau");
        }
    }

    /// Vertices of the horoball `{ beta_tau >= r }`, in id order.
    pub fn horoball_filter(&self, tau: &RayInstance, r: i64) -> Result<Vec<VertexId>, BallError> {
        self.check_descending(tau)?;
        Ok(self.vertex_ids().filter(|&v| self.busemann_unchecked(tau, v) >= r).collect())
    }

    /// The edge leaving `p` in the direction of the end of `tau`: the next
    /// edge of `tau` when `p` lies on it, otherwise the edge to the parent.
    /// `None` at the tip of `tau`.
    pub fn toward_end(&self, tau: &RayInstance, p: VertexId) -> Option<EdgeId> {
        let d = self.depth(p) as usize;
        if tau.vertices.get(d) == Some(&p) {
            tau.edges.get(d).copied()
        } else {
            self.vertex(p).parent_edge.map(EdgeId::reverse)
        }
    }

    fn attach(&mut self, v: VertexId, specs: Vec<ChildSpec>, budget: usize) -> Result<(), BallError> {
        debug_assert!(!self.is_expanded(v));
        if self.vertices.len() + specs.len() > budget {
            return Err(BallError::ResourceLimit { budget });
        }
        let first = (self.edges.len() / 2) as u32;
        let depth = self.vertex(v).depth + 1;
        for s in &specs {
            let child = VertexId(self.vertices.len() as u32);
            let fwd = EdgeId(self.edges.len() as u32);
            self.edges.push(EdgeInstance { class: s.class, index: s.index, source: v, target: child });
            self.edges.push(EdgeInstance { class: s.reverse, index: 0, source: child, target: v });
            self.vertices.push(BallVertex { ty: s.ty, depth, parent_edge: Some(fwd), children: None });
        }
        self.vertices[v.idx()].children = Some((first, specs.len() as u32));
        Ok(())
    }
}

/// Children of `v` in a plain tree: every instance of every star class except
/// the one already used by the parent edge.
fn plain_children(graph: &TypedGraph, ball: &Ball, v: VertexId, omega_cap: u32) -> Vec<ChildSpec> {
    let back = ball.vertex(v).parent_edge.map(|e| ball.edge(e.reverse()).class);
    let mut specs = Vec::new();
    for c in graph.star(ball.vertex(v).ty) {
        let class = graph.class(c);
        for index in 0..class.mult.capped(omega_cap) {
            if back == Some(c) && index == 0 {
                continue;
            }
            specs.push(ChildSpec { class: c, index, reverse: class.reverse, ty: class.to });
        }
    }
    specs
}

/// Concrete balls in both trees together with the map between them.
///
/// The map on the star of an upstairs vertex follows the cells: the target
/// slots of each class are handed out in document order, lowest index first,
/// with the slot used by the back edge reserved for the cell that contains it.
/// Instance `i` of a source with fiber `f` goes to the `i / f`-th slot of its
/// cell. Omega fibers are truncated to `omega_cap` instances per target slot so
/// that local surjectivity and collapsing survive inside the ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedBallPair {
    ptp: Ptp,
    omega_cap: u32,
    budget: usize,
    up: Ball,
    down: Ball,
    vmap: Vec<VertexId>,
    emap: Vec<EdgeId>,
}

/// Full balls of `radius` around an upstairs vertex of `base_type` and its image.
pub fn expand_pair(ptp: &Ptp, base_type: TypeId, radius: u32, omega_cap: u32) -> Result<MappedBallPair, BallError> {
    expand_pair_with_budget(ptp, base_type, radius, omega_cap, DEFAULT_BUDGET)
}

pub fn expand_pair_with_budget(
    ptp: &Ptp,
    base_type: TypeId,
    radius: u32,
    omega_cap: u32,
    budget: usize,
) -> Result<MappedBallPair, BallError> {
    let mut pair = MappedBallPair::lazy(ptp, base_type, omega_cap, budget);
    pair.expand_down_to(radius)?;
    pair.expand_up_to(radius)?;
    Ok(pair)
}

impl MappedBallPair {
    /// A pair holding only the two base vertices; grow it with the
    /// `expand_*` methods.
    pub fn lazy(ptp: &Ptp, base_type: TypeId, omega_cap: u32, budget: usize) -> MappedBallPair {
        let omega_cap = omega_cap.max(1);
        MappedBallPair {
            ptp: ptp.clone(),
            omega_cap,
            budget,
            up: Ball::new(base_type),
            down: Ball::new(ptp.vertex_map(base_type)),
            vmap: vec![VertexId(0)],
            emap: Vec::new(),
        }
    }

    pub fn ptp(&self) -> &Ptp {
        &self.ptp
    }

    pub fn up(&self) -> &Ball {
        &self.up
    }

    pub fn down(&self) -> &Ball {
        &self.down
    }

    pub fn omega_cap(&self) -> u32 {
        self.omega_cap
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn image_vertex(&self, v: VertexId) -> VertexId {
        self.vmap[v.idx()]
    }

    pub fn image_edge(&self, e: EdgeId) -> EdgeId {
        self.emap[e.idx()]
    }

    /// Number of vertices in both balls.
    pub fn size(&self) -> usize {
        self.up.len() + self.down.len()
    }

    pub fn expand_down_to(&mut self, radius: u32) -> Result<(), BallError> {
        let mut next = 0;
        while next < self.down.len() {
            let v = VertexId(next as u32);
            next += 1;
            if self.down.depth(v) < radius {
                self.expand_down(v)?;
            }
        }
        Ok(())
    }

    pub fn expand_up_to(&mut self, radius: u32) -> Result<(), BallError> {
        let mut next = 0;
        while next < self.up.len() {
            let v = VertexId(next as u32);
            next += 1;
            if self.up.depth(v) < radius {
                self.expand_up(v)?;
            }
        }
        Ok(())
    }

    pub fn expand_down(&mut self, v: VertexId) -> Result<(), BallError> {
        if !self.down.contains(v) {
            return Err(BallError::UnknownVertex(v.0));
        }
        if self.down.is_expanded(v) {
            return Ok(());
        }
        let specs = plain_children(self.ptp.downstairs(), &self.down, v, self.omega_cap);
        let room = self.budget.saturating_sub(self.up.len());
        self.down.attach(v, specs, room).map_err(|_| BallError::ResourceLimit { budget: self.budget })
    }

    /// Materializes the star of the upstairs vertex `u` and maps it.
    pub fn expand_up(&mut self, u: VertexId) -> Result<(), BallError> {
        if !self.up.contains(u) {
            return Err(BallError::UnknownVertex(u.0));
        }
        if self.up.is_expanded(u) {
            return Ok(());
        }
        let v = self.vmap[u.idx()];
        self.expand_down(v)?;

        let ptp = &self.ptp;
        let upstairs = ptp.upstairs();
        let downstairs = ptp.downstairs();
        let ut = self.up.vertex(u).ty;
        let down_out: HashMap<(ClassId, u32), EdgeId> = self
            .down
            .out_edges(v)
            .map(|e| ((self.down.edge(e).class, self.down.edge(e).index), e))
            .collect();

        let back = self.up.vertex(u).parent_edge.map(EdgeId::reverse);
        let parent_class = back.map(|b| self.up.edge(b).class);
        let parent_cell = parent_class.map(|c| ptp.cell_index_of(c));
        let sigma = back.map(|b| self.down.edge(self.emap[b.idx()]).index);

        // Target slots of every cell at this type.
        let mut slots: HashMap<usize, Vec<u32>> = HashMap::new();
        let mut targets: Vec<ClassId> = Vec::new();
        for (_, cell) in ptp.cells_at(ut) {
            if !targets.contains(&cell.target) {
                targets.push(cell.target);
            }
        }
        for d in targets {
            let mult = downstairs.class(d).mult.capped(self.omega_cap);
            let reserved = parent_cell.filter(|&ci| ptp.cells()[ci].target == d).and(sigma);
            let mut pool = (0..mult).filter(|&i| Some(i) != reserved);
            for (ci, cell) in ptp.cells_at(ut).filter(|(_, c)| c.target == d) {
                let mut s = Vec::with_capacity(cell.coverage as usize);
                let mut need = cell.coverage;
                if Some(ci) == parent_cell {
                    s.push(reserved.expect("parent cell reserves the back slot"));
                    need -= 1;
                }
                s.extend(pool.by_ref().take(need as usize));
                debug_assert_eq!(s.len(), cell.coverage as usize, "coverage fits the multiplicity");
                slots.insert(ci, s);
            }
        }

        let mut specs = Vec::new();
        let mut images = Vec::new();
        for c in upstairs.star(ut) {
            let ci = ptp.cell_index_of(c);
            let cell = &ptp.cells()[ci];
            let is_parent = Some(c) == parent_class;
            let mut order = slots[&ci].clone();
            if !is_parent {
                order.sort_unstable();
            }
            let fiber = ptp.fiber_of(c);
            if fiber.is_omega() {
                self.up.truncated = true;
            }
            let f = fiber.capped(self.omega_cap);
            let class = upstairs.class(c);
            for i in 0..cell.coverage * f {
                if is_parent && i == 0 {
                    continue;
                }
                let slot = order[(i / f) as usize];
                images.push(down_out[&(cell.target, slot)]);
                specs.push(ChildSpec { class: c, index: i, reverse: class.reverse, ty: class.to });
            }
        }

        let room = self.budget.saturating_sub(self.down.len());
        self.up
            .attach(u, specs, room)
            .map_err(|_| BallError::ResourceLimit { budget: self.budget })?;
        for img in images {
            let target = self.down.edge(img).target;
            debug_assert_eq!(
                ptp.vertex_map(self.up.vertex(VertexId(self.vmap.len() as u32)).ty),
                self.down.vertex(target).ty
            );
            self.vmap.push(target);
            self.emap.push(img);
            self.emap.push(img.reverse());
        }
        Ok(())
    }

    /// The first `len` edges of the ray from the downstairs base realizing
    /// `end`, growing the downstairs ball as needed.
    pub fn realize_end(&mut self, end: &EndSpec, len: usize) -> Result<RayInstance, BallError> {
        let down = self.ptp.downstairs();
        if end.base_type != self.down.vertex(self.down.base()).ty {
            return Err(BallError::BaseTypeMismatch {
                expected: down.type_name(end.base_type).to_string(),
                found: down.type_name(self.down.vertex(self.down.base()).ty).to_string(),
            });
        }
        let mut ray = RayInstance::start(self.down.base());
        for step in 0..len {
            let x = ray.tip();
            self.expand_down(x)?;
            let s = end.step(step);
            // Going away from the base, the back edge is the parent edge, which
            // `children` already leaves out.
            let e = self
                .down
                .out_edges(x)
                .filter(|&e| e.is_forward() && self.down.edge(e).class == s.class)
                .nth(s.index as usize)
                .ok_or_else(|| BallError::NoSuchInstance {
                    step,
                    class: self.ptp.downstairs().class_name(s.class).to_string(),
                    index: s.index,
                })?;
            ray.push(&self.down, e);
        }
        Ok(ray)
    }

    /// Up vertices whose images lie in the horoball `{ beta_tau >= r }`.
    pub fn up_in_horoball(&self, tau: &RayInstance, r: i64) -> Result<Vec<VertexId>, BallError> {
        self.down.check_descending(tau)?;
        Ok(self
            .up
            .vertex_ids()
            .filter(|&u| self.down.busemann_unchecked(tau, self.image_vertex(u)) >= r)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn pair(name: &str, radius: u32) -> MappedBallPair {
        let ptp = corpus::load_example(name).unwrap().ptp();
        expand_pair(&ptp, TypeId(0), radius, 4).unwrap()
    }

    #[test]
    fn down_ball_sizes() {
        // 4-valent tree: 1 + 4 + 12 + 36.
        let p = pair("two_rose", 3);
        assert_eq!(p.down().len(), 53);
        // 7-valent tree: 1 + 7 + 42.
        let p = pair("two_rose", 2);
        assert_eq!(p.up().len(), 50);
    }

    #[test]
    fn map_is_a_morphism() {
        for name in ["two_rose", "bs24_to_bs12", "ascending_synthetic", "free_product"] {
            let p = pair(name, 3);
            for e in p.up().edge_ids() {
                let ue = p.up().edge(e);
                let de = p.down().edge(p.image_edge(e));
                assert_eq!(p.image_vertex(ue.source), de.source, "{name}");
                assert_eq!(p.image_vertex(ue.target), de.target, "{name}");
                assert_eq!(p.ptp().cell_of(ue.class).target, de.class, "{name}");
            }
        }
    }

    #[test]
    fn interior_stars_are_covered_with_cell_preimages() {
        let p = pair("two_rose", 3);
        let ptp = p.ptp();
        for u in p.up().vertex_ids().filter(|&u| p.up().depth(u) < 3) {
            let mut count: HashMap<EdgeId, u32> = HashMap::new();
            for e in p.up().out_edges(u) {
                *count.entry(p.image_edge(e)).or_default() += 1;
            }
            let v = p.image_vertex(u);
            assert_eq!(count.len(), p.down().out_edges(v).count(), "locally surjective");
            for (de, n) in count {
                let cls = p.down().edge(de).class;
                let cell = ptp.cells().iter().find(|c| c.target == cls).unwrap();
                assert_eq!(Some(n), cell.preimage_count().finite());
            }
        }
    }

    #[test]
    fn omega_is_truncated_per_slot() {
        let p = pair("free_product", 2);
        assert!(p.up().is_truncated());
        assert_eq!(p.up().out_edges(p.up().base()).count(), 16);
        assert_eq!(p.down().out_edges(p.down().base()).count(), 4);
    }

    #[test]
    fn busemann_along_ray() {
        let mut p = pair("two_rose", 4);
        let end = EndSpec::parse(p.ptp().downstairs(), "x+;x+").unwrap();
        let tau = p.realize_end(&end, 4).unwrap();
        let ball = p.down();
        for (i, &v) in tau.vertices.iter().enumerate() {
            assert_eq!(ball.busemann(&tau, v).unwrap(), i as i64);
        }
        let off = ball.children(ball.base()).find(|&c| !tau.vertices.contains(&c)).unwrap();
        assert_eq!(ball.busemann(&tau, off).unwrap(), -1);
        assert_eq!(ball.toward_end(&tau, off), ball.vertex(off).parent_edge.map(EdgeId::reverse));
    }

    #[test]
    fn geodesic_passes_through_lca() {
        let p = pair("bs24_to_bs12", 3);
        let ball = p.up();
        let leaves: Vec<_> = ball.vertex_ids().filter(|&v| ball.depth(v) == 3).collect();
        let (a, b) = (leaves[0], *leaves.last().unwrap());
        let g = ball.geodesic(a, b).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.vertices[3], ball.base());
        assert_eq!(ball.distance(a, b), 6);
    }

    #[test]
    fn budget_is_enforced() {
        let ptp = corpus::load_example("two_rose").unwrap().ptp();
        let err = expand_pair_with_budget(&ptp, TypeId(0), 6, 4, 1000).unwrap_err();
        assert_eq!(err, BallError::ResourceLimit { budget: 1000 });
    }

    #[test]
    fn lazy_and_eager_agree() {
        let ptp = corpus::load_example("ascending_synthetic").unwrap().ptp();
        let eager = expand_pair(&ptp, TypeId(0), 3, 4).unwrap();
        let again = expand_pair(&ptp, TypeId(0), 3, 4).unwrap();
        assert_eq!(eager, again);
    }
}
