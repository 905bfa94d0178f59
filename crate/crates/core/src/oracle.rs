//! Brute-force checks on concrete balls.
//!
//! Nothing here reads the cells of the document: collapsing pairs are found
//! by scanning the concrete star map of the expanded up ball, and facing is
//! decided by tree geometry. With omega classes truncated, a negative answer
//! (no pair, an unfaced cone) is only as good as the cap.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ball::{Ball, BallError, EdgeId, MappedBallPair, RayInstance, VertexId};
use crate::ptp::{ClassId, Ptp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcretePair {
    pub apex: VertexId,
    /// Up edges at the apex sharing one image, in out-edge order.
    pub edges: Vec<EdgeId>,
    pub image: EdgeId,
}

/// Collapsing pairs at every expanded up vertex, grouped by image edge.
pub fn concrete_collapsing_pairs(pair: &MappedBallPair) -> Vec<ConcretePair> {
    let up = pair.up();
    let mut out = Vec::new();
    for u in up.vertex_ids().filter(|&u| up.is_expanded(u)) {
        let mut groups: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
        for e in up.out_edges(u) {
            groups.entry(pair.image_edge(e)).or_default().push(e);
        }
        for (image, edges) in groups {
            if edges.len() >= 2 {
                out.push(ConcretePair { apex: u, edges, image });
            }
        }
    }
    out
}

/// Down edges that are images of concrete collapsing pairs.
pub fn marked_instances(pair: &MappedBallPair) -> BTreeSet<EdgeId> {
    concrete_collapsing_pairs(pair).into_iter().map(|p| p.image).collect()
}

/// Down classes all of whose instances at the base are images of collapsing
/// pairs, read off the concrete star of a fresh vertex of each up type.
pub fn star_marked_classes(ptp: &Ptp, omega_cap: u32) -> BTreeSet<ClassId> {
    let mut out = BTreeSet::new();
    for t in ptp.upstairs().type_ids() {
        let mut pair = MappedBallPair::lazy(ptp, t, omega_cap, usize::MAX);
        pair.expand_up(pair.up().base()).expect("a single star fits any budget");
        let images: BTreeSet<EdgeId> = concrete_collapsing_pairs(&pair).into_iter().map(|p| p.image).collect();
        let down = pair.down();
        let mut by_class: BTreeMap<ClassId, bool> = BTreeMap::new();
        for e in down.out_edges(down.base()) {
            *by_class.entry(down.edge(e).class).or_insert(true) &= images.contains(&e);
        }
        out.extend(by_class.into_iter().filter(|&(_, all)| all).map(|(c, _)| c));
    }
    out
}

/// Concrete marks plus every edge instance of the down ball whose class is in
/// [`star_marked_classes`].
///
/// Every up type occurs over every down vertex of its image type, but the up
/// ball only reaches some of them. A class collapsed in full at a fresh star
/// is collapsed in full over every vertex, so this recovers the marks of the
/// missing preimages. Partially collapsed classes are left out: which of
/// their instances are marked depends on stabilizers the ball cannot see.
pub fn saturated_marks(pair: &MappedBallPair) -> BTreeSet<EdgeId> {
    let full = star_marked_classes(pair.ptp(), pair.omega_cap());
    let down = pair.down();
    let mut marked = marked_instances(pair);
    for w in down.vertex_ids() {
        marked.extend(down.out_edges(w).filter(|&e| full.contains(&down.edge(e).class)));
    }
    marked
}

/// Whether `e` points toward `u`, i.e. the geodesic from the source of `e`
/// to `u` starts with `e`.
pub fn points_toward(ball: &Ball, e: EdgeId, u: VertexId) -> bool {
    let edge = ball.edge(e);
    if e.is_forward() {
        ball.is_ancestor_or_self(edge.target, u)
    } else {
        !ball.is_ancestor_or_self(edge.source, u)
    }
}

/// Literal version of [`points_toward`], through an explicit geodesic.
pub fn points_toward_by_geodesic(ball: &Ball, e: EdgeId, u: VertexId) -> bool {
    let path = ball.geodesic(ball.edge(e).source, u).expect("vertices in ball");
    path.edges.first() == Some(&e)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub vertex: VertexId,
    pub faced: bool,
    /// A marked edge pointing toward the vertex.
    pub witness: Option<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeReport {
    pub depth: u32,
    pub marked_instances: usize,
    pub cones: Vec<Cone>,
    pub truncated: bool,
}

impl ConeReport {
    pub fn unfaced(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.cones.iter().filter(|c| !c.faced).map(|c| c.vertex)
    }

    pub fn unfaced_count(&self) -> usize {
        self.unfaced().count()
    }

    pub fn all_faced(&self) -> bool {
        self.cones.iter().all(|c| c.faced)
    }
}

/// Facing status of the given down vertices.
///
/// With `cone` set, marked edges whose source lies below the vertex are
/// ignored: the vertex then stands for the cone of ends through it, and a
/// marked edge faces the whole cone only when it lies outside. This is the
/// same as facing the vertex inside the ball truncated at its depth.
fn face_vertices(
    pair: &MappedBallPair,
    marked: &BTreeSet<EdgeId>,
    vertices: impl Iterator<Item = VertexId>,
    cone: bool,
) -> Vec<Cone> {
    let ball = pair.down();
    // A marked edge pointing away from the base faces exactly the vertices
    // below (or at) its target; one pointing toward the base faces every
    // vertex not below (or at) its source.
    let upward: Vec<EdgeId> = marked.iter().copied().filter(|e| !e.is_forward()).collect();
    let mut down_at: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
    let mut up_at = vec![0usize; ball.len()];
    for &e in marked {
        if e.is_forward() {
            down_at.entry(ball.edge(e).target).or_insert(e);
        } else {
            up_at[ball.edge(e).source.idx()] += 1;
        }
    }
    // Upward marks with source strictly below each vertex. Children are
    // created after their parents, so a reverse sweep accumulates subtrees.
    let mut below = vec![0usize; ball.len()];
    for v in ball.vertex_ids().collect::<Vec<_>>().into_iter().rev() {
        if let Some(p) = ball.parent(v) {
            below[p.idx()] += below[v.idx()] + up_at[v.idx()];
        }
    }
    vertices
        .map(|u| {
            let mut witness = None;
            let mut on_chain = 0;
            let mut x = Some(u);
            while let Some(v) = x {
                if witness.is_none() {
                    witness = down_at.get(&v).copied();
                }
                on_chain += up_at[v.idx()];
                x = ball.parent(v);
            }
            let excluded = if cone { below[u.idx()] } else { 0 };
            if witness.is_none() && on_chain + excluded < upward.len() {
                witness = upward.iter().copied().find(|&e| {
                    let s = ball.edge(e).source;
                    !ball.is_ancestor_or_self(s, u) && !(cone && ball.is_ancestor_or_self(u, s))
                });
            }
            Cone { vertex: u, faced: witness.is_some(), witness }
        })
        .collect()
}

/// Facing status of the cones of ends through the down vertices at `depth`.
pub fn brute_face_scan(pair: &MappedBallPair, depth: u32) -> ConeReport {
    brute_face_scan_with(pair, depth, &marked_instances(pair))
}

/// [`brute_face_scan`] against an explicit set of marked down edges.
pub fn brute_face_scan_with(pair: &MappedBallPair, depth: u32, marked: &BTreeSet<EdgeId>) -> ConeReport {
    let ball = pair.down();
    let cones = face_vertices(pair, marked, ball.vertex_ids().filter(|&v| ball.depth(v) == depth), true);
    ConeReport { depth, marked_instances: marked.len(), cones, truncated: pair.up().is_truncated() }
}

/// Facing status of every down vertex of depth at most `depth`, counting
/// every marked edge of the ball.
pub fn interior_face_scan(pair: &MappedBallPair, depth: u32) -> ConeReport {
    interior_face_scan_with(pair, depth, &marked_instances(pair))
}

pub fn interior_face_scan_with(pair: &MappedBallPair, depth: u32, marked: &BTreeSet<EdgeId>) -> ConeReport {
    let ball = pair.down();
    let cones = face_vertices(pair, marked, ball.vertex_ids().filter(|&v| ball.depth(v) <= depth), false);
    ConeReport { depth, marked_instances: marked.len(), cones, truncated: pair.up().is_truncated() }
}

/// Every-vertex scan up to `depth` with saturated marks, after growing the
/// down ball `margin` levels past `depth`.
///
/// A vertex near the boundary may be faced only by marks further out, e.g.
/// along a periodic unfaced end the facing edge can sit a whole period
/// ahead. The up ball is left alone: saturated marks need only the down ball.
pub fn interior_face_scan_saturated(pair: &mut MappedBallPair, depth: u32, margin: u32) -> Result<ConeReport, BallError> {
    pair.expand_down_to(depth + margin)?;
    let marked = saturated_marks(pair);
    Ok(interior_face_scan_with(pair, depth, &marked))
}

/// Whether some concrete marked edge points toward the end of `tau`.
pub fn end_faced_in_ball(pair: &MappedBallPair, tau: &RayInstance) -> Result<Option<EdgeId>, BallError> {
    let ball = pair.down();
    ball.check_descending(tau)?;
    Ok(marked_instances(pair).into_iter().find(|&e| {
        let edge = ball.edge(e);
        // Busemann values are exact away from the subtree below the tip.
        let inside = |v| !ball.is_ancestor_or_self(tau.tip(), v);
        inside(edge.source)
            && inside(edge.target)
            && ball.busemann_unchecked(tau, edge.target) == ball.busemann_unchecked(tau, edge.source) + 1
    }))
}

/// Brute-force Busemann value `t - d(tau(t), p)` at `t = len(tau)`.
pub fn busemann_limit(ball: &Ball, tau: &RayInstance, p: VertexId, t: usize) -> i64 {
    t as i64 - ball.distance(tau.vertices[t], p) as i64
}

/// Connected components of the up ball restricted to preimages of `HB_r`.
fn horoball_components(pair: &MappedBallPair, tau: &RayInstance, r: i64) -> Result<BTreeMap<VertexId, usize>, BallError> {
    let inside: BTreeSet<VertexId> = pair.up_in_horoball(tau, r)?.into_iter().collect();
    let up = pair.up();
    let mut comp = BTreeMap::new();
    let mut next = 0;
    for &s in &inside {
        if comp.contains_key(&s) {
            continue;
        }
        comp.insert(s, next);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in up.out_edges(v) {
                let w = up.edge(e).target;
                if inside.contains(&w) && !comp.contains_key(&w) {
                    comp.insert(w, next);
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    Ok(comp)
}

/// True when the up-ball subgraph on preimages of `HB_r(tau)` is connected.
/// The empty subgraph counts as connected.
pub fn brute_connectivity_check(pair: &MappedBallPair, tau: &RayInstance, r: i64) -> Result<bool, BallError> {
    let comp = horoball_components(pair, tau, r)?;
    Ok(comp.values().all(|&c| c == 0))
}

/// Whether `a` and `b` are joined inside the preimage of `HB_r(tau)`.
pub fn probes_connected(pair: &MappedBallPair, tau: &RayInstance, r: i64, a: VertexId, b: VertexId) -> Result<bool, BallError> {
    let comp = horoball_components(pair, tau, r)?;
    Ok(matches!((comp.get(&a), comp.get(&b)), (Some(x), Some(y)) if x == y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::expand_pair;
    use crate::corpus;
    use crate::end::EndSpec;
    use crate::ptp::TypeId;

    fn pair(name: &str, radius: u32) -> MappedBallPair {
        let ptp = corpus::load_example(name).unwrap().ptp();
        expand_pair(&ptp, TypeId(0), radius, 4).unwrap()
    }

    #[test]
    fn two_rose_every_cone_faced() {
        let p = pair("two_rose", 4);
        let report = brute_face_scan(&p, 4);
        assert_eq!(report.cones.len(), 108);
        assert!(report.all_faced());
    }

    #[test]
    fn ascending_has_one_unfaced_cone() {
        let mut p = pair("ascending_synthetic", 6);
        let end = EndSpec::parse(p.ptp().downstairs(), ";u+").unwrap();
        let tau = p.realize_end(&end, 6).unwrap();
        for d in 3..=6 {
            let report = brute_face_scan(&p, d);
            let unfaced: Vec<_> = report.unfaced().collect();
            assert_eq!(unfaced, vec![tau.vertices[d as usize]], "depth {d}");
        }
    }

    #[test]
    fn line_identity_has_no_marks() {
        let p = pair("line_identity", 5);
        let report = brute_face_scan(&p, 5);
        assert_eq!(report.marked_instances, 0);
        assert_eq!(report.unfaced_count(), 2);
    }

    #[test]
    fn fast_facing_matches_geodesics() {
        let p = pair("bs24_to_bs12", 4);
        let ball = p.down();
        for e in ball.edge_ids() {
            for u in ball.vertex_ids() {
                assert_eq!(points_toward(ball, e, u), points_toward_by_geodesic(ball, e, u));
            }
        }
        let marked = marked_instances(&p);
        for cone in [false, true] {
            for c in face_vertices(&p, &marked, ball.vertex_ids(), cone) {
                let slow = marked.iter().any(|&e| {
                    points_toward_by_geodesic(ball, e, c.vertex)
                        && !(cone && ball.is_ancestor_or_self(c.vertex, ball.edge(e).source))
                });
                assert_eq!(c.faced, slow);
                if let Some(w) = c.witness {
                    assert!(marked.contains(&w) && points_toward_by_geodesic(ball, w, c.vertex));
                }
            }
        }
    }

    #[test]
    fn horoball_preimage_connected_for_unfaced_end() {
        let mut p = pair("ascending_synthetic", 6);
        let end = EndSpec::parse(p.ptp().downstairs(), ";u+").unwrap();
        let tau = p.realize_end(&end, 6).unwrap();
        for r in -2..=2 {
            assert!(brute_connectivity_check(&p, &tau, r).unwrap());
        }
        assert!(brute_connectivity_check(&p, &tau, -100).unwrap());
    }
}
