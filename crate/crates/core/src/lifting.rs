//! Lifting downstairs rays through the ball map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{EdgeId, MappedBallPair, RayInstance, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("start edge does not map onto the first edge of the ray")]
    NotOverRay,
    #[error("start vertex does not map onto the first vertex of the ray")]
    NotOverStart,
    #[error("lift depth {depth} exceeds the ray length {len}")]
    TooDeep { depth: usize, len: usize },
    #[error("upstairs vertex {0} lies outside the expanded ball")]
    OutsideBall(u32),
    #[error("no continuation at step {step}: q is not locally surjective here")]
    NotLocallySurjective { step: usize },
}

/// Where the lifts begin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftStart {
    /// A fixed up edge over the first ray edge.
    Edge(EdgeId),
    /// Every up edge at this vertex over the first ray edge.
    Vertex(VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftTree {
    /// Up edges over the first ray edge that begin a lift.
    pub roots: Vec<EdgeId>,
    /// `counts[k]` is the number of lifts of the first `k` ray edges.
    pub counts: Vec<usize>,
    /// `fibers[k][j]`: number of continuations of the `j`-th lift of length
    /// `k` over ray edge `k`.
    pub fibers: Vec<Vec<u32>>,
    /// All lifts of the requested depth, in breadth-first instance order.
    pub lifts: Vec<RayInstance>,
}

impl LiftTree {
    /// True when no lift ever branches.
    pub fn is_unbranched(&self) -> bool {
        self.fibers.iter().flatten().all(|&f| f == 1)
    }
}

/// Up edges at `u` mapping onto the down edge `e`, in out-edge order.
pub fn edges_over(pair: &MappedBallPair, u: VertexId, e: EdgeId) -> Result<Vec<EdgeId>, LiftError> {
    if !pair.up().is_expanded(u) {
        return Err(LiftError::OutsideBall(u.0));
    }
    Ok(pair.up().out_edges(u).filter(|&x| pair.image_edge(x) == e).collect())
}

/// Enumerates every lift of the first `depth` edges of the down path `ray`.
pub fn lift_ray(pair: &MappedBallPair, ray: &RayInstance, start: LiftStart, depth: usize) -> Result<LiftTree, LiftError> {
    if depth > ray.len() {
        return Err(LiftError::TooDeep { depth, len: ray.len() });
    }
    let up = pair.up();
    let (root_vertex, roots) = match start {
        LiftStart::Edge(e) => {
            if ray.edges.first() != Some(&pair.image_edge(e)) {
                return Err(LiftError::NotOverRay);
            }
            (up.edge(e).source, vec![e])
        }
        LiftStart::Vertex(u) => {
            if !up.contains(u) {
                return Err(LiftError::OutsideBall(u.0));
            }
            if pair.image_vertex(u) != ray.vertices[0] {
                return Err(LiftError::NotOverStart);
            }
            let roots = match ray.edges.first() {
                Some(&e) => edges_over(pair, u, e)?,
                None => Vec::new(),
            };
            (u, roots)
        }
    };

    let mut lifts = vec![RayInstance::start(root_vertex)];
    let mut counts = vec![1];
    let mut fibers = Vec::new();
    for step in 0..depth {
        let mut next = Vec::new();
        let mut step_fibers = Vec::with_capacity(lifts.len());
        for lift in &lifts {
            let cont = if step == 0 {
                roots.clone()
            } else {
                edges_over(pair, lift.tip(), ray.edges[step])?
            };
            if cont.is_empty() {
                return Err(LiftError::NotLocallySurjective { step });
            }
            step_fibers.push(cont.len() as u32);
            for e in cont {
                let mut l = lift.clone();
                l.push(up, e);
                next.push(l);
            }
        }
        fibers.push(step_fibers);
        counts.push(next.len());
        lifts = next;
    }
    Ok(LiftTree { roots, counts, fibers, lifts })
}

/// Ball-level shadow of the singleton criterion: every lift, from every
/// expanded preimage of every down vertex within `sample_radius`, of the
/// geodesic toward the tip of `tau` is unbranched.
///
/// Lifts are truncated so they stay inside the expanded part of the up ball.
pub fn lifts_toward_end_unbranched(
    pair: &MappedBallPair,
    tau: &RayInstance,
    sample_radius: u32,
) -> Result<bool, LiftError> {
    let up = pair.up();
    let down = pair.down();
    let tip = tau.tip();
    let up_radius = up.radius();
    for u in up.vertex_ids() {
        let p = pair.image_vertex(u);
        if down.depth(p) > sample_radius || !up.is_expanded(u) {
            continue;
        }
        let path = down.geodesic(p, tip).expect("both vertices are in the ball");
        let room = up_radius.saturating_sub(up.depth(u)) as usize;
        let len = path.len().min(room);
        if len == 0 {
            continue;
        }
        match lift_ray(pair, &path, LiftStart::Vertex(u), len) {
            Ok(tree) if !tree.is_unbranched() => return Ok(false),
            Ok(_) | Err(LiftError::OutsideBall(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}
