//! Disconnection witnesses for faced ends.
//!
//! If a collapsing pair `(e1, e2)` at an upstairs vertex `a` faces `E`, lift the
//! downstairs ray from its image edge toward `E` starting once with `e1` and
//! once with `e2`. Both lifts are geodesic, so the upstairs path between any
//! vertex of one and any vertex of the other runs through `a`. Choosing the
//! pair far behind the horoball `HB_{-lag}` and probes whose images lie in
//! `HB_0` gives two points of the horoball preimage that cannot be joined
//! inside the preimage of `HB_{-lag}`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{BallError, EdgeId, MappedBallPair, RayInstance, VertexId};
use crate::classify::{end_faced, marked_classes, FacingError, MarkStatus};
use crate::end::EndSpec;
use crate::local::applicability_check;
use crate::ptp::{ClassId, Ptp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("the hypotheses of the theorem do not hold: {0}")]
    NotApplicable(String),
    #[error("the end is not faced by any collapsing pair, so no witness exists")]
    NotFaced,
    #[error(transparent)]
    Facing(#[from] FacingError),
    #[error("ball too shallow: depth {required} or more is needed")]
    TooShallow { required: usize },
    #[error("no collapsing pair was found over the translated edge")]
    NoCollapsingPair,
    #[error(transparent)]
    Ball(#[from] BallError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisconnectionWitness {
    /// The collapsing pair, two up edges leaving the apex with the same image.
    pub pair: [EdgeId; 2],
    pub apex: VertexId,
    /// Down edge both pair edges map to; it points toward the end.
    pub image_edge: EdgeId,
    /// Canonical lifts of the ray from `image_edge` toward the end.
    pub rays: [RayInstance; 2],
    pub probes: [VertexId; 2],
    pub lag: u32,
    pub apex_busemann: i64,
    pub probe_busemann: [i64; 2],
    pub verified: bool,
}

/// A witness together with the balls and reference ray it lives in.
#[derive(Debug, Clone)]
pub struct WitnessResult {
    pub pair: MappedBallPair,
    pub tau: RayInstance,
    pub witness: DisconnectionWitness,
}

/// Pigeonhole bound: along any ray a class repeats within this many steps.
pub fn repeat_bound(ptp: &Ptp) -> usize {
    ptp.downstairs().classes.len() + 1
}

/// A fully marked down edge pointing toward the end of `tau` whose source
/// has Busemann value below `r`.
///
/// The first such edge in breadth-first order is walked toward the end until
/// its class word repeats; the periodic block is then replayed backwards as
/// often as needed, which moves a translate of the edge arbitrarily far
/// outside the horoball.
pub fn translated_marked_edge(pair: &mut MappedBallPair, tau: &RayInstance, r: i64) -> Result<EdgeId, WitnessError> {
    pair.down().check_descending(tau)?;
    let ptp = pair.ptp().clone();
    let down_graph = ptp.downstairs();
    let marks = marked_classes(&ptp);
    let bound = repeat_bound(&ptp);
    let required = r.unsigned_abs() as usize + bound + 1;
    if tau.len() < required {
        return Err(WitnessError::TooShallow { required });
    }
    let fully = |c: ClassId| marks.status(c) == MarkStatus::FullyMarked;

    // Breadth-first search for a marked edge toward the end.
    let search_radius = (tau.len() - 1) as u32;
    let mut queue = VecDeque::from([pair.down().base()]);
    let mut found = None;
    while let Some(p) = queue.pop_front() {
        if let Some(e) = pair.down().toward_end(tau, p) {
            if fully(pair.down().edge(e).class) {
                found = Some(e);
                break;
            }
        }
        if pair.down().depth(p) < search_radius {
            pair.expand_down(p)?;
            queue.extend(pair.down().children(p));
        }
    }
    let e = found.ok_or(WitnessError::NotFaced)?;

    // Walk toward the end until a class repeats.
    let mut walk = vec![e];
    let (i, j) = loop {
        let last = *walk.last().unwrap();
        let c = pair.down().edge(last).class;
        if let Some(i) = walk[..walk.len() - 1].iter().position(|&x| pair.down().edge(x).class == c) {
            break (i, walk.len() - 1);
        }
        let head = pair.down().edge(last).target;
        match pair.down().toward_end(tau, head) {
            Some(next) => walk.push(next),
            None => return Err(WitnessError::TooShallow { required: tau.len() + bound }),
        }
    };
    let ball = pair.down();
    let tail_e = ball.edge(e).source;
    if ball.busemann(tau, tail_e)? < r {
        return Ok(e);
    }
    let period = j - i;
    let anchor = ball.edge(walk[i]).source;
    let beta_anchor = ball.busemann(tau, anchor)?;
    // Smallest k with beta_anchor - i - k * period < r.
    let need = beta_anchor - i as i64 - r + 1;
    let period = period as i64;
    let k = ((need.max(0) + period - 1) / period) as usize;

    // Classes to replay backwards, nearest to the anchor first.
    let classes: Vec<ClassId> = walk.iter().map(|&x| pair.down().edge(x).class).collect();
    let mut word: Vec<ClassId> = Vec::new();
    for _ in 0..k {
        word.extend(classes[i..j].iter().rev());
    }
    word.extend(classes[..i].iter().rev());

    let mut y = anchor;
    let mut forward = walk[i];
    for c in word {
        pair.expand_down(y)?;
        let rev = down_graph.reverse(c);
        let back = pair
            .down()
            .out_edges(y)
            .filter(|&x| pair.down().edge(x).class == rev && x != forward)
            .min_by_key(|&x| pair.down().edge(x).index)
            .ok_or(WitnessError::TooShallow { required })?;
        forward = back.reverse();
        y = pair.down().edge(back).target;
    }
    Ok(forward)
}

/// The down path that starts with `e` and then keeps following the edges
/// toward the end of `tau` up to its tip.
pub fn ray_toward_end(pair: &MappedBallPair, tau: &RayInstance, e: EdgeId) -> RayInstance {
    let ball = pair.down();
    let mut path = RayInstance::start(ball.edge(e).source);
    path.push(ball, e);
    while let Some(next) = ball.toward_end(tau, path.tip()) {
        path.push(ball, next);
    }
    path
}

/// Up vertex over the source of `e` with at least two up edges over `e`,
/// searched depth-first over lifts of the down geodesic from the base.
fn find_apex(pair: &mut MappedBallPair, e: EdgeId) -> Result<(VertexId, [EdgeId; 2]), WitnessError> {
    let target = pair.down().edge(e).source;
    let path = pair.down().geodesic(pair.down().base(), target)?;
    let mut stack = vec![(pair.up().base(), 0usize)];
    while let Some((u, step)) = stack.pop() {
        pair.expand_up(u)?;
        if step == path.len() {
            let over: Vec<EdgeId> = pair.up().out_edges(u).filter(|&x| pair.image_edge(x) == e).collect();
            if over.len() >= 2 {
                return Ok((u, [over[0], over[1]]));
            }
            continue;
        }
        let want = path.edges[step];
        let next: Vec<VertexId> = pair
            .up()
            .out_edges(u)
            .filter(|&x| pair.image_edge(x) == want)
            .map(|x| pair.up().edge(x).target)
            .collect();
        // Reverse so the lowest edge is explored first.
        stack.extend(next.into_iter().rev().map(|v| (v, step + 1)));
    }
    Err(WitnessError::NoCollapsingPair)
}

/// Lift of `ray` starting with the up edge `first`, taking the first
/// preimage at every later step.
fn canonical_lift(pair: &mut MappedBallPair, ray: &RayInstance, first: EdgeId) -> Result<RayInstance, WitnessError> {
    let mut lift = RayInstance::start(pair.up().edge(first).source);
    lift.push(pair.up(), first);
    for &d in &ray.edges[1..] {
        let u = lift.tip();
        pair.expand_up(u)?;
        let next = pair
            .up()
            .out_edges(u)
            .find(|&x| pair.image_edge(x) == d)
            .ok_or(WitnessError::Facing(FacingError::NotLocallySurjective))?;
        lift.push(pair.up(), next);
    }
    Ok(lift)
}

/// Builds and checks a disconnection witness for `end` at the given lag,
/// using a reference ray of `depth` edges.
pub fn disconnection_witness(
    ptp: &Ptp,
    end: &EndSpec,
    lag: u32,
    depth: usize,
    omega_cap: u32,
    budget: usize,
) -> Result<WitnessResult, WitnessError> {
    let app = applicability_check(ptp);
    if !app.main_theorem_applies {
        return Err(WitnessError::NotApplicable(app.failures().join("; ")));
    }
    if end_faced(ptp, end)?.is_none() {
        return Err(WitnessError::NotFaced);
    }
    let base_type = ptp
        .preimage_types(end.base_type)
        .next()
        .ok_or_else(|| BallError::NoPreimage(ptp.downstairs().type_name(end.base_type).to_string()))?;
    let mut pair = MappedBallPair::lazy(ptp, base_type, omega_cap, budget);
    let tau = pair.realize_end(end, depth)?;
    let r = -(lag as i64);
    let e = translated_marked_edge(&mut pair, &tau, r)?;
    let (apex, edges) = find_apex(&mut pair, e)?;
    let gamma = ray_toward_end(&pair, &tau, e);
    let mut rays = Vec::with_capacity(2);
    let mut probes = Vec::with_capacity(2);
    let mut probe_busemann = Vec::with_capacity(2);
    for first in edges {
        let lift = canonical_lift(&mut pair, &gamma, first)?;
        let (probe, beta) = lift
            .vertices
            .iter()
            .map(|&v| (v, pair.down().busemann_unchecked(&tau, pair.image_vertex(v))))
            .find(|&(_, b)| b >= 0)
            .ok_or(WitnessError::TooShallow { required: depth + 1 })?;
        rays.push(lift);
        probes.push(probe);
        probe_busemann.push(beta);
    }
    let apex_busemann = pair.down().busemann(&tau, pair.image_vertex(apex))?;
    let path = pair.up().geodesic(probes[0], probes[1])?;
    let verified = apex_busemann < r && path.vertices.contains(&apex);
    let witness = DisconnectionWitness {
        pair: edges,
        apex,
        image_edge: e,
        rays: [rays.remove(0), rays.remove(0)],
        probes: [probes[0], probes[1]],
        lag,
        apex_busemann,
        probe_busemann: [probe_busemann[0], probe_busemann[1]],
        verified,
    };
    Ok(WitnessResult { pair, tau, witness })
}

/// Recomputes every property of a witness from the balls alone.
pub fn verify_witness(pair: &MappedBallPair, w: &DisconnectionWitness, tau: &RayInstance) -> Result<bool, WitnessError> {
    let up = pair.up();
    let down = pair.down();
    down.check_descending(tau)?;
    for e in w.pair.iter().chain(w.rays.iter().flat_map(|r| &r.edges)) {
        if e.idx() >= up.edge_count() {
            return Err(BallError::UnknownVertex(u32::MAX).into());
        }
    }
    for v in w.probes.iter().chain([&w.apex]).chain(w.rays.iter().flat_map(|r| &r.vertices)) {
        if !up.contains(*v) {
            return Err(BallError::UnknownVertex(v.0).into());
        }
    }
    let beta = |u: VertexId| down.busemann_unchecked(tau, pair.image_vertex(u));

    let [e1, e2] = w.pair;
    let mut ok = e1 != e2
        && up.edge(e1).source == w.apex
        && up.edge(e2).source == w.apex
        && pair.image_edge(e1) == w.image_edge
        && pair.image_edge(e2) == w.image_edge;
    for (k, ray) in w.rays.iter().enumerate() {
        ok &= ray.edges.first() == Some(&w.pair[k]);
        ok &= ray.vertices.len() == ray.edges.len() + 1;
        for (i, &e) in ray.edges.iter().enumerate() {
            ok &= up.edge(e).source == ray.vertices[i] && up.edge(e).target == ray.vertices[i + 1];
            if i > 0 {
                ok &= e != ray.edges[i - 1].reverse();
            }
            // Images step toward the end.
            ok &= beta(ray.vertices[i + 1]) == beta(ray.vertices[i]) + 1;
        }
        ok &= ray.vertices.contains(&w.probes[k]) && beta(w.probes[k]) >= 0;
    }
    ok &= beta(w.apex) < -(w.lag as i64);
    let path = up.geodesic(w.probes[0], w.probes[1])?;
    ok &= path.vertices.contains(&w.apex);
    Ok(ok)
}
