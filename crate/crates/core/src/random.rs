//! Random valid tree-pairs for property tests.
//!
//! Every generated document is locally surjective and has at least one
//! collapsing cell. Each upstairs type carries exactly one cell per target
//! class, covering all of it, so no class is ever partially marked.

use std::collections::BTreeMap;

use rand::Rng;

use crate::end::{EndSpec, EndStep};
use crate::multiplicity::Multiplicity;
use crate::ptp::{CellDocument, EdgeClassDocument, GraphDocument, MorphismDocument, Ptp, PtpDocument, SourceDocument};
use crate::ptp::{ClassId, TypeId, TypedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub max_down_types: usize,
    pub max_up_per_down: usize,
    /// Bound on upstairs plus downstairs vertex types.
    pub max_total_types: usize,
    /// Bound on every class multiplicity, both trees.
    pub max_mult: u32,
    pub max_down_degree: u32,
    pub max_up_degree: u32,
    pub max_fiber: u32,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { max_down_types: 2, max_up_per_down: 2, max_total_types: 4, max_mult: 5, max_down_degree: 4, max_up_degree: 8, max_fiber: 2 }
    }
}

struct Pair {
    from: usize,
    to: usize,
    mult: u32,
    rev_mult: u32,
}

fn class_docs(pairs: &[Pair], types: &[String], letter: &str) -> Vec<EdgeClassDocument> {
    let mut out = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let fwd = format!("{letter}{i}+");
        let rev = format!("{letter}{i}-");
        out.push(EdgeClassDocument {
            id: fwd.clone(),
            from: types[p.from].clone(),
            to: types[p.to].clone(),
            reverse: rev.clone(),
            mult: Multiplicity::Finite(p.mult),
        });
        out.push(EdgeClassDocument {
            id: rev,
            from: types[p.to].clone(),
            to: types[p.from].clone(),
            reverse: fwd,
            mult: Multiplicity::Finite(p.rev_mult),
        });
    }
    out
}

fn degrees(pairs: &[Pair], n: usize) -> Vec<u32> {
    let mut deg = vec![0; n];
    for p in pairs {
        deg[p.from] += p.mult;
        deg[p.to] += p.rev_mult;
    }
    deg
}

fn try_generate<R: Rng>(rng: &mut R, params: &RandomParams, name: &str) -> Option<Ptp> {
    // Downstairs.
    let m = rng.random_range(1..=params.max_down_types.min(params.max_total_types / 2).max(1));
    let down_types: Vec<String> = (0..m).map(|i| format!("V{i}")).collect();
    let mut down: Vec<Pair> = Vec::new();
    let mult_cap = params.max_mult.min(params.max_down_degree - 1).max(1);
    for _ in 0..50 {
        let deg = degrees(&down, m);
        let connected = m == 1 || down.iter().any(|p| p.from != p.to);
        if connected && deg.iter().all(|&d| d >= 2) && rng.random_bool(0.5) {
            break;
        }
        let from = rng.random_range(0..m);
        let to = if m > 1 && !connected { 1 - from } else { rng.random_range(0..m) };
        let p = Pair { from, to, mult: rng.random_range(1..=mult_cap), rev_mult: rng.random_range(1..=mult_cap) };
        let mut deg = deg;
        deg[p.from] += p.mult;
        deg[p.to] += p.rev_mult;
        if deg.iter().all(|&d| d <= params.max_down_degree) {
            down.push(p);
        }
    }
    let deg = degrees(&down, m);
    if deg.iter().any(|&d| d < 2) || (m > 1 && down.iter().all(|p| p.from == p.to)) {
        return None;
    }
    let down_classes = class_docs(&down, &down_types, "x");

    // Upstairs types over each downstairs type.
    let mut up_types: Vec<String> = Vec::new();
    let mut over: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut vmap: Vec<usize> = Vec::new();
    for (v, list) in over.iter_mut().enumerate() {
        // Leave room for one up type over each remaining down type.
        let room = params.max_total_types.saturating_sub(m + up_types.len() + (m - v - 1)).max(1);
        for _ in 0..rng.random_range(1..=params.max_up_per_down.min(room)) {
            list.push(up_types.len());
            up_types.push(format!("A{}", up_types.len()));
            vmap.push(v);
        }
    }

    // Upstairs class pairs, each over a downstairs class and its reverse.
    // (up type, down class index) -> sources (up class index, fiber).
    let mut cells: BTreeMap<(usize, usize), Vec<(usize, u32)>> = BTreeMap::new();
    let mut up: Vec<Pair> = Vec::new();
    let down_mult = |c: usize| match down_classes[c].mult {
        Multiplicity::Finite(n) => n,
        Multiplicity::Omega => unreachable!(),
    };
    let down_from = |c: usize| if c % 2 == 0 { down[c / 2].from } else { down[c / 2].to };
    let down_to = |c: usize| if c % 2 == 0 { down[c / 2].to } else { down[c / 2].from };
    let mut add_pair = |rng: &mut R, x: usize, c: usize, cells: &mut BTreeMap<(usize, usize), Vec<(usize, u32)>>| {
        let y = over[down_to(c)][rng.random_range(0..over[down_to(c)].len())];
        let rc = c ^ 1;
        let fiber = |rng: &mut R, k: u32| rng.random_range(1..=params.max_fiber.min(params.max_mult / k).max(1));
        let f1 = fiber(rng, down_mult(c));
        let f2 = fiber(rng, down_mult(rc));
        let idx = up.len();
        up.push(Pair { from: x, to: y, mult: down_mult(c) * f1, rev_mult: down_mult(rc) * f2 });
        cells.entry((x, c)).or_default().push((2 * idx, f1));
        cells.entry((y, rc)).or_default().push((2 * idx + 1, f2));
    };
    for x in 0..up_types.len() {
        for c in 0..down_classes.len() {
            if down_from(c) == vmap[x] && !cells.contains_key(&(x, c)) {
                add_pair(rng, x, c, &mut cells);
            }
        }
    }
    if rng.random_bool(0.3) {
        let c = rng.random_range(0..down_classes.len());
        let xs = &over[down_from(c)];
        let x = xs[rng.random_range(0..xs.len())];
        add_pair(rng, x, c, &mut cells);
    }
    if degrees(&up, up_types.len()).iter().any(|&d| d > params.max_up_degree) {
        return None;
    }
    if !cells.values().any(|s| s.iter().map(|&(_, f)| f).sum::<u32>() >= 2) {
        return None;
    }
    let up_classes = class_docs(&up, &up_types, "s");

    let doc = PtpDocument {
        name: name.to_string(),
        upstairs: GraphDocument { vertex_types: up_types.clone(), edge_classes: up_classes.clone() },
        downstairs: GraphDocument { vertex_types: down_types.clone(), edge_classes: down_classes.clone() },
        q: MorphismDocument {
            vertex_map: up_types.iter().enumerate().map(|(i, t)| (t.clone(), down_types[vmap[i]].clone())).collect(),
            cells: cells
                .iter()
                .map(|(&(x, c), sources)| CellDocument {
                    at: up_types[x].clone(),
                    target: down_classes[c].id.clone(),
                    coverage: down_classes[c].mult,
                    sources: sources
                        .iter()
                        .map(|&(s, f)| SourceDocument { class: up_classes[s].id.clone(), fiber: Multiplicity::Finite(f) })
                        .collect(),
                })
                .collect(),
        },
    };
    Ptp::from_document(&doc).ok()
}

/// A random valid, locally surjective, non-injective tree-pair.
pub fn random_ptp<R: Rng>(rng: &mut R, params: &RandomParams, name: &str) -> Ptp {
    loop {
        if let Some(p) = try_generate(rng, params, name) {
            return p;
        }
    }
}

/// A random eventually periodic end starting at a vertex of type `base`,
/// with instance indices below 3. `None` if none turned up after many tries.
pub fn random_end<R: Rng>(rng: &mut R, graph: &TypedGraph, base: TypeId, max_prefix: usize, max_cycle: usize) -> Option<EndSpec> {
    for _ in 0..10_000 {
        let p = rng.random_range(0..=max_prefix);
        let k = rng.random_range(1..=max_cycle);
        let mut at = base;
        let mut steps = Vec::with_capacity(p + k);
        for _ in 0..p + k {
            let star: Vec<ClassId> = graph.star(at).collect();
            let class = star[rng.random_range(0..star.len())];
            let index = rng.random_range(0..graph.class(class).mult.capped(3).min(3));
            steps.push(EndStep { class, index });
            at = graph.class(class).to;
        }
        let cycle = steps.split_off(p);
        if let Ok(end) = EndSpec::new(graph, steps, cycle) {
            if end.base_type == base {
                return Some(end);
            }
        }
    }
    None
}
