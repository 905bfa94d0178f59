//! Graphviz export.
//!
//! Vertices are labelled `type@depth`. Marked edges are red, a designated
//! spine is blue, and the map between the two balls is drawn as dashed links.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::ball::{Ball, EdgeId, MappedBallPair, VertexId};
use crate::classify::EndAnalysis;
use crate::lifting::LiftTree;
use crate::ptp::{Ptp, TypedGraph};
use crate::witness::WitnessResult;

/// Highlighting for one ball.
#[derive(Debug, Clone, Default)]
pub struct Highlight {
    /// Directed edge instances drawn red, in their own direction.
    pub marked: BTreeSet<EdgeId>,
    /// Edges drawn blue.
    pub spine: BTreeSet<EdgeId>,
    /// Vertices drawn filled.
    pub vertices: BTreeSet<VertexId>,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write_ball(out: &mut String, ball: &Ball, graph: &TypedGraph, prefix: &str, hl: &Highlight, only: Option<&BTreeSet<VertexId>>) {
    let keep = |v: VertexId| only.is_none_or(|s| s.contains(&v));
    for v in ball.vertex_ids().filter(|&v| keep(v)) {
        let label = format!("{}@{}", graph.type_name(ball.vertex(v).ty), ball.depth(v));
        let style = if hl.vertices.contains(&v) { ", style=filled, fillcolor=gold" } else { "" };
        writeln!(out, "    {prefix}{} [label={}{style}];", v.0, quote(&label)).unwrap();
    }
    for e in ball.edge_ids().filter(|e| e.is_forward()) {
        let edge = ball.edge(e);
        if !keep(edge.source) || !keep(edge.target) {
            continue;
        }
        let rev = e.reverse();
        let label = format!("{}#{}", graph.class_name(edge.class), edge.index);
        let mut attrs = vec![format!("label={}", quote(&label))];
        match (hl.marked.contains(&e), hl.marked.contains(&rev)) {
            (true, true) => attrs.push("dir=both, color=red".into()),
            (true, false) => attrs.push("color=red".into()),
            (false, true) => attrs.push("dir=back, color=red".into()),
            (false, false) => attrs.push("dir=none".into()),
        }
        if hl.spine.contains(&e) || hl.spine.contains(&rev) {
            attrs.push("penwidth=2, fontcolor=blue".into());
            if !hl.marked.contains(&e) && !hl.marked.contains(&rev) {
                attrs.push("color=blue".into());
            }
        }
        writeln!(out, "    {prefix}{} -> {prefix}{} [{}];", edge.source.0, edge.target.0, attrs.join(", ")).unwrap();
    }
}

pub fn ball_dot(ball: &Ball, graph: &TypedGraph, name: &str, hl: &Highlight) -> String {
    let mut out = format!("digraph {} {{\n    node [shape=circle, fontsize=10];\n", quote(name));
    write_ball(&mut out, ball, graph, "v", hl, None);
    out.push_str("}\n");
    out
}

/// Both balls side by side with the vertex map as dashed links.
pub fn pair_dot(pair: &MappedBallPair, name: &str, up_hl: &Highlight, down_hl: &Highlight) -> String {
    let ptp = pair.ptp();
    let mut out = format!("digraph {} {{\n    node [shape=circle, fontsize=10];\n", quote(name));
    out.push_str("  subgraph cluster_up {\n    label=\"upstairs\";\n");
    write_ball(&mut out, pair.up(), ptp.upstairs(), "u", up_hl, None);
    out.push_str("  }\n  subgraph cluster_down {\n    label=\"downstairs\";\n");
    write_ball(&mut out, pair.down(), ptp.downstairs(), "d", down_hl, None);
    out.push_str("  }\n");
    for u in pair.up().vertex_ids() {
        writeln!(out, "    u{} -> d{} [style=dashed, color=gray, constraint=false];", u.0, pair.image_vertex(u).0).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn viability_dot(ptp: &Ptp, analysis: &EndAnalysis) -> String {
    let down = ptp.downstairs();
    let g = &analysis.digraph;
    let mut out = format!("digraph {} {{\n    node [shape=box, fontsize=10];\n", quote(&format!("{}_viability", ptp.name())));
    for &n in &g.nodes {
        let label = format!("{}:{}", down.type_name(down.class(n).from), down.class_name(n));
        let mut attrs = vec![format!("label={}", quote(&label))];
        if g.starts.contains(&n) {
            attrs.push("peripheries=2".into());
        }
        if g.live.contains(&n) {
            attrs.push("color=blue".into());
        }
        writeln!(out, "    c{} [{}];", n.0, attrs.join(", ")).unwrap();
    }
    for e in &g.edges {
        let label = if e.choices > 1 { format!(" [label={}]", quote(&format!("x{}", e.choices))) } else { String::new() };
        writeln!(out, "    c{} -> c{}{label};", e.from.0, e.to.0).unwrap();
    }
    out.push_str("}\n");
    out
}

/// The up vertices and edges used by the lifts; vertices where lifts branch
/// are highlighted.
pub fn lift_dot(pair: &MappedBallPair, tree: &LiftTree) -> String {
    let up = pair.up();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut spine = BTreeSet::new();
    let mut branch = BTreeSet::new();
    for lift in &tree.lifts {
        used.extend(lift.vertices.iter().copied());
        spine.extend(lift.edges.iter().copied());
    }
    for v in &used {
        let out_lifts: BTreeSet<EdgeId> = spine.iter().copied().filter(|&e| up.edge(e).source == *v).collect();
        if out_lifts.len() > 1 {
            branch.insert(*v);
        }
    }
    let hl = Highlight { marked: BTreeSet::new(), spine, vertices: branch };
    let mut out = "digraph \"lifts\" {\n    node [shape=circle, fontsize=10];\n".to_string();
    write_ball(&mut out, up, pair.ptp().upstairs(), "u", &hl, Some(&used));
    out.push_str("}\n");
    out
}

/// The witness rays, the path between the probes, and the image of the
/// construction downstairs.
pub fn witness_dot(res: &WitnessResult) -> String {
    let pair = &res.pair;
    let w = &res.witness;
    let up = pair.up();
    let path = up.geodesic(w.probes[0], w.probes[1]).expect("probes lie in the ball");
    let mut used: BTreeSet<VertexId> = path.vertices.iter().copied().collect();
    let mut spine: BTreeSet<EdgeId> = BTreeSet::new();
    for ray in &w.rays {
        used.extend(ray.vertices.iter().copied());
        spine.extend(ray.edges.iter().copied());
    }
    let up_hl = Highlight {
        marked: w.pair.iter().copied().collect(),
        spine,
        vertices: [w.apex, w.probes[0], w.probes[1]].into_iter().collect(),
    };
    let mut down_used: BTreeSet<VertexId> = res.tau.vertices.iter().copied().collect();
    for v in &used {
        let mut x = Some(pair.image_vertex(*v));
        while let Some(y) = x {
            if !down_used.insert(y) {
                break;
            }
            x = pair.down().parent(y);
        }
    }
    let down_hl = Highlight {
        marked: [w.image_edge].into_iter().collect(),
        spine: res.tau.edges.iter().copied().collect(),
        vertices: [pair.image_vertex(w.apex)].into_iter().collect(),
    };
    let ptp = pair.ptp();
    let mut out = "digraph \"witness\" {\n    node [shape=circle, fontsize=10];\n".to_string();
    out.push_str("  subgraph cluster_up {\n    label=\"upstairs\";\n");
    write_ball(&mut out, up, ptp.upstairs(), "u", &up_hl, Some(&used));
    out.push_str("  }\n  subgraph cluster_down {\n    label=\"downstairs\";\n");
    write_ball(&mut out, pair.down(), ptp.downstairs(), "d", &down_hl, Some(&down_used));
    out.push_str("  }\n");
    for v in &used {
        writeln!(out, "    u{} -> d{} [style=dashed, color=gray, constraint=false];", v.0, pair.image_vertex(*v).0).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::expand_pair;
    use crate::corpus;
    use crate::oracle::marked_instances;
    use crate::ptp::TypeId;

    #[test]
    fn pair_export_has_every_vertex() {
        let ptp = corpus::load_example("two_rose").unwrap().ptp();
        let pair = expand_pair(&ptp, TypeId(0), 2, 4).unwrap();
        let hl = Highlight { marked: marked_instances(&pair), ..Default::default() };
        let dot = pair_dot(&pair, "two_rose", &Highlight::default(), &hl);
        assert!(dot.starts_with("digraph \"two_rose\""));
        assert_eq!(dot.matches("style=dashed").count(), pair.up().len());
        assert!(dot.contains("color=red"));
        assert!(dot.contains("label=\"A@0\""));
    }

    #[test]
    fn viability_export() {
        let ptp = corpus::load_example("ascending_synthetic").unwrap().ptp();
        let analysis = crate::classify::classify_ends(&ptp);
        let dot = viability_dot(&ptp, &analysis);
        assert!(dot.contains("V:u+"));
        assert!(dot.contains("c0 -> c0"));
    }
}
