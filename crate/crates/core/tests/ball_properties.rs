mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigmatree_core::ball::{expand_pair, Ball, MappedBallPair, DEFAULT_BUDGET};
use sigmatree_core::oracle::busemann_limit;
use sigmatree_core::ptp::{Ptp, TypeId};
use sigmatree_core::random::random_end;

fn pick(entry: usize, base: usize) -> (Ptp, TypeId) {
    let all = common::corpus_ptps();
    let ptp = all[entry % all.len()].clone();
    let n = ptp.upstairs().vertex_types.len();
    (ptp, TypeId(base % n))
}

fn assert_tree(ball: &Ball) {
    assert_eq!(ball.edge_count() / 2, ball.len() - 1);
    for e in ball.edge_ids() {
        assert_eq!(ball.edge(e).source, ball.edge(e.reverse()).target);
    }
}

fn assert_simulates(pair: &MappedBallPair) {
    let ptp = pair.ptp();
    let (up, down) = (pair.up(), pair.down());
    for u in up.vertex_ids() {
        assert_eq!(ptp.vertex_map(up.vertex(u).ty), down.vertex(pair.image_vertex(u)).ty);
    }
    for e in up.edge_ids() {
        let img = pair.image_edge(e);
        assert_eq!(pair.image_vertex(up.edge(e).source), down.edge(img).source);
        assert_eq!(pair.image_vertex(up.edge(e).target), down.edge(img).target);
        assert_eq!(pair.image_edge(e.reverse()), img.reverse());
        assert_eq!(down.edge(img).class, ptp.cell_of(up.edge(e).class).target);
    }
}

/// A horoball is a subtree: exactly one of its vertices has its parent outside.
fn is_subtree(ball: &Ball, set: &[sigmatree_core::ball::VertexId]) -> bool {
    let s: BTreeSet<_> = set.iter().copied().collect();
    s.is_empty() || s.iter().filter(|&&v| ball.parent(v).is_none_or(|p| !s.contains(&p))).count() == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn expansion_is_deterministic(entry in 0usize..5, base in 0usize..2, radius in 0u32..4) {
        let (ptp, t) = pick(entry, base);
        let a = expand_pair(&ptp, t, radius, 3).unwrap();
        let b = expand_pair(&ptp, t, radius, 3).unwrap();
        prop_assert_eq!(a.up(), b.up());
        prop_assert_eq!(a.down(), b.down());
        for u in a.up().vertex_ids() {
            prop_assert_eq!(a.image_vertex(u), b.image_vertex(u));
        }
    }

    #[test]
    fn balls_are_trees_and_the_map_simulates(entry in 0usize..5, base in 0usize..2, radius in 0u32..4) {
        let (ptp, t) = pick(entry, base);
        let pair = expand_pair(&ptp, t, radius, 3).unwrap();
        assert_tree(pair.up());
        assert_tree(pair.down());
        assert_simulates(&pair);
    }

    #[test]
    fn up_geodesics_map_to_edge_paths(entry in 0usize..5, seed in any::<u64>()) {
        let (ptp, t) = pick(entry, 0);
        let pair = expand_pair(&ptp, t, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = pair.up().len() as u32;
        for _ in 0..10 {
            let a = sigmatree_core::ball::VertexId(rng.random_range(0..n));
            let b = sigmatree_core::ball::VertexId(rng.random_range(0..n));
            let path = pair.up().geodesic(a, b).unwrap();
            let images: Vec<_> = path.edges.iter().map(|&e| pair.image_edge(e)).collect();
            for w in images.windows(2) {
                prop_assert_eq!(pair.down().edge(w[0]).target, pair.down().edge(w[1]).source);
            }
            if let Some(first) = images.first() {
                prop_assert_eq!(pair.down().edge(*first).source, pair.image_vertex(a));
            }
        }
    }

    #[test]
    fn busemann_equals_its_limit_and_horoballs_nest(entry in 0usize..5, seed in any::<u64>()) {
        let (ptp, _) = pick(entry, 0);
        let down = ptp.downstairs();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = TypeId(0);
        let end = random_end(&mut rng, down, base, 2, 3).unwrap();
        let up_base = common::up_over(&ptp, base);
        let mut pair = MappedBallPair::lazy(&ptp, up_base, 3, DEFAULT_BUDGET);
        pair.expand_down_to(6).unwrap();
        let tau = pair.realize_end(&end, 6).unwrap();
        let ball = pair.down();
        for p in ball.vertex_ids() {
            let beta = ball.busemann(&tau, p).unwrap();
            let m = (0..=tau.len()).rev().find(|&t| ball.is_ancestor_or_self(tau.vertices[t], p)).unwrap();
            for t in m..=tau.len() {
                prop_assert_eq!(busemann_limit(ball, &tau, p, t), beta);
            }
        }
        let mut prev: Option<BTreeSet<_>> = None;
        for r in (-6..=6).rev() {
            let hb = ball.horoball_filter(&tau, r).unwrap();
            prop_assert!(is_subtree(ball, &hb));
            let set: BTreeSet<_> = hb.into_iter().collect();
            if let Some(smaller) = &prev {
                prop_assert!(smaller.is_subset(&set));
            }
            prev = Some(set);
        }
    }
}

#[test]
fn fuzzed_balls_are_trees_and_the_map_simulates() {
    for ptp in common::fuzzed(11, 40) {
        for t in ptp.upstairs().type_ids() {
            let pair = expand_pair(&ptp, t, 3, 3).unwrap();
            assert_tree(pair.up());
            assert_tree(pair.down());
            assert_simulates(&pair);
        }
    }
}
