mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigmatree_core::ball::{expand_pair, DEFAULT_BUDGET};
use sigmatree_core::classify::{end_faced, q_fiber_singleton};
use sigmatree_core::corpus;
use sigmatree_core::end::EndSpec;
use sigmatree_core::lifting::{lift_ray, lifts_toward_end_unbranched, LiftStart};
use sigmatree_core::multiplicity::Multiplicity;
use sigmatree_core::oracle::probes_connected;
use sigmatree_core::ptp::{ClassId, Ptp, TypeId};
use sigmatree_core::random::random_end;
use sigmatree_core::witness::{disconnection_witness, verify_witness, WitnessError};

/// Number of lifts of `classes` from a vertex of type `t`, counted on the
/// quotient: each step multiplies by the fibers of the sources of the cell
/// carrying that target. Valid when every cell covers its target in full.
fn quotient_lift_count(ptp: &Ptp, t: TypeId, classes: &[ClassId]) -> u64 {
    let Some((&d, rest)) = classes.split_first() else { return 1 };
    ptp.cells_at(t)
        .filter(|(_, c)| c.target == d)
        .flat_map(|(_, c)| c.sources.iter())
        .map(|s| {
            let f = match s.fiber {
                Multiplicity::Finite(f) => f as u64,
                Multiplicity::Omega => unreachable!("finite documents only"),
            };
            f * quotient_lift_count(ptp, ptp.upstairs().class(s.class).to, rest)
        })
        .sum()
}

fn full_cells(ptp: &Ptp) -> bool {
    let down = ptp.downstairs();
    ptp.cells().iter().all(|c| down.class(c.target).mult == Multiplicity::Finite(c.coverage))
        && ptp.upstairs().class_ids().all(|c| ptp.upstairs().class(c).mult.finite().is_some())
}

#[test]
fn lift_counts_follow_the_product_law() {
    let docs: Vec<Ptp> = common::applicable_corpus().into_iter().chain(common::fuzzed(31, 40)).filter(full_cells).collect();
    assert!(docs.len() >= 40);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for ptp in docs {
        let down = ptp.downstairs();
        for t in ptp.upstairs().type_ids() {
            let mut pair = expand_pair(&ptp, t, 5, 4).unwrap();
            let v = ptp.vertex_map(t);
            for _ in 0..4 {
                let end = random_end(&mut rng, down, v, 2, 3).unwrap();
                let ray = pair.realize_end(&end, 5).unwrap();
                let classes = ray.classes(pair.down());
                for d in 0..=5 {
                    let tree = lift_ray(&pair, &ray, LiftStart::Vertex(pair.up().base()), d).unwrap();
                    assert_eq!(tree.lifts.len() as u64, quotient_lift_count(&ptp, t, &classes[..d]), "{}", ptp.name());
                    for k in 0..d {
                        assert_eq!(tree.counts[k + 1], tree.fibers[k].iter().map(|&f| f as usize).sum::<usize>());
                    }
                    for lift in &tree.lifts {
                        assert_eq!(lift.len(), d);
                        let images: Vec<_> = lift.edges.iter().map(|&e| pair.image_edge(e)).collect();
                        assert_eq!(images, ray.edges[..d]);
                    }
                }
            }
        }
    }
}

fn sample_ends(ptp: &Ptp, seed: u64, n: usize) -> Vec<EndSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let down = ptp.downstairs();
    let mut ends: Vec<EndSpec> = Vec::new();
    for i in 0..n {
        let t = TypeId(i % down.vertex_types.len());
        ends.push(random_end(&mut rng, down, t, 3, 3).unwrap());
    }
    ends
}

#[test]
fn fiber_is_a_singleton_exactly_when_unfaced() {
    let docs = common::applicable_corpus().into_iter().chain(common::fuzzed(32, 60));
    for ptp in docs {
        let mut ends = sample_ends(&ptp, 32, 20);
        if let Some(e) = sigmatree_core::classify::classify_ends(&ptp).classification.candidate() {
            ends.push(e.clone());
        }
        for end in ends {
            let singleton = q_fiber_singleton(&ptp, &end).unwrap();
            assert_eq!(singleton, end_faced(&ptp, &end).unwrap().is_none());
        }
    }
}

#[test]
fn unfaced_candidate_lifts_without_branching() {
    // Along the unfaced end every lift from the base is unique; along a faced
    // end some lift branches.
    let ptp = corpus::load_example("ascending_synthetic").unwrap().ptp();
    let mut pair = expand_pair(&ptp, TypeId(0), 7, 4).unwrap();
    let end = EndSpec::parse(ptp.downstairs(), ";u+").unwrap();
    let ray = pair.realize_end(&end, 7).unwrap();
    let tree = lift_ray(&pair, &ray, LiftStart::Vertex(pair.up().base()), 7).unwrap();
    assert!(tree.is_unbranched());
    let faced = EndSpec::parse(ptp.downstairs(), ";u-").unwrap();
    let ray = pair.realize_end(&faced, 7).unwrap();
    let tree = lift_ray(&pair, &ray, LiftStart::Vertex(pair.up().base()), 7).unwrap();
    assert!(!tree.is_unbranched());
}

fn faced_ends(ptp: &Ptp, seed: u64, n: usize) -> Vec<EndSpec> {
    sample_ends(ptp, seed, 4 * n).into_iter().filter(|e| end_faced(ptp, e).unwrap().is_some()).take(n).collect()
}

#[test]
fn witnesses_round_trip_and_separate_probes() {
    for name in ["two_rose", "bs24_to_bs12"] {
        let ptp = corpus::load_example(name).unwrap().ptp();
        for end in faced_ends(&ptp, 33, 4) {
            for lag in [1u32, 2, 4] {
                let res = disconnection_witness(&ptp, &end, lag, 12, 4, DEFAULT_BUDGET).unwrap();
                let w = &res.witness;
                assert!(w.verified, "{name} {} lag {lag}", end.display(ptp.downstairs()));
                assert!(verify_witness(&res.pair, w, &res.tau).unwrap());
                let r = -(lag as i64);
                assert!(!probes_connected(&res.pair, &res.tau, r, w.probes[0], w.probes[1]).unwrap());
            }
        }
    }
}

#[test]
fn witness_lag_is_monotone() {
    let ptp = corpus::load_example("two_rose").unwrap().ptp();
    for end in faced_ends(&ptp, 34, 3) {
        let depth = 12;
        let top = (1..=6).rev().find(|&lag| disconnection_witness(&ptp, &end, lag, depth, 4, DEFAULT_BUDGET).is_ok());
        let top = top.expect("some lag has a witness");
        for lag in 0..=top {
            let res = disconnection_witness(&ptp, &end, lag, depth, 4, DEFAULT_BUDGET).unwrap();
            assert!(res.witness.verified);
        }
    }
}

#[test]
fn witnesses_exist_exactly_for_faced_ends() {
    for ptp in common::applicable_corpus() {
        for end in sample_ends(&ptp, 35, 6) {
            let res = disconnection_witness(&ptp, &end, 1, 12, 2, DEFAULT_BUDGET);
            match end_faced(&ptp, &end).unwrap() {
                Some(_) => assert!(res.unwrap().witness.verified, "{}", ptp.name()),
                None => assert_eq!(res.unwrap_err(), WitnessError::NotFaced),
            }
        }
    }
    let ptp = corpus::load_example("ascending_synthetic").unwrap().ptp();
    let end = EndSpec::parse(ptp.downstairs(), ";u+").unwrap();
    assert_eq!(disconnection_witness(&ptp, &end, 1, 12, 4, DEFAULT_BUDGET).unwrap_err(), WitnessError::NotFaced);
    let shallow = EndSpec::parse(ptp.downstairs(), ";u-").unwrap();
    assert!(matches!(
        disconnection_witness(&ptp, &shallow, 5, 3, 4, DEFAULT_BUDGET),
        Err(WitnessError::TooShallow { .. })
    ));
}

#[test]
fn fuzzed_candidates_lift_without_branching() {
    let mut seen = 0;
    for ptp in common::fuzzed(36, 150) {
        let Some(end) = sigmatree_core::classify::classify_ends(&ptp).classification.candidate().cloned() else {
            continue;
        };
        seen += 1;
        let mut pair = expand_pair(&ptp, common::up_over(&ptp, end.base_type), 6, 4).unwrap();
        let tau = pair.realize_end(&end, 6).unwrap();
        assert!(lifts_toward_end_unbranched(&pair, &tau, 2).unwrap(), "{}", ptp.to_json());
    }
    assert!(seen > 0);
}
