#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigmatree_core::corpus;
use sigmatree_core::local::applicability_check;
use sigmatree_core::ptp::{Ptp, TypeId};
use sigmatree_core::random::{random_ptp, RandomParams};

pub fn corpus_ptps() -> Vec<Ptp> {
    corpus::entries().iter().map(|e| e.ptp()).collect()
}

pub fn applicable_corpus() -> Vec<Ptp> {
    corpus_ptps().into_iter().filter(|p| applicability_check(p).main_theorem_applies).collect()
}

pub fn fuzzed(seed: u64, n: usize) -> Vec<Ptp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| random_ptp(&mut rng, &RandomParams::default(), &format!("fuzz_{seed}_{i}"))).collect()
}

/// An upstairs type over the downstairs type `down`.
pub fn up_over(ptp: &Ptp, down: TypeId) -> TypeId {
    ptp.upstairs().type_ids().find(|&t| ptp.vertex_map(t) == down).expect("q is onto types")
}
