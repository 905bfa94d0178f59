//! Built-in example documents with their expected results.
//!
//! | name | upstairs | downstairs |
//! |------|----------|------------|
//! | `two_rose` | Bass-Serre tree of `<a,s,t | a^s = a^2, a^t = a^3>` (7-valent) | Cayley tree of `F(x, y)` (4-valent) |
//! | `free_product` | Bass-Serre tree of `D_inf * D_inf` (infinite valence) | Bass-Serre tree of `K_4 * K_4` (4-valent) |
//! | `bs24_to_bs12` | Bass-Serre tree of `BS(2,4)` (6-valent) | Bass-Serre tree of `BS(1,2)` (3-valent) |
//! | `ascending_synthetic` | 5-valent tree | 3-valent tree |
//! | `line_identity` | a line | the same line |
//!
//! `ascending_synthetic` is a synthetic control that exercises the
//! single-candidate path; no group realizing it is claimed. `line_identity` is
//! the identity on a line, which fails the non-injectivity hypothesis.
//!
//! Lehnert's counterexample `Z[1/6] x| F(x, y)` acting on the 4-valent tree has
//! no corresponding entry: that action admits no locally surjective,
//! non-injective morphism from a minimal tree, so it cannot be written as a
//! document.

use serde::Serialize;
use thiserror::Error;

use crate::multiplicity::Multiplicity;
use crate::ptp::Ptp;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated for the published example.
    Published,
    /// Computed by this tool and re-checked by the ball oracle.
    Computed,
    /// Immediate from the construction.
    Construction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedClassification {
    AllFaced,
    /// A single unfaced periodic end; the cycle is given by class ids.
    UniqueCandidate(&'static [&'static str]),
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedSigma {
    Empty,
    AtMostOne,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tagged<T> {
    pub value: T,
    pub provenance: Provenance,
}

const fn tag<T>(value: T, provenance: Provenance) -> Tagged<T> {
    Tagged { value, provenance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub upstairs_star: Tagged<Multiplicity>,
    pub downstairs_degree: Tagged<u32>,
    pub locally_surjective: Tagged<bool>,
    pub locally_injective: Tagged<bool>,
    pub applicable: Tagged<bool>,
    pub classification: Tagged<ExpectedClassification>,
    pub sigma1: Tagged<ExpectedSigma>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub document: &'static str,
    pub expected: Expected,
}

impl CorpusEntry {
    /// The validated document. Corpus documents always validate.
    pub fn ptp(&self) -> Ptp {
        Ptp::parse(self.document).unwrap_or_else(|e| panic!("corpus entry {} is invalid: {e}", self.name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown example {name:?}; available: {}", available.join(", "))]
pub struct UnknownExample {
    pub name: String,
    pub available: Vec<&'static str>,
}

use ExpectedClassification as C;
use ExpectedSigma as S;
use Multiplicity::{Finite, Omega};
use Provenance::{Computed, Construction, Published};

static ENTRIES: [CorpusEntry; 5] = [
    CorpusEntry {
        name: "two_rose",
        document: include_str!("../corpus/two_rose.ptp"),
        expected: Expected {
            upstairs_star: tag(Finite(7), Published),
            downstairs_degree: tag(4, Published),
            locally_surjective: tag(true, Published),
            locally_injective: tag(false, Published),
            applicable: tag(true, Published),
            classification: tag(C::AllFaced, Computed),
            sigma1: tag(S::Empty, Published),
        },
    },
    CorpusEntry {
        name: "free_product",
        document: include_str!("../corpus/free_product.ptp"),
        expected: Expected {
            upstairs_star: tag(Omega, Published),
            downstairs_degree: tag(4, Published),
            locally_surjective: tag(true, Published),
            locally_injective: tag(false, Published),
            applicable: tag(true, Published),
            classification: tag(C::AllFaced, Computed),
            sigma1: tag(S::Empty, Published),
        },
    },
    CorpusEntry {
        name: "bs24_to_bs12",
        document: include_str!("../corpus/bs24_to_bs12.ptp"),
        expected: Expected {
            upstairs_star: tag(Finite(6), Computed),
            downstairs_degree: tag(3, Computed),
            locally_surjective: tag(true, Published),
            locally_injective: tag(false, Published),
            applicable: tag(true, Published),
            classification: tag(C::AllFaced, Computed),
            sigma1: tag(S::Empty, Computed),
        },
    },
    CorpusEntry {
        name: "ascending_synthetic",
        document: include_str!("../corpus/ascending_synthetic.ptp"),
        expected: Expected {
            upstairs_star: tag(Finite(5), Construction),
            downstairs_degree: tag(3, Construction),
            locally_surjective: tag(true, Construction),
            locally_injective: tag(false, Construction),
            applicable: tag(true, Construction),
            classification: tag(C::UniqueCandidate(&["u+"]), Computed),
            sigma1: tag(S::AtMostOne, Computed),
        },
    },
    CorpusEntry {
        name: "line_identity",
        document: include_str!("../corpus/line_identity.ptp"),
        expected: Expected {
            upstairs_star: tag(Finite(2), Construction),
            downstairs_degree: tag(2, Construction),
            locally_surjective: tag(true, Construction),
            locally_injective: tag(true, Construction),
            applicable: tag(false, Construction),
            classification: tag(C::Inconclusive, Construction),
            sigma1: tag(S::Unknown, Construction),
        },
    },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn entries() -> &'static [CorpusEntry] {
    &ENTRIES
}

pub fn load_example(name: &str) -> Result<&'static CorpusEntry, UnknownExample> {
    ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| UnknownExample {
        name: name.to_string(),
        available: names(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_validates() {
        for e in entries() {
            let ptp = e.ptp();
            assert_eq!(ptp.name(), e.name);
        }
    }

    #[test]
    fn unknown_name_lists_available() {
        let err = load_example("lehnert").unwrap_err();
        assert_eq!(err.available.len(), 5);
        assert!(err.to_string().contains("two_rose"));
    }
}
