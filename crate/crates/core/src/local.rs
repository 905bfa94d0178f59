//! Type-level local properties of the star map: surjectivity, injectivity and
//! the hypotheses under which the single-end theorem applies.

use serde::{Deserialize, Serialize};

use crate::multiplicity::Multiplicity;
use crate::ptp::{ClassId, Ptp, TypeId};

/// An upstairs type whose cells cover fewer than `mult(class)` edges of a
/// downstairs class at its image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deficiency {
    pub upstairs_type: String,
    pub class: String,
    pub covered: u32,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapsingCell {
    pub index: usize,
    pub at: String,
    pub target: String,
    pub coverage: u32,
    /// Upstairs edges sent onto each covered target edge.
    pub preimages: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalProperties {
    pub locally_surjective: bool,
    pub deficiencies: Vec<Deficiency>,
    pub unmapped_types: Vec<String>,
    pub locally_injective: bool,
    pub collapsing_cells: Vec<CollapsingCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplicabilityReport {
    pub upstairs_minimal: bool,
    pub downstairs_locally_finite: bool,
    pub locally_surjective: bool,
    pub not_locally_injective: bool,
    pub main_theorem_applies: bool,
}

impl ApplicabilityReport {
    /// Human-readable list of failed hypotheses.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.upstairs_minimal {
            out.push("upstairs tree has leaves (action not minimal)");
        }
        if !self.downstairs_locally_finite {
            out.push("downstairs tree is not locally finite");
        }
        if !self.locally_surjective {
            out.push("q is not locally surjective");
        }
        if !self.not_locally_injective {
            out.push("q is locally injective");
        }
        out
    }
}

/// Total coverage of the cells at `up` that target `d`.
pub fn coverage_at(ptp: &Ptp, up: TypeId, d: ClassId) -> u32 {
    ptp.cells_at(up).filter(|(_, c)| c.target == d).map(|(_, c)| c.coverage).sum()
}

pub fn local_properties(ptp: &Ptp) -> LocalProperties {
    let up = ptp.upstairs();
    let down = ptp.downstairs();

    let mut deficiencies = Vec::new();
    for t in up.type_ids() {
        for d in down.star(ptp.vertex_map(t)) {
            let mult = down.class(d).mult.finite().expect("downstairs is locally finite");
            let covered = coverage_at(ptp, t, d);
            if covered < mult {
                deficiencies.push(Deficiency {
                    upstairs_type: up.type_name(t).to_string(),
                    class: down.class_name(d).to_string(),
                    covered,
                    mult,
                });
            }
        }
    }

    let unmapped_types: Vec<String> = down
        .type_ids()
        .filter(|&d| ptp.preimage_types(d).next().is_none())
        .map(|d| down.type_name(d).to_string())
        .collect();

    let collapsing_cells: Vec<CollapsingCell> = ptp
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_collapsing())
        .map(|(index, c)| CollapsingCell {
            index,
            at: up.type_name(c.at).to_string(),
            target: down.class_name(c.target).to_string(),
            coverage: c.coverage,
            preimages: c.preimage_count(),
        })
        .collect();

    LocalProperties {
        locally_surjective: deficiencies.is_empty() && unmapped_types.is_empty(),
        deficiencies,
        unmapped_types,
        locally_injective: collapsing_cells.is_empty(),
        collapsing_cells,
    }
}

pub fn applicability_check(ptp: &Ptp) -> ApplicabilityReport {
    let local = local_properties(ptp);
    let up = ptp.upstairs();
    let down = ptp.downstairs();
    // Cocompact actions on infinite trees are minimal exactly when there are no leaves.
    let upstairs_minimal = up.type_ids().all(|t| up.star_size(t).at_least(2));
    let downstairs_locally_finite = down.classes.iter().all(|c| !c.mult.is_omega());
    let locally_surjective = local.locally_surjective;
    let not_locally_injective = !local.locally_injective;
    ApplicabilityReport {
        upstairs_minimal,
        downstairs_locally_finite,
        locally_surjective,
        not_locally_injective,
        main_theorem_applies: upstairs_minimal
            && downstairs_locally_finite
            && locally_surjective
            && not_locally_injective,
    }
}
