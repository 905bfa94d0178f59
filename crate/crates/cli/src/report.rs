//! The structured report printed by every subcommand.
//!
//! Field order and collection order are fixed, so identical invocations give
//! byte-identical JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sigmatree_core::ball::{expand_pair_with_budget, Ball, BallError, MappedBallPair, RayInstance};
use sigmatree_core::classify::{
    classify_ends, end_faced, q_fiber_singleton, sigma_verdict, Classification, FacedAt, InconclusiveReason, MarkEntry,
    Sigma1, Verdict,
};
use sigmatree_core::end::{EndSpec, EndView};
use sigmatree_core::lifting::{lift_ray, LiftStart, LiftTree};
use sigmatree_core::local::{local_properties, ApplicabilityReport, LocalProperties};
use sigmatree_core::multiplicity::Multiplicity;
use sigmatree_core::oracle::{
    brute_connectivity_check, brute_face_scan_with, interior_face_scan_saturated, probes_connected, saturated_marks,
};
use sigmatree_core::ptp::{Ptp, TypeId, Violation, Warning};
use sigmatree_core::witness::{disconnection_witness, repeat_bound, verify_witness, DisconnectionWitness, WitnessError, WitnessResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationView {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanEntry {
    pub vertex_type: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassificationView {
    AllFaced,
    UniqueCandidate { end: EndView },
    Inconclusive { reason: InconclusiveReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaView {
    Empty,
    AtMostOne { end: EndView },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub depth: u32,
    pub cones: usize,
    pub unfaced: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityCheck {
    pub r: i64,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub base_type: String,
    pub depth: u32,
    pub omega_cap: u32,
    /// Omega classes were cut at the cap; unfaced cones are then not conclusive.
    pub truncated: bool,
    pub up_vertices: usize,
    pub down_vertices: usize,
    pub marked_instances: usize,
    pub scans: Vec<ScanSummary>,
    /// Every vertex of depth below `depth` is faced by a marked edge, with the
    /// down ball grown past `depth` so marks beyond the boundary count.
    pub interior_all_faced: bool,
    /// For a unique candidate: each unfaced cone lies on its spine.
    pub unfaced_on_spine: Option<bool>,
    /// For a unique candidate: connectivity of horoball preimages.
    pub connectivity: Vec<ConnectivityCheck>,
    /// Whether the cone scans match the classification; absent when the
    /// classification makes no claim about cones.
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub end: EndView,
    pub lag: u32,
    pub depth: usize,
    pub verified: bool,
    /// Result of re-checking the certificate from the balls alone.
    pub reverified: bool,
    /// Whether the probes are joined inside the preimage of `HB_{-lag}`.
    pub probes_connected: bool,
    pub certificate: DisconnectionWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacesReport {
    pub end: EndView,
    pub faced: Option<bool>,
    pub faced_at: Option<FacedAt>,
    pub fiber_singleton: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftReport {
    pub ray: EndView,
    pub start_type: String,
    pub depth: usize,
    pub counts: Vec<usize>,
    pub fibers: Vec<Vec<u32>>,
    pub unbranched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSummary {
    pub vertices: usize,
    pub edges: usize,
    /// Distinct degrees of vertices below the boundary.
    pub interior_degrees: Vec<usize>,
    pub truncated: bool,
    pub stars: BTreeMap<String, Multiplicity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandReport {
    pub base_type: String,
    pub depth: u32,
    pub omega_cap: u32,
    pub up: BallSummary,
    pub down: BallSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub name: String,
    pub validation: ValidationView,
    pub local_properties: Option<LocalProperties>,
    pub applicability: Option<ApplicabilityReport>,
    pub marked: Vec<MarkEntry>,
    pub clean: Vec<CleanEntry>,
    pub classification: Option<ClassificationView>,
    pub sigma1: Option<SigmaView>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<FacesReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand: Option<ExpandReport>,
}

impl Report {
    /// Report for a document that failed validation.
    pub fn invalid(name: &str, violations: Vec<Violation>) -> Report {
        Report {
            tool_version: TOOL_VERSION.to_string(),
            name: name.to_string(),
            validation: ValidationView { valid: false, violations, warnings: Vec::new() },
            local_properties: None,
            applicability: None,
            marked: Vec::new(),
            clean: Vec::new(),
            classification: None,
            sigma1: None,
            notes: Vec::new(),
            oracle: None,
            witness: None,
            faces: None,
            lift: None,
            expand: None,
        }
    }

    /// The verdict part of the report, shared by every subcommand.
    pub fn analyze(ptp: &Ptp, assume_fn_stabilizers: bool) -> Report {
        let verdict = sigma_verdict(ptp, assume_fn_stabilizers);
        let down = ptp.downstairs();
        Report {
            tool_version: TOOL_VERSION.to_string(),
            name: ptp.name().to_string(),
            validation: ValidationView { valid: true, violations: Vec::new(), warnings: ptp.warnings().to_vec() },
            local_properties: Some(local_properties(ptp)),
            applicability: Some(verdict.applicability.clone()),
            marked: verdict.marked().entries(down),
            clean: verdict
                .analysis
                .clean
                .pairs(down)
                .into_iter()
                .map(|(vertex_type, class)| CleanEntry { vertex_type, class })
                .collect(),
            classification: Some(classification_view(ptp, verdict.classification())),
            sigma1: Some(sigma_view(ptp, &verdict)),
            notes: verdict.notes.clone(),
            oracle: None,
            witness: None,
            faces: None,
            lift: None,
            expand: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn classification_view(ptp: &Ptp, c: &Classification) -> ClassificationView {
    match c {
        Classification::AllFaced => ClassificationView::AllFaced,
        Classification::UniqueCandidate(e) => ClassificationView::UniqueCandidate { end: EndView::new(e, ptp.downstairs()) },
        Classification::Inconclusive(reason) => ClassificationView::Inconclusive { reason: *reason },
    }
}

fn sigma_view(ptp: &Ptp, v: &Verdict) -> SigmaView {
    match &v.sigma1 {
        Sigma1::Empty => SigmaView::Empty,
        Sigma1::AtMostOne(e) => SigmaView::AtMostOne { end: EndView::new(e, ptp.downstairs()) },
        Sigma1::Unknown => SigmaView::Unknown,
    }
}

/// An upstairs type over the downstairs type `down`.
pub fn up_type_over(ptp: &Ptp, down: TypeId) -> Result<TypeId, BallError> {
    ptp.preimage_types(down)
        .next()
        .ok_or_else(|| BallError::NoPreimage(ptp.downstairs().type_name(down).to_string()))
}

fn ball_summary(ball: &Ball, stars: BTreeMap<String, Multiplicity>) -> BallSummary {
    let mut degrees: Vec<usize> =
        ball.vertex_ids().filter(|&v| ball.is_expanded(v)).map(|v| ball.out_edges(v).count()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    BallSummary {
        vertices: ball.len(),
        edges: ball.edge_count() / 2,
        interior_degrees: degrees,
        truncated: ball.is_truncated(),
        stars,
    }
}

pub fn expand_report(ptp: &Ptp, base: TypeId, depth: u32, omega_cap: u32, budget: usize) -> Result<(ExpandReport, MappedBallPair), BallError> {
    let pair = expand_pair_with_budget(ptp, base, depth, omega_cap, budget)?;
    let stars = |g: &sigmatree_core::ptp::TypedGraph| g.type_ids().map(|t| (g.type_name(t).to_string(), g.star_size(t))).collect();
    let report = ExpandReport {
        base_type: ptp.upstairs().type_name(base).to_string(),
        depth,
        omega_cap,
        up: ball_summary(pair.up(), stars(ptp.upstairs())),
        down: ball_summary(pair.down(), stars(ptp.downstairs())),
    };
    Ok((report, pair))
}

/// Cone scans at every depth up to `depth`, checked against the classifier.
pub fn oracle_report(ptp: &Ptp, depth: u32, omega_cap: u32, budget: usize) -> Result<(OracleReport, MappedBallPair), BallError> {
    let classification = classify_ends(ptp).classification;
    let candidate = classification.candidate().cloned();
    let base = match &candidate {
        Some(e) => up_type_over(ptp, e.base_type)?,
        None => TypeId(0),
    };
    let mut pair = expand_pair_with_budget(ptp, base, depth, omega_cap, budget)?;
    let spine = match &candidate {
        Some(e) => Some(pair.realize_end(e, depth as usize)?),
        None => None,
    };
    let marked = saturated_marks(&pair);
    let mut scans = Vec::new();
    let mut on_spine = true;
    for r in 1..=depth {
        let report = brute_face_scan_with(&pair, r, &marked);
        let unfaced: Vec<_> = report.unfaced().collect();
        if let Some(tau) = &spine {
            on_spine &= unfaced == [tau.vertices[r as usize]];
        }
        scans.push(ScanSummary { depth: r, cones: report.cones.len(), unfaced: unfaced.len() });
    }
    let interior_all_faced =
        depth == 0 || interior_face_scan_saturated(&mut pair, depth - 1, repeat_bound(ptp) as u32)?.all_faced();
    let mut connectivity = Vec::new();
    if let Some(tau) = &spine {
        for r in -2..=2 {
            connectivity.push(ConnectivityCheck { r, connected: brute_connectivity_check(&pair, tau, r)? });
        }
    }
    let agrees = match &classification {
        Classification::AllFaced => Some(scans.iter().all(|s| s.unfaced == 0)),
        Classification::UniqueCandidate(_) => Some(on_spine),
        Classification::Inconclusive(_) => None,
    };
    let report = OracleReport {
        base_type: ptp.upstairs().type_name(base).to_string(),
        depth,
        omega_cap,
        truncated: pair.up().is_truncated(),
        up_vertices: pair.up().len(),
        down_vertices: pair.down().len(),
        marked_instances: marked.len(),
        scans,
        interior_all_faced,
        unfaced_on_spine: spine.as_ref().map(|_| on_spine),
        connectivity,
        agrees,
    };
    Ok((report, pair))
}

pub fn faces_report(ptp: &Ptp, end: &EndSpec) -> FacesReport {
    let view = EndView::new(end, ptp.downstairs());
    match end_faced(ptp, end) {
        Ok(at) => FacesReport {
            end: view,
            faced: Some(at.is_some()),
            faced_at: at,
            fiber_singleton: q_fiber_singleton(ptp, end).ok(),
            error: None,
        },
        Err(e) => FacesReport { end: view, faced: None, faced_at: None, fiber_singleton: None, error: Some(e.to_string()) },
    }
}

pub fn lift_report(
    ptp: &Ptp,
    ray: &EndSpec,
    depth: usize,
    omega_cap: u32,
    budget: usize,
) -> Result<(LiftReport, MappedBallPair, LiftTree), String> {
    let base = up_type_over(ptp, ray.base_type).map_err(|e| e.to_string())?;
    let mut pair = expand_pair_with_budget(ptp, base, depth as u32, omega_cap, budget).map_err(|e| e.to_string())?;
    let path: RayInstance = pair.realize_end(ray, depth).map_err(|e| e.to_string())?;
    let tree = lift_ray(&pair, &path, LiftStart::Vertex(pair.up().base()), depth).map_err(|e| e.to_string())?;
    let report = LiftReport {
        ray: EndView::new(ray, ptp.downstairs()),
        start_type: ptp.upstairs().type_name(base).to_string(),
        depth,
        counts: tree.counts.clone(),
        fibers: tree.fibers.clone(),
        unbranched: tree.is_unbranched(),
    };
    Ok((report, pair, tree))
}

pub fn witness_report(
    ptp: &Ptp,
    end: &EndSpec,
    lag: u32,
    depth: usize,
    omega_cap: u32,
    budget: usize,
) -> Result<(WitnessReport, WitnessResult), WitnessError> {
    let res = disconnection_witness(ptp, end, lag, depth, omega_cap, budget)?;
    let w = &res.witness;
    let reverified = verify_witness(&res.pair, w, &res.tau)?;
    let joined = probes_connected(&res.pair, &res.tau, -(lag as i64), w.probes[0], w.probes[1])?;
    let report = WitnessReport {
        end: EndView::new(end, ptp.downstairs()),
        lag,
        depth,
        verified: w.verified,
        reverified,
        probes_connected: joined,
        certificate: w.clone(),
    };
    Ok((report, res))
}
