//! The operations behind the bindings, free of Python types.

use sigmatree_cli::report::{self, Report};
use sigmatree_core::ball::DEFAULT_BUDGET;
use sigmatree_core::classify::{classify_ends, Classification};
use sigmatree_core::end::EndSpec;
use sigmatree_core::ptp::{Ptp, TypeId};

fn parse_end(ptp: &Ptp, text: &str) -> Result<EndSpec, String> {
    EndSpec::parse(ptp.downstairs(), text).map_err(|e| format!("bad end {text:?}: {e}"))
}

pub fn analyze(ptp: &Ptp, assume_fn_stabilizers: bool) -> String {
    Report::analyze(ptp, assume_fn_stabilizers).to_json()
}

pub fn classification_kind(ptp: &Ptp) -> &'static str {
    match classify_ends(ptp).classification {
        Classification::AllFaced => "all_faced",
        Classification::UniqueCandidate(_) => "unique_candidate",
        Classification::Inconclusive(_) => "inconclusive",
    }
}

pub fn candidate(ptp: &Ptp) -> Option<String> {
    classify_ends(ptp).classification.candidate().map(|e| e.display(ptp.downstairs()))
}

pub fn faces(ptp: &Ptp, end: &str) -> Result<String, String> {
    let end = parse_end(ptp, end)?;
    let mut r = Report::analyze(ptp, false);
    r.faces = Some(report::faces_report(ptp, &end));
    Ok(r.to_json())
}

pub fn witness(ptp: &Ptp, end: &str, lag: u32, depth: usize, omega_cap: u32) -> Result<String, String> {
    let end = parse_end(ptp, end)?;
    let (w, _) = report::witness_report(ptp, &end, lag, depth, omega_cap, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let mut r = Report::analyze(ptp, false);
    r.witness = Some(w);
    Ok(r.to_json())
}

pub fn lift(ptp: &Ptp, ray: &str, depth: usize, omega_cap: u32) -> Result<String, String> {
    let ray = parse_end(ptp, ray)?;
    let (l, _, _) = report::lift_report(ptp, &ray, depth, omega_cap, DEFAULT_BUDGET)?;
    let mut r = Report::analyze(ptp, false);
    r.lift = Some(l);
    Ok(r.to_json())
}

pub fn expand(ptp: &Ptp, depth: u32, omega_cap: u32) -> Result<String, String> {
    let (e, _) = report::expand_report(ptp, TypeId(0), depth, omega_cap, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let mut r = Report::analyze(ptp, false);
    r.expand = Some(e);
    Ok(r.to_json())
}

pub fn oracle(ptp: &Ptp, depth: u32, omega_cap: u32) -> Result<String, String> {
    let (o, _) = report::oracle_report(ptp, depth, omega_cap, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let mut r = Report::analyze(ptp, false);
    r.oracle = Some(o);
    Ok(r.to_json())
}
