use sigmatree_cli::report::{ClassificationView, Report, SigmaView};
use sigmatree_cli::{run_captured, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK};
use sigmatree_core::corpus;

fn run(args: &[&str]) -> (i32, String, String) {
    run_captured(std::iter::once("sigmatree").chain(args.iter().copied()))
}

#[test]
fn json_reports_round_trip() {
    for name in corpus::names() {
        let (code, out, _) = run(&["analyze", name, "--json"]);
        assert!(code == EXIT_OK || code == EXIT_INCONCLUSIVE, "{name}: {code}");
        let report: Report = serde_json::from_str(&out).unwrap();
        assert_eq!(report.name, name);
        assert!(report.validation.valid);
        assert_eq!(format!("{}\n", report.to_json()), out);
    }
}

#[test]
fn classify_verdicts_on_corpus() {
    let (code, out, _) = run(&["classify", "ascending_synthetic", "--json"]);
    assert_eq!(code, EXIT_OK);
    let r: Report = serde_json::from_str(&out).unwrap();
    assert!(matches!(r.classification, Some(ClassificationView::UniqueCandidate { .. })));
    assert!(matches!(r.sigma1, Some(SigmaView::AtMostOne { .. })));

    let (code, out, _) = run(&["classify", "two_rose"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Σ¹ = ∅"));
}

#[test]
fn examples_print_parseable_documents() {
    let (code, out, _) = run(&["example"]);
    assert_eq!(code, EXIT_OK);
    for name in corpus::names() {
        assert!(out.contains(name));
    }
    let (code, out, _) = run(&["example", "bs24_to_bs12"]);
    assert_eq!(code, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.ptp");
    std::fs::write(&path, &out).unwrap();
    let (code, out, _) = run(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK);
    let r: Report = serde_json::from_str(&out).unwrap();
    assert!(r.validation.valid);
}

#[test]
fn invalid_input_exits_with_one() {
    let (code, _, err) = run(&["analyze", "no_such_example"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("no_such_example"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ptp");
    std::fs::write(&path, "{\"name\": \"bad\"}").unwrap();
    let (code, _, _) = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);

    let (code, _, _) = run(&["faces", "two_rose", "--end", ";nope+"]);
    assert_eq!(code, EXIT_INVALID);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let (code, _, err) = run(&["expand", "two_rose", "--depth", "8", "--budget", "100"]);
    assert_eq!(code, EXIT_INCONCLUSIVE, "{err}");
}

#[test]
fn witness_and_lift_subcommands() {
    let (code, out, err) = run(&["witness", "two_rose", "--end", ";x+", "--lag", "2", "--json"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let r: Report = serde_json::from_str(&out).unwrap();
    let w = r.witness.unwrap();
    assert!(w.verified && w.reverified && !w.probes_connected);

    let (code, _, _) = run(&["witness", "ascending_synthetic", "--end", ";u+"]);
    assert_ne!(code, EXIT_OK);

    let (code, out, _) = run(&["lift", "ascending_synthetic", "--ray", ";u+", "--depth", "5", "--json"]);
    assert_eq!(code, EXIT_OK);
    let r: Report = serde_json::from_str(&out).unwrap();
    assert!(r.lift.unwrap().unbranched);
}

#[test]
fn dot_output_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.dot");
    let (code, _, err) = run(&["expand", "two_rose", "--depth", "2", "--dot", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("digraph"));
}
