//! `sigmatree` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 internal consistency violation,
//! 3 inconclusive (partial marks, insufficient depth or budget).

pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sigmatree_core::ball::{BallError, DEFAULT_BUDGET};
use sigmatree_core::classify::{classify_ends, InconclusiveReason};
use sigmatree_core::corpus;
use sigmatree_core::dot::{self, Highlight};
use sigmatree_core::end::EndSpec;
use sigmatree_core::oracle::saturated_marks;
use sigmatree_core::ptp::{Ptp, TypeId, Violation};
use sigmatree_core::witness::WitnessError;

use report::{ClassificationView, Report, SigmaView};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONSISTENCY: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sigmatree", version, about = "Decide whether at most one end of a tree escapes every collapsing pair")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a document against every invariant.
    Validate(Opts),
    /// Full report: local properties, marks, clean set, classification.
    Analyze(Opts),
    /// Classification and the resulting statement about Sigma^1.
    Classify(Opts),
    /// Whether the end given by --end is faced by a collapsing pair.
    Faces(Opts),
    /// Build and verify a disconnection witness for a faced end.
    Witness(Opts),
    /// Lift the ray given by --ray (or --end) and report the fiber counts.
    Lift(Opts),
    /// Expand both balls to --depth and summarize them.
    Expand(Opts),
    /// Brute-force cone scans checked against the classifier.
    Oracle(Opts),
    /// List the built-in examples, or print one as a document.
    Example {
        name: Option<String>,
    },
}

impl Command {
    pub fn opts(&self) -> Option<&Opts> {
        match self {
            Command::Validate(o)
            | Command::Analyze(o)
            | Command::Classify(o)
            | Command::Faces(o)
            | Command::Witness(o)
            | Command::Lift(o)
            | Command::Expand(o)
            | Command::Oracle(o) => Some(o),
            Command::Example { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Document path, or the name of a built-in example.
    pub input: String,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long, default_value_t = 4)]
    pub omega_cap: u32,
    #[arg(long, default_value_t = 1)]
    pub lag: u32,
    /// End as `prefix;cycle`, e.g. `x+,y-;x+` or `;u+`.
    #[arg(long, allow_hyphen_values = true)]
    pub end: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ray: Option<String>,
    /// Write a Graphviz rendering to this path.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub assume_fn_stabilizers: bool,
    /// Maximum number of vertices in both balls.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn ball_failure(e: BallError) -> Failure {
    match e {
        BallError::ResourceLimit { .. } => fail(EXIT_INCONCLUSIVE, e.to_string()),
        _ => fail(EXIT_INVALID, e.to_string()),
    }
}

/// Reads a document from a path, falling back to the built-in example of the
/// same name (with or without `.ptp`).
fn load(input: &str) -> Result<Result<Ptp, Vec<Violation>>, Failure> {
    let path = Path::new(input);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| fail(EXIT_INVALID, format!("cannot read {input}: {e}")))?
    } else {
        let stem = input.strip_suffix(".ptp").unwrap_or(input);
        let stem = Path::new(stem).file_name().and_then(|s| s.to_str()).unwrap_or(stem);
        match corpus::load_example(stem) {
            Ok(entry) => entry.document.to_string(),
            Err(e) => return Err(fail(EXIT_INVALID, format!("cannot read {input}: no such file, and {e}"))),
        }
    };
    Ok(Ptp::parse(&text).map_err(|r| r.violations))
}

fn parse_end(ptp: &Ptp, text: Option<&str>, flag: &str) -> Result<EndSpec, Failure> {
    let text = text.ok_or_else(|| fail(EXIT_INVALID, format!("this subcommand needs {flag}")))?;
    EndSpec::parse(ptp.downstairs(), text).map_err(|e| fail(EXIT_INVALID, format!("bad end {text:?}: {e}")))
}

fn write_dot(path: &Option<PathBuf>, render: impl FnOnce() -> String) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, render()).map_err(|e| fail(EXIT_INVALID, format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

/// Exit code implied by the classification alone.
fn classification_code(report: &Report) -> i32 {
    match &report.classification {
        Some(ClassificationView::Inconclusive { reason: InconclusiveReason::PartialMarking }) => EXIT_INCONCLUSIVE,
        Some(ClassificationView::Inconclusive {
            reason: InconclusiveReason::MultipleCandidates { consistency_violation: true, .. },
        }) => EXIT_CONSISTENCY,
        _ => EXIT_OK,
    }
}

fn sigma_line(report: &Report) -> String {
    match &report.sigma1 {
        Some(SigmaView::Empty) => "Σ¹ = ∅".to_string(),
        Some(SigmaView::AtMostOne { end }) => format!("Σ¹ ⊆ {{E0}}, E0 = {end}"),
        Some(SigmaView::Unknown) | None => "Σ¹ undetermined".to_string(),
    }
}

fn classification_line(report: &Report) -> String {
    match &report.classification {
        Some(ClassificationView::AllFaced) => "every end is faced by a collapsing pair".to_string(),
        Some(ClassificationView::UniqueCandidate { end }) => format!("exactly one unfaced end: {end}"),
        Some(ClassificationView::Inconclusive { reason: InconclusiveReason::PartialMarking }) => {
            "inconclusive: depends on partially marked classes".to_string()
        }
        Some(ClassificationView::Inconclusive { reason: InconclusiveReason::MultipleCandidates { cycles, branching, .. } }) => {
            format!("more than one unfaced end (cycles: {cycles}, branching: {branching})")
        }
        None => "not classified".to_string(),
    }
}

fn summary(report: &Report, command: &Command) -> String {
    let mut s = String::new();
    writeln!(s, "{}", report.name).unwrap();
    if !report.validation.valid {
        writeln!(s, "invalid document:").unwrap();
        for v in &report.validation.violations {
            writeln!(s, "  {}: {}", v.kind, v.message).unwrap();
        }
        return s;
    }
    if let Command::Validate(_) = command {
        writeln!(s, "valid").unwrap();
        for w in &report.validation.warnings {
            writeln!(s, "  warning: {}", w.message).unwrap();
        }
        return s;
    }
    if let Some(local) = &report.local_properties {
        writeln!(s, "locally surjective: {}, locally injective: {}", local.locally_surjective, local.locally_injective)
            .unwrap();
    }
    if let Some(app) = &report.applicability {
        writeln!(s, "hypotheses hold: {}", app.main_theorem_applies).unwrap();
    }
    if let Command::Analyze(_) = command {
        let marked: Vec<String> = report.marked.iter().map(|m| format!("{}:{} ({:?})", m.vertex_type, m.class, m.status)).collect();
        writeln!(s, "marked: {}", marked.join(", ")).unwrap();
        let clean: Vec<String> = report.clean.iter().map(|c| format!("{}:{}", c.vertex_type, c.class)).collect();
        writeln!(s, "clean: {}", clean.join(", ")).unwrap();
    }
    writeln!(s, "{}", classification_line(report)).unwrap();
    writeln!(s, "{}", sigma_line(report)).unwrap();
    for n in &report.notes {
        writeln!(s, "note: {n}").unwrap();
    }
    if let Some(f) = &report.faces {
        match (f.faced, &f.error) {
            (Some(true), _) => writeln!(s, "end {} is faced", f.end).unwrap(),
            (Some(false), _) => writeln!(s, "end {} is not faced", f.end).unwrap(),
            (None, Some(e)) => writeln!(s, "end {}: {e}", f.end).unwrap(),
            (None, None) => {}
        }
    }
    if let Some(l) = &report.lift {
        writeln!(s, "lifts of {} from {}: {:?}", l.ray, l.start_type, l.counts).unwrap();
    }
    if let Some(e) = &report.expand {
        writeln!(s, "up ball: {} vertices, interior degrees {:?}{}", e.up.vertices, e.up.interior_degrees, if e.up.truncated { " (truncated)" } else { "" }).unwrap();
        writeln!(s, "down ball: {} vertices, interior degrees {:?}", e.down.vertices, e.down.interior_degrees).unwrap();
    }
    if let Some(o) = &report.oracle {
        let unfaced: Vec<usize> = o.scans.iter().map(|x| x.unfaced).collect();
        writeln!(s, "oracle: unfaced cones per depth {unfaced:?}, interior faced: {}", o.interior_all_faced).unwrap();
        if let Some(a) = o.agrees {
            writeln!(s, "oracle agrees with classifier: {a}").unwrap();
        }
    }
    if let Some(w) = &report.witness {
        writeln!(
            s,
            "witness for {} at lag {}: verified {}, probes joined in preimage: {}",
            w.end, w.lag, w.verified, w.probes_connected
        )
        .unwrap();
    }
    s
}

fn execute(command: &Command) -> Result<(Report, i32), Failure> {
    let opts = command.opts().expect("examples are handled by run");
    let ptp = match load(&opts.input)? {
        Ok(p) => p,
        Err(violations) => return Ok((Report::invalid(&opts.input, violations), EXIT_INVALID)),
    };
    let mut report = Report::analyze(&ptp, opts.assume_fn_stabilizers);
    let mut code = classification_code(&report);
    match command {
        Command::Validate(_) => code = EXIT_OK,
        Command::Analyze(_) | Command::Classify(_) => {
            write_dot(&opts.dot, || dot::viability_dot(&ptp, &classify_ends(&ptp)))?;
        }
        Command::Faces(_) => {
            let end = parse_end(&ptp, opts.end.as_deref(), "--end")?;
            let f = report::faces_report(&ptp, &end);
            if f.error.is_some() {
                code = code.max(EXIT_INCONCLUSIVE);
            }
            report.faces = Some(f);
        }
        Command::Witness(_) => {
            let end = parse_end(&ptp, opts.end.as_deref(), "--end")?;
            let depth = opts.depth.unwrap_or(12) as usize;
            match report::witness_report(&ptp, &end, opts.lag, depth, opts.omega_cap, opts.budget) {
                Ok((w, res)) => {
                    write_dot(&opts.dot, || dot::witness_dot(&res))?;
                    if !(w.verified && w.reverified) || w.probes_connected {
                        code = EXIT_CONSISTENCY;
                    }
                    report.witness = Some(w);
                }
                Err(e @ (WitnessError::TooShallow { .. } | WitnessError::Facing(_))) => {
                    return Err(fail(EXIT_INCONCLUSIVE, e.to_string()))
                }
                Err(WitnessError::Ball(e)) => return Err(ball_failure(e)),
                Err(e) => return Err(fail(EXIT_INVALID, e.to_string())),
            }
        }
        Command::Lift(_) => {
            let ray = parse_end(&ptp, opts.ray.as_deref().or(opts.end.as_deref()), "--ray")?;
            let depth = opts.depth.unwrap_or(4) as usize;
            let (l, pair, tree) = report::lift_report(&ptp, &ray, depth, opts.omega_cap, opts.budget)
                .map_err(|e| fail(EXIT_INVALID, e))?;
            write_dot(&opts.dot, || dot::lift_dot(&pair, &tree))?;
            report.lift = Some(l);
        }
        Command::Expand(_) => {
            let depth = opts.depth.unwrap_or(3);
            let (e, pair) =
                report::expand_report(&ptp, TypeId(0), depth, opts.omega_cap, opts.budget).map_err(ball_failure)?;
            write_dot(&opts.dot, || {
                let hl = Highlight { marked: saturated_marks(&pair), ..Default::default() };
                dot::pair_dot(&pair, ptp.name(), &Highlight::default(), &hl)
            })?;
            report.expand = Some(e);
        }
        Command::Oracle(_) => {
            let depth = opts.depth.unwrap_or(6);
            let (o, pair) = report::oracle_report(&ptp, depth, opts.omega_cap, opts.budget).map_err(ball_failure)?;
            write_dot(&opts.dot, || {
                let hl = Highlight { marked: saturated_marks(&pair), ..Default::default() };
                dot::pair_dot(&pair, ptp.name(), &Highlight::default(), &hl)
            })?;
            if o.agrees == Some(false) || o.connectivity.iter().any(|c| !c.connected) {
                code = code.max(if o.truncated { EXIT_INCONCLUSIVE } else { EXIT_CONSISTENCY });
            }
            report.oracle = Some(o);
        }
        Command::Example { .. } => unreachable!(),
    }
    Ok((report, code))
}

fn example(name: Option<&str>, out: &mut dyn Write) -> Result<(), Failure> {
    match name {
        None => {
            for n in corpus::names() {
                writeln!(out, "{n}").ok();
            }
            Ok(())
        }
        Some(n) => {
            let entry = corpus::load_example(n).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
            write!(out, "{}", entry.document).ok();
            Ok(())
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                write!(err, "{text}").ok();
            } else {
                write!(out, "{text}").ok();
            }
            return code;
        }
    };
    if let Command::Example { name } = &cli.command {
        return match example(name.as_deref(), out) {
            Ok(()) => EXIT_OK,
            Err(f) => {
                writeln!(err, "error: {}", f.message).ok();
                f.code
            }
        };
    }
    let json = cli.command.opts().is_some_and(|o| o.json);
    match execute(&cli.command) {
        Ok((report, code)) => {
            if json {
                writeln!(out, "{}", report.to_json()).ok();
            } else {
                write!(out, "{}", summary(&report, &cli.command)).ok();
            }
            code
        }
        Err(f) => {
            writeln!(err, "error: {}", f.message).ok();
            f.code
        }
    }
}

/// Convenience for tests and bindings: runs and captures both streams.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}
