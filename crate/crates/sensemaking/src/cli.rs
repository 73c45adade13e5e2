//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error
//! (impossible or conflicting evidence, a failed oracle check).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sensemaking_core::graphical_model::{posterior, Evidence, InferenceError};
use sensemaking_core::memory_network::{CamError, Cue};
use sensemaking_core::oracle::{
    enumerate_joint, min_energy_states, settled_matches_minimizer, OracleError, MAX_FREE_UNITS,
};
use sensemaking_core::sensemaking_loop::{run_sensemaking, LoopError};
use serde_json::{json, Value};

use crate::report;
use crate::scenario::{fixture, parse_file, Scenario, FIXTURES};

/// Largest engine/oracle disagreement `oracle --check` accepts.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "sensemaking", version, about = "Frames, Bayesian inference and memory relaxation for sensemaking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Args)]
struct Global {
    /// Emit canonical JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Convergence tolerance for settling
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,
    /// Sweep budget for settling
    #[arg(long, global = true, value_name = "N")]
    max_sweeps: Option<usize>,
    /// Round budget for the sensemaking loop
    #[arg(long, global = true, value_name = "N")]
    max_rounds: Option<usize>,
    /// Accepted for compatibility; every command is deterministic
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and cross-check a scenario
    Validate {
        /// Scenario file, or the name of a bundled fixture
        file: String,
        /// Print the canonical form of the file
        #[arg(long)]
        canonical: bool,
    },
    /// Posterior marginals under hard evidence
    Infer {
        file: String,
        /// Observation VAR=STATE (repeatable)
        #[arg(long, value_name = "VAR=STATE", num_args = 1..)]
        evidence: Vec<String>,
        /// Variable to report (repeatable; default all)
        #[arg(long, value_name = "VAR", num_args = 1..)]
        query: Vec<String>,
    },
    /// Settle the memory network under clamps
    Settle {
        file: String,
        /// Clamp UNIT=VALUE, or UNIT for the upper bound (repeatable; default the file's cue)
        #[arg(long, value_name = "UNIT[=VALUE]", num_args = 1..)]
        clamp: Vec<String>,
    },
    /// Run the cue, settle, infer, decide loop
    Sensemake {
        file: String,
        /// Cued unit, clamped at the upper bound (repeatable; default the file's cue)
        #[arg(long, value_name = "UNIT[=VALUE]", num_args = 1..)]
        cue: Vec<String>,
    },
    /// Brute-force references for the scenario
    Oracle {
        file: String,
        /// Compare the engines against the references and fail on disagreement
        #[arg(long)]
        check: bool,
    },
    /// List the bundled fixtures
    Fixtures,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::ImpossibleEvidence => Failure::Runtime(format!("ImpossibleEvidence: {e}")),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<CamError> for Failure {
    fn from(e: CamError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<LoopError> for Failure {
    fn from(e: LoopError) -> Self {
        match e {
            LoopError::ImpossibleEvidence { round, .. } => {
                Failure::Runtime(format!("ImpossibleEvidence: evidence held after round {round} has probability zero"))
            }
            LoopError::ConflictingEvidence { .. } => Failure::Runtime(format!("ConflictingEvidence: {e}")),
            LoopError::Inference(i) => i.into(),
            other => Failure::Validation(other.to_string()),
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let json = cli.global.json;
    match &cli.command {
        Command::Fixtures => Ok(FIXTURES.iter().map(|(n, _)| format!("{n}\n")).collect()),
        Command::Validate { file, canonical } => {
            let s = load(file, &cli.global)?;
            if *canonical {
                return Ok(s.to_canonical_json());
            }
            let summary = json!({
                "edges": s.net.as_ref().map_or(0, |n| n.edges().len()),
                "frames": s.frames.as_ref().map_or(0, |f| f.graph.frames().len()),
                "links": s.cam.as_ref().map_or(0, |c| c.links().len()),
                "units": s.cam.as_ref().map_or(0, |c| c.len()),
                "valid": true,
                "variables": s.net.as_ref().map_or(0, |n| n.len()),
            });
            if json {
                return Ok(report::canonical(&summary));
            }
            Ok(format!(
                "ok: {} variables, {} edges, {} frames, {} units, {} links\n",
                summary["variables"], summary["edges"], summary["frames"], summary["units"], summary["links"]
            ))
        }
        Command::Infer { file, evidence, query } => {
            let s = load(file, &cli.global)?;
            let net = s
                .net
                .as_ref()
                .ok_or_else(|| Failure::Validation("scenario has no network".into()))?;
            let mut ev = Evidence::new();
            for item in evidence {
                let (var, state) = item
                    .split_once('=')
                    .ok_or_else(|| Failure::Validation(format!("evidence `{item}` is not VAR=STATE")))?;
                if let Some(prev) = ev.insert(var, state) {
                    if prev != state {
                        return Err(Failure::Validation(format!("`{var}` observed as both `{prev}` and `{state}`")));
                    }
                }
            }
            let queries: Vec<String> = if query.is_empty() {
                net.variables().iter().map(|v| v.name().to_string()).collect()
            } else {
                query.clone()
            };
            let mut posteriors = BTreeMap::new();
            for q in &queries {
                posteriors.insert(q.clone(), posterior(net, &ev, q)?);
            }
            if json {
                return Ok(report::canonical(&report::infer(&ev, &posteriors)));
            }
            // text keeps the requested query order
            Ok(queries.iter().map(|q| report::distribution_text(&posteriors[q])).collect())
        }
        Command::Settle { file, clamp } => {
            let s = load(file, &cli.global)?;
            let cam = s
                .cam
                .as_ref()
                .ok_or_else(|| Failure::Validation("scenario has no memories".into()))?;
            let cue = if clamp.is_empty() { s.default_cue() } else { parse_cue(clamp, s.dynamics.max)? };
            let cued = cam.clamp(&cue)?;
            let result = cued.settle();
            let sign = cued.synthesize_sign(&result, s.loop_params.theta_on)?;
            if json {
                return Ok(report::canonical(&report::settle(&result, &sign)));
            }
            Ok(report::settle_text(&result, &sign))
        }
        Command::Sensemake { file, cue } => {
            let s = load(file, &cli.global)?;
            let spec = s
                .spec
                .as_ref()
                .ok_or_else(|| Failure::Validation("scenario has no decision rule".into()))?;
            let cue = if cue.is_empty() { s.default_cue() } else { parse_cue(cue, s.dynamics.max)? };
            let d = run_sensemaking(spec, &cue)?;
            if json {
                return Ok(report::canonical(&report::decision(&d)));
            }
            Ok(report::decision_text(&d))
        }
        Command::Oracle { file, check } => oracle(&load(file, &cli.global)?, *check, json),
    }
}

fn load(file: &str, global: &Global) -> Result<Scenario, Failure> {
    let text = if Path::new(file).exists() {
        std::fs::read_to_string(PathBuf::from(file)).map_err(|e| Failure::Validation(format!("{file}: {e}")))?
    } else if let Some(text) = fixture(file) {
        text.to_string()
    } else {
        let names: Vec<&str> = FIXTURES.iter().map(|(n, _)| *n).collect();
        return Err(Failure::Validation(format!(
            "{file}: no such file or fixture (fixtures: {})",
            names.join(", ")
        )));
    };
    let mut parsed = parse_file(&text).map_err(|d| Failure::Validation(d.to_string()))?;
    if let Some(t) = global.tol {
        parsed.params.tol = Some(t);
    }
    if let Some(n) = global.max_sweeps {
        parsed.params.max_sweeps = Some(n);
    }
    if let Some(n) = global.max_rounds {
        parsed.params.max_rounds = Some(n);
    }
    Scenario::from_file(parsed).map_err(|d| Failure::Validation(d.to_string()))
}

fn parse_cue(items: &[String], max: f64) -> Result<Cue, Failure> {
    let mut cue = Cue::new();
    for item in items {
        match item.split_once('=') {
            None => cue = cue.clamp(item.clone(), max),
            Some((unit, value)) => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Failure::Validation(format!("clamp `{item}`: `{value}` is not a number")))?;
                cue = cue.clamp(unit, v);
            }
        }
    }
    Ok(cue)
}

fn oracle(s: &Scenario, check: bool, json: bool) -> Result<String, Failure> {
    let mut doc = serde_json::Map::new();
    let mut lines = Vec::new();
    let mut failed = false;

    if let Some(net) = &s.net {
        // no evidence, then every single observation
        let mut cases = vec![Evidence::new()];
        for v in net.variables() {
            for state in v.states() {
                cases.push(Evidence::new().with(v.name(), state.clone()));
            }
        }
        let (mut queries, mut impossible, mut worst) = (0usize, 0usize, 0.0f64);
        for ev in &cases {
            for v in net.variables() {
                match (posterior(net, ev, v.name()), enumerate_joint(net, ev, v.name())) {
                    (Ok(a), Ok(b)) => {
                        queries += 1;
                        worst = worst.max(a.max_abs_diff(&b));
                    }
                    (Err(InferenceError::ImpossibleEvidence), Err(OracleError::Inference(InferenceError::ImpossibleEvidence))) => {
                        impossible += 1;
                    }
                    (Err(_), Err(OracleError::TooLarge(n))) => {
                        return Err(Failure::Runtime(format!("joint of {n} states is too large to enumerate")));
                    }
                    _ => {
                        queries += 1;
                        worst = f64::INFINITY;
                    }
                }
            }
        }
        let ok = worst < CHECK_TOLERANCE;
        failed |= !ok;
        doc.insert(
            "network".into(),
            json!({
                "impossible": impossible,
                "max_deviation": report::scientific(worst),
                "ok": ok,
                "queries": queries,
            }),
        );
        lines.push(format!(
            "network: {queries} queries ({impossible} impossible), max |elimination - enumeration| = {worst:.3e}{}",
            verdict(check, ok)
        ));
    }

    if let Some(cam) = &s.cam {
        let cued = cam.clamp(&s.default_cue())?;
        let theta = s.loop_params.theta_on;
        match min_energy_states(&cued, theta) {
            Ok(land) => {
                let settled = cued.settle();
                let ok = settled_matches_minimizer(&cued, &settled, &land, theta);
                failed |= !ok;
                let pattern: Vec<&str> = cued.active_attributes(&settled, theta);
                let mut entry = report::landscape(&land);
                entry["ok"] = Value::Bool(ok);
                entry["settled_attributes"] = json!(pattern);
                doc.insert("memory".into(), entry);
                lines.push(format!(
                    "memory: {} free units, min energy {} with {} minimizer{}; settled attributes [{}]{}",
                    land.free_units.len(),
                    report::fmt9(land.min_energy),
                    land.minimizers.len(),
                    if land.minimizers.len() == 1 { "" } else { "s" },
                    pattern.join(", "),
                    verdict(check, ok)
                ));
                for m in &land.minimizers {
                    lines.push(format!("  minimizer: [{}]", land.active_units(m).join(", ")));
                }
            }
            Err(OracleError::TooLarge(_)) => {
                doc.insert("memory".into(), json!({ "skipped": format!("more than {MAX_FREE_UNITS} free units") }));
                lines.push(format!("memory: skipped, more than {MAX_FREE_UNITS} free units"));
            }
            Err(e) => return Err(Failure::Validation(e.to_string())),
        }
    }

    if check && failed {
        let text = if json { report::canonical(&Value::Object(doc)) } else { lines.join("\n") + "\n" };
        return Err(Failure::Runtime(format!("oracle check failed\n{text}")));
    }
    if json {
        return Ok(report::canonical(&Value::Object(doc)));
    }
    Ok(lines.join("\n") + "\n")
}

fn verdict(check: bool, ok: bool) -> &'static str {
    match (check, ok) {
        (false, _) => "",
        (true, true) => " [ok]",
        (true, false) => " [FAIL]",
    }
}
