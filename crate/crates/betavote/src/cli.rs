//! Command-line front end: ballot tallies, winning-weight intervals, axiom
//! checks, and simulations, each wrapped in a reproducible run manifest.
//!
//! Exit codes are a stable contract: 0 success (or criterion holds),
//! 1 criterion falsified, 2 input error, 3 domain error.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ballots::{honest_ballots, parse_election, parse_profile, BallotFormat, Election};
use crate::criteria::{
    check_monotonicity, check_pareto, check_unanimous, dictatorship_probe, verdict_to_json,
    CriterionVerdict,
};
use crate::kanalysis::{interval_report, potential_winners};
use crate::rational::Rational;
use crate::simulate::{run_agreement, SimConfig};
use crate::tally::{beta_score, score, winners, BaseRule, ScoreReport, ScoreVector};
use crate::Error;

/// Tallies elections and analyzes how outcomes move with the first-choice
/// weight.
#[derive(Debug, Parser)]
#[command(name = "betavote", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tally a ballot file under plurality, approval, or beta(k).
    Tally {
        /// Ballot file (.csv or .json).
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = RuleArg::Plurality)]
        rule: RuleArg,
        /// First-choice weight; required for --rule beta, rejected below 1.
        #[arg(long, value_parser = parse_rational_arg)]
        k: Option<Rational>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Exact winning-weight intervals for every candidate, plus the
    /// breakpoints where the winner set changes.
    Intervals {
        /// Ballot file (.csv or .json).
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Check one axiom; exits 0 when it holds, 1 with a witness otherwise.
    Check {
        /// Ballot file, or a profile JSON (required for --criterion pareto).
        file: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// First-choice weight; required except for non_dictatorship.
        #[arg(long, value_parser = parse_rational_arg)]
        k: Option<Rational>,
        /// Seed for the monotonicity fuzzer; required there, unused elsewhere.
        #[arg(long)]
        seed: Option<u64>,
        /// Perturbation budget for sampled monotonicity runs.
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Run the Monte Carlo agreement study described by a config file.
    Simulate {
        /// Simulation config (.json); its seed field is mandatory.
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Plurality,
    Approval,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum CriterionArg {
    NonDictatorship,
    Monotonicity,
    UnanimousWinner,
    Pareto,
}

fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    text.parse().map_err(|e| format!("{e}"))
}

/// Applies the advisory `BETAVOTE_THREADS` cap to the global worker pool.
/// Call once, before any parallel work; unparsable values are ignored.
pub fn configure_threads() {
    if let Ok(text) = std::env::var("BETAVOTE_THREADS") {
        if let Ok(threads) = text.trim().parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// What a command run produced; `main` prints the streams and exits with
/// the code, tests inspect the struct directly.
#[derive(Debug)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        CommandOutput {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Run provenance embedded in every output: the canonical invocation, a
/// content hash of the input file, the seed when one was used, the artifact
/// version, and a wall-clock stamp. Payload sections never depend on the
/// timestamp, so reruns are byte-comparable.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: u64,
}

impl RunManifest {
    fn new(command: String, input: &[u8], seed: Option<u64>) -> Self {
        let digest = Sha256::digest(input);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            write!(hex, "{byte:02x}").unwrap();
        }
        RunManifest {
            command,
            input_digest: format!("sha256:{hex}"),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

fn render_json(manifest: &RunManifest, payload: serde_json::Value) -> String {
    let envelope = serde_json::json!({
        "manifest": manifest,
        "payload": payload,
    });
    let mut text = serde_json::to_string_pretty(&envelope).expect("reports serialize");
    text.push('\n');
    text
}

fn render_tsv(manifest: &RunManifest, payload_rows: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# command\t{}", manifest.command);
    let _ = writeln!(out, "# input_digest\t{}", manifest.input_digest);
    if let Some(seed) = manifest.seed {
        let _ = writeln!(out, "# seed\t{seed}");
    }
    let _ = writeln!(out, "# version\t{}", manifest.version);
    let _ = writeln!(out, "# timestamp\t{}", manifest.timestamp);
    out.push_str(payload_rows);
    out
}

enum Failure {
    /// Unreadable or unparsable input: exit 2.
    Input(String),
    /// Well-formed input outside the domain contract: exit 3.
    Domain(String),
}

impl Failure {
    fn into_output(self) -> CommandOutput {
        let (code, message) = match self {
            Failure::Input(m) => (2, m),
            Failure::Domain(m) => (3, m),
        };
        CommandOutput {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

fn classify(error: Error) -> Failure {
    match error {
        Error::WeightBelowOne { .. }
        | Error::InsufficientVoters { .. }
        | Error::InsufficientCandidates { .. }
        | Error::InvalidConfig { .. }
        | Error::InvalidKExpr { .. } => Failure::Domain(error.to_string()),
        _ => Failure::Input(error.to_string()),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn ballot_format(path: &Path) -> BallotFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => BallotFormat::Json,
        _ => BallotFormat::Csv,
    }
}

fn load_election(path: &Path, bytes: &[u8]) -> Result<Election, Failure> {
    parse_election(bytes, ballot_format(path)).map_err(classify)
}

/// Runs one parsed command to completion. Never panics on user input; all
/// outcomes are encoded in the returned output.
pub fn execute(cli: Cli) -> CommandOutput {
    let result = match cli.command {
        Command::Tally {
            file,
            rule,
            k,
            format,
        } => cmd_tally(&file, rule, k, format),
        Command::Intervals { file, format } => cmd_intervals(&file, format),
        Command::Check {
            file,
            criterion,
            k,
            seed,
            trials,
        } => cmd_check(&file, criterion, k, seed, trials),
        Command::Simulate { config, format } => cmd_simulate(&config, format),
    };
    result.unwrap_or_else(Failure::into_output)
}

fn format_flag(format: FormatArg) -> &'static str {
    match format {
        FormatArg::Json => "json",
        FormatArg::Tsv => "tsv",
    }
}

fn score_rows(election: &Election, scores: &ScoreVector) -> String {
    let winner_set = winners(scores);
    let mut rows = String::from("candidate\tscore\tscore_decimal\twinner\n");
    for j in 0..election.candidate_count() {
        let value = scores.value(j);
        let _ = writeln!(
            rows,
            "{}\t{}\t{}\t{}",
            election.candidates().id(j),
            value,
            value.to_f64(),
            u8::from(winner_set.contains(j)),
        );
    }
    rows
}

fn cmd_tally(
    path: &Path,
    rule: RuleArg,
    k: Option<Rational>,
    format: FormatArg,
) -> Result<CommandOutput, Failure> {
    let bytes = read_input(path)?;
    let election = load_election(path, &bytes)?;
    let (scores, command) = match rule {
        RuleArg::Plurality => (
            score(&election, BaseRule::Plurality),
            format!(
                "tally {} --rule plurality --format {}",
                path.display(),
                format_flag(format)
            ),
        ),
        RuleArg::Approval => (
            score(&election, BaseRule::Approval),
            format!(
                "tally {} --rule approval --format {}",
                path.display(),
                format_flag(format)
            ),
        ),
        RuleArg::Beta => {
            let k = k.ok_or_else(|| {
                Failure::Domain("--k is required when --rule beta".to_string())
            })?;
            (
                beta_score(&election, &k).map_err(classify)?,
                format!(
                    "tally {} --rule beta --k {} --format {}",
                    path.display(),
                    k,
                    format_flag(format)
                ),
            )
        }
    };
    let manifest = RunManifest::new(command, &bytes, None);
    let text = match format {
        FormatArg::Json => {
            let report = ScoreReport::new(&election, &scores);
            render_json(
                &manifest,
                serde_json::to_value(report).expect("score reports serialize"),
            )
        }
        FormatArg::Tsv => render_tsv(&manifest, &score_rows(&election, &scores)),
    };
    Ok(CommandOutput::ok(text))
}

fn cmd_intervals(path: &Path, format: FormatArg) -> Result<CommandOutput, Failure> {
    let bytes = read_input(path)?;
    let election = load_election(path, &bytes)?;
    let report = potential_winners(&election);
    let command = format!(
        "intervals {} --format {}",
        path.display(),
        format_flag(format)
    );
    let manifest = RunManifest::new(command, &bytes, None);

    let breakpoint_row = |k: &Rational| {
        let ids: Vec<&str> = report
            .winners_at(k)
            .into_iter()
            .map(|j| election.candidates().id(j))
            .collect();
        (k.to_string(), k.to_f64(), ids.join(","))
    };

    let text = match format {
        FormatArg::Json => {
            let intervals = interval_report(&election, &report);
            let breakpoints: Vec<serde_json::Value> = report
                .breakpoints()
                .iter()
                .map(|k| {
                    let (exact, decimal, ids) = breakpoint_row(k);
                    serde_json::json!({
                        "k": exact,
                        "k_decimal": decimal,
                        "winners": ids.split(',').filter(|s| !s.is_empty()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            render_json(
                &manifest,
                serde_json::json!({
                    "intervals": serde_json::to_value(intervals).expect("intervals serialize"),
                    "breakpoints": breakpoints,
                }),
            )
        }
        FormatArg::Tsv => {
            let mut rows = String::from("k\tk_decimal\twinners\n");
            for k in report.breakpoints() {
                let (exact, decimal, ids) = breakpoint_row(&k);
                let _ = writeln!(rows, "{exact}\t{decimal}\t{ids}");
            }
            render_tsv(&manifest, &rows)
        }
    };
    Ok(CommandOutput::ok(text))
}

/// Ballot-based checks accept either a ballot file or a profile file; a
/// profile is converted to its honest ballots.
fn load_election_or_profile(path: &Path, bytes: &[u8]) -> Result<Election, Failure> {
    match parse_election(bytes, ballot_format(path)) {
        Ok(election) => Ok(election),
        Err(ballot_error) => match parse_profile(bytes) {
            Ok((roster, profile)) => honest_ballots(&profile, &roster).map_err(classify),
            Err(_) => Err(classify(ballot_error)),
        },
    }
}

fn require_k(k: Option<Rational>, criterion: &str) -> Result<Rational, Failure> {
    k.ok_or_else(|| Failure::Domain(format!("--k is required for --criterion {criterion}")))
}

fn cmd_check(
    path: &Path,
    criterion: CriterionArg,
    k: Option<Rational>,
    seed: Option<u64>,
    trials: u64,
) -> Result<CommandOutput, Failure> {
    let bytes = read_input(path)?;
    let mut extra: Option<serde_json::Value> = None;
    let mut manifest_seed = None;
    let (verdict, command): (CriterionVerdict, String) = match criterion {
        CriterionArg::Pareto => {
            let (roster, profile) = parse_profile(&bytes).map_err(classify)?;
            let k = require_k(k, "pareto")?;
            let verdict = check_pareto(&profile, &roster, &k).map_err(classify)?;
            let command = format!(
                "check {} --criterion pareto --k {}",
                path.display(),
                k
            );
            (verdict, command)
        }
        CriterionArg::UnanimousWinner => {
            let election = load_election_or_profile(path, &bytes)?;
            let k = require_k(k, "unanimous_winner")?;
            let verdict = check_unanimous(&election, &k).map_err(classify)?;
            let command = format!(
                "check {} --criterion unanimous_winner --k {}",
                path.display(),
                k
            );
            (verdict, command)
        }
        CriterionArg::Monotonicity => {
            let election = load_election_or_profile(path, &bytes)?;
            let k = require_k(k, "monotonicity")?;
            let seed = seed.ok_or_else(|| {
                Failure::Domain(
                    "--seed is required for --criterion monotonicity: runs must be reproducible"
                        .to_string(),
                )
            })?;
            manifest_seed = Some(seed);
            let verdict = check_monotonicity(&election, &k, trials, seed).map_err(classify)?;
            let command = format!(
                "check {} --criterion monotonicity --k {} --seed {} --trials {}",
                path.display(),
                k,
                seed,
                trials
            );
            (verdict, command)
        }
        CriterionArg::NonDictatorship => {
            let election = load_election_or_profile(path, &bytes)?;
            let ballots = election.ballots().to_vec();
            let report = dictatorship_probe(
                election.candidate_count(),
                election.voter_count(),
                |v| ballots[v].first_choice(),
            )
            .map_err(classify)?;
            extra = Some(
                serde_json::to_value(&report.outcomes).expect("probe outcomes serialize"),
            );
            let command = format!("check {} --criterion non_dictatorship", path.display());
            (report.verdict, command)
        }
    };

    let mut payload = verdict_to_json(&verdict);
    if let Some(outcomes) = extra {
        payload
            .as_object_mut()
            .expect("verdict payload is an object")
            .insert("outcomes".into(), outcomes);
    }
    let manifest = RunManifest::new(command, &bytes, manifest_seed);
    let stdout = render_json(&manifest, payload);
    Ok(CommandOutput {
        code: i32::from(!verdict.holds),
        stdout,
        stderr: String::new(),
    })
}

fn cmd_simulate(path: &Path, format: FormatArg) -> Result<CommandOutput, Failure> {
    let bytes = read_input(path)?;
    let config = SimConfig::from_json(&bytes).map_err(classify)?;
    let stats = run_agreement(&config).map_err(classify)?;
    let command = format!(
        "simulate {} --format {}",
        path.display(),
        format_flag(format)
    );
    let manifest = RunManifest::new(command, &bytes, config.seed);
    let text = match format {
        FormatArg::Json => render_json(&manifest, stats.to_json()),
        FormatArg::Tsv => render_tsv(&manifest, &stats.to_tsv()),
    };
    Ok(CommandOutput::ok(text))
}
