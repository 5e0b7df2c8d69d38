mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use clique_probe::detector::{derive_params, detect_with, Statistic, SubsetMode};
use clique_probe::fmt::{serialize_sig6, Sig6};
use clique_probe::harness::{self, classify_region, Mode, RunConfig, SweepGrid};
use clique_probe::oracle::{sample_instance, EdgeOracle, Hypothesis};
use clique_probe::recoverer::{recover, verify_estimate, RecoveryOutcome};
use clique_probe::seed::{self, stream};
use clique_probe::solver::{
    build_from_oracle, clique_number, clique_number_at_least, omega_reference,
};
use clique_probe::variant::{
    canonical_strong_strategy, exact_prob_all_false_with, exact_recovery_success,
    lower_bound_prob_all_false, CountMethod, MarkedInstance, QuerySet, RationalReport,
};

#[derive(Parser, Debug)]
#[command(
    name = "clique-probe",
    version,
    about = "Query-budgeted planted clique experiments",
    args_override_self = true
)]
struct Cli {
    /// Flat key=value file; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Base seed for every random stream.
    #[arg(long, global = true, env = "CLIQUE_PROBE_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Nonadaptive detection on one seeded instance.
    Detect(DetectArgs),
    /// Two-step recovery on one seeded planted instance.
    Recover(RecoverArgs),
    /// Exact computations in the marked-set game.
    #[command(subcommand)]
    Variant(VariantCmd),
    /// Monte Carlo sweep over (gamma, delta).
    Sweep(SweepArgs),
    /// Clique number of sampled graphs against the first-moment cap.
    CliqueNumber(CliqueNumberArgs),
    /// Phase-diagram region of (gamma, delta).
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum HypArg {
    Null,
    Planted,
}

impl From<HypArg> for Hypothesis {
    fn from(h: HypArg) -> Self {
        match h {
            HypArg::Null => Hypothesis::Null,
            HypArg::Planted => Hypothesis::Planted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SubsetArg {
    FirstM,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StatisticArg {
    Exact,
    Decision,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Exact => Statistic::Exact,
            StatisticArg::Decision => Statistic::Decision,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Detection,
    Recovery,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Auto,
    Enumerate,
    InclusionExclusion,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct DetectArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 4.0)]
    eps0: f64,
    /// Maximum number of distinct queries; unlimited when absent.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "planted")]
    hypothesis: HypArg,
    #[arg(long, value_enum, default_value = "first-m")]
    subset: SubsetArg,
    /// `exact` reports the clique number of S; `decision` stops at the threshold.
    #[arg(long, value_enum, default_value = "decision")]
    statistic: StatisticArg,
    /// Write the query transcript as JSON lines.
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct RecoverArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 4.0)]
    eps0: f64,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "first-m")]
    subset: SubsetArg,
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantCmd {
    /// Exact probability that every pair query answers false.
    ExactAllFalse(AllFalseArgs),
    /// Exact success probability after q strong pair queries.
    ExactRecovery(ExactRecoveryArgs),
    /// Run the canonical strong-query strategy on a seeded instance.
    Strategy(StrategyArgs),
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AllFalseArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Query pairs as `i-j` separated by commas, e.g. `1-2,3-4`.
    #[arg(long, default_value = "")]
    pairs: String,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ExactRecoveryArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    q: u64,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct StrategyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    q: u64,
    /// Number of seeded instances; trial t uses seeds derived from (seed, t).
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SweepArgs {
    #[arg(long, default_value_t = 65536)]
    n: u32,
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.75")]
    gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.8,1.2")]
    deltas: Vec<f64>,
    /// Trials per arm (detection) or per cell (recovery); 200 / 100 by default.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "detection")]
    mode: ModeArg,
    #[arg(long, default_value_t = 4.0)]
    eps0: f64,
    #[arg(long, value_enum, default_value = "decision")]
    statistic: StatisticArg,
    /// Write every trial record as JSON lines.
    #[arg(long, value_name = "PATH")]
    records: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CliqueNumberArgs {
    #[arg(long)]
    n: u32,
    /// Plant a clique of this size; G(n, 1/2) when absent.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Only decide whether the clique number exceeds the first-moment cap.
    #[arg(long)]
    cap_only: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ClassifyArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Debug)]
enum CliError {
    Core(clique_probe::Error),
    Usage(String),
    Io(io::Error),
}

impl From<clique_probe::Error> for CliError {
    fn from(e: clique_probe::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let raw: Vec<OsString> = std::env::args_os().collect();
    let args = match config::config_path(&raw) {
        Some(path) => match config::load(path.as_ref()) {
            Ok(entries) => config::splice(Cli::command(), raw, &entries),
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
        None => raw,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Prints the fully resolved configuration to stderr in config-file form.
fn log_config(cli: &Cli, command: &str, args: &impl Serialize) {
    let mut lines = vec![
        format!("command = {command}"),
        format!("seed = {}", cli.seed),
    ];
    lines.push(format!("workers = {}", cli.workers));
    if let Some(f) = cli.format {
        lines.push(format!(
            "format = {}",
            f.to_possible_value().unwrap().get_name()
        ));
    }
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(args) {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            lines.push(format!("{k} = {text}"));
        }
    }
    eprintln!("# resolved config\n{}", lines.join("\n"));
}

fn sink(cli: &Cli) -> CliResult<Box<dyn Write>> {
    Ok(match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "format {} is not available for this subcommand",
            f.to_possible_value().unwrap().get_name()
        )))
    }
}

fn write_json(out: &mut dyn Write, v: &impl Serialize) -> CliResult<()> {
    serde_json::to_writer(&mut *out, v).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn subset_mode(s: SubsetArg, seed: u64) -> SubsetMode {
    match s {
        SubsetArg::FirstM => SubsetMode::FirstM,
        SubsetArg::Random => SubsetMode::RandomSeeded(seed),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Cmd::Detect(a) => {
            log_config(cli, "detect", a);
            run_detect(cli, a)
        }
        Cmd::Recover(a) => {
            log_config(cli, "recover", a);
            run_recover(cli, a)
        }
        Cmd::Variant(v) => {
            let name = match v {
                VariantCmd::ExactAllFalse(_) => "variant exact-all-false",
                VariantCmd::ExactRecovery(_) => "variant exact-recovery",
                VariantCmd::Strategy(_) => "variant strategy",
            };
            match v {
                VariantCmd::ExactAllFalse(a) => log_config(cli, name, a),
                VariantCmd::ExactRecovery(a) => log_config(cli, name, a),
                VariantCmd::Strategy(a) => log_config(cli, name, a),
            }
            run_variant(cli, v)
        }
        Cmd::Sweep(a) => {
            log_config(cli, "sweep", a);
            run_sweep(cli, a)
        }
        Cmd::CliqueNumber(a) => {
            log_config(cli, "clique-number", a);
            run_clique_number(cli, a)
        }
        Cmd::Classify(a) => {
            log_config(cli, "classify", a);
            run_classify(cli, a)
        }
    }
}

fn write_transcript(path: &Option<PathBuf>, oracle: &EdgeOracle) -> CliResult<()> {
    if let Some(p) = path {
        oracle.write_transcript(BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn run_detect(cli: &Cli, a: &DetectArgs) -> CliResult<()> {
    let format = format_or(cli, Format::Json, &[Format::Json, Format::Text])?;
    let params = derive_params(a.n, a.k, a.eps0, subset_mode(a.subset, cli.seed))?;
    let inst = sample_instance(a.n, a.k, a.hypothesis.into(), cli.seed)?;
    let mut oracle = EdgeOracle::with_transcript(inst, a.budget, a.transcript.is_some());
    let result = detect_with(&mut oracle, &params, a.statistic.into());
    write_transcript(&a.transcript, &oracle)?;
    let out_v = result?;
    let mut out = sink(cli)?;
    match format {
        Format::Text => writeln!(
            out,
            "{} (witness {} vs threshold {}, {} queries)",
            out_v.decision, out_v.witness_size, out_v.threshold, out_v.queries
        )?,
        _ => write_json(&mut out, &out_v)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RecoverReport<'a> {
    #[serde(flatten)]
    outcome: &'a RecoveryOutcome,
    success: bool,
}

fn run_recover(cli: &Cli, a: &RecoverArgs) -> CliResult<()> {
    let format = format_or(cli, Format::Json, &[Format::Json, Format::Text])?;
    let params = derive_params(a.n, a.k, a.eps0, subset_mode(a.subset, cli.seed))?;
    let inst = sample_instance(a.n, a.k, Hypothesis::Planted, cli.seed)?;
    let mut oracle = EdgeOracle::with_transcript(inst, a.budget, a.transcript.is_some());
    let result = recover(&mut oracle, &params, a.eps0);
    write_transcript(&a.transcript, &oracle)?;
    let outcome = result?;
    let success = verify_estimate(&outcome, oracle.instance())?;
    let mut out = sink(cli)?;
    match format {
        Format::Text => writeln!(
            out,
            "{} (|estimate| = {}, queries {} + {})",
            if success { "recovered" } else { "failed" },
            outcome.estimate.len(),
            outcome.queries_step1,
            outcome.queries_step2
        )?,
        _ => write_json(
            &mut out,
            &RecoverReport {
                outcome: &outcome,
                success,
            },
        )?,
    }
    out.flush()?;
    Ok(())
}

fn parse_pairs(text: &str) -> CliResult<Vec<(u32, u32)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            let parsed = p
                .split_once('-')
                .and_then(|(i, j)| Some((i.trim().parse().ok()?, j.trim().parse().ok()?)));
            parsed.ok_or_else(|| CliError::Usage(format!("bad pair '{p}', expected i-j")))
        })
        .collect()
}

#[derive(Serialize)]
struct AllFalseReport {
    n: u32,
    k: u32,
    q: usize,
    distinct: usize,
    duplicates: bool,
    #[serde(flatten)]
    value: RationalReport,
    lower_bound: RationalReport,
    lower_bound_hypothesis: bool,
}

#[derive(Serialize)]
struct ExactRecoveryReport {
    n: u32,
    k: u32,
    q: u64,
    #[serde(flatten)]
    value: RationalReport,
}

#[derive(Serialize)]
struct StrategyTrial {
    trial: u64,
    marked: Vec<u32>,
    estimate: Vec<u32>,
    success: bool,
}

#[derive(Serialize)]
struct StrategySummary {
    n: u32,
    k: u32,
    q: u64,
    trials: u64,
    successes: u64,
    #[serde(serialize_with = "serialize_sig6")]
    rate: f64,
    exact: RationalReport,
}

fn run_variant(cli: &Cli, v: &VariantCmd) -> CliResult<()> {
    let mut out = sink(cli)?;
    match v {
        VariantCmd::ExactAllFalse(a) => {
            let format = format_or(cli, Format::Text, &[Format::Json, Format::Text])?;
            let qs = QuerySet::new(a.n, &parse_pairs(&a.pairs)?)?;
            let method = match a.method {
                MethodArg::Auto => CountMethod::Auto,
                MethodArg::Enumerate => CountMethod::Enumerate,
                MethodArg::InclusionExclusion => CountMethod::InclusionExclusion,
            };
            let value = RationalReport::new(exact_prob_all_false_with(a.n, a.k, &qs, method)?);
            let lb = lower_bound_prob_all_false(a.n, a.k, qs.len() as u64)?;
            if format == Format::Text {
                writeln!(out, "{}", value.fraction())?;
            } else {
                write_json(
                    &mut out,
                    &AllFalseReport {
                        n: a.n,
                        k: a.k,
                        q: qs.len(),
                        distinct: qs.distinct().len(),
                        duplicates: qs.has_duplicates(),
                        value,
                        lower_bound: lb.value,
                        lower_bound_hypothesis: lb.hypothesis_holds,
                    },
                )?;
            }
        }
        VariantCmd::ExactRecovery(a) => {
            let format = format_or(cli, Format::Text, &[Format::Json, Format::Text])?;
            let value = RationalReport::new(exact_recovery_success(a.n, a.k, a.q)?);
            if format == Format::Text {
                writeln!(out, "{}", value.fraction())?;
            } else {
                write_json(
                    &mut out,
                    &ExactRecoveryReport {
                        n: a.n,
                        k: a.k,
                        q: a.q,
                        value,
                    },
                )?;
            }
        }
        VariantCmd::Strategy(a) => {
            let format = format_or(cli, Format::Json, &[Format::Json, Format::Text])?;
            let exact = RationalReport::new(exact_recovery_success(a.n, a.k, a.q)?);
            let mut successes = 0;
            for t in 0..a.trials {
                let inst = MarkedInstance::sample(a.n, a.k, seed::derive(cli.seed, &[t]))?;
                let fill = seed::derive(cli.seed, &[stream::FILL, t]);
                let estimate = canonical_strong_strategy(&inst, a.q, fill)?;
                let success = estimate == inst.marked();
                successes += u64::from(success);
                if format == Format::Json && a.trials == 1 {
                    write_json(
                        &mut out,
                        &StrategyTrial {
                            trial: t,
                            marked: inst.marked().to_vec(),
                            estimate,
                            success,
                        },
                    )?;
                }
            }
            let rate = successes as f64 / a.trials.max(1) as f64;
            if format == Format::Text {
                writeln!(
                    out,
                    "{successes}/{} succeeded (rate {}), exact {}",
                    a.trials,
                    Sig6Display(rate),
                    exact.fraction()
                )?;
            } else {
                write_json(
                    &mut out,
                    &StrategySummary {
                        n: a.n,
                        k: a.k,
                        q: a.q,
                        trials: a.trials,
                        successes,
                        rate,
                        exact,
                    },
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

struct Sig6Display(f64);

impl std::fmt::Display for Sig6Display {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&clique_probe::fmt::sig6(self.0))
    }
}

fn run_sweep(cli: &Cli, a: &SweepArgs) -> CliResult<()> {
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
    let mode = match a.mode {
        ModeArg::Detection => Mode::Detection,
        ModeArg::Recovery => Mode::Recovery,
    };
    let trials = a.trials.unwrap_or(match mode {
        Mode::Detection => 200,
        Mode::Recovery => 100,
    });
    let grid = SweepGrid {
        n: a.n,
        gammas: a.gammas.clone(),
        deltas: a.deltas.clone(),
        trials,
        base_seed: cli.seed,
        mode,
        eps0: a.eps0,
    };
    let cfg = RunConfig {
        workers: cli.workers,
        statistic: a.statistic.into(),
        subset: SubsetMode::FirstM,
    };
    let result = harness::run_sweep(&grid, &cfg)?;
    let mut out = sink(cli)?;
    match format {
        Format::Json => harness::write_json_lines(&result.rows, &mut out)?,
        _ => harness::write_csv(&result.rows, &mut out)?,
    }
    out.flush()?;
    if let Some(p) = &a.records {
        let mut w = BufWriter::new(File::create(p)?);
        harness::write_json_lines(&result.records, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CliqueNumberRow {
    sample: u64,
    seed: u64,
    n: u32,
    k: Option<u32>,
    /// Exact clique number; absent with `--cap-only`.
    omega: Option<usize>,
    first_moment_cap: u64,
    omega_n: Sig6,
    within_cap: bool,
}

fn run_clique_number(cli: &Cli, a: &CliqueNumberArgs) -> CliResult<()> {
    let format = format_or(cli, Format::Json, &[Format::Json, Format::Text])?;
    let reference = omega_reference(u64::from(a.n))?;
    let cap = reference.first_moment_cap as u64;
    let (h, k) = match a.k {
        Some(k) => (Hypothesis::Planted, k),
        None => (Hypothesis::Null, 1),
    };
    let vertices: Vec<u32> = (1..=a.n).collect();
    let mut out = sink(cli)?;
    for s in 0..a.samples {
        let seed = seed::derive(cli.seed, &[s]);
        let mut oracle = EdgeOracle::new(sample_instance(a.n, k, h, seed)?, None);
        let g = build_from_oracle(&vertices, &mut oracle)?;
        let (omega, within) = if a.cap_only {
            (None, clique_number_at_least(&g, cap as usize + 1).is_none())
        } else {
            let w = clique_number(&g);
            (Some(w), w as u64 <= cap)
        };
        let row = CliqueNumberRow {
            sample: s,
            seed,
            n: a.n,
            k: a.k,
            omega,
            first_moment_cap: cap,
            omega_n: Sig6(reference.omega_n),
            within_cap: within,
        };
        if format == Format::Text {
            match omega {
                Some(w) => writeln!(out, "sample {s}: omega = {w}, cap = {cap}")?,
                None => writeln!(out, "sample {s}: within cap {cap}: {within}")?,
            }
        } else {
            write_json(&mut out, &row)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    #[serde(serialize_with = "serialize_sig6")]
    gamma: f64,
    #[serde(serialize_with = "serialize_sig6")]
    delta: f64,
    classification: harness::Region,
}

fn run_classify(cli: &Cli, a: &ClassifyArgs) -> CliResult<()> {
    let format = format_or(cli, Format::Text, &[Format::Json, Format::Text])?;
    let region = classify_region(a.gamma, a.delta)?;
    let mut out = sink(cli)?;
    if format == Format::Text {
        writeln!(out, "{region}")?;
    } else {
        write_json(
            &mut out,
            &ClassifyReport {
                gamma: a.gamma,
                delta: a.delta,
                classification: region,
            },
        )?;
    }
    out.flush()?;
    Ok(())
}
