//! `ctxpredict`: batch experiments with the universal context-tree predictor.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxpredict::adversary::{ensemble_experiment, exhaustive_ensemble, prefix_length};
use ctxpredict::bounds::BoundReport;
use ctxpredict::exec::Execution;
use ctxpredict::harness::{
    persist, run_predict, run_sweep, ExperimentConfig, Generator, PredictorSpec, SLaw,
    ScheduleSpec, Source,
};
use ctxpredict::oracle::{brute_force_kappa, kappa_bracket};
use ctxpredict::predictor::LossMode;
use ctxpredict::seq::SourceFormat;
use ctxpredict::universal::{optimal_M, MSchedule};
use ctxpredict::{Error, Result};

#[derive(Parser)]
#[command(name = "ctxpredict", version, about = "Universal context-tree prediction of binary sequences")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a predictor on one sequence and report its errors.
    Predict(PredictArgs),
    /// Bracket the S-state predictability of a sequence.
    Kappa(KappaArgs),
    /// Error rate, predictability and theory bound over several horizons.
    Sweep(SweepArgs),
    /// Run a predictor against the chain-machine ensemble.
    Adversary(AdversaryArgs),
    /// Evaluate the closed-form redundancy bounds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Expected,
    Sampled,
}

#[derive(Args)]
struct SourceArgs {
    /// Sequence file.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Built-in generator: zeros, alternating, period:P, repeat:BITS,
    /// bernoulli:P, markov:K, chain:A.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long, value_enum, default_value = "ascii")]
    format: Format,
    /// Seed for generators and sampled losses.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ModelArgs {
    /// State count: a number, sqrt, pow:B or linear:A.
    #[arg(long = "S", visible_alias = "S-law", default_value = "sqrt")]
    s: String,
    /// Threshold: a number or auto.
    #[arg(long = "M", default_value = "auto")]
    m: String,
    /// Horizon-independent thresholds: doubling, constant:M or table:M1,M2,..
    #[arg(long = "M-schedule")]
    m_schedule: Option<String>,
    #[arg(long, value_enum, default_value = "expected")]
    mode: Mode,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Sequence length (required with --gen; truncates a file).
    #[arg(long = "N")]
    n: Option<String>,
    /// universal, markov:K or constant:B.
    #[arg(long, visible_alias = "baseline", default_value = "universal")]
    predictor: String,
    /// JSON experiment config; replaces the source and model flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for the per-step trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "S")]
    s: usize,
    /// Also compute the exact value by enumeration (small inputs only).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated horizons; `2^k` allowed.
    #[arg(long = "N", default_value = "")]
    n: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output (report with the config echoed).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Fraction of the sequence given by the random prefix.
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "universal")]
    predictor: String,
    /// Threshold for the universal predictor: a number or auto.
    #[arg(long = "M", default_value = "auto")]
    m: String,
    #[arg(long = "M-schedule")]
    m_schedule: Option<String>,
    /// Enumerate every prefix instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// One horizon (JSON report) or a comma-separated list (CSV).
    #[arg(long = "N")]
    n: String,
    #[arg(long = "S", default_value = "sqrt")]
    s: String,
    #[arg(long = "M", default_value = "auto")]
    m: String,
    #[arg(long = "M-schedule", default_value = "doubling")]
    m_schedule: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse()
}

fn parse_horizon(s: &str) -> Result<usize> {
    let s = s.trim();
    let bad = || Error::Config(format!("bad horizon {s:?}"));
    if let Some(e) = s.strip_prefix("2^") {
        let e: u32 = e.parse().map_err(|_| bad())?;
        return 1usize.checked_shl(e).filter(|_| e < usize::BITS).ok_or_else(bad);
    }
    s.parse().map_err(|_| bad())
}

fn parse_horizons(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_horizon)
        .collect()
}

fn source(args: &SourceArgs) -> Result<Source> {
    match (&args.input, &args.gen) {
        (Some(path), None) => Ok(Source::File {
            path: path.clone(),
            format: match args.format {
                Format::Ascii => SourceFormat::Ascii,
                Format::Raw => SourceFormat::Raw,
            },
        }),
        (None, Some(g)) => Ok(Source::Gen {
            generator: parse::<Generator>(g)?,
            seed: args.seed,
        }),
        _ => Err(Error::Config("give exactly one of --input or --gen".into())),
    }
}

fn schedule_spec(m: &str, m_schedule: Option<&str>) -> Result<ScheduleSpec> {
    match m_schedule {
        Some(sch) => match parse::<ScheduleSpec>(sch)? {
            d @ ScheduleSpec::Depth(_) => Ok(d),
            _ => Err(Error::Config(format!("--M-schedule {sch:?} is not a depth schedule"))),
        },
        None => match parse::<ScheduleSpec>(m)? {
            ScheduleSpec::Depth(_) => Err(Error::Config(format!("--M {m:?}: use --M-schedule"))),
            spec => Ok(spec),
        },
    }
}

fn mode(mode: Mode, seed: u64) -> LossMode {
    match mode {
        Mode::Expected => LossMode::Expected,
        Mode::Sampled => LossMode::Sampled { seed },
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_json(&text)
}

fn experiment(
    config: Option<&Path>,
    src: &SourceArgs,
    model: &ModelArgs,
    n: Vec<usize>,
    predictor: PredictorSpec,
) -> Result<ExperimentConfig> {
    if let Some(path) = config {
        return load_config(path);
    }
    Ok(ExperimentConfig {
        source: source(src)?,
        n,
        s_law: parse::<SLaw>(&model.s)?,
        schedule: schedule_spec(&model.m, model.m_schedule.as_deref())?,
        predictor,
        mode: mode(model.mode, src.seed),
        out: None,
        trace: None,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => persist(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let n = a.n.as_deref().map(parse_horizon).transpose()?;
    let cfg = experiment(
        a.config.as_deref(),
        &a.source,
        &a.model,
        n.into_iter().collect(),
        parse::<PredictorSpec>(&a.predictor)?,
    )?;
    let trace_path = a.trace.or_else(|| cfg.trace.clone());
    let (out, trace) = run_predict(&cfg, trace_path.is_some())?;
    if let (Some(path), Some(csv)) = (&trace_path, trace) {
        persist(path, &csv)?;
    }
    let json = serde_json::to_string_pretty(&out).expect("report serializes");
    emit(a.out.or(cfg.out).as_deref(), &json)
}

fn cmd_kappa(a: KappaArgs) -> Result<()> {
    let n = a.n.as_deref().map(parse_horizon).transpose()?;
    let x = source(&a.source)?.load(n)?;
    // Checked first so an oversized request fails before any work.
    let exact = if a.exact {
        Some(brute_force_kappa(&x, a.s)?)
    } else {
        None
    };
    let bracket = kappa_bracket(&x, a.s)?;
    let mut v = serde_json::to_value(&bracket).expect("bracket serializes");
    if let Some(e) = exact {
        v["exact"] = serde_json::to_value(e).expect("exact value serializes");
    }
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&v).expect("json"))
}

fn cmd_sweep(a: SweepArgs, exec: Execution) -> Result<()> {
    let cfg = experiment(
        a.config.as_deref(),
        &a.source,
        &a.model,
        parse_horizons(&a.n)?,
        PredictorSpec::Universal,
    )?;
    let report = run_sweep(&cfg, exec)?;
    if let Some(path) = &a.json {
        persist(path, &report.to_json())?;
    }
    emit(a.out.or(cfg.out).as_deref(), &report.to_csv())
}

fn cmd_adversary(a: AdversaryArgs, exec: Execution) -> Result<()> {
    let k = prefix_length(a.a, a.n)?;
    let spec = schedule_spec(&a.m, a.m_schedule.as_deref())?;
    let schedule = spec.resolve(a.n, k + 1)?;
    let predictor = parse::<PredictorSpec>(&a.predictor)?;
    let factory = || predictor.build(&schedule);
    let report = if a.exact {
        exhaustive_ensemble(a.a, a.n, factory, exec)?
    } else {
        ensemble_experiment(a.a, a.n, a.samples, factory, a.seed, exec)?
    };
    emit(a.out.as_deref(), &report.to_json())
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    let ns = parse_horizons(&a.n)?;
    if ns.is_empty() {
        return Err(Error::Config("--N needs at least one horizon".into()));
    }
    let law = parse::<SLaw>(&a.s)?;
    let depth = match parse::<ScheduleSpec>(&a.m_schedule)? {
        ScheduleSpec::Depth(d) => d,
        _ => return Err(Error::Config("--M-schedule must be a depth schedule".into())),
    };
    let m_spec = schedule_spec(&a.m, None)?;
    let reports = ns
        .iter()
        .map(|&n| {
            let s = law.states(n);
            let m = match m_spec.resolve(n, s)? {
                MSchedule::HorizonDependent { m } => m,
                MSchedule::HorizonIndependent { .. } => optimal_M(n, s)?,
            };
            BoundReport::new(n as u64, s as u64, m, depth.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    if let [only] = reports.as_slice() {
        return emit(a.out.as_deref(), &only.to_json());
    }
    let mut csv = String::from("#ctxpredict-v1\nN,S,M,main_bound,psi,horizon_independent_bound\n");
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.s, r.m, r.main_bound, r.psi, r.horizon_independent_bound
        ));
    }
    emit(a.out.as_deref(), &csv)
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Kappa(a) => cmd_kappa(a),
        Command::Sweep(a) => cmd_sweep(a, exec),
        Command::Adversary(a) => cmd_adversary(a, exec),
        Command::Bounds(a) => cmd_bounds(a),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
