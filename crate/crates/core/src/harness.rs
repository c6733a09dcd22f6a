//! Experiment plumbing: sequence sources, configuration, reproducible
//! sweeps and their CSV/JSON reports.
//!
//! Every option value that appears on the command line (`bernoulli:0.3`, `sqrt`,
//! `auto`, `markov:2`) has one string form, used both for parsing and in
//! serialized configs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{chain_machine, prefix_length, sample_prefix, self_generate, ENSEMBLE_TAIL};
use crate::bounds::{horizon_independent_bound, main_redundancy_bound};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::oracle::kappa_bracket;
use crate::predictor::{
    phi_predictor_over_fixed_states, run_predictor_with, ConstantPredictor, LossMode,
    MarkovResolver, PhiPredictor, RunReport, SequentialPredictor,
};
use crate::seq::{load_sequence, BinarySequence, Bit, SourceFormat, Word};
use crate::universal::{
    optimal_M, run_universal, run_universal_traced, DepthSchedule, GrowingContextState, MSchedule,
    TreeStats,
};

/// First line of every CSV this crate writes.
pub const CSV_HEADER: &str = "#ctxpredict-v1";

/// Largest order accepted by the Markov generator.
pub const MAX_MARKOV_ORDER: usize = 20;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_num<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| config_err(format!("{what}: cannot parse {s:?}")))
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Built-in sequence generators.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Zeros,
    /// `0101..`
    Alternating,
    /// A seeded random block of length `p`, repeated.
    Period(usize),
    /// A fixed block, repeated.
    Repeat(Word),
    /// i.i.d. with `Pr{1} = p`.
    Bernoulli(f64),
    /// Order-`k` chain with seeded transition probabilities.
    Markov(usize),
    /// Self-generated chain machine on a uniform prefix of length `aN`,
    /// tail bit 1.
    Chain(f64),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Zeros => f.write_str("zeros"),
            Generator::Alternating => f.write_str("alternating"),
            Generator::Period(p) => write!(f, "period:{p}"),
            Generator::Repeat(w) => write!(f, "repeat:{w}"),
            Generator::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            Generator::Markov(k) => write!(f, "markov:{k}"),
            Generator::Chain(a) => write!(f, "chain:{a}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| arg.ok_or_else(|| config_err(format!("generator {what} needs a parameter")));
        let g = match name {
            "zeros" => Generator::Zeros,
            "alternating" => Generator::Alternating,
            "period" => {
                let p: usize = parse_num("period", need("period")?)?;
                if p == 0 {
                    return Err(config_err("period must be >= 1"));
                }
                Generator::Period(p)
            }
            "repeat" => {
                let w = Word::parse(need("repeat")?)?;
                if w.is_empty() {
                    return Err(config_err("repeat needs a nonempty block"));
                }
                Generator::Repeat(w)
            }
            "bernoulli" => {
                let p: f64 = parse_num("bernoulli", need("bernoulli")?)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(config_err(format!("bernoulli parameter {p} outside [0, 1]")));
                }
                Generator::Bernoulli(p)
            }
            "markov" => {
                let k: usize = parse_num("markov", need("markov")?)?;
                if k > MAX_MARKOV_ORDER {
                    return Err(config_err(format!("markov order {k} above {MAX_MARKOV_ORDER}")));
                }
                Generator::Markov(k)
            }
            "chain" => {
                let a: f64 = parse_num("chain", need("chain")?)?;
                if !(a > 0.0 && a <= 1.0) {
                    return Err(config_err(format!("chain fraction {a} outside (0, 1]")));
                }
                Generator::Chain(a)
            }
            _ => return Err(config_err(format!("unknown generator {s:?}"))),
        };
        Ok(g)
    }
}

string_serde!(Generator);

impl Generator {
    /// The first `n` symbols. Output depends only on `(self, n, seed)`; for
    /// every generator except `chain` it is also a prefix of longer outputs.
    pub fn generate(&self, n: usize, seed: u64) -> Result<BinarySequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = match self {
            Generator::Zeros => vec![Bit::Zero; n],
            Generator::Alternating => (0..n).map(|i| Bit::from_bool(i % 2 == 1)).collect(),
            Generator::Period(p) => {
                let block: Vec<Bit> = (0..*p).map(|_| Bit::from_bool(rng.random())).collect();
                (0..n).map(|i| block[i % p]).collect()
            }
            Generator::Repeat(w) => (0..n).map(|i| w.bits()[i % w.len()]).collect(),
            Generator::Bernoulli(p) => (0..n).map(|_| Bit::from_bool(rng.random::<f64>() < *p)).collect(),
            Generator::Markov(k) => {
                let probs: Vec<f64> = (0..1usize << k).map(|_| rng.random()).collect();
                let mut out = Vec::with_capacity(n);
                let mut ctx = 0usize;
                let mask = (1usize << k) - 1;
                for i in 0..n {
                    let b = if i < *k {
                        rng.random()
                    } else {
                        rng.random::<f64>() < probs[ctx]
                    };
                    out.push(Bit::from_bool(b));
                    ctx = ((ctx << 1) | usize::from(b)) & mask;
                }
                out
            }
            Generator::Chain(a) => {
                if n == 0 {
                    return Ok(BinarySequence::default());
                }
                let k = prefix_length(*a, n)?;
                let prefix = sample_prefix(seed, 0, k);
                return Ok(self_generate(&chain_machine(&prefix, ENSEMBLE_TAIL), n));
            }
        };
        Ok(BinarySequence::new(bits))
    }
}

/// Where a sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Gen { generator: Generator, seed: u64 },
    File { path: PathBuf, format: SourceFormat },
}

impl Source {
    /// The first `n` symbols, or the whole file when `n` is `None`.
    pub fn load(&self, n: Option<usize>) -> Result<BinarySequence> {
        match self {
            Source::Gen { generator, seed } => {
                let n = n.ok_or_else(|| config_err("a generated source needs a length (--N)"))?;
                generator.generate(n, *seed)
            }
            Source::File { path, format } => {
                let bytes = std::fs::read(path).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let x = load_sequence(&bytes, *format)?.sequence;
                match n {
                    None => Ok(x),
                    Some(n) if n <= x.len() => Ok(x.truncated(n)),
                    Some(n) => Err(Error::Range {
                        what: "length",
                        value: n,
                        min: 0,
                        max: x.len(),
                    }),
                }
            }
        }
    }
}

/// State count as a function of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SLaw {
    Fixed(usize),
    /// `ceil(sqrt(N))`
    Sqrt,
    /// `ceil(N^beta)`
    Pow(f64),
    /// `max(1, ceil(a N))`
    Linear(f64),
}

impl fmt::Display for SLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SLaw::Fixed(s) => write!(f, "{s}"),
            SLaw::Sqrt => f.write_str("sqrt"),
            SLaw::Pow(b) => write!(f, "pow:{b}"),
            SLaw::Linear(a) => write!(f, "linear:{a}"),
        }
    }
}

impl FromStr for SLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(b) = s.strip_prefix("pow:") {
            let b: f64 = parse_num("S law exponent", b)?;
            if !(b > 0.0 && b < 1.0) {
                return Err(config_err(format!("S law exponent {b} outside (0, 1)")));
            }
            return Ok(SLaw::Pow(b));
        }
        if let Some(a) = s.strip_prefix("linear:") {
            let a: f64 = parse_num("S law slope", a)?;
            if !(a > 0.0 && a <= 1.0) {
                return Err(config_err(format!("S law slope {a} outside (0, 1]")));
            }
            return Ok(SLaw::Linear(a));
        }
        if s == "sqrt" {
            return Ok(SLaw::Sqrt);
        }
        let v: usize = parse_num("S", s.strip_prefix("fixed:").unwrap_or(s))?;
        if v == 0 {
            return Err(config_err("S must be >= 1"));
        }
        Ok(SLaw::Fixed(v))
    }
}

string_serde!(SLaw);

impl SLaw {
    pub fn states(&self, n: usize) -> usize {
        let s = match self {
            SLaw::Fixed(s) => *s,
            SLaw::Sqrt => {
                let r = n.isqrt();
                if r * r == n {
                    r
                } else {
                    r + 1
                }
            }
            SLaw::Pow(b) => (n as f64).powf(*b).ceil() as usize,
            SLaw::Linear(a) => (a * n as f64).ceil() as usize,
        };
        s.max(1)
    }
}

/// Threshold rule for the universal predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    /// Horizon-dependent, fixed `M`.
    Value(u64),
    /// Horizon-dependent, `M = optimal_M(N, S)`.
    Auto,
    /// Horizon-independent with the given `M(k)`.
    Depth(DepthSchedule),
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Value(m) => write!(f, "{m}"),
            ScheduleSpec::Auto => f.write_str("auto"),
            ScheduleSpec::Depth(DepthSchedule::Doubling) => f.write_str("doubling"),
            ScheduleSpec::Depth(DepthSchedule::Constant(m)) => write!(f, "constant:{m}"),
            ScheduleSpec::Depth(DepthSchedule::Table(v)) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s {
            "auto" => ScheduleSpec::Auto,
            "doubling" => ScheduleSpec::Depth(DepthSchedule::Doubling),
            _ => {
                if let Some(m) = s.strip_prefix("constant:") {
                    ScheduleSpec::Depth(DepthSchedule::Constant(parse_num("M", m)?))
                } else if let Some(t) = s.strip_prefix("table:") {
                    let v = t
                        .split(',')
                        .map(|p| parse_num("M table", p.trim()))
                        .collect::<Result<Vec<u64>>>()?;
                    ScheduleSpec::Depth(DepthSchedule::Table(v))
                } else {
                    ScheduleSpec::Value(parse_num("M", s)?)
                }
            }
        };
        // Reject bad values here rather than at first use.
        spec.resolve(2, 1).map_err(|e| config_err(e.to_string()))?;
        Ok(spec)
    }
}

string_serde!(ScheduleSpec);

impl ScheduleSpec {
    pub fn resolve(&self, n: usize, s: usize) -> Result<MSchedule> {
        match self {
            ScheduleSpec::Value(m) => MSchedule::constant(*m),
            ScheduleSpec::Auto => MSchedule::constant(optimal_M(n.max(1), s.min(n.max(1)))?),
            ScheduleSpec::Depth(d) => MSchedule::depth(d.clone()),
        }
    }
}

/// Which sequential predictor to run.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    Universal,
    Markov(usize),
    Constant(Bit),
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorSpec::Universal => f.write_str("universal"),
            PredictorSpec::Markov(k) => write!(f, "markov:{k}"),
            PredictorSpec::Constant(b) => write!(f, "constant:{b}"),
        }
    }
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "universal" {
            return Ok(PredictorSpec::Universal);
        }
        if let Some(k) = s.strip_prefix("markov:") {
            return Ok(PredictorSpec::Markov(parse_num("markov order", k)?));
        }
        match s {
            "constant:0" => Ok(PredictorSpec::Constant(Bit::Zero)),
            "constant:1" => Ok(PredictorSpec::Constant(Bit::One)),
            _ => Err(config_err(format!("unknown predictor {s:?}"))),
        }
    }
}

string_serde!(PredictorSpec);

impl PredictorSpec {
    /// A fresh online predictor; `schedule` is used by the universal one.
    pub fn build(&self, schedule: &MSchedule) -> Box<dyn SequentialPredictor> {
        match self {
            PredictorSpec::Universal => Box::new(GrowingContextState::new(schedule.clone())),
            PredictorSpec::Markov(k) => Box::new(PhiPredictor::new(MarkovResolver { order: *k })),
            PredictorSpec::Constant(b) => Box::new(ConstantPredictor::new(*b)),
        }
    }
}

fn default_schedule() -> ScheduleSpec {
    ScheduleSpec::Auto
}

fn default_s_law() -> SLaw {
    SLaw::Sqrt
}

fn default_predictor() -> PredictorSpec {
    PredictorSpec::Universal
}

fn default_mode() -> LossMode {
    LossMode::Expected
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: Source,
    /// Horizons. `predict` and `kappa` use the first (a file source may
    /// leave it empty to use the whole file); `sweep` uses all, in order.
    #[serde(default, rename = "N")]
    pub n: Vec<usize>,
    #[serde(default = "default_s_law")]
    pub s_law: SLaw,
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleSpec,
    #[serde(default = "default_predictor")]
    pub predictor: PredictorSpec,
    #[serde(default = "default_mode")]
    pub mode: LossMode,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn first_n(&self) -> Option<usize> {
        self.n.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictOutput {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub predictor: PredictorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<MSchedule>,
    pub error_rate: f64,
    pub report: RunReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeStats>,
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    t: usize,
    k0: usize,
    context: &'a Word,
    q: f64,
    x_next: Bit,
    loss: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    }
}

fn write_csv<R: Serialize>(rows: impl IntoIterator<Item = R>, header: &[&str]) -> Result<String> {
    let mut out = Vec::new();
    out.extend_from_slice(CSV_HEADER.as_bytes());
    out.push(b'\n');
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| config_err(e.to_string()))?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

const TRACE_COLUMNS: [&str; 6] = ["t", "k0", "context", "q", "x_next", "loss"];

/// Runs the configured predictor. Returns the report and, when `traced`,
/// the per-step CSV.
pub fn run_predict(cfg: &ExperimentConfig, traced: bool) -> Result<(PredictOutput, Option<String>)> {
    let x = cfg.source.load(cfg.first_n())?;
    let n = x.len();
    let s = cfg.s_law.states(n.max(1));
    match &cfg.predictor {
        PredictorSpec::Universal => {
            let schedule = cfg.schedule.resolve(n, s)?;
            let run = if traced {
                run_universal_traced(&x, &schedule, cfg.mode)
            } else {
                run_universal(&x, &schedule, cfg.mode)
            };
            let trace = if traced {
                Some(write_csv(
                    run.trace.iter().map(|r| TraceRow {
                        t: r.t,
                        k0: r.k0,
                        context: &r.context,
                        q: r.q,
                        x_next: r.next,
                        loss: r.loss,
                    }),
                    &TRACE_COLUMNS,
                )?)
            } else {
                None
            };
            Ok((
                PredictOutput {
                    n,
                    s,
                    predictor: cfg.predictor.clone(),
                    schedule: Some(schedule),
                    error_rate: run.report.error_rate(),
                    report: run.report,
                    tree: Some(run.tree),
                },
                trace,
            ))
        }
        spec => {
            let mut rows: Vec<(usize, Word, f64, Bit, f64)> = Vec::new();
            let report = match spec {
                PredictorSpec::Markov(k) if !traced => {
                    phi_predictor_over_fixed_states(MarkovResolver { order: *k }, &x, cfg.mode)
                }
                _ => {
                    let mut p = spec.build(&MSchedule::constant(1)?);
                    run_predictor_with(&mut p, &x, cfg.mode, |t, pred, actual| {
                        if traced {
                            let loss = match actual {
                                Bit::One => 1.0 - pred.q,
                                Bit::Zero => pred.q,
                            };
                            rows.push((t - 1, pred.state.clone(), pred.q, actual, loss));
                        }
                    })?
                }
            };
            let trace = if traced {
                Some(write_csv(
                    rows.iter().map(|(t, w, q, b, l)| TraceRow {
                        t: *t,
                        k0: w.len(),
                        context: w,
                        q: *q,
                        x_next: *b,
                        loss: *l,
                    }),
                    &TRACE_COLUMNS,
                )?)
            } else {
                None
            };
            Ok((
                PredictOutput {
                    n,
                    s,
                    predictor: spec.clone(),
                    schedule: None,
                    error_rate: report.error_rate(),
                    report,
                    tree: None,
                },
                trace,
            ))
        }
    }
}

/// One horizon of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    /// `M`, or `M(S)` for a horizon-independent schedule.
    #[serde(rename = "M")]
    pub m: u64,
    pub error_rate: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    /// `error_rate - kappa_lower`.
    pub redundancy: f64,
    pub theory_bound: f64,
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "N",
    "S",
    "M",
    "error_rate",
    "kappa_lower",
    "kappa_upper",
    "redundancy",
    "theory_bound",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        write_csv(&self.rows, &SWEEP_COLUMNS).expect("in-memory csv")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }
}

pub fn sweep_row(cfg: &ExperimentConfig, n: usize) -> Result<SweepRow> {
    if n == 0 {
        return Err(config_err("sweep horizons must be >= 1"));
    }
    let x = cfg.source.load(Some(n))?;
    let s = cfg.s_law.states(n);
    let schedule = cfg.schedule.resolve(n, s)?;
    let run = run_universal(&x, &schedule, cfg.mode);
    let error_rate = run.report.error_rate();
    let k = kappa_bracket(&x, s)?;
    let (m, theory_bound) = match &schedule {
        MSchedule::HorizonDependent { m } => (*m, main_redundancy_bound(*m, s as u64, n as u64)?),
        MSchedule::HorizonIndependent { m } => {
            (m.at(s), horizon_independent_bound(n as u64, s as u64, m)?)
        }
    };
    Ok(SweepRow {
        n,
        s,
        m,
        error_rate,
        kappa_lower: k.lower,
        kappa_upper: k.upper,
        redundancy: error_rate - k.lower,
        theory_bound,
    })
}

/// Rows for every horizon in `cfg.n`, computed in parallel under `exec`
/// and reported in input order.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepReport> {
    let rows = map_slice(&cfg.n, exec, |&n| sweep_row(cfg, n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        rows,
    })
}

/// Writes `contents` to `path`.
pub fn persist(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(g: &str, seed: u64) -> Source {
        Source::Gen {
            generator: g.parse().unwrap(),
            seed,
        }
    }

    fn cfg(source: Source, n: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            source,
            n,
            s_law: SLaw::Sqrt,
            schedule: ScheduleSpec::Auto,
            predictor: PredictorSpec::Universal,
            mode: LossMode::Expected,
            out: None,
            trace: None,
        }
    }

    #[test]
    fn specs_round_trip() {
        for g in ["zeros", "alternating", "period:5", "repeat:0110", "bernoulli:0.3", "markov:2", "chain:0.5"] {
            assert_eq!(g.parse::<Generator>().unwrap().to_string(), g);
        }
        for l in ["4", "sqrt", "pow:0.5", "linear:1"] {
            assert_eq!(l.parse::<SLaw>().unwrap().to_string(), l);
        }
        for m in ["16", "auto", "doubling", "constant:8", "table:2,4,8"] {
            assert_eq!(m.parse::<ScheduleSpec>().unwrap().to_string(), m);
        }
        for p in ["universal", "markov:3", "constant:1"] {
            assert_eq!(p.parse::<PredictorSpec>().unwrap().to_string(), p);
        }
        assert!("bernoulli:2".parse::<Generator>().is_err());
        assert!("0".parse::<ScheduleSpec>().is_err());
        assert!("table:4,2".parse::<ScheduleSpec>().is_err());
        assert!("pow:1.5".parse::<SLaw>().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = cfg(gen("markov:2", 3), vec![64, 128]);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let minimal = r#"{"source":{"gen":{"generator":"zeros","seed":0}},"N":[8]}"#;
        assert_eq!(ExperimentConfig::from_json(minimal).unwrap().schedule, ScheduleSpec::Auto);
    }

    #[test]
    fn generators_are_deterministic_prefixes() {
        for g in ["period:7", "bernoulli:0.3", "markov:3", "alternating"] {
            let g: Generator = g.parse().unwrap();
            let long = g.generate(500, 11).unwrap();
            assert_eq!(g.generate(200, 11).unwrap().bits(), long.prefix(200));
        }
        let chain = Generator::Chain(0.5).generate(16, 1).unwrap();
        assert!(chain.bits()[8..].iter().all(|&b| b == Bit::One));
        assert_eq!(SLaw::Sqrt.states(1024), 32);
        assert_eq!(SLaw::Sqrt.states(1025), 33);
        assert_eq!(SLaw::Linear(0.5).states(9), 5);
    }

    #[test]
    fn alternating_predict_is_accurate() {
        let (out, trace) = run_predict(&cfg(gen("alternating", 0), vec![4096]), true).unwrap();
        assert!(out.error_rate < 0.05);
        let trace = trace.unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("t,k0,context,q,x_next,loss"));
        assert_eq!(lines.count(), 4096);
    }

    #[test]
    fn markov_baseline_matches_direct_run() {
        let mut c = cfg(gen("bernoulli:0.4", 5), vec![300]);
        c.predictor = PredictorSpec::Markov(2);
        let x = c.source.load(Some(300)).unwrap();
        let direct = phi_predictor_over_fixed_states(MarkovResolver { order: 2 }, &x, LossMode::Expected);
        let (plain, _) = run_predict(&c, false).unwrap();
        let (traced, _) = run_predict(&c, true).unwrap();
        assert_eq!(plain.report.step_losses, direct.step_losses);
        assert_eq!(traced.report.step_losses, direct.step_losses);
    }

    #[test]
    fn sweep_rows_are_consistent_and_ordered() {
        let c = cfg(gen("bernoulli:0.2", 9), vec![256, 64, 128]);
        let r = run_sweep(&c, Execution::default()).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.n).collect::<Vec<_>>(), [256, 64, 128]);
        for row in &r.rows {
            assert!((row.redundancy - (row.error_rate - row.kappa_lower)).abs() < 1e-12);
            assert!(row.kappa_lower <= row.kappa_upper);
        }
        assert_eq!(r.to_csv(), run_sweep(&c, Execution::Sequential).unwrap().to_csv());
        let empty = run_sweep(&cfg(gen("zeros", 0), vec![]), Execution::default()).unwrap();
        assert_eq!(empty.to_csv(), format!("{CSV_HEADER}\n{}\n", SWEEP_COLUMNS.join(",")));
    }

    #[test]
    fn file_source_errors() {
        let missing = Source::File {
            path: "/nonexistent/x.bits".into(),
            format: SourceFormat::Ascii,
        };
        assert_eq!(missing.load(None).unwrap_err().kind(), "io");
        assert_eq!(gen("zeros", 0).load(None).unwrap_err().kind(), "config");
    }
}
