//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 insufficient
//! events. Outputs are rendered in memory and written in one go, so a
//! failing command never leaves a partial file behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::agent::{run_strategy, AgentRules, Policy};
use crate::dissect::{coastline, dissect};
use crate::error::{Error, Result};
use crate::ingest::{self, HeaderMode, PriceSide, TickFormat, TickSource};
use crate::scaling::{
    dc_count_law, overshoot_law, tail_exponent, LawOptions, TailMethod, ThresholdGrid, DEFAULT_MIN_COUNT,
};
use crate::synth::{generate_pareto, generate_series, GeneratorSpec, Process};
use crate::types::{DissectionConfig, Event, PricePoint, ReturnConvention, Tick};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INSUFFICIENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "coastline",
    version,
    about = "Directional-change dissection and scaling-law fits for price series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit directional-change and overshoot events.
    Dissect(DissectArgs),
    /// Emit the event coastline and its total length.
    Coastline(DissectArgs),
    /// Fit a scaling law over a threshold grid.
    Fit(FitArgs),
    /// Write a synthetic series.
    Generate(GenerateArgs),
    /// Run the demonstration agent over the event stream.
    AgentSim(AgentArgs),
    /// Tick count, time span and gap summary.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Bid,
    Ask,
    Mid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Fractional,
    Logarithmic,
}

impl From<Convention> for ReturnConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Fractional => ReturnConvention::Fractional,
            Convention::Logarithmic => ReturnConvention::Logarithmic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Tick CSV (`time,bid,ask` or `time,price`).
    #[arg(long)]
    input: PathBuf,
    /// Which side of the quote to dissect.
    #[arg(long, value_enum, default_value = "mid")]
    price_side: Side,
    /// Single-byte field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Treat the first row as a header (default: auto-detect).
    #[arg(long, conflicts_with = "no_header")]
    header: bool,
    #[arg(long)]
    no_header: bool,
    /// Drop ticks whose relative spread exceeds this fraction.
    #[arg(long)]
    max_spread: Option<f64>,
}

impl InputArgs {
    fn format(&self) -> Result<TickFormat> {
        let delimiter = match self.delimiter.as_bytes() {
            [b] => *b,
            _ if self.delimiter == "\\t" || self.delimiter == "tab" => b'\t',
            _ => return Err(Error::param("delimiter", "must be a single byte")),
        };
        if let Some(s) = self.max_spread {
            if s.is_nan() || s < 0.0 {
                return Err(Error::param("max-spread", format!("must be non-negative, got {s}")));
            }
        }
        let header = match (self.header, self.no_header) {
            (true, _) => HeaderMode::Present,
            (_, true) => HeaderMode::Absent,
            _ => HeaderMode::Auto,
        };
        Ok(TickFormat {
            delimiter,
            header,
            layout: None,
            max_spread: self.max_spread,
        })
    }

    fn side(&self) -> PriceSide {
        match self.price_side {
            Side::Bid => PriceSide::Bid,
            Side::Ask => PriceSide::Ask,
            Side::Mid => PriceSide::Mid,
        }
    }
}

#[derive(Debug, Args)]
struct DissectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directional-change threshold as a fraction (0.0025 = 0.25%).
    #[arg(long)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "fractional")]
    convention: Convention,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawArg {
    DcCount,
    Overshoot,
    Tail,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TailArg {
    Hill,
    Ccdf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    law: LawArg,
    /// Log-spaced threshold grid `min:max:count`.
    #[arg(long, default_value = "0.0005:0.05:12")]
    grid: String,
    /// Minimum directional changes for a grid point to enter the fit.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    min_count: usize,
    #[arg(long, value_enum, default_value = "fractional")]
    convention: Convention,
    /// Lower cutoff for `--law tail`.
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long, value_enum, default_value = "hill")]
    method: TailArg,
    /// JSON output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the fitted samples as `x,y` CSV.
    #[arg(long)]
    samples_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Gbm,
    Arw,
    Sawtooth,
    Pareto,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of points (or samples for pareto).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    start: f64,
    /// Per-step volatility (gbm).
    #[arg(long, default_value_t = 1e-4)]
    sigma: f64,
    /// Per-step drift (gbm).
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Absolute step size (arw).
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Fractional swing (sawtooth).
    #[arg(long, default_value_t = 0.01)]
    amplitude: f64,
    /// Density exponent (pareto).
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    x_min: f64,
    /// Epoch milliseconds of the first point.
    #[arg(long, default_value_t = 0)]
    start_time: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Contrarian,
    TrendFollowing,
}

#[derive(Debug, Args)]
struct AgentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "fractional")]
    convention: Convention,
    #[arg(long, value_enum, default_value = "contrarian")]
    policy: PolicyArg,
    #[arg(long, default_value_t = 1.0)]
    unit: f64,
    #[arg(long, default_value_t = 3.0)]
    max_gearing: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Gaps longer than this many milliseconds are counted.
    #[arg(long, default_value_t = 3_600_000)]
    gap_threshold_ms: i64,
}

/// Where results go.
struct Sink<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => self.stdout.write_all(bytes)?,
        }
        Ok(())
    }
}

enum Failure {
    Usage(Error),
    Data(Error),
}

macro_rules! data_failure {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Data(e.into())
            }
        }
    )*};
}

data_failure!(Error, std::io::Error, csv::Error, serde_json::Error);

trait UsageContext<T> {
    fn usage(self) -> std::result::Result<T, Failure>;
}

impl<T> UsageContext<T> for Result<T> {
    fn usage(self) -> std::result::Result<T, Failure> {
        self.map_err(Failure::Usage)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut sink = Sink { stdout, stderr };
    let result = match cli.command {
        Command::Dissect(a) => cmd_dissect(a, &mut sink),
        Command::Coastline(a) => cmd_coastline(a, &mut sink),
        Command::Fit(a) => cmd_fit(a, &mut sink),
        Command::Generate(a) => cmd_generate(a, &mut sink),
        Command::AgentSim(a) => cmd_agent(a, &mut sink),
        Command::Stats(a) => cmd_stats(a, &mut sink),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(sink.stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(sink.stderr, "error: {e}");
            if e.is_insufficient() {
                EXIT_INSUFFICIENT
            } else {
                EXIT_DATA
            }
        }
    }
}

fn read_ticks(input: &InputArgs, format: TickFormat) -> Result<Vec<Tick>> {
    ingest::parse_ticks(TickSource::open(&input.input, format)?)
}

fn read_series(input: &InputArgs, format: TickFormat) -> Result<Vec<PricePoint>> {
    Ok(ingest::price_series(&read_ticks(input, format)?, input.side()))
}

fn output_format(explicit: Option<Format>, out: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") | Some("ndjson") => Format::Jsonl,
        _ => Format::Csv,
    })
}

/// Renders events as CSV or JSON lines with the columns
/// `intrinsic_index,kind,mode,time,price,tick_index`.
pub fn render_events(events: &[Event], jsonl: bool) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if jsonl {
        for e in events {
            serde_json::to_writer(&mut buf, e)?;
            buf.push(b'\n');
        }
    } else {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["intrinsic_index", "kind", "mode", "time", "price", "tick_index"])?;
        for e in events {
            w.write_record([
                e.intrinsic_index.to_string(),
                e.kind.as_str().to_string(),
                e.mode.as_str().to_string(),
                e.time.to_string(),
                e.price.to_string(),
                e.tick_index.to_string(),
            ])?;
        }
        w.flush()?;
        drop(w);
    }
    Ok(buf)
}

fn cmd_dissect(a: DissectArgs, sink: &mut Sink) -> CmdResult {
    let config = DissectionConfig::new(a.threshold, a.convention.into()).usage()?;
    let format = a.input.format().usage()?;
    let series = read_series(&a.input, format)?;
    let d = dissect(&series, config)?;
    let jsonl = output_format(a.format, a.out.as_deref()) == Format::Jsonl;
    sink.emit(a.out.as_deref(), &render_events(&d.events, jsonl)?)?;
    let _ = writeln!(
        sink.stderr,
        "{} events ({} directional changes) from {} points",
        d.events.len(),
        d.dc_count(),
        series.len()
    );
    Ok(())
}

fn cmd_coastline(a: DissectArgs, sink: &mut Sink) -> CmdResult {
    let config = DissectionConfig::new(a.threshold, a.convention.into()).usage()?;
    let format = a.input.format().usage()?;
    let series = read_series(&a.input, format)?;
    let c = coastline(&dissect(&series, config)?);
    let bytes = if output_format(a.format, a.out.as_deref()) == Format::Jsonl {
        let mut buf = Vec::new();
        for p in &c.points {
            serde_json::to_writer(&mut buf, p)?;
            buf.push(b'\n');
        }
        buf
    } else {
        let mut buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["intrinsic_index", "price"])?;
        for p in &c.points {
            w.write_record([p.intrinsic_index.to_string(), p.price.to_string()])?;
        }
        w.flush().map_err(Error::from)?;
        drop(w);
        buf
    };
    sink.emit(a.out.as_deref(), &bytes)?;
    let _ = writeln!(sink.stderr, "total_length={}", c.total_length);
    Ok(())
}

#[derive(Serialize)]
struct TailReport {
    law: &'static str,
    method: &'static str,
    x_min: f64,
    alpha: f64,
    stderr: f64,
    n_tail: usize,
}

fn cmd_fit(a: FitArgs, sink: &mut Sink) -> CmdResult {
    if a.law == LawArg::Tail {
        let x_min = a
            .x_min
            .ok_or_else(|| Error::param("x-min", "required for --law tail"))
            .usage()?;
        if x_min.is_nan() || x_min <= 0.0 {
            return Err(Failure::Usage(Error::param("x-min", "must be positive")));
        }
        let values = ingest::parse_values(std::io::BufReader::new(std::fs::File::open(&a.input.input)?))?;
        let method = match a.method {
            TailArg::Hill => TailMethod::Hill,
            TailArg::Ccdf => TailMethod::CcdfRegression,
        };
        let est = tail_exponent(&values, x_min, method)?;
        let report = TailReport {
            law: "tail",
            method: match method {
                TailMethod::Hill => "hill",
                TailMethod::CcdfRegression => "ccdf",
            },
            x_min,
            alpha: est.alpha,
            stderr: est.stderr,
            n_tail: est.n_tail,
        };
        let mut bytes = serde_json::to_vec_pretty(&report)?;
        bytes.push(b'\n');
        sink.emit(a.out.as_deref(), &bytes)?;
        return Ok(());
    }

    let grid: ThresholdGrid = a.grid.parse().usage()?;
    if a.min_count == 0 {
        return Err(Failure::Usage(Error::param("min-count", "must be positive")));
    }
    let format = a.input.format().usage()?;
    let opts = LawOptions {
        convention: a.convention.into(),
        min_count: a.min_count,
    };
    let series = read_series(&a.input, format)?;
    let fit = match a.law {
        LawArg::DcCount => dc_count_law(&series, &grid, &opts)?,
        LawArg::Overshoot => overshoot_law(&series, &grid, &opts)?,
        LawArg::Tail => unreachable!(),
    };
    let mut json = serde_json::to_vec_pretty(&fit)?;
    json.push(b'\n');
    let samples_csv = match &a.samples_csv {
        Some(_) => {
            let mut buf = Vec::new();
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["x", "y"])?;
            for s in &fit.samples {
                w.write_record([s.x.to_string(), s.y.to_string()])?;
            }
            w.flush().map_err(Error::from)?;
            drop(w);
            Some(buf)
        }
        None => None,
    };
    sink.emit(a.out.as_deref(), &json)?;
    if let (Some(path), Some(bytes)) = (&a.samples_csv, samples_csv) {
        std::fs::write(path, bytes).map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs, sink: &mut Sink) -> CmdResult {
    let process = match a.kind {
        Kind::Gbm => Process::GeometricBrownianMotion {
            start: a.start,
            mu: a.mu,
            sigma: a.sigma,
        },
        Kind::Arw => Process::ArithmeticRandomWalk {
            start: a.start,
            step: a.step,
        },
        Kind::Sawtooth => Process::Sawtooth {
            start: a.start,
            amplitude: a.amplitude,
        },
        Kind::Pareto => Process::Pareto {
            alpha: a.alpha,
            x_min: a.x_min,
        },
    };
    let spec = GeneratorSpec {
        process,
        n: a.n,
        seed: a.seed,
        start_time: a.start_time,
    };
    spec.validate().usage()?;
    let mut buf = Vec::new();
    if a.kind == Kind::Pareto {
        ingest::write_values(&mut buf, &generate_pareto(&spec)?)?;
    } else {
        ingest::write_prices(&mut buf, &generate_series(&spec)?)?;
    }
    sink.emit(a.out.as_deref(), &buf)?;
    Ok(())
}

fn cmd_agent(a: AgentArgs, sink: &mut Sink) -> CmdResult {
    let config = DissectionConfig::new(a.threshold, a.convention.into()).usage()?;
    let policy = match a.policy {
        PolicyArg::Contrarian => Policy::Contrarian,
        PolicyArg::TrendFollowing => Policy::TrendFollowing,
    };
    let rules = AgentRules::new(a.unit, a.max_gearing, policy).usage()?;
    let format = a.input.format().usage()?;
    let series = read_series(&a.input, format)?;
    let t = run_strategy(&series, config, &rules)?;
    let mut buf = Vec::new();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(["intrinsic_index", "gearing", "entry_price", "unrealized", "realized"])?;
    for r in &t.records {
        w.write_record([
            r.intrinsic_index.to_string(),
            r.gearing.to_string(),
            r.entry_price.to_string(),
            r.unrealized.to_string(),
            r.realized.to_string(),
        ])?;
    }
    w.flush().map_err(Error::from)?;
    drop(w);
    sink.emit(a.out.as_deref(), &buf)?;
    let _ = writeln!(
        sink.stderr,
        "realized={} unrealized={} total={}",
        t.realized(),
        t.unrealized(),
        t.total_pnl()
    );
    Ok(())
}

/// Summary printed by `stats`.
#[derive(Debug, Serialize, PartialEq)]
pub struct TickStats {
    pub ticks: usize,
    pub first_time: Option<i64>,
    pub last_time: Option<i64>,
    pub span_ms: i64,
    pub max_gap_ms: i64,
    pub median_gap_ms: Option<i64>,
    pub gap_threshold_ms: i64,
    pub gaps_over_threshold: usize,
    pub mean_relative_spread: Option<f64>,
    pub max_relative_spread: Option<f64>,
}

pub fn tick_stats(ticks: &[Tick], gap_threshold_ms: i64) -> TickStats {
    let mut gaps: Vec<i64> = ticks.windows(2).map(|w| w[1].time - w[0].time).collect();
    gaps.sort_unstable();
    let spreads = ticks.iter().map(Tick::relative_spread);
    TickStats {
        ticks: ticks.len(),
        first_time: ticks.first().map(|t| t.time),
        last_time: ticks.last().map(|t| t.time),
        span_ms: match (ticks.first(), ticks.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0,
        },
        max_gap_ms: gaps.last().copied().unwrap_or(0),
        median_gap_ms: (!gaps.is_empty()).then(|| gaps[gaps.len() / 2]),
        gap_threshold_ms,
        gaps_over_threshold: gaps.iter().filter(|&&g| g > gap_threshold_ms).count(),
        mean_relative_spread: (!ticks.is_empty()).then(|| spreads.clone().sum::<f64>() / ticks.len() as f64),
        max_relative_spread: spreads.reduce(f64::max),
    }
}

fn cmd_stats(a: StatsArgs, sink: &mut Sink) -> CmdResult {
    if a.gap_threshold_ms < 0 {
        return Err(Failure::Usage(Error::param("gap-threshold-ms", "must be non-negative")));
    }
    let format = a.input.format().usage()?;
    let ticks = read_ticks(&a.input, format)?;
    let mut bytes = serde_json::to_vec_pretty(&tick_stats(&ticks, a.gap_threshold_ms))?;
    bytes.push(b'\n');
    sink.emit(None, &bytes)?;
    Ok(())
}
